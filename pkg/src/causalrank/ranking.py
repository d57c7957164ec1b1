"""Source ranking by teleported spectral centrality.

Nodes are ranked by the stationary distribution of a teleported random
walk on the edge-reversed graph (CheiRank).  A node thus scores highly
when it transfers information to nodes that themselves score highly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import NumericalError, ValidationError

DEFAULT_GAMMA = 0.85
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class RankVector:
    """Sum-normalised scores plus convergence diagnostics."""

    scores: np.ndarray
    iterations: int
    residual: float

    @property
    def max_normalized(self) -> np.ndarray:
        """Scores rescaled so the top node is 1."""
        return self.scores / self.scores.max()

    def ranks(self) -> np.ndarray:
        """1-based rank per node (1 = most influential); ties share the order of appearance."""
        order = np.argsort(-self.scores, kind="stable")
        out = np.empty(len(order), dtype=int)
        out[order] = np.arange(1, len(order) + 1)
        return out


def _check_square(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError(f"weight matrix must be square, got shape {W.shape}")
    if np.any(W < 0):
        raise ValidationError("weight matrix has negative entries")
    if not np.all(np.isfinite(W)):
        raise ValidationError("weight matrix has non-finite entries")
    return W


def row_normalize(W) -> np.ndarray:
    """Transition matrix: each non-zero row divided by its sum, zero rows kept at 0."""
    W = _check_square(W)
    sums = W.sum(axis=1)
    P = np.zeros_like(W)
    nz = sums != 0
    P[nz] = W[nz] / sums[nz, None]
    return P


def google_matrix(P, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """``gamma * P + (1 - gamma) / N`` elementwise."""
    if not 0 < gamma < 1:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    return gamma * P + (1.0 - gamma) / n


def iteration_bound(gamma: float, tol: float, margin: int = 10) -> int:
    """Geometric convergence bound ``ceil(log(tol) / log(gamma)) + margin``."""
    return math.ceil(math.log(tol) / math.log(gamma)) + margin


def rank_sources(W, gamma: float = DEFAULT_GAMMA, tol: float = 1e-10, max_iter: int = 1000) -> RankVector:
    """Rank nodes of the weighted digraph ``W`` (``W[i, j]``: transfer i -> j) as sources.

    Power iteration on the teleported chain built from ``W.T``, starting
    uniform and renormalised to sum 1 every step, until the L1 change drops
    below ``tol``.
    """
    W = _check_square(W)
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    n = W.shape[0]
    if n == 0:
        raise ValidationError("empty graph")
    P = row_normalize(W.T)
    if n <= DENSE_LIMIT:
        G = google_matrix(P, gamma)
        step = lambda v: v @ G  # noqa: E731
    else:
        Ps = sparse.csr_matrix(P).T.tocsr()
        step = lambda v: gamma * (Ps @ v) + (1.0 - gamma) / n * v.sum()  # noqa: E731
    pi = np.full(n, 1.0 / n)
    residual = math.inf
    for it in range(1, max_iter + 1):
        nxt = step(pi)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).sum())
        pi = nxt
        if residual < tol:
            return RankVector(pi, it, residual)
    raise NumericalError(f"power iteration did not converge in {max_iter} steps (residual {residual:.3e})")

