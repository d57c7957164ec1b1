"""Synthetic ground-truth systems.

* a pair of Lorenz systems coupled through delayed quadratic terms,
* linear VAR processes with Gaussian innovations,
* binary fault cascades on a directed acyclic graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .timeseries import TimeSeriesSet

LORENZ_NAMES = ("X1", "Y1", "Z1", "X2", "Y2", "Z2")
BLOWUP = 1e6


@dataclass(frozen=True)
class LorenzPairConfig:
    """Two Lorenz systems; system 1 is driven by ``Y2(t - delay_21)**2``, system 2 by ``Y1(t - delay_12)**2``."""

    dt: float = 0.01
    n_samples: int = 150_000
    coupling_12: float = 0.05
    coupling_21: float = 0.1
    delay_12: float = 5.0
    delay_21: float = 3.0
    rayleigh_1: float = 25.0
    rayleigh_2: float = 28.0
    sigma: float = 10.0
    beta: float = 2.67
    initial: tuple[float, ...] = (1.0, 0.97, 0.99, 1.0, 0.97, 0.99)
    discard: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if self.n_samples < 2:
            raise ValidationError("n_samples must be >= 2")
        if len(self.initial) != 6:
            raise ValidationError("initial state needs 6 values (X1, Y1, Z1, X2, Y2, Z2)")
        for name in ("delay_12", "delay_21"):
            d = getattr(self, name)
            if d < 0:
                raise ValidationError(f"{name} must be >= 0")
            if abs(d / self.dt - round(d / self.dt)) > 1e-9:
                raise ValidationError(f"{name}={d} is not a multiple of dt={self.dt}")
        if self.discard < 0:
            raise ValidationError("discard must be >= 0")

    def delay_steps(self) -> tuple[int, int]:
        """(steps for Y2 -> Y1, steps for Y1 -> Y2)."""
        return round(self.delay_21 / self.dt), round(self.delay_12 / self.dt)


def lorenz_pair_rhs(s, y2_lag: float, y1_lag: float, cfg: LorenzPairConfig):
    x1, y1, z1, x2, y2, z2 = s
    return (
        cfg.sigma * (y1 - x1),
        x1 * (cfg.rayleigh_1 - z1) - y1 + cfg.coupling_21 * y2_lag * y2_lag,
        x1 * y1 - cfg.beta * z1,
        cfg.sigma * (y2 - x2),
        x2 * (cfg.rayleigh_2 - z2) - y2 + cfg.coupling_12 * y1_lag * y1_lag,
        x2 * y2 - cfg.beta * z2,
    )


def gen_lorenz_pair(cfg: LorenzPairConfig = LorenzPairConfig()) -> TimeSeriesSet:
    """Integrate the delay-coupled Lorenz pair with fixed-step RK4.

    Delayed states are read from the stored trajectory; the half-step RK
    stages use the mean of the two bracketing samples.  Before ``t = 0`` the
    history equals the initial state.  A zero delay couples to the current
    stage value.  The first ``cfg.discard`` samples are dropped after
    integration.
    """
    h = cfg.dt
    d21, d12 = cfg.delay_steps()
    total = cfg.n_samples + cfg.discard
    out = np.empty((total, 6))
    y1h = [0.0] * total
    y2h = [0.0] * total
    s = tuple(float(v) for v in cfg.initial)
    y1_0, y2_0 = s[1], s[4]
    out[0] = s
    y1h[0], y2h[0] = y1_0, y2_0

    def lag(hist, first, n, d):
        # history sample n - d, constant before t = 0
        k = n - d
        return hist[k] if k >= 0 else first

    for n in range(total - 1):
        if d21:
            a21 = lag(y2h, y2_0, n, d21)
            c21 = lag(y2h, y2_0, n + 1, d21)
            b21 = 0.5 * (a21 + c21)
        if d12:
            a12 = lag(y1h, y1_0, n, d12)
            c12 = lag(y1h, y1_0, n + 1, d12)
            b12 = 0.5 * (a12 + c12)

        k1 = lorenz_pair_rhs(s, a21 if d21 else s[4], a12 if d12 else s[1], cfg)
        s2 = tuple(v + 0.5 * h * k for v, k in zip(s, k1))
        k2 = lorenz_pair_rhs(s2, b21 if d21 else s2[4], b12 if d12 else s2[1], cfg)
        s3 = tuple(v + 0.5 * h * k for v, k in zip(s, k2))
        k3 = lorenz_pair_rhs(s3, b21 if d21 else s3[4], b12 if d12 else s3[1], cfg)
        s4 = tuple(v + h * k for v, k in zip(s, k3))
        k4 = lorenz_pair_rhs(s4, c21 if d21 else s4[4], c12 if d12 else s4[1], cfg)
        s = tuple(v + h / 6.0 * (p + 2.0 * q + 2.0 * r + w) for v, p, q, r, w in zip(s, k1, k2, k3, k4))

        if not all(math.isfinite(v) and abs(v) <= BLOWUP for v in s):
            raise NumericalError(f"Lorenz integration blew up at step {n + 1}")
        out[n + 1] = s
        y1h[n + 1], y2h[n + 1] = s[1], s[4]

    return TimeSeriesSet(LORENZ_NAMES, out[cfg.discard:].T, cfg.dt)


def companion_radius(coefficients) -> float:
    """Spectral radius of the VAR companion matrix."""
    A = [np.asarray(a, dtype=float) for a in coefficients]
    n = A[0].shape[0]
    p = len(A)
    C = np.zeros((n * p, n * p))
    C[:n, :] = np.hstack(A)
    if p > 1:
        C[n:, :-n] = np.eye(n * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(C))))


def gen_var(coefficients, noise_sd=1.0, n_samples: int = 10_000, seed=0, names=None,
            burn_in: int = 1000) -> TimeSeriesSet:
    """Simulate ``x_t = sum_k A_k x_{t-k} + e_t`` with Gaussian innovations.

    Parameters
    ----------
    coefficients : sequence of (N, N) arrays
        Lag matrices ``A_1..A_p``; ``A_k[i, j]`` is the effect of ``x_j`` at
        lag ``k`` on ``x_i``.
    noise_sd : float or sequence of float
        Innovation standard deviation, shared or per variable.
    """
    A = [np.asarray(a, dtype=float) for a in coefficients]
    if not A:
        raise ValidationError("need at least one lag matrix")
    n = A[0].shape[0]
    if any(a.shape != (n, n) for a in A):
        raise ValidationError("lag matrices must all be square and equally sized")
    if companion_radius(A) >= 1:
        raise ValidationError(f"VAR coefficients are unstable (companion spectral radius {companion_radius(A):.4f})")
    sd = np.broadcast_to(np.asarray(noise_sd, dtype=float), (n,))
    if np.any(sd < 0):
        raise ValidationError("noise_sd must be >= 0")
    p = len(A)
    total = n_samples + burn_in
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((total, n)) * sd
    x = np.zeros((total + p, n))
    for t in range(total):
        acc = eps[t].copy()
        for k, a in enumerate(A, start=1):
            acc += a @ x[t + p - k]
        x[t + p] = acc
    names = tuple(names) if names is not None else tuple(f"V{i}" for i in range(n))
    return TimeSeriesSet(names, x[p + burn_in:].T)


@dataclass(frozen=True)
class CascadeEdge:
    parent: str
    child: str
    delay: int = 1
    noise: float = 0.05


@dataclass(frozen=True)
class CascadeConfig:
    """Binary fault cascade on a DAG; nodes without parents fire iid Bernoulli(``root_rate``)."""

    nodes: tuple[str, ...]
    edges: tuple[CascadeEdge, ...]
    n_samples: int = 400
    root_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(set(self.nodes)) != len(self.nodes):
            raise ValidationError("duplicate cascade node names")
        for e in self.edges:
            if e.parent not in self.nodes or e.child not in self.nodes:
                raise ValidationError(f"edge {e} references an unknown node")
            if int(e.delay) != e.delay or e.delay < 1:
                raise ValidationError(f"edge delay must be an integer >= 1: {e}")
            if not 0 <= e.noise <= 0.5:
                raise ValidationError(f"flip noise must lie in [0, 0.5]: {e}")
        if not 0 < self.root_rate < 1:
            raise ValidationError("root_rate must lie in (0, 1)")
        self.topological_order()

    def parents(self, node: str) -> list[CascadeEdge]:
        return [e for e in self.edges if e.child == node]

    def topological_order(self) -> list[str]:
        indeg = {n: 0 for n in self.nodes}
        for e in self.edges:
            indeg[e.child] += 1
        ready = [n for n in self.nodes if indeg[n] == 0]
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for e in self.edges:
                if e.parent == n:
                    indeg[e.child] -= 1
                    if indeg[e.child] == 0:
                        ready.append(e.child)
        if len(order) != len(self.nodes):
            raise ValidationError("cascade topology contains a cycle")
        return order

    def max_path_delay(self) -> int:
        depth = {}
        for n in self.topological_order():
            depth[n] = max((depth[e.parent] + e.delay for e in self.parents(n)), default=0)
        return max(depth.values(), default=0)


def random_tree(n_nodes: int, noise: float = 0.05, delay: int = 1, seed=0, prefix: str = "P",
                n_samples: int = 400, root_rate: float = 0.5) -> CascadeConfig:
    """Random recursive tree rooted at ``{prefix}0``: node k attaches to a uniform earlier node."""
    if n_nodes < 2:
        raise ValidationError("a cascade tree needs at least 2 nodes")
    rng = np.random.default_rng(seed)
    nodes = tuple(f"{prefix}{i}" for i in range(n_nodes))
    edges = tuple(
        CascadeEdge(nodes[int(rng.integers(0, k))], nodes[k], delay, noise) for k in range(1, n_nodes)
    )
    return CascadeConfig(nodes, edges, n_samples, root_rate, int(rng.integers(0, 2**31)))


def gen_cascade(cfg: CascadeConfig) -> TimeSeriesSet:
    """Simulate the cascade.

    A child with one parent is that parent delayed by the edge delay, each
    sample flipped with the edge's noise probability.  With several parents
    the flipped, delayed parent signals are OR-ed.  The simulation runs a
    pre-roll as long as the longest path so every emitted sample has a
    fully propagated history.
    """
    rng = np.random.default_rng(cfg.seed)
    pad = cfg.max_path_delay()
    total = cfg.n_samples + pad
    series: dict[str, np.ndarray] = {}
    for node in cfg.topological_order():
        ins = cfg.parents(node)
        if not ins:
            series[node] = (rng.random(total) < cfg.root_rate).astype(float)
            continue
        acc = np.zeros(total, dtype=bool)
        for e in ins:
            src = series[e.parent].astype(bool)
            shifted = np.empty(total, dtype=bool)
            shifted[e.delay:] = src[:-e.delay]
            shifted[:e.delay] = rng.random(e.delay) < cfg.root_rate
            flips = rng.random(total) < e.noise
            acc |= shifted ^ flips
        series[node] = acc.astype(float)
    data = np.array([series[n][pad:] for n in cfg.nodes])
    return TimeSeriesSet(cfg.nodes, data)
