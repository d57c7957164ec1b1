"""Delay-resolved transfer entropy estimators.

Two estimators share one embedding convention.  For source ``x``, target
``y``, embedding dimensions ``k`` (source) and ``l`` (target) and delay
``tau``, the transition tuple at time ``t`` is::

    (y[t],  y[t-1], ..., y[t-l],  x[t-tau], ..., x[t-tau-k+1])

for every ``t`` from ``max(l, tau + k - 1)`` to ``M - 1``.

``te_binned`` is the plug-in estimator on equiprobable bins.
``te_ksg`` is the Kraskov (algorithm 1) conditional mutual information
estimator ``I(y_t ; x_past | y_past)`` with max-norm neighbour searches.
Both return bits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numba
import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .errors import ValidationError

log = logging.getLogger(__name__)

ESTIMATORS = ("binned", "ksg")
DEFAULT_KNN = 4
JITTER = 1e-8
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class EmbeddingConfig:
    """Number of past source (``k``) and target (``l``) samples."""

    k: int = 1
    l: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or int(self.l) != self.l or self.k < 1 or self.l < 1:
            raise ValidationError(f"embedding dimensions must be integers >= 1, got k={self.k}, l={self.l}")


@dataclass(frozen=True)
class DelayGrid:
    """Explicit, sorted list of candidate delays in samples."""

    delays: tuple[int, ...]

    def __post_init__(self):
        d = tuple(int(v) for v in self.delays)
        if not d:
            raise ValidationError("delay grid is empty")
        if any(v != w for v, w in zip(d, self.delays)):
            raise ValidationError(f"delays must be integers: {self.delays}")
        if any(v < 0 for v in d):
            raise ValidationError(f"delays must be >= 0: {d}")
        if list(d) != sorted(set(d)):
            raise ValidationError(f"delays must be sorted and distinct: {d}")
        object.__setattr__(self, "delays", d)

    @classmethod
    def coarse(cls, max_delay: int, step: int) -> "DelayGrid":
        """``{1, step, 2*step, ..., max_delay}``."""
        return cls(tuple(sorted({1, *range(step, max_delay + 1, step)})))

    @classmethod
    def parse(cls, text: str) -> "DelayGrid":
        """Parse ``"1,2,5"`` or a range ``"1:600:25"`` (start:stop:step, stop inclusive)."""
        text = text.strip()
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            vals = set(range(start, stop + 1, step))
            return cls(tuple(sorted(vals)))
        try:
            return cls(tuple(sorted({int(p) for p in text.split(",") if p.strip()})))
        except ValueError:
            raise ValidationError(f"cannot parse delay grid {text!r}") from None

    def without_zero(self) -> "DelayGrid | None":
        """The grid admissible for self-loops, or None when nothing remains."""
        d = tuple(v for v in self.delays if v >= 1)
        return DelayGrid(d) if d else None

    def __iter__(self):
        return iter(self.delays)

    def __len__(self):
        return len(self.delays)


@dataclass(frozen=True)
class TeEstimate:
    value: float
    delay: int
    estimator: str


def embed(x, y, emb: EmbeddingConfig, tau: int):
    """Build aligned (target, target past, source past) arrays.

    Returns arrays of shapes ``(n,)``, ``(n, l)`` and ``(n, k)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"source and target must be 1-D of equal length, got {x.shape} and {y.shape}")
    if int(tau) != tau or tau < 0:
        raise ValidationError(f"delay must be a non-negative integer, got {tau}")
    tau = int(tau)
    m = len(y)
    t0 = max(emb.l, tau + emb.k - 1)
    n = m - t0
    if n < 1:
        raise ValidationError(f"no valid transition tuples: M={m}, tau={tau}, k={emb.k}, l={emb.l}")
    t = np.arange(t0, m)
    future = y[t]
    target_past = np.stack([y[t - i] for i in range(1, emb.l + 1)], axis=1)
    source_past = np.stack([x[t - tau - i] for i in range(emb.k)], axis=1)
    return future, target_past, source_past


def discretize(x, bins: int) -> np.ndarray:
    """Map samples to equiprobable bin labels ``0..bins-1``.

    Series with at most ``bins`` distinct values are labelled by value.
    Otherwise the inner quantile edges split the samples; labels are then
    compacted so ties at an edge never produce empty bins.
    """
    x = np.asarray(x, dtype=float)
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    uniq, inv = np.unique(x, return_inverse=True)
    if len(uniq) <= bins:
        return inv.astype(np.int64)
    edges = np.quantile(x, np.arange(1, bins) / bins)
    raw = np.searchsorted(edges, x, side="right")
    return np.unique(raw, return_inverse=True)[1].astype(np.int64)


def default_bins(x) -> int:
    """2 bins for {0,1}-valued series, 6 otherwise."""
    x = np.asarray(x)
    return 2 if np.all((x == 0) | (x == 1)) else 6


def _radix(labels: np.ndarray, base: int) -> tuple[np.ndarray, int]:
    """Mixed-radix code of each row of a label matrix, and the code range."""
    size = base ** labels.shape[1]
    if size > 1 << 24:
        codes = np.unique(labels, axis=0, return_inverse=True)[1].reshape(-1)
        return codes.astype(np.int64), int(codes.max()) + 1
    weights = base ** np.arange(labels.shape[1], dtype=np.int64)
    return labels @ weights, size


def _plugin_te(a: np.ndarray, b: np.ndarray, c: np.ndarray, na: int, nb: int, nc: int) -> float:
    """Plug-in ``I(a ; c | b)`` in bits from integer codes with ranges ``na, nb, nc``."""
    n = len(a)
    if na * nb * nc > 1 << 26:
        # sparse fallback: compact the joint codes first
        _, abc = np.unique(np.column_stack([a, b, c]), axis=0, return_inverse=True)
        abc = abc.reshape(-1)
        _, ab = np.unique(np.column_stack([a, b]), axis=0, return_inverse=True)
        _, bc = np.unique(np.column_stack([b, c]), axis=0, return_inverse=True)
        ab, bc = ab.reshape(-1), bc.reshape(-1)
        _, first = np.unique(abc, return_index=True)
        n_abc = np.bincount(abc)
        ratio = n_abc * np.bincount(b)[b[first]] / (np.bincount(bc)[bc[first]] * np.bincount(ab)[ab[first]])
        return max(float(np.sum(n_abc / n * np.log2(ratio))), 0.0)
    ab = a * nb + b
    bc = b * nc + c
    n_abc = np.bincount(ab * nc + c, minlength=na * nb * nc)
    n_ab = np.bincount(ab, minlength=na * nb)
    n_bc = np.bincount(bc, minlength=nb * nc)
    n_b = np.bincount(b, minlength=nb)
    cell = np.flatnonzero(n_abc)
    cnt = n_abc[cell]
    cc = cell % nc
    cab = cell // nc
    cb = cab % nb
    ratio = cnt * n_b[cb] / (n_ab[cab] * n_bc[cb * nc + cc])
    return max(float(np.sum(cnt / n * np.log2(ratio))), 0.0)


def te_binned(x, y, emb: EmbeddingConfig = EmbeddingConfig(), tau: int = 1, bins: int | None = None) -> float:
    """Plug-in transfer entropy ``x -> y`` in bits on equiprobable bins.

    Parameters
    ----------
    x, y : array_like
        Source and target series of equal length.
    emb : EmbeddingConfig
        Source/target embedding dimensions.
    tau : int
        Source delay in samples.
    bins : int, optional
        Bins per series; defaults to 2 for binary data and 6 otherwise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if bins is None:
        bins = max(default_bins(x), default_bins(y))
    embed(x, y, emb, tau)
    if np.all(x == x[0]) or np.all(y == y[0]):
        log.warning("constant series in te_binned; returning 0")
        return 0.0
    lx, ly = discretize(x, bins), discretize(y, bins)
    base = int(max(lx.max(), ly.max())) + 1
    fut, tpast, spast = embed(lx, ly, emb, tau)
    b, nb = _radix(tpast.astype(np.int64), base)
    c, nc = _radix(spast.astype(np.int64), base)
    return _plugin_te(fut.astype(np.int64), b, c, base, nb, nc)


def _zscore(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    if not sd > 0:
        raise ValidationError("zero-variance input to KSG estimator")
    return (x - x.mean()) / sd


@numba.njit(cache=True)
def _sweep_count(srt, radii):
    # srt: points sorted by column 0; radii in the same order
    n, dim = srt.shape
    lead = srt[:, 0].copy()
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        r = radii[i]
        lo = np.searchsorted(lead, lead[i] - r, side="left")
        hi = np.searchsorted(lead, lead[i] + r, side="right")
        # the shifted bounds may round outward; trim with the exact test
        while lo < hi and lead[i] - lead[lo] > r:
            lo += 1
        while hi > lo and lead[hi - 1] - lead[i] > r:
            hi -= 1
        if dim == 1:
            out[i] = hi - lo
            continue
        c = 0
        for j in range(lo, hi):
            ok = True
            for d in range(1, dim):
                if abs(srt[j, d] - srt[i, d]) > r:
                    ok = False
                    break
            if ok:
                c += 1
        out[i] = c
    return out


def _kth_distance(points: np.ndarray, k: int) -> np.ndarray:
    """Max-norm distance from each point to its ``k``-th nearest other point."""
    dist, _ = cKDTree(points).query(points, k=k + 1, p=np.inf)
    return dist[:, k]


def _count_within(points: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Number of points (self included) within max-norm distance ``<= radii``.

    Sweep over the points sorted by their first coordinate; cheap because
    KSG radii are small compared with the data spread.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    order = np.argsort(points[:, 0], kind="stable")
    counts = np.empty(len(order), dtype=np.int64)
    counts[order] = _sweep_count(points[order], np.asarray(radii, dtype=np.float64)[order])
    return counts


def ksg_cmi(a: np.ndarray, c: np.ndarray, b: np.ndarray, knn: int = DEFAULT_KNN) -> float:
    """KSG estimate of ``I(a ; c | b)`` in nats (algorithm 1, max-norm).

    All inputs are 2-D ``(n, dim)`` arrays, assumed tie-free.
    """
    n = a.shape[0]
    if knn < 1 or knn >= n:
        raise ValidationError(f"neighbour count K={knn} must satisfy 1 <= K < {n} tuples")
    joint = np.hstack([a, b, c])
    # strict inequality: points at exactly the K-th distance are excluded
    r = np.nextafter(_kth_distance(joint, knn), 0)
    n_b = _count_within(b, r)
    n_ab = _count_within(np.hstack([a, b]), r)
    n_bc = _count_within(np.hstack([b, c]), r)
    return float(digamma(knn) + np.mean(digamma(n_b) - digamma(n_ab) - digamma(n_bc)))


def te_ksg(x, y, emb: EmbeddingConfig = EmbeddingConfig(), tau: int = 1, knn: int = DEFAULT_KNN,
           seed: int = 0) -> float:
    """KSG transfer entropy ``x -> y`` in bits.

    Both series are z-scored and receive a seeded jitter of amplitude
    ``1e-8`` (in standard deviations) so that neighbour distances are
    tie-free.  The result is not clamped and may be slightly negative.
    """
    x = _zscore(np.asarray(x, dtype=float))
    y = _zscore(np.asarray(y, dtype=float))
    rng = np.random.default_rng(seed)
    x = x + JITTER * rng.standard_normal(x.shape)
    y = y + JITTER * rng.standard_normal(y.shape)
    fut, tpast, spast = embed(x, y, emb, tau)
    return ksg_cmi(fut[:, None], spast, tpast, knn) / _LN2


def transfer_entropy(x, y, tau: int = 1, estimator: str = "binned", emb: EmbeddingConfig = EmbeddingConfig(),
                     bins: int | None = None, knn: int = DEFAULT_KNN, seed: int = 0) -> float:
    """Dispatch to :func:`te_binned` or :func:`te_ksg`."""
    if estimator == "binned":
        return te_binned(x, y, emb, tau, bins)
    if estimator == "ksg":
        return te_ksg(x, y, emb, tau, knn, seed)
    raise ValidationError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")


def _refined(grid: DelayGrid, best: int, step: int) -> list[int]:
    """Delays around ``best`` at resolution ``step``, bounded by the neighbouring grid points."""
    d = grid.delays
    i = d.index(best)
    lo = d[i - 1] if i > 0 else best
    hi = d[i + 1] if i + 1 < len(d) else best
    return [v for v in range(lo + 1, hi, step) if v not in d and v >= d[0]]


def scan_delays(x, y, emb: EmbeddingConfig = EmbeddingConfig(), grid: DelayGrid | Iterable[int] = (1,),
                estimator: str = "binned", *, bins: int | None = None, knn: int = DEFAULT_KNN, seed: int = 0,
                refine: int | None = None, self_loop: bool = False) -> TeEstimate:
    """Maximise transfer entropy ``x -> y`` over a delay grid.

    Ties go to the smallest delay.  With ``refine`` set, delays between the
    coarse maximiser's neighbours are also scanned at that resolution.
    """
    if not isinstance(grid, DelayGrid):
        grid = DelayGrid(tuple(grid))
    if self_loop and grid.delays[0] < 1:
        raise ValidationError("self-loop delay grids must start at >= 1")
    values = {}
    for tau in grid:
        values[tau] = transfer_entropy(x, y, tau, estimator, emb, bins, knn, seed)
    best = _argmax(values)
    if refine:
        for tau in _refined(grid, best, int(refine)):
            values[tau] = transfer_entropy(x, y, tau, estimator, emb, bins, knn, seed)
        best = _argmax(values)
    return TeEstimate(values[best], best, estimator)


def _argmax(values: dict[int, float]) -> int:
    best = None
    for tau in sorted(values):
        if best is None or values[tau] > values[best]:
            best = tau
    return best


def net_te(x, y, tau: int = 1, estimator: str = "binned", emb: EmbeddingConfig = EmbeddingConfig(),
           bins: int | None = None, knn: int = DEFAULT_KNN, seed: int = 0) -> float:
    """Signed net transfer ``TE(x -> y) - TE(y -> x)`` at a common delay."""
    fwd = transfer_entropy(x, y, tau, estimator, emb, bins, knn, seed)
    back = transfer_entropy(y, x, tau, estimator, emb, bins, knn, seed)
    return fwd - back


def validate_estimator(name: str) -> str:
    if name not in ESTIMATORS:
        raise ValidationError(f"unknown estimator {name!r}; choose from {ESTIMATORS}")
    return name

