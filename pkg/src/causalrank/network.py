"""Assemble significant pairwise transfer entropy into a weighted digraph."""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .estimators import (
    DEFAULT_KNN,
    DelayGrid,
    EmbeddingConfig,
    scan_delays,
    transfer_entropy,
    validate_estimator,
)
from .surrogates import iaaft_ensemble, surrogate_te
from .timeseries import TimeSeriesSet

MODES = ("raw_te", "net_te")


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    weight: float
    delay: int


@dataclass(frozen=True)
class PairResult:
    """Outcome of scanning and testing one ordered pair."""

    source: int
    target: int
    te: float
    delay: int
    threshold: float
    significant: bool
    net: float | None = None


@dataclass(frozen=True)
class InfluenceGraph:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    mode: str = "raw_te"
    candidates: tuple[PairResult, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown graph mode {self.mode!r}")
        n = len(self.nodes)
        seen = set()
        for e in self.edges:
            if not (0 <= e.source < n and 0 <= e.target < n):
                raise ValidationError(f"edge {e} references a node outside 0..{n - 1}")
            if (e.source, e.target) in seen:
                raise ValidationError(f"duplicate edge {e.source}->{e.target}")
            if not e.weight > 0:
                raise ValidationError(f"edge weights must be > 0, got {e}")
            if e.source == e.target and e.delay < 1:
                raise ValidationError(f"self-loop needs delay >= 1, got {e}")
            seen.add((e.source, e.target))
        if self.mode == "net_te":
            for s, t in seen:
                if s != t and (t, s) in seen:
                    raise ValidationError(f"net_te graph has a 2-cycle {s}<->{t}")
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: (e.source, e.target))))

    def has_edge(self, source: str, target: str) -> bool:
        s, t = self.nodes.index(source), self.nodes.index(target)
        return any(e.source == s and e.target == t for e in self.edges)

    def edge(self, source: str, target: str) -> Edge | None:
        s, t = self.nodes.index(source), self.nodes.index(target)
        for e in self.edges:
            if e.source == s and e.target == t:
                return e
        return None


@dataclass(frozen=True)
class GraphConfig:
    """Everything :func:`build_graph` needs besides the data and the seed."""

    estimator: str = "binned"
    grid: DelayGrid = DelayGrid((1,))
    emb: EmbeddingConfig = EmbeddingConfig()
    bins: int | None = None
    knn: int = DEFAULT_KNN
    n_surrogates: int = 19
    mode: str = "raw_te"
    refine: int | None = None
    self_loops: bool = True
    iaaft_max_iter: int = 100

    def __post_init__(self):
        validate_estimator(self.estimator)
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_surrogates < 1:
            raise ValidationError("need at least one surrogate")


def derive_seed(seed: int, *labels) -> int:
    """Stable 32-bit seed from a master seed and string/int labels.

    Labels are node names rather than indices so that reordering the input
    variables does not change any pair's random stream.
    """
    words = [int(seed) & 0xFFFFFFFF]
    for lab in labels:
        words.append(zlib.crc32(str(lab).encode("utf-8")))
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def _pair_result(ts: TimeSeriesSet, i: int, j: int, cfg: GraphConfig, seed: int, ensembles: dict) -> PairResult | None:
    names = ts.names
    x, y = ts.data[i], ts.data[j]
    grid = cfg.grid
    if i == j:
        grid = grid.without_zero()
        if grid is None:
            return None
    if names[i] in ts.constant or names[j] in ts.constant:
        return PairResult(i, j, 0.0, grid.delays[0], 0.0, False)
    te_seed = derive_seed(seed, "te", names[i], names[j])
    est = scan_delays(x, y, cfg.emb, grid, cfg.estimator, bins=cfg.bins, knn=cfg.knn, seed=te_seed,
                      refine=cfg.refine, self_loop=(i == j))
    if i not in ensembles:
        ensembles[i] = iaaft_ensemble(x, cfg.n_surrogates, derive_seed(seed, "surrogate", names[i]),
                                      cfg.iaaft_max_iter)
    null = surrogate_te(ensembles[i], y, est.delay, cfg.estimator, cfg.emb, cfg.bins, cfg.knn, te_seed)
    threshold = max(null)
    return PairResult(i, j, est.value, est.delay, threshold, bool(est.value > threshold))


def test_pairs(ts: TimeSeriesSet, cfg: GraphConfig, seed: int = 0) -> list[PairResult]:
    """Scan and surrogate-test every ordered pair (and self pair) of ``ts``."""
    results = []
    ensembles: dict = {}
    for i in range(ts.n_series):
        for j in range(ts.n_series):
            if i == j and not cfg.self_loops:
                continue
            r = _pair_result(ts, i, j, cfg, seed, ensembles)
            if r is not None:
                results.append(r)
        ensembles.pop(i, None)
    return results


test_pairs.__test__ = False


def _with_net(ts: TimeSeriesSet, results: list[PairResult], cfg: GraphConfig, seed: int) -> list[PairResult]:
    """Attach ``TE(i->j) - TE(j->i)`` at each pair's own best delay."""
    out = []
    for r in results:
        if r.source == r.target:
            out.append(replace(r, net=0.0))
            continue
        names = ts.names
        back = transfer_entropy(ts.data[r.target], ts.data[r.source], r.delay, cfg.estimator, cfg.emb, cfg.bins,
                                cfg.knn, derive_seed(seed, "te", names[r.target], names[r.source]))
        out.append(replace(r, net=r.te - back))
    return out


def assemble(nodes: Sequence[str], results: Sequence[PairResult], mode: str = "raw_te") -> InfluenceGraph:
    """Turn tested pairs into a graph under the ``raw_te`` or ``net_te`` convention."""
    results = sorted(results, key=lambda r: (r.source, r.target))
    edges = []
    if mode == "raw_te":
        for r in results:
            if r.significant and r.te > 0:
                edges.append(Edge(r.source, r.target, float(r.te), r.delay))
    elif mode == "net_te":
        keep = {(r.source, r.target): r for r in results
                if r.source != r.target and r.significant and r.net is not None and r.net > 0}
        for (s, t), r in keep.items():
            rival = keep.get((t, s))
            if rival is not None:
                # both directions positive at their own delays: the larger net transfer wins,
                # exact ties go to the lexicographically smaller source name
                if rival.net > r.net or (rival.net == r.net and nodes[t] < nodes[s]):
                    continue
            edges.append(Edge(s, t, float(r.net), r.delay))
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return InfluenceGraph(tuple(nodes), tuple(edges), mode, tuple(results))


def build_graph(ts: TimeSeriesSet, cfg: GraphConfig = GraphConfig(), seed: int = 0) -> InfluenceGraph:
    """Infer the transfer entropy network of ``ts``.

    Every ordered pair, and every self pair with delays >= 1, is scanned
    over the delay grid and tested against iAAFT surrogates of its source
    at the best delay.  Only significant pairs become edges.
    """
    if ts.n_series < 2:
        raise ValidationError("need at least two series to build a graph")
    results = test_pairs(ts, cfg, seed)
    if cfg.mode == "net_te":
        results = _with_net(ts, results, cfg, seed)
    return assemble(ts.names, results, cfg.mode)


def adjacency(graph: InfluenceGraph) -> np.ndarray:
    """``W[i, j]`` = weight of edge i -> j, zero where absent."""
    n = len(graph.nodes)
    W = np.zeros((n, n))
    for e in graph.edges:
        W[e.source, e.target] = e.weight
    return W


def delay_matrix(graph: InfluenceGraph) -> np.ndarray:
    """Delay (samples) of each edge, -1 where absent."""
    n = len(graph.nodes)
    D = np.full((n, n), -1, dtype=int)
    for e in graph.edges:
        D[e.source, e.target] = e.delay
    return D


def from_adjacency(nodes: Sequence[str], W, delays=None, mode: str = "raw_te") -> InfluenceGraph:
    W = np.asarray(W, dtype=float)
    if np.any(W < 0):
        raise ValidationError("adjacency has negative weights")
    edges = []
    for s, t in zip(*np.nonzero(W)):
        d = 1 if delays is None else int(delays[s][t])
        edges.append(Edge(int(s), int(t), float(W[s, t]), d))
    return InfluenceGraph(tuple(nodes), tuple(edges), mode)


EDGE_COLUMNS = ("source", "target", "weight_bits", "delay_samples", "significant")


def write_edges_csv(graph: InfluenceGraph, path) -> None:
    """Edge list; with candidates attached, every tested pair is listed with its verdict."""
    rows = []
    kept = {(e.source, e.target): e for e in graph.edges}
    if graph.candidates:
        for r in sorted(graph.candidates, key=lambda r: (r.source, r.target)):
            e = kept.get((r.source, r.target))
            if e is not None:
                rows.append((r.source, r.target, e.weight, e.delay, 1))
            else:
                rows.append((r.source, r.target, max(float(r.te), 0.0), r.delay, 0))
    else:
        rows = [(e.source, e.target, e.weight, e.delay, 1) for e in graph.edges]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_COLUMNS)
        for s, t, wt, d, sig in rows:
            w.writerow([graph.nodes[s], graph.nodes[t], repr(float(wt)), int(d), sig])


def read_edges_csv(path, nodes: Sequence[str] | None = None, mode: str = "raw_te") -> InfluenceGraph:
    """Load significant rows of an edge-list CSV.

    Node order is ``nodes`` when given, else order of first appearance.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = set(EDGE_COLUMNS[:3]) - set(reader.fieldnames or ())
            if missing:
                raise ValidationError(f"{path}: missing columns {sorted(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    order = list(nodes) if nodes is not None else []
    for r in rows:
        for key in ("source", "target"):
            if r[key] not in order:
                if nodes is not None:
                    raise ValidationError(f"{path}: unknown node {r[key]!r}")
                order.append(r[key])
    edges = []
    for line, r in enumerate(rows, start=2):
        try:
            sig = int(r.get("significant") or 1)
            wt = float(r["weight_bits"])
            d = int(r.get("delay_samples") or 1)
        except ValueError:
            raise ValidationError(f"{path}: malformed row {line}") from None
        if sig and wt > 0:
            edges.append(Edge(order.index(r["source"]), order.index(r["target"]), wt, d))
    return InfluenceGraph(tuple(order), tuple(edges), mode)


def to_dot(graph: InfluenceGraph, scores=None) -> str:
    """Graphviz source: edge label = delay, pen width ~ weight, node size ~ score."""
    W = adjacency(graph)
    wmax = W.max() if W.size and W.max() > 0 else 1.0
    lines = ["digraph influence {", "  node [shape=circle];"]
    for i, name in enumerate(graph.nodes):
        attrs = ""
        if scores is not None:
            s = float(np.asarray(scores)[i] / np.max(scores))
            width = 0.3 + 1.2 * s
            attrs = f' [width={width:.4f}, height={width:.4f}, fixedsize=true, xlabel="{s:.3f}"]'
        lines.append(f'  "{name}"{attrs};')
    for e in graph.edges:
        pen = 0.5 + 4.5 * e.weight / wmax
        lines.append(
            f'  "{graph.nodes[e.source]}" -> "{graph.nodes[e.target]}" '
            f'[label="{e.delay}", penwidth={pen:.4f}, weight_bits={e.weight!r}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
