"""Single-window and rolling-window analysis, aggregation and file output."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np
import scipy

from .errors import ValidationError
from .network import GraphConfig, InfluenceGraph, adjacency, build_graph, derive_seed, to_dot, write_edges_csv
from .ranking import DEFAULT_GAMMA, RankVector, rank_sources
from .timeseries import TimeSeriesSet, WindowSpec, standardize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisConfig:
    graph: GraphConfig = GraphConfig()
    gamma: float = DEFAULT_GAMMA
    standardize: bool = True
    tol: float = 1e-10
    max_iter: int = 1000

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class WindowResult:
    index: int
    offset: int
    graph: InfluenceGraph
    rank: RankVector
    constant: tuple[str, ...] = ()


@dataclass
class RollingReport:
    names: tuple[str, ...]
    windows: list[WindowResult]
    detection_count: np.ndarray
    importance_traj: np.ndarray
    coupling_traj: dict = field(default_factory=dict)
    sample_interval: float = 1.0
    config: AnalysisConfig | None = None
    seed: int = 0
    width: int | None = None
    step: int | None = None


def analyze(ts: TimeSeriesSet, config: AnalysisConfig = AnalysisConfig(), seed: int = 0):
    """Graph and source ranking for one block of data."""
    if config.standardize:
        ts = standardize(ts)
    graph = build_graph(ts, config.graph, seed)
    rank = rank_sources(adjacency(graph), config.gamma, config.tol, config.max_iter)
    return graph, rank, ts.constant


def _window_job(args):
    index, offset, ts, config, seed = args
    graph, rank, constant = analyze(ts, config, seed)
    return WindowResult(index, offset, graph, rank, constant)


def window_seed(seed: int, index: int) -> int:
    return derive_seed(seed, "window", index)


def run_rolling(ts: TimeSeriesSet, spec: WindowSpec, config: AnalysisConfig = AnalysisConfig(), seed: int = 0, *,
                max_windows: int | None = None, windows: Sequence[int] | None = None, workers: int = 1,
                track: Sequence[tuple[str, str]] = ()) -> RollingReport:
    """Analyse every window of ``ts`` and aggregate detections and importance.

    Window ``w`` is seeded from ``(seed, w)`` alone, so any subset of windows
    (``windows``) and any worker count reproduce the same per-window results.
    """
    if ts.n_series < 2:
        raise ValidationError("rolling analysis needs at least two series")
    offsets = spec.offsets(ts.n_samples)
    if max_windows is not None:
        offsets = offsets[:max_windows]
    chosen = list(range(len(offsets))) if windows is None else sorted(set(windows))
    if not chosen:
        raise ValidationError("no windows to analyse")
    if chosen[0] < 0 or chosen[-1] >= len(offsets):
        raise ValidationError(f"window indices must lie in 0..{len(offsets) - 1}")
    for a, b in track:
        ts.index(a), ts.index(b)
    jobs = [
        (w, offsets[w], TimeSeriesSet(ts.names, ts.data[:, offsets[w]:offsets[w] + spec.width], ts.sample_interval),
         config, window_seed(seed, w))
        for w in chosen
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_window_job, jobs))
    else:
        results = []
        for job in jobs:
            t0 = time.perf_counter()
            results.append(_window_job(job))
            log.info("window %d done in %.1f s", job[0], time.perf_counter() - t0)
    return aggregate(ts.names, results, track, ts.sample_interval, config, seed, spec)


def aggregate(names, results: Sequence[WindowResult], track=(), sample_interval: float = 1.0,
              config: AnalysisConfig | None = None, seed: int = 0, spec: WindowSpec | None = None) -> RollingReport:
    """Fold per-window results in window order."""
    results = sorted(results, key=lambda r: r.index)
    n = len(names)
    counts = np.zeros((n, n), dtype=int)
    traj = np.zeros((n, len(results)))
    coupling = {tuple(p): [] for p in track}
    for k, r in enumerate(results):
        for e in r.graph.edges:
            counts[e.source, e.target] += 1
        traj[:, k] = r.rank.scores
        for a, b in coupling:
            i, j = names.index(a), names.index(b)
            cand = next((c for c in r.graph.candidates if c.source == i and c.target == j), None)
            if cand is None:
                coupling[(a, b)].append((float("nan"), -1, False))
            else:
                coupling[(a, b)].append((float(cand.te), int(cand.delay), bool(cand.significant)))
    return RollingReport(
        tuple(names), list(results), counts, traj, coupling, sample_interval, config, seed,
        spec.width if spec else None, spec.step if spec else None,
    )


def _versions() -> dict:
    from . import __version__

    return {"causalrank": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version()}


def emit_outputs(report: RollingReport | None, out_dir, extra: dict | None = None, wall_time: float | None = None) -> list[Path]:
    """Write per-window edge/rank/DOT files, the aggregates and ``manifest.json``.

    Returns the written paths.  An empty report produces only the manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    windows = report.windows if report is not None else []
    for r in windows:
        tag = f"{r.index:03d}"
        p = out / f"edges_{tag}.csv"
        write_edges_csv(r.graph, p)
        written.append(p)
        p = out / f"rank_{tag}.csv"
        write_rank_csv(r.graph.nodes, r.rank, p)
        written.append(p)
        p = out / f"graph_{tag}.dot"
        p.write_text(to_dot(r.graph, r.rank.scores), encoding="utf-8")
        written.append(p)
    if windows:
        names = report.names
        p = out / "detection_count.csv"
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", *names])
            for name, row in zip(names, report.detection_count):
                w.writerow([name, *(int(v) for v in row)])
        written.append(p)
        p = out / "importance_traj.csv"
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["window", "offset", *names])
            for k, r in enumerate(windows):
                w.writerow([r.index, r.offset, *(repr(float(v)) for v in report.importance_traj[:, k])])
        written.append(p)
        if report.coupling_traj:
            p = out / "coupling_traj.csv"
            with p.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["window", "offset", "source", "target", "te_bits", "delay_samples", "significant"])
                for (a, b), seq in report.coupling_traj.items():
                    for r, (te, d, sig) in zip(windows, seq):
                        w.writerow([r.index, r.offset, a, b, repr(float(te)), d, int(sig)])
            written.append(p)
    manifest = {
        "seed": report.seed if report is not None else None,
        "config": report.config.to_dict() if report is not None and report.config is not None else None,
        "window": {"width": report.width, "step": report.step} if report is not None else None,
        "n_windows": len(windows),
        "nodes": list(report.names) if report is not None else [],
        "constant_series": {str(r.index): list(r.constant) for r in windows if r.constant},
        "versions": _versions(),
        "wall_time_s": wall_time,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        manifest.update(extra)
    p = out / "manifest.json"
    p.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
    written.append(p)
    return written


def write_rank_csv(nodes: Sequence[str], rank: RankVector, path) -> None:
    ranks = rank.ranks()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "score", "rank"])
        for name, s, k in zip(nodes, rank.scores, ranks):
            w.writerow([name, repr(float(s)), int(k)])
