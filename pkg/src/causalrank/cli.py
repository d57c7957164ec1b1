"""Command line interface: ``causalrank gen|analyze|roll|rank``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .estimators import DelayGrid, EmbeddingConfig
from .generators import LorenzPairConfig, gen_cascade, gen_lorenz_pair, gen_var, random_tree
from .network import GraphConfig, adjacency, read_edges_csv
from .pipeline import AnalysisConfig, aggregate, analyze, emit_outputs, run_rolling, write_rank_csv
from .pipeline import WindowResult
from .ranking import rank_sources
from .surrogates import n_surrogates
from .timeseries import TimeSeriesSet, WindowSpec, load_csv, save_csv

log = logging.getLogger("causalrank")

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _default_grid(width: int) -> DelayGrid:
    # the coarse Lorenz grid only fits long windows
    if width >= 2000:
        return DelayGrid.coarse(600, 25)
    return DelayGrid(tuple(range(1, 6)))


def _analysis_config(args, width: int) -> AnalysisConfig:
    grid = DelayGrid.parse(args.delays) if args.delays else _default_grid(width)
    graph = GraphConfig(
        estimator=args.estimator,
        grid=grid,
        emb=EmbeddingConfig(args.k, args.l),
        bins=args.bins,
        knn=args.knn,
        n_surrogates=args.surrogates,
        mode={"raw": "raw_te", "net": "net_te"}[args.mode],
        refine=args.refine,
        self_loops=not args.no_self_loops,
    )
    return AnalysisConfig(graph=graph, gamma=args.gamma, standardize=not args.no_standardize)


def _parse_track(items, names):
    if items:
        pairs = []
        for item in items:
            a, sep, b = item.partition(":")
            if not sep or not a or not b:
                raise ValidationError(f"--track expects A:B, got {item!r}")
            pairs.append((a, b))
        return pairs
    if "Y1" in names and "Y2" in names:
        return [("Y1", "Y2"), ("Y2", "Y1")]
    return []


def _write_manifest(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, default=str) + "\n", encoding="utf-8")


def cmd_gen(args) -> None:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.system == "lorenz":
        cfg = LorenzPairConfig(dt=args.dt, n_samples=args.samples, discard=args.discard)
        ts = gen_lorenz_pair(cfg)
        meta = {"generator": "lorenz_pair", "config": dataclasses.asdict(cfg)}
    elif args.system == "var":
        coefs = json.loads(args.coefficients)
        noise = json.loads(args.noise_sd)
        ts = gen_var(coefs, noise, args.samples, args.seed)
        meta = {"generator": "var", "coefficients": coefs, "noise_sd": noise, "n_samples": args.samples}
    else:
        cfg = random_tree(args.nodes, args.noise, args.delay, args.seed, n_samples=args.samples,
                          root_rate=args.rate)
        ts = gen_cascade(cfg)
        meta = {"generator": "cascade", "config": dataclasses.asdict(cfg)}
    save_csv(ts, out)
    meta.update(seed=args.seed, sample_interval=ts.sample_interval, shape=list(ts.data.shape))
    _write_manifest(out.with_suffix(".manifest.json"), meta)
    print(f"wrote {out} ({ts.n_series} series x {ts.n_samples} samples)")


def cmd_analyze(args) -> None:
    ts = load_csv(args.input, args.dt)
    config = _analysis_config(args, ts.n_samples)
    t0 = time.perf_counter()
    graph, rank, constant = analyze(ts, config, args.seed)
    report = aggregate(ts.names, [WindowResult(0, 0, graph, rank, constant)], (), ts.sample_interval, config,
                       args.seed, None)
    emit_outputs(report, args.out, {"input": str(args.input)}, time.perf_counter() - t0)
    order = np.argsort(-rank.scores, kind="stable")
    for k in order[: min(10, len(order))]:
        print(f"{ts.names[k]}\t{rank.scores[k]:.4f}")


def cmd_roll(args) -> None:
    ts = load_csv(args.input, args.dt)
    spec = WindowSpec(args.window, args.step)
    config = _analysis_config(args, spec.width)
    track = _parse_track(args.track, ts.names)
    t0 = time.perf_counter()
    report = run_rolling(ts, spec, config, args.seed, max_windows=args.max_windows, workers=args.workers,
                         track=track)
    emit_outputs(report, args.out, {"input": str(args.input)}, time.perf_counter() - t0)
    print(f"analysed {len(report.windows)} windows -> {args.out}")


def cmd_rank(args) -> None:
    graph = read_edges_csv(args.input)
    rank = rank_sources(adjacency(graph), args.gamma)
    if args.out:
        write_rank_csv(graph.nodes, rank, args.out)
    order = np.argsort(-rank.scores, kind="stable")
    for k in order:
        print(f"{graph.nodes[k]}\t{rank.scores[k]:.6f}")


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV with a header row, one column per variable")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dt", type=float, default=1.0, help="sample interval in seconds (default 1)")
    p.add_argument("--estimator", choices=("binned", "ksg"), default="ksg")
    p.add_argument("--bins", type=int, default=None, help="bins per series (default: 2 for binary data, else 6)")
    p.add_argument("--knn", type=int, default=4, help="KSG neighbour count")
    p.add_argument("--delays", default=None,
                   help="delay grid in samples: '1,5,10' or 'start:stop:step' "
                        "(default 1:600:25 for windows >= 2000 samples, else 1..5)")
    p.add_argument("--refine", type=int, default=None, help="rescan around the best coarse delay at this step")
    p.add_argument("--surrogates", type=int, default=n_surrogates(0.05))
    p.add_argument("--gamma", type=float, default=0.85, help="teleportation parameter")
    p.add_argument("--mode", choices=("raw", "net"), default="raw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--no-self-loops", action="store_true")
    p.add_argument("-k", type=int, default=1, help="source embedding dimension")
    p.add_argument("-l", type=int, default=1, help="target embedding dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalrank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate synthetic data")
    gsub = gen.add_subparsers(dest="system", required=True)
    g = gsub.add_parser("lorenz", help="delay-coupled Lorenz pair")
    g.add_argument("--samples", type=int, default=150_000)
    g.add_argument("--dt", type=float, default=0.01)
    g.add_argument("--discard", type=int, default=0, help="drop this many leading samples")
    g = gsub.add_parser("var", help="linear Gaussian VAR")
    g.add_argument("--coefficients", default="[[[0.0, 0.0], [0.5, 0.5]]]",
                   help="JSON list of lag matrices, A[i][j] = effect of j on i")
    g.add_argument("--noise-sd", default="[1.0, 0.5]", help="JSON scalar or per-variable list")
    g.add_argument("--samples", type=int, default=20_000)
    g = gsub.add_parser("cascade", help="binary fault cascade on a random tree")
    g.add_argument("--nodes", type=int, default=28)
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--delay", type=int, default=1)
    g.add_argument("--rate", type=float, default=0.5)
    g.add_argument("--samples", type=int, default=400)
    for g in gsub.choices.values():
        g.add_argument("--out", required=True)
        g.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="single-window network and ranking")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("roll", help="rolling-window analysis")
    _add_analysis_flags(p)
    p.add_argument("--window", type=int, default=2000)
    p.add_argument("--step", type=int, default=None, help="default: window width (adjacent slices)")
    p.add_argument("--max-windows", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--track", action="append", help="record TE/delay per window for pair A:B (repeatable)")
    p.set_defaults(func=cmd_roll)

    p = sub.add_parser("rank", help="rank nodes of an edge-list CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--gamma", type=float, default=0.85)
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
