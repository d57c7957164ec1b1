import json

import numpy as np
import pytest

from causalrank.cli import main
from causalrank.timeseries import load_csv


@pytest.fixture
def var_csv(tmp_path):
    out = tmp_path / "var.csv"
    assert main(["gen", "var", "--samples", "600", "--seed", "1", "--out", str(out)]) == 0
    return out


def test_gen_var_writes_csv_and_manifest(var_csv):
    ts = load_csv(var_csv)
    assert ts.names == ("V0", "V1") and ts.n_samples == 600
    meta = json.loads(var_csv.with_suffix(".manifest.json").read_text())
    assert meta["generator"] == "var" and meta["seed"] == 1


def test_gen_cascade_and_lorenz(tmp_path):
    assert main(["gen", "cascade", "--nodes", "5", "--samples", "100", "--out", str(tmp_path / "c.csv")]) == 0
    assert load_csv(tmp_path / "c.csv").n_series == 5
    assert main(["gen", "lorenz", "--samples", "300", "--out", str(tmp_path / "l.csv")]) == 0
    ts = load_csv(tmp_path / "l.csv")
    assert ts.names[1] == "Y1" and ts.n_samples == 300


def test_analyze_then_rank(var_csv, tmp_path, capsys):
    out = tmp_path / "an"
    code = main(["analyze", "--input", str(var_csv), "--out", str(out), "--estimator", "binned",
                 "--delays", "1,2", "--seed", "3"])
    assert code == 0
    assert (out / "edges_000.csv").exists() and (out / "manifest.json").exists()
    capsys.readouterr()
    assert main(["rank", "--input", str(out / "edges_000.csv"), "--out", str(tmp_path / "r.csv")]) == 0
    printed = capsys.readouterr().out.split()
    assert printed[0] == "V0"
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "node,score,rank"


def test_roll_with_tracking_is_reproducible(var_csv, tmp_path):
    args = ["roll", "--input", str(var_csv), "--window", "200", "--estimator", "binned", "--delays", "1:3:1",
            "--surrogates", "9", "--track", "V0:V1", "--seed", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    for name in ("detection_count.csv", "importance_traj.csv", "coupling_traj.csv", "edges_002.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert not (tmp_path / "a" / "edges_003.csv").exists()


def test_validation_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\nNaN,3\n")
    assert main(["analyze", "--input", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "row 3" in capsys.readouterr().err
    assert main(["analyze", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o")]) == 2
    assert main(["gen", "var", "--coefficients", "[[[1.5]]]", "--noise-sd", "1", "--out",
                 str(tmp_path / "v.csv")]) == 2


def test_bad_track_and_delays(var_csv, tmp_path):
    assert main(["roll", "--input", str(var_csv), "--out", str(tmp_path / "o"), "--window", "200",
                 "--track", "V0"]) == 2
    assert main(["analyze", "--input", str(var_csv), "--out", str(tmp_path / "o"), "--delays", "x"]) == 2


def test_numerical_failure_exits_three(tmp_path):
    assert main(["gen", "lorenz", "--samples", "5000", "--dt", "0.2", "--out", str(tmp_path / "l.csv")]) == 3


def test_default_gamma_and_surrogates():
    from causalrank.cli import build_parser

    args = build_parser().parse_args(["analyze", "--input", "x", "--out", "y"])
    assert args.gamma == 0.85 and args.surrogates == 19 and args.mode == "raw"
