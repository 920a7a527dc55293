import csv
import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from invbandit.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def small_config(tmp_path):
    cfg = {"algorithm": "UCB", "instance": {"means": [1.0, 0.5]}, "alpha_grid": [0.15, 0.25],
           "horizon_grid": [500, 800], "estimators": ["procedure_ucb", "naive"],
           "replications": 8, "master_seed": 7}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_then_estimate(tmp_path, capsys):
    traj = tmp_path / "t.json"
    assert main(["simulate", "--means", "1", "0", "--model", "deterministic", "--algorithm",
                 "sae", "--T", "100", "--out", str(traj)]) == 0
    data = json.loads(traj.read_text())
    assert data["pull_counts"] == [63, 37] and "hidden_rewards" not in data
    assert main(["estimate", str(traj), "--mu-star", "1", "--estimator", "procedure_sae"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "arm,tau,pulls_at_switch,estimate"
    assert out[1].startswith("2,74,37,0.00214606")
    assert main(["estimate", str(traj), "--mu-star", "1", "--estimator", "procedure_sae",
                 "--out", str(tmp_path / "rep")]) == 0
    assert json.loads((tmp_path / "rep" / "report.json").read_text())["identified_best"] == 1


def test_simulate_config_and_rewards(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"instance": {"means": [1, 0.5], "model": {"type": "bernoulli"}},
                               "algorithm": "UCB", "alpha": 0.2, "T": 50, "seed": 4}))
    assert main(["simulate", "--config", str(cfg), "--include-rewards"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["hidden_rewards"]) == 50
    assert set(data["hidden_rewards"]) <= {0.0, 1.0}


def test_estimate_tag_mismatch(tmp_path):
    traj = tmp_path / "t.json"
    main(["simulate", "--means", "1", "0.5", "--T", "200", "--out", str(traj)])
    assert main(["estimate", str(traj), "--mu-star", "1", "--estimator", "procedure_sae"]) == 1
    assert main(["estimate", str(traj), "--mu-star", "1", "--estimator", "procedure_sae",
                 "--force"]) == 0


def test_naive_c0(tmp_path, capsys):
    traj = tmp_path / "t.json"
    main(["simulate", "--means", "1", "0.5", "--T", "200", "--out", str(traj)])
    capsys.readouterr()
    assert main(["estimate", str(traj), "--mu-star", "1", "--estimator", "naive", "--c0", "0.75"]) == 0
    assert main(["estimate", str(traj), "--mu-star", "1", "--estimator", "naive", "--c0", "0"]) == 1


@pytest.mark.parametrize("argv", [
    ["simulate", "--means", "1", "1.5", "--model", "bernoulli", "--T", "10"],
    ["simulate", "--means", "1", "0.5"],
    ["simulate", "--means", "1", "0.5", "--T", "10", "--alpha", "1.0"],
    ["curves", "--T", "100", "--gap", "0"],
    ["nonsense"],
    ["simulate", "--seed", "-1", "--means", "1", "--T", "3"],
])
def test_validation_exit_1(argv):
    assert main(argv) == 1


def test_io_exit_2(tmp_path):
    assert main(["estimate", str(tmp_path / "missing.json"), "--mu-star", "1"]) == 2
    assert main(["ingest", str(tmp_path / "missing.csv"), "--mu-max", "1",
                 "--sigma-raw", "1"]) == 2
    assert main(["experiment", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == 2


def test_bad_config_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["experiment", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    bad.write_text(json.dumps({"algorithm": "UCB", "alpha_grid": [0.1], "horizon_grid": [100],
                               "instance": {"means": [1, 0.5]}, "gap_schedule": {"beta": 0.9}}))
    assert main(["experiment", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1


def test_experiment_byte_identical(small_config, tmp_path):
    outs = []
    for i, threads in enumerate(("1", "1", "4")):
        out = tmp_path / f"run{i}"
        assert main(["experiment", "--config", str(small_config), "--seed", "7", "--out", str(out),
                     "--threads", threads]) == 0
        outs.append(out)
    for name in ("results.csv", "aggregate.csv", "metadata.json"):
        blobs = {(o / name).read_bytes() for o in outs}
        assert len(blobs) == 1, name
    main(["experiment", "--config", str(small_config), "--seed", "8", "--out", str(tmp_path / "s8")])
    assert (tmp_path / "s8" / "results.csv").read_bytes() != (outs[0] / "results.csv").read_bytes()


def test_ingest(tmp_path, capsys):
    from invbandit.datasets import fixture_path
    assert main(["ingest", str(fixture_path("battery_high.csv")), "--mu-max", "1208",
                 "--sigma-raw", "164", "--subsample", "20", "--seed", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["means"]) == 20 and len(data["arm_ids"]) == 20
    assert abs(data["model"]["variance"] - 0.018427) < 1e-5
    assert main(["ingest", str(fixture_path("gene_expression.csv")), "--normalization", "affine",
                 "--variance-raw", "0.1", "--subsample", "100", "--pin", "12979"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert "12979" in data["arm_ids"]
    assert main(["ingest", str(fixture_path("gene_expression.csv")), "--normalization",
                 "affine"]) == 1


def test_curves(capsys):
    assert main(["curves", "--alpha", "0", "--T", "100", "--gap", "0.5"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert round(float(row["kappa"]), 3) == 73.683
    assert round(float(row["regret_ub"]), 2) == 294.73


def test_curves_grid(capsys):
    assert main(["curves", "--alpha", "0", "0.25", "--T", "500", "5000", "--gap", "0.5", "1"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1 + 8


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_load(name):
    from invbandit.harness import ExperimentConfig
    ExperimentConfig.load(CONFIGS / name)


def test_console_script(tmp_path):
    exe = shutil.which("invbandit")
    cmd = [exe] if exe else [sys.executable, "-m", "invbandit.cli"]
    res = subprocess.run(cmd + ["curves", "--T", "100", "--gap", "0.5"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "73.68" in res.stdout
    res = subprocess.run(cmd + ["estimate", str(tmp_path / "x.json"), "--mu-star", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and res.stderr.startswith("error:")
