import csv
import json

import numpy as np
import pytest

from ta_explore import harness
from ta_explore.config import parse_config
from ta_explore.harness import (
    ExperimentFailed,
    aggregate,
    read_runs_csv,
    run_experiment,
)


def rw_config(**over):
    raw = {
        "name": "rw",
        "env": {"name": "randomwalk", "size": 5},
        "algorithm": {"name": "td0"},
        "schedules": [{"kind": "constant-zero"}, {"kind": "exponential", "lam": 0.9, "label": "ta"}],
        "episodes": 30,
        "runs": 4,
        "thresholds": [0.2, 0.1],
    }
    raw.update(over)
    return parse_config(raw)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_outputs_and_schema(tmp_path):
    summary = run_experiment(rw_config(), tmp_path, workers=1)
    names = {p.name for p in tmp_path.iterdir()}
    assert {"runs_baseline.csv", "runs_ta.csv", "aggregate_ta.csv", "summary.json", "curves.svg", "resolved_config.yaml"} <= names
    assert "PARTIAL" not in names
    head = (tmp_path / "runs_ta.csv").read_text().splitlines()[0]
    assert head == "run,episode,beta,metric"
    agg_head = (tmp_path / "aggregate_ta.csv").read_text().splitlines()[0].split(",")
    assert {"metric_mean", "metric_stderr"} <= set(agg_head)
    rows = read_rows(tmp_path / "runs_ta.csv")
    assert len(rows) == 4 * 30
    for run in range(4):
        assert [int(r["episode"]) for r in rows if int(r["run"]) == run] == list(range(30))
    assert set(summary["variants"]) == {"baseline", "ta"}
    assert json.loads((tmp_path / "summary.json").read_text())["variants"]["ta"]["episodes_to_threshold"].keys() == {"0.2", "0.1"}
    assert b"\r" not in (tmp_path / "runs_ta.csv").read_bytes()


def test_aggregate_matches_independent_mean(tmp_path):
    run_experiment(rw_config(), tmp_path, workers=1)
    rows = read_rows(tmp_path / "runs_ta.csv")
    by_ep = {}
    for r in rows:
        by_ep.setdefault(int(r["episode"]), []).append(float(r["metric"]))
    agg = read_rows(tmp_path / "aggregate_ta.csv")
    for a in agg:
        vals = by_ep[int(a["episode"])]
        assert float(a["metric_mean"]) == pytest.approx(sum(vals) / len(vals), rel=1e-12)
        assert float(a["metric_stderr"]) == pytest.approx(np.std(vals, ddof=1) / 2.0, rel=1e-9)


def test_single_run_aggregate_is_the_run(tmp_path):
    run_experiment(rw_config(runs=1), tmp_path, workers=1)
    run = [float(r["metric"]) for r in read_rows(tmp_path / "runs_ta.csv")]
    agg = [float(r["metric_mean"]) for r in read_rows(tmp_path / "aggregate_ta.csv")]
    assert run == agg
    assert all(float(r["metric_stderr"]) == 0.0 for r in read_rows(tmp_path / "aggregate_ta.csv"))


def test_byte_identical_reruns_and_pool_independence(tmp_path):
    cfg = rw_config()
    run_experiment(cfg, tmp_path / "a", workers=1)
    run_experiment(cfg, tmp_path / "b", workers=1)
    run_experiment(cfg, tmp_path / "c", workers=2)
    for name in ("runs_ta.csv", "aggregate_ta.csv", "runs_baseline.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()


def test_seed_changes_outputs(tmp_path):
    run_experiment(rw_config(master_seed=0), tmp_path / "a", workers=1)
    run_experiment(rw_config(master_seed=1), tmp_path / "b", workers=1)
    assert (tmp_path / "a" / "runs_ta.csv").read_bytes() != (tmp_path / "b" / "runs_ta.csv").read_bytes()


def test_ppo_experiment_writes_diagnostics(tmp_path):
    cfg = parse_config({
        "env": {"name": "fourtank"},
        "algorithm": {"name": "ppo", "hidden_sizes": [8], "rollout_min_steps": 64, "minibatch_size": 32, "epochs_per_update": 1},
        "schedule": {"kind": "linear", "E": 3, "beta0": 0.5},
        "episodes": 4,
        "runs": 2,
    })
    run_experiment(cfg, tmp_path, workers=1)
    rows = read_rows(tmp_path / "diagnostics_linear-E3-b0.5.csv")
    assert len(rows) == 8
    assert all(1 <= int(r["steps"]) <= 100 for r in rows)
    betas = [float(r["beta"]) for r in read_rows(tmp_path / "runs_linear-E3-b0.5.csv")][:4]
    assert betas == [0.5, pytest.approx(1 / 3), pytest.approx(1 / 6), 0.0]


def test_failure_leaves_partial_marker(tmp_path, monkeypatch):
    real = harness.run_one

    def flaky(config, variant, run):
        if run == 2:
            raise RuntimeError("boom")
        return real(config, variant, run)

    monkeypatch.setattr(harness, "run_one", flaky)
    with pytest.raises(ExperimentFailed):
        run_experiment(rw_config(), tmp_path, workers=1)
    marker = tmp_path / "PARTIAL"
    assert marker.exists() and "boom" in marker.read_text()
    assert not (tmp_path / "summary.json").exists()
    done = {r.run for r in read_runs_csv(tmp_path / "runs_baseline.csv")}
    assert done == {0, 1}


def test_out_dir_precedence(tmp_path, monkeypatch):
    cfg = rw_config(output_dir=str(tmp_path / "from_config"))
    assert harness.resolve_out_dir(cfg) == tmp_path / "from_config"
    monkeypatch.setenv(harness.OUT_ENV_VAR, str(tmp_path / "from_env"))
    assert harness.resolve_out_dir(cfg) == tmp_path / "from_env"
    assert harness.resolve_out_dir(cfg, tmp_path / "explicit") == tmp_path / "explicit"


def test_aggregate_rejects_gaps():
    from ta_explore.core import RunRecord

    with pytest.raises(ValueError):
        aggregate([RunRecord(0, 0, 0.0, 1.0), RunRecord(0, 2, 0.0, 1.0)])
    with pytest.raises(ValueError):
        aggregate([RunRecord(0, 0, 0.0, 1.0), RunRecord(0, 1, 0.0, 1.0), RunRecord(1, 0, 0.0, 1.0)])
