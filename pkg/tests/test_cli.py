import numpy as np
import pytest
import yaml

from ta_explore.cli import main


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "rw.yaml"
    p.write_text(yaml.safe_dump({
        "env": {"name": "randomwalk", "size": 5},
        "algorithm": {"name": "td0"},
        "schedules": [{"kind": "constant-zero"}, {"kind": "exponential", "lam": 0.95}],
        "episodes": 20,
        "runs": 3,
        "output_dir": str(tmp_path / "cfg_out"),
    }))
    return p


def test_run_and_plot(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(config_file), "--out", str(out), "--workers", "1", "--seed", "7"]) == 0
    assert "master_seed: 7" in (out / "resolved_config.yaml").read_text()
    svg = tmp_path / "fig.svg"
    code = main(["plot", str(out / "aggregate_baseline.csv"), str(out / "aggregate_exp-lam0.95.csv"), "--out", str(svg)])
    assert code == 0 and svg.read_text().count("<polyline") == 2


def test_env_var_sets_output_dir(config_file, tmp_path, monkeypatch):
    monkeypatch.setenv("TA_EXPLORE_OUT", str(tmp_path / "env_out"))
    assert main(["run", str(config_file), "--workers", "1"]) == 0
    assert (tmp_path / "env_out" / "summary.json").exists()
    assert not (tmp_path / "cfg_out").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text(yaml.safe_dump({"env": {"name": "randomwalk"}, "algorithm": {"name": "ppo"}, "schedule": {"kind": "constant-zero"}}))
    assert main(["run", str(p)]) == 2
    assert "algorithm.name" in capsys.readouterr().err


def test_plot_schema_error(tmp_path, capsys):
    p = tmp_path / "x.csv"
    p.write_text("episode,metric\n0,1\n")
    assert main(["plot", str(p), "--out", str(tmp_path / "x.svg")]) == 2
    assert "metric_mean" in capsys.readouterr().err


@pytest.mark.parametrize("size", [5, 11, 33])
def test_true_values(size, capsys):
    assert main(["true-values", "--size", str(size)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    vals = np.array([float(l.split("\t")[1]) for l in lines])
    n = size - 2
    assert np.allclose(vals, np.arange(1, n + 1) / (n + 1), atol=1e-12)
