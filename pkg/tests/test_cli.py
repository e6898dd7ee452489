"""CLI behaviour, file outputs and reproducibility."""

import csv
import json

import numpy as np
import pytest

from aggfc import csvio, synthesize_params
from aggfc.cli import main


def write_config(path, **overrides):
    data = {
        "d": 2,
        "T": 256,
        "replications": 3,
        "base_seed": 10,
        "paths": {"source": "synthesized", "seed": 1, "gamma": 0.6, "grid_points": 128},
    }
    data.update(overrides)
    path.write_text(json.dumps(data))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- simulate -----------------------------------------------------------------------


def test_simulate_writes_artifacts(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "T=256" in out and "sample_variance=" in out and "max|x|=" in out
    rows = read_rows(tmp_path / "o" / "realization.csv")
    assert rows[0] == ["t", "x", "sigma_t"]
    assert len(rows) == 257
    prows = read_rows(tmp_path / "o" / "params.csv")
    assert prows[0] == ["u", "theta_1", "theta_2", "sigma"]


def test_simulate_seed_changes_realization_not_file_params(tmp_path):
    params = synthesize_params(d=2, T_grid=64, gamma=0.5, seed=3)
    pfile = tmp_path / "paths.csv"
    csvio.write_params_csv(pfile, params)
    cfg = write_config(tmp_path / "cfg.json",
                       paths={"source": "file", "file": str(pfile)})
    for seed, sub in ((1, "a"), (2, "b")):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / sub),
                     "--seed", str(seed)]) == 0
    pa = (tmp_path / "a" / "params.csv").read_bytes()
    pb = (tmp_path / "b" / "params.csv").read_bytes()
    assert pa == pb
    ra = (tmp_path / "a" / "realization.csv").read_bytes()
    rb = (tmp_path / "b" / "realization.csv").read_bytes()
    assert ra != rb


def test_simulate_silent_paths_give_zero_realization(tmp_path):
    cfg = write_config(
        tmp_path / "cfg.json",
        paths={"source": "synthesized", "seed": 1, "gamma": 0.6, "grid_points": 128,
               "sigma": 0.0},
    )
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_rows(tmp_path / "o" / "realization.csv")
    xs = np.array([float(r[1]) for r in rows[1:]])
    assert np.all(xs == 0.0)


def test_env_seed_fallback(tmp_path, monkeypatch):
    cfg = write_config(tmp_path / "cfg.json")
    monkeypatch.setenv("AGGFC_SEED", "77")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "env")]) == 0
    monkeypatch.delenv("AGGFC_SEED")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "flag"),
                 "--seed", "77"]) == 0
    assert (tmp_path / "env" / "realization.csv").read_bytes() == (
        tmp_path / "flag" / "realization.csv"
    ).read_bytes()


# --- run ----------------------------------------------------------------------------


def test_run_single_replication_quantiles_collapse(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", replications=1)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    with open(tmp_path / "o" / "plot_data.json") as fh:
        plot = json.load(fh)
    for stats in plot.values():
        assert stats["min"] == stats["q25"] == stats["median"] == stats["q75"] == stats["max"]


def test_run_emits_both_strategy_columns(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", strategies=[1, 2])
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_rows(tmp_path / "o" / "summary.csv")
    ids = [r[0] for r in rows[1:]]
    assert "strategy_1" in ids and "strategy_2" in ids
    assert rows[0] == ["predictor_id", "min", "q25", "median", "q75", "max"]
    with open(tmp_path / "o" / "MANIFEST.json") as fh:
        manifest = json.load(fh)
    assert manifest["failures"] == []
    assert manifest["replications_completed"] == 3
    assert set(manifest["etas"]) == {"1", "2"}


def test_run_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    for sub in ("r1", "r2"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / sub)]) == 0
    for name in ("losses.csv", "summary.csv", "plot_data.json", "MANIFEST.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_run_parallel_matches_serial_bytes(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "p"),
                 "--jobs", "2"]) == 0
    assert (tmp_path / "s" / "losses.csv").read_bytes() == (
        tmp_path / "p" / "losses.csv"
    ).read_bytes()


def test_run_exports_weight_trajectories(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", export_weights=True, T=128)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_rows(tmp_path / "o" / "weights_strategy_1.csv")
    n = len(rows[0]) - 1
    assert rows[0] == ["t"] + [f"alpha_{i}" for i in range(1, n + 1)]
    assert len(rows) == 129
    first = np.array([float(v) for v in rows[1][1:]])
    np.testing.assert_allclose(first, np.full(n, 1.0 / n))
    weights = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-9)


def test_run_reports_replication_failures_with_exit_3(tmp_path, monkeypatch, capsys):
    import aggfc.cli as cli
    import aggfc.evaluation as ev

    real_sim = ev.simulate_tvar

    def sabotage(params, T, innovations, seed):
        real = real_sim(params, T, innovations, seed)
        if seed == 11:
            bad = np.array(real.x)
            bad[0] = np.inf
            object.__setattr__(real, "x", bad)
        return real

    monkeypatch.setattr(ev, "simulate_tvar", sabotage)
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "failed" in capsys.readouterr().err
    with open(tmp_path / "o" / "MANIFEST.json") as fh:
        manifest = json.load(fh)
    assert manifest["replications_completed"] == 2
    assert manifest["failures"][0]["replication"] == 1
    # partial results are still flushed
    assert (tmp_path / "o" / "losses.csv").exists()


def test_params_csv_round_trip(tmp_path):
    params = synthesize_params(d=3, T_grid=64, gamma=0.7, seed=9)
    path = tmp_path / "p.csv"
    csvio.write_params_csv(path, params)
    again = csvio.read_params_csv(path)
    np.testing.assert_array_equal(again.theta, params.theta)
    np.testing.assert_array_equal(again.sigma, params.sigma)
    np.testing.assert_allclose(again.delta, params.delta, rtol=1e-12)


def test_run_strategy_flag_restricts_columns(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--strategy", "1"]) == 0
    ids = [r[0] for r in read_rows(tmp_path / "o" / "summary.csv")[1:]]
    assert "strategy_1" in ids and "strategy_2" not in ids


def test_run_svg_boxplot(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--svg"]) == 0
    svg = (tmp_path / "o" / "boxplot.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


# --- config validation --------------------------------------------------------------


def test_missing_config_file_exits_1(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")]) == 1
    assert "config error" in capsys.readouterr().err


def test_invalid_json_exits_1_with_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"d\": oops\n}")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "bad.json:2" in err


def test_semantic_config_error_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", T=3)  # violates T >= 2 d
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "T must be at least" in capsys.readouterr().err


def test_unstable_file_paths_rejected_before_simulation(tmp_path, capsys):
    pfile = tmp_path / "paths.csv"
    pfile.write_text(
        "u,theta_1,sigma\n0.0,0.5,1.0\n0.5,1.3,1.0\n1.0,0.5,1.0\n"
    )
    cfg = write_config(tmp_path / "cfg.json", d=1,
                       paths={"source": "file", "file": str(pfile)})
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "config error" in err and "unstable" in err


# --- check and bench ----------------------------------------------------------------


def test_check_single_suite_passes(capsys):
    assert main(["check", "decay"]) == 0
    assert "decay: 1 checks, ok" in capsys.readouterr().out


def test_check_reports_violations_with_exit_2(tmp_path, monkeypatch, capsys):
    from aggfc.checks import CheckResult
    import aggfc.cli as cli

    def broken_suite():
        return CheckResult("decay", n_checked=1, violations=[{"instance": 0}])

    monkeypatch.setitem(cli._SUITES, "decay", broken_suite)
    assert main(["check", "decay", "--out", str(tmp_path)]) == 2
    assert (tmp_path / "violations_decay.json").exists()
    assert "violation" in capsys.readouterr().out


def test_check_rejects_unknown_suite(capsys):
    with pytest.raises(SystemExit):
        main(["check", "nonsense"])
