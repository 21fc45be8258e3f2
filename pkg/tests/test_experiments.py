from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from otto.cli import main
from otto.experiments import (
    REVERSAL_COLUMNS,
    SWEEP_COLUMNS,
    ConfigError,
    ExperimentConfig,
    histogram,
    load_config,
    reversal_trial,
    run_reversal,
    run_sweep,
    substream_seed,
    sweep_trial,
)
from otto.verify import run_verify

SMALL = dict(trials=2, theta_grid=[0.0, 0.01, 0.02])


def rows(text: str) -> list[dict]:
    lines = text.splitlines()
    assert lines[0].startswith("# otto-")
    return list(csv.DictReader(lines[1:]))


def test_defaults_resolve():
    cfg = ExperimentConfig()
    assert cfg.n_trials("sweep") == 50 and cfg.n_trials("reversal") == 1000
    assert len(cfg.theta_grid) == 41 and cfg.theta_grid[-1] == 0.02
    assert cfg.bath_cold[-1] == 15.5 and cfg.bath_hot[-1] == 17.0
    assert cfg.system().e_hot.tolist() == [1.2, 2.8]


@pytest.mark.parametrize("bad", [
    {"theta_grid": [1.5]},
    {"trials": 0},
    {"jitter_halfwidth": -0.1},
    {"master_seed": 2**64},
    {"beta_h": 3.0},
])
def test_config_invariants(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad)


def test_load_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"trials": 7, "jitter_cold": True}))
    cfg = load_config(path, master_seed=9, trials=None)
    assert cfg.trials == 7 and cfg.jitter_cold and cfg.master_seed == 9
    assert load_config(path, trials=3).trials == 3
    path.write_text(json.dumps({"trails": 7}))
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_substream_seed_is_stable():
    assert substream_seed(42, "sweep", 3) == substream_seed(42, "sweep", 3)
    assert len({substream_seed(42, e, t) for e in ("sweep", "reversal") for t in range(50)}) == 100
    assert 0 <= substream_seed(2**64 - 1, "sweep", 0) < 2**64


def test_trials_are_order_independent():
    cfg = ExperimentConfig(master_seed=5, **SMALL)
    assert sweep_trial(cfg, 1) == sweep_trial(cfg, 1)
    later = [reversal_trial(cfg, i) for i in (3, 2, 1)]
    assert later[::-1] == [reversal_trial(cfg, i) for i in (1, 2, 3)]


def test_sweep_rows_and_summary():
    res = run_sweep(ExperimentConfig(master_seed=42, **SMALL))
    data = rows(res.csv_text)
    assert tuple(res.csv_text.splitlines()[1].split(",")) == SWEEP_COLUMNS
    assert len(data) == 2 * 3
    for row in (r for r in data if float(r["theta"]) == 0.0):
        assert abs(float(row["eta_str"]) - 0.5) < 1e-9 and float(row["eta_weak"]) == 0.5
    s = res.summary
    assert [p["theta"] for p in s["per_theta"]] == [0.0, 0.01, 0.02]
    assert s["per_theta"][-1]["mean"] < 0.5
    assert s["config"]["trials"] == 2 and s["config"]["master_seed"] == 42
    assert s["carnot_violations"] == 0 and s["sufficient_condition_violations"] == 0


def test_sweep_is_deterministic():
    cfg = ExperimentConfig(master_seed=42, **SMALL)
    assert run_sweep(cfg).csv_text == run_sweep(cfg).csv_text


def test_reversal_rows_and_summary():
    res = run_reversal(ExperimentConfig(master_seed=1, trials=20))
    assert tuple(res.csv_text.splitlines()[1].split(",")) == REVERSAL_COLUMNS
    s = res.summary
    assert s["n_trials"] == 20 and s["n_valid"] + s["excluded_not_an_engine"] == 20
    assert s["fraction_reversed"] > 0.5
    assert sum(s["histogram"]["counts"]) + s["histogram"]["underflow"] + s["histogram"]["overflow"] == s["n_valid"]


def test_zero_jitter_trials_are_identical():
    res = run_reversal(ExperimentConfig(master_seed=3, trials=4, jitter_halfwidth=0.0))
    etas = {r.eta_str for r in res.records}
    assert len(etas) == 1
    assert abs(etas.pop() - 0.56566175937584722) < 1e-12
    assert all(r.d_hot <= 0 and r.d_cold <= 1e-12 for r in res.records)


def test_cold_jitter_switch():
    a = reversal_trial(ExperimentConfig(master_seed=3, trials=1), 0)
    b = reversal_trial(ExperimentConfig(master_seed=3, trials=1, jitter_cold=True), 0)
    assert a.d_hot == b.d_hot and a.eta_str != b.eta_str


def test_not_an_engine_serialises_as_empty_field():
    cfg = ExperimentConfig(master_seed=0, trials=1, theta_grid=[1.0])
    res = run_sweep(cfg)
    row = rows(res.csv_text)[0]
    assert row["engine_valid"] == "false" and row["eta_str"] == ""
    assert res.summary["per_theta"][0]["mean"] is None


def test_histogram_bins():
    h = histogram(np.array([0.3, 0.4, 0.4025, 0.5, 0.75, 0.8]))
    assert len(h["counts"]) == 70 and h["edges"][1] == 0.405
    assert h["underflow"] == 1 and h["overflow"] == 1
    assert h["counts"][0] == 2 and h["counts"][-1] == 1


def test_parallel_matches_serial():
    cfg = ExperimentConfig(master_seed=8, trials=6)
    serial = run_reversal(cfg).csv_text
    parallel = run_reversal(ExperimentConfig(master_seed=8, trials=6, workers=3)).csv_text
    assert serial == parallel


def test_cli_sweep_writes_files(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(cfg), "--seed", "42", "--out", str(out)]) == 0
    first = out.read_bytes()
    summary = json.loads(out.with_suffix(".summary.json").read_text())
    assert summary["config"]["master_seed"] == 42 and "duration_s" in summary
    assert main(["sweep", "--config", str(cfg), "--seed", "42", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_cli_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 50, "master_seed": 1}))
    out = tmp_path / "r.csv"
    assert main(["reversal", "--config", str(cfg), "--seed", "2", "--trials", "3", "--out", str(out)]) == 0
    summary = json.loads(out.with_suffix(".summary.json").read_text())
    assert summary["config"]["trials"] == 3 and summary["config"]["master_seed"] == 2


def test_cli_exit_codes(tmp_path):
    assert main(["sweep", "--seed", "1", "--out", str(tmp_path / "missing" / "x.csv")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"trials": 0}))
    assert main(["sweep", "--seed", "1", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 3
    assert main(["sweep", "--seed", "1"]) == 3
    with pytest.raises(SystemExit):
        main(["sweep", "--out", str(tmp_path / "x.csv")])


def test_cli_verify(tmp_path):
    report = tmp_path / "v.json"
    assert main(["verify", "--instances", "20", "--json", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["passed"] and len(data["checks"]) > 20
    assert main(["verify", "--instances", "20", "--inject-fault", "omit-offset"]) == 1


def test_fault_injection_hits_coupling_check():
    report = run_verify(instances=20, inject_fault="omit-offset", suites=["interaction"])
    failed = {c.name for c in report.checks if not c.passed}
    assert failed == {"coupling_cost_zero"}


@pytest.mark.slow
def test_verify_across_seeds():
    assert run_verify(seeds=range(10), instances=30).passed
