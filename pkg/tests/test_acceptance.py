"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
terminal summary, so they appear even when output capture is on.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from otto.experiments import ExperimentConfig, run_reversal, run_sweep, with_workers
from otto.interaction import ThetaFamily
from otto.linalg import haar_unitary
from otto.strong import strong_cycle
from otto.verify import check_majorization, check_optimal, check_strong, check_weak
from otto.weak import SystemSpec, weak_cycle


@contextmanager
def criterion(label: str):
    info: dict = {}
    try:
        yield info
    except BaseException:
        ACCEPTANCE_LINES.append(f"FAIL  {label}  {_fmt(info)}")
        raise
    ACCEPTANCE_LINES.append(f"PASS  {label}  {_fmt(info)}")


def _fmt(info: dict) -> str:
    return " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in info.items())


@pytest.fixture(scope="module")
def sweep():
    return run_sweep(ExperimentConfig(master_seed=42))


@pytest.fixture(scope="module")
def reversal():
    return run_reversal(ExperimentConfig(master_seed=42))


def test_c1_weak_golden_value():
    with criterion("C1 weak efficiency on defaults is 0.5 within 1e-12") as info:
        info["eta"] = weak_cycle(SystemSpec.defaults()).eta
        assert abs(info["eta"] - 0.5) < 1e-12


def test_c2_carnot_bound(sweep, reversal):
    with criterion("C2 Carnot value 0.75 and every valid efficiency strictly below it") as info:
        spec = SystemSpec.defaults()
        assert abs(spec.carnot - 0.75) < 1e-15
        etas = [r.eta_str for res in (sweep, reversal) for r in res.records if r.engine_valid]
        info["n"] = len(etas)
        info["max_eta"] = max(etas)
        assert all(e < 0.75 for e in etas)
        assert all(r.carnot_ok for res in (sweep, reversal) for r in res.records)


def test_c3a_identity_coupling_reproduces_weak_cycle():
    with criterion("C3a U_d = I reproduces every weak-cycle quantity within 1e-9") as info:
        spec = SystemSpec.defaults()
        s, w = strong_cycle(spec, np.eye(32), np.eye(32)), weak_cycle(spec)
        diffs = {
            "q_in": s.q_in - w.q_in,
            "q_out": s.q_out - w.q_out,
            "w_com": s.w_com - w.w_com,
            "w_exp": s.w_exp - w.w_exp,
            "w_out": s.w_out - w.w_out,
            "w_d_h": s.w_d_h,
            "w_d_c": s.w_d_c,
            "q_d_h": s.q_d_h,
            "q_d_c": s.q_d_c,
            "eta": s.eta - w.eta,
        }
        info["max_diff"] = max(abs(v) for v in diffs.values())
        assert info["max_diff"] < 1e-9


def test_c3b_weak_limit_at_small_theta():
    with criterion("C3b theta = 1e-4 Haar family within 1e-6 of 0.5 for every seed") as info:
        spec = SystemSpec.defaults()
        devs = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            u_h, u_c = ThetaFamily(haar_unitary(32, rng)), ThetaFamily(haar_unitary(32, rng))
            devs.append(abs(strong_cycle(spec, u_h(1e-4), u_c(1e-4)).eta - 0.5))
        info["seeds"] = len(devs)
        info["min_dev"] = min(devs)
        info["max_dev"] = max(devs)
        assert max(devs) < 1e-6


def test_c4_sweep_reproduction(sweep):
    with criterion("C4 theta sweep: mean below weak for theta >= 0.005, >= 95% of points at or below") as info:
        s = sweep.summary
        means = {p["theta"]: p["mean"] for p in s["per_theta"]}
        info["mean_at_0.02"] = means[0.02]
        info["fraction_below"] = s["fraction_at_or_below_weak"]
        info["duration_s"] = s["duration_s"]
        assert all(m < s["eta_weak"] for t, m in means.items() if t >= 0.005)
        below = [r for r in sweep.records if r.engine_valid and r.eta_str <= r.eta_weak + 1e-9]
        assert len(below) / len(sweep.records) >= 0.95
        assert s["duration_s"] < 120


def test_c5_reversal_reproduction(reversal):
    with criterion("C5 reversal: fraction of valid trials above weak efficiency > 0.5 (target 0.8)") as info:
        s = reversal.summary
        info["fraction"] = s["fraction_reversed"]
        info["excluded"] = s["excluded_not_an_engine"]
        info["duration_s"] = s["duration_s"]
        assert s["n_trials"] == 1000
        assert s["fraction_reversed"] > 0.5
        assert s["duration_s"] < 300


def test_c6_identity_suite():
    with criterion("C6 identity suite on >= 1000 randomized instances per identity") as info:
        rng = np.random.default_rng(606)
        checks = check_weak(rng, 1000, 606) + check_strong(rng, 1000, 606)
        info["checks"] = len(checks)
        info["worst"] = max(c.max_error for c in checks)
        failed = [c.name for c in checks if not c.passed or c.instances < 1000]
        assert not failed, failed


def test_c7_majorization_suite():
    with criterion("C7 majorization, rearrangement and exhaustive optimality") as info:
        rng = np.random.default_rng(707)
        checks = check_majorization(rng, 1000, 707) + check_optimal(rng, 1000, 707)
        info["instances"] = sum(c.instances for c in checks)
        failed = [c.name for c in checks if not c.passed]
        assert not failed, failed


def test_c8_sufficient_condition(sweep, reversal):
    with criterion("C8 no row with both decoupling costs >= 0 beats the weak efficiency") as info:
        rows = [r for res in (sweep, reversal) for r in res.records]
        flagged = [r for r in rows if r.engine_valid and r.sufficient_condition]
        bad = [r for r in flagged if r.eta_str > r.eta_weak + 1e-9]
        info["flagged_rows"] = len(flagged)
        info["violations"] = len(bad)
        assert not bad


def test_c9_determinism(sweep, reversal):
    with criterion("C9 identical seeds give byte-identical files, serial or parallel") as info:
        again = run_reversal(ExperimentConfig(master_seed=42))
        par_sweep = run_sweep(with_workers(ExperimentConfig(master_seed=42), 4))
        par_rev = run_reversal(with_workers(ExperimentConfig(master_seed=42), 4))
        info["sweep_bytes"] = len(sweep.csv_text)
        info["reversal_bytes"] = len(reversal.csv_text)
        assert again.csv_text == reversal.csv_text
        assert par_sweep.csv_text == sweep.csv_text
        assert par_rev.csv_text == reversal.csv_text
