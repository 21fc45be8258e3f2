"""Seeded reproductions of the theta sweep and the efficiency-reversal histogram."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .interaction import ThetaFamily, optimal_unitary
from .linalg import haar_unitary
from .states import gibbs_populations
from .strong import StrongReport, strong_cycle
from .tolerances import TOL
from .weak import NotAnEngine, SystemSpec

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("trial_id", "theta", "eta_weak", "eta_str", "d_hot", "d_cold",
                 "delta_Ed_hot", "delta_Ed_cold", "engine_valid", "sufficient_condition")
REVERSAL_COLUMNS = tuple(c for c in SWEEP_COLUMNS if c != "theta")
HIST_RANGE = (0.4, 0.75)
HIST_WIDTH = 0.005
MAX_RESAMPLES = 1000


class ConfigError(ValueError):
    pass


def _default_theta_grid() -> tuple[float, ...]:
    return tuple(float(t) for t in np.linspace(0.0, 0.02, 41))


@dataclass(frozen=True)
class ExperimentConfig:
    beta_c: float = 2.0
    beta_h: float = 0.5
    e_cold: tuple[float, ...] = (0.6, 1.4)
    hot_scale: float = 2.0
    bath_cold: tuple[float, ...] = tuple(0.5 + k for k in range(16))
    bath_hot: tuple[float, ...] = tuple(2.0 + k for k in range(16))
    theta_grid: tuple[float, ...] = field(default_factory=_default_theta_grid)
    trials: int | None = None  # None: 50 for the sweep, 1000 for the reversal
    jitter_halfwidth: float = 0.3
    jitter_cold: bool = False
    master_seed: int = 0
    output_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        for name in ("e_cold", "bath_cold", "bath_hot", "theta_grid"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if any(not 0.0 <= t <= 1.0 for t in self.theta_grid) or not self.theta_grid:
            raise ConfigError("theta values must lie in [0, 1]")
        if self.trials is not None and (int(self.trials) != self.trials or self.trials < 1):
            raise ConfigError("trials must be a positive integer")
        if self.jitter_halfwidth < 0:
            raise ConfigError("jitter_halfwidth must be non-negative")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        try:
            self.system()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def system(self, bath_hot=None, bath_cold=None) -> SystemSpec:
        e_cold = np.array(self.e_cold)
        return SystemSpec(
            e_cold=e_cold,
            e_hot=self.hot_scale * e_cold,
            bath_cold=np.array(self.bath_cold if bath_cold is None else bath_cold),
            bath_hot=np.array(self.bath_hot if bath_hot is None else bath_hot),
            beta_c=self.beta_c,
            beta_h=self.beta_h,
        )

    def n_trials(self, experiment: str) -> int:
        if self.trials is not None:
            return int(self.trials)
        return 50 if experiment == "sweep" else 1000

    def resolved(self, experiment: str) -> dict[str, Any]:
        d = asdict(self)
        d["trials"] = self.n_trials(experiment)
        return d


def load_config(path: str | Path | None, **overrides) -> ExperimentConfig:
    """Read a JSON config (every field optional) and apply non-None overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def substream_seed(master_seed: int, experiment: str, trial_id: int) -> int:
    """Stable 64-bit seed of one trial, independent of scheduling."""
    key = f"{int(master_seed)}/{experiment}/{int(trial_id)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def trial_rng(master_seed: int, experiment: str, trial_id: int) -> np.random.Generator:
    return np.random.default_rng(substream_seed(master_seed, experiment, trial_id))


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    theta: float | None
    eta_str: float | NotAnEngine
    eta_weak: float | NotAnEngine
    d_hot: float
    d_cold: float
    delta_ed_hot: float
    delta_ed_cold: float
    engine_valid: bool
    sufficient_condition: bool
    carnot_ok: bool
    resamples: int = 0

    @classmethod
    def from_report(cls, trial_id: int, theta: float | None, r: StrongReport,
                    resamples: int = 0) -> "TrialRecord":
        return cls(trial_id, theta, r.eta_ratio, r.eta_weak, r.d_hot, r.d_cold,
                   r.delta_e_d_h, r.delta_e_d_c, r.engine_valid,
                   r.sufficient_condition, r.carnot_ok, resamples)

    def row(self, with_theta: bool) -> list[str]:
        def num(x):
            return "" if isinstance(x, NotAnEngine) else repr(float(x))
        cells = [str(self.trial_id)]
        if with_theta:
            cells.append(repr(float(self.theta)))
        cells += [num(self.eta_weak), num(self.eta_str), num(self.d_hot), num(self.d_cold),
                  num(self.delta_ed_hot), num(self.delta_ed_cold),
                  str(self.engine_valid).lower(), str(self.sufficient_condition).lower()]
        return cells


def sweep_trial(config: ExperimentConfig, trial_id: int) -> list[TrialRecord]:
    """One Haar draw per bath, evaluated along the whole theta grid."""
    rng = trial_rng(config.master_seed, "sweep", trial_id)
    spec = config.system()
    d_hot = spec.d_system * spec.bath_hot.size
    d_cold = spec.d_system * spec.bath_cold.size
    hot = ThetaFamily(haar_unitary(d_hot, rng))
    cold = ThetaFamily(haar_unitary(d_cold, rng))
    return [TrialRecord.from_report(trial_id, theta, strong_cycle(spec, hot(theta), cold(theta)))
            for theta in config.theta_grid]


def _jitter(values: tuple[float, ...], halfwidth: float, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    base = np.array(values)
    for attempt in range(MAX_RESAMPLES):
        x = np.sort(base + rng.uniform(-halfwidth, halfwidth, base.size))
        if base.size < 2 or np.min(np.diff(x)) > TOL.gap:
            return x, attempt
    raise ConfigError("jitter keeps producing degenerate bath spectra")


def reversal_trial(config: ExperimentConfig, trial_id: int) -> TrialRecord:
    """Jittered hot bath, optimal permutation couplings on both baths."""
    rng = trial_rng(config.master_seed, "reversal", trial_id)
    bath_hot, resamples = _jitter(config.bath_hot, config.jitter_halfwidth, rng)
    bath_cold = np.array(config.bath_cold)
    if config.jitter_cold:
        bath_cold, extra = _jitter(config.bath_cold, config.jitter_halfwidth, rng)
        resamples += extra
    spec = config.system(bath_hot=bath_hot, bath_cold=bath_cold)
    u_hot = optimal_unitary(spec.p_cold, gibbs_populations(spec.bath_hot, spec.beta_h),
                            spec.e_hot, spec.bath_hot)
    u_cold = optimal_unitary(spec.q_hot, gibbs_populations(spec.bath_cold, spec.beta_c),
                             spec.e_cold, spec.bath_cold)
    return TrialRecord.from_report(trial_id, None, strong_cycle(spec, u_hot, u_cold), resamples)


def _run_trials(fn, config: ExperimentConfig, n: int) -> list:
    ids = range(n)
    if config.workers == 1:
        return [fn(config, i) for i in ids]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, [config] * n, ids, chunksize=max(1, n // (4 * config.workers))))


def render_csv(records: list[TrialRecord], experiment: str) -> str:
    with_theta = experiment == "sweep"
    buf = io.StringIO()
    buf.write(f"# otto-{experiment} schema v{SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS if with_theta else REVERSAL_COLUMNS)
    for rec in records:
        writer.writerow(rec.row(with_theta))
    return buf.getvalue()


def _valid_etas(records) -> np.ndarray:
    return np.array([r.eta_str for r in records if r.engine_valid], dtype=float)


def _theorem_violations(records) -> int:
    return sum(1 for r in records if r.engine_valid and r.sufficient_condition
               and r.eta_str > r.eta_weak + 1e-9)


def sweep_summary(config: ExperimentConfig, records: list[TrialRecord]) -> dict[str, Any]:
    eta_weak = records[0].eta_weak
    per_theta = []
    for theta in config.theta_grid:
        rows = [r for r in records if r.theta == theta]
        etas = _valid_etas(rows)
        per_theta.append({
            "theta": theta,
            "n_valid": int(etas.size),
            "n_invalid": len(rows) - int(etas.size),
            "mean": float(etas.mean()) if etas.size else None,
            "min": float(etas.min()) if etas.size else None,
            "max": float(etas.max()) if etas.size else None,
        })
    valid = [r for r in records if r.engine_valid]
    below = sum(1 for r in valid if r.eta_str <= r.eta_weak + 1e-9)
    return {
        "experiment": "sweep",
        "eta_weak": None if isinstance(eta_weak, NotAnEngine) else eta_weak,
        "per_theta": per_theta,
        "n_points": len(records),
        "n_invalid": len(records) - len(valid),
        "fraction_at_or_below_weak": below / len(valid) if valid else None,
        "carnot_violations": sum(1 for r in valid if not r.carnot_ok),
        "sufficient_condition_violations": _theorem_violations(records),
    }


def histogram(values: np.ndarray) -> dict[str, Any]:
    lo, hi = HIST_RANGE
    n_bins = int(round((hi - lo) / HIST_WIDTH))
    edges = lo + HIST_WIDTH * np.arange(n_bins + 1)
    counts, _ = np.histogram(values[(values >= lo) & (values <= hi)], bins=edges)
    return {
        "edges": [round(float(e), 10) for e in edges],
        "counts": [int(c) for c in counts],
        "underflow": int(np.sum(values < lo)),
        "overflow": int(np.sum(values > hi)),
    }


def reversal_summary(config: ExperimentConfig, records: list[TrialRecord]) -> dict[str, Any]:
    valid = [r for r in records if r.engine_valid]
    etas = _valid_etas(records)
    reversed_ = sum(1 for r in valid if r.eta_str > r.eta_weak)
    return {
        "experiment": "reversal",
        "eta_weak": records[0].eta_weak if valid else None,
        "n_trials": len(records),
        "n_valid": len(valid),
        "excluded_not_an_engine": len(records) - len(valid),
        "resampled_jitters": sum(r.resamples for r in records),
        "fraction_reversed": reversed_ / len(valid) if valid else None,
        "n_d_hot_negative": sum(1 for r in records if r.d_hot < 0),
        "n_d_cold_nonpositive": sum(1 for r in records if r.d_cold <= 1e-12),
        "eta_mean": float(etas.mean()) if etas.size else None,
        "histogram": histogram(etas),
        "carnot_violations": sum(1 for r in valid if not r.carnot_ok),
        "sufficient_condition_violations": _theorem_violations(records),
    }


@dataclass
class ExperimentResult:
    experiment: str
    records: list[TrialRecord]
    summary: dict[str, Any]
    csv_text: str

    def write(self, out: str | Path) -> tuple[Path, Path]:
        out = Path(out)
        summary_path = out.with_suffix(".summary.json")
        out.write_text(self.csv_text)
        summary_path.write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")
        return out, summary_path


def _run(experiment: str, fn, summarise, config: ExperimentConfig) -> ExperimentResult:
    start = time.perf_counter()
    n = config.n_trials(experiment)
    results = _run_trials(fn, config, n)
    records = [r for chunk in results for r in (chunk if isinstance(chunk, list) else [chunk])]
    summary = summarise(config, records)
    summary["config"] = config.resolved(experiment)
    summary["duration_s"] = round(time.perf_counter() - start, 3)
    return ExperimentResult(experiment, records, summary, render_csv(records, experiment))


def run_sweep(config: ExperimentConfig) -> ExperimentResult:
    return _run("sweep", sweep_trial, sweep_summary, config)


def run_reversal(config: ExperimentConfig) -> ExperimentResult:
    return _run("reversal", reversal_trial, reversal_summary, config)


def with_workers(config: ExperimentConfig, workers: int) -> ExperimentConfig:
    return replace(config, workers=workers)
