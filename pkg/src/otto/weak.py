"""Weak-coupling quantum Otto cycle.

The adiabatic strokes keep the populations and map the i-th level of the cold
Hamiltonian onto the i-th level of the hot one, so every quantity follows from
the two index-aligned spectra and the two Gibbs distributions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .states import expectation, finite, gibbs_populations, relative_entropy, vn_entropy
from .tolerances import TOL


class NotAnEngine(enum.Enum):
    """Efficiency placeholder for cycles that violate ``Q_in > Q_out > 0``."""

    MARKER = "not-an-engine"

    def __repr__(self) -> str:
        return "<NOT_AN_ENGINE>"


NOT_AN_ENGINE = NotAnEngine.MARKER


class NotAnEngineError(ValueError):
    """Raised where an efficiency is requested for a cycle that is not an engine."""

    def __init__(self, message: str, efficiency: float | None = None):
        super().__init__(message)
        self.efficiency = efficiency


def _spectrum(values, name: str) -> np.ndarray:
    e = np.asarray(values, dtype=float)
    if e.ndim != 1 or e.size == 0:
        raise ValueError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(e)):
        raise ValueError(f"{name} has non-finite entries")
    if e.size > 1 and np.min(np.diff(e)) <= TOL.gap:
        raise ValueError(f"{name} must be strictly increasing (non-degenerate)")
    return e


@dataclass(frozen=True)
class SystemSpec:
    """One cycle instance: system spectra, bath spectra and inverse temperatures.

    ``e_cold[i]`` and ``e_hot[i]`` are the same level before and after the
    compression stroke.
    """

    e_cold: np.ndarray
    e_hot: np.ndarray
    bath_cold: np.ndarray
    bath_hot: np.ndarray
    beta_c: float
    beta_h: float

    def __post_init__(self):
        for name in ("e_cold", "e_hot", "bath_cold", "bath_hot"):
            object.__setattr__(self, name, _spectrum(getattr(self, name), name))
        if self.e_cold.size != self.e_hot.size:
            raise ValueError("e_cold and e_hot must have the same length")
        if not (self.beta_c >= 0 and self.beta_h >= 0):
            raise ValueError("inverse temperatures must be non-negative")
        if self.beta_h > self.beta_c:
            raise ValueError("the hot bath must be hotter: beta_h <= beta_c")

    @property
    def d_system(self) -> int:
        return self.e_cold.size

    @property
    def carnot(self) -> float:
        return 1.0 - self.beta_h / self.beta_c

    @property
    def p_cold(self) -> np.ndarray:
        """Populations of the cold Gibbs state (carried into the hot stroke)."""
        return gibbs_populations(self.e_cold, self.beta_c)

    @property
    def q_hot(self) -> np.ndarray:
        """Populations of the hot Gibbs state (carried into the cold stroke)."""
        return gibbs_populations(self.e_hot, self.beta_h)

    @classmethod
    def defaults(cls, hot_scale: float = 2.0) -> "SystemSpec":
        e_cold = np.array([0.6, 1.4])
        return cls(
            e_cold=e_cold,
            e_hot=hot_scale * e_cold,
            bath_cold=np.arange(16) + 0.5,
            bath_hot=np.arange(16) + 2.0,
            beta_c=2.0,
            beta_h=0.5,
        )


@dataclass(frozen=True)
class WeakReport:
    w_com: float
    q_in: float
    w_exp: float
    q_out: float
    w_out: float
    delta_s: float
    d_hot: float
    d_cold: float
    engine_valid: bool
    eta_ratio: float | NotAnEngine = field(default=NOT_AN_ENGINE)
    eta_entropy: float | NotAnEngine = field(default=NOT_AN_ENGINE)

    @property
    def eta(self) -> float | NotAnEngine:
        return self.eta_ratio


def is_engine(q_in: float, q_out: float) -> bool:
    return q_in > q_out > 0


def _entropy_terms(spec: SystemSpec) -> tuple[float, float, float]:
    p, q = spec.p_cold, spec.q_hot
    rho_h = np.diag(p).astype(complex)       # state after compression
    rho_h_eq = np.diag(q).astype(complex)    # hot Gibbs state
    rho_c = rho_h_eq                         # state after expansion (same populations)
    rho_c_eq = rho_h
    delta_s = vn_entropy(rho_h_eq) - vn_entropy(rho_h)
    d_hot = finite(relative_entropy(rho_h, rho_h_eq))
    d_cold = finite(relative_entropy(rho_c, rho_c_eq))
    return delta_s, d_hot, d_cold


def _entropy_form(spec: SystemSpec, delta_s: float, d_hot: float, d_cold: float) -> float:
    den = delta_s - d_hot
    if den <= 0:
        raise NotAnEngineError(
            f"Delta S - D_hot = {den!r} <= 0: no heat absorbed from the hot bath")
    return 1.0 - (spec.beta_h / spec.beta_c) * (delta_s + d_cold) / den


def weak_cycle(spec: SystemSpec) -> WeakReport:
    p, q = spec.p_cold, spec.q_hot
    e, eps = spec.e_cold, spec.e_hot
    h_c, h_h = np.diag(e), np.diag(eps)
    rho_c_eq, rho_h_eq = np.diag(p), np.diag(q)

    # rho_S^h has the cold populations on the hot levels, rho_S^c the reverse
    w_com = expectation(h_h, rho_c_eq) - expectation(h_c, rho_c_eq)
    q_in = expectation(h_h, rho_h_eq) - expectation(h_h, rho_c_eq)
    w_exp = expectation(h_c, rho_h_eq) - expectation(h_h, rho_h_eq)
    q_out = expectation(h_c, rho_h_eq) - expectation(h_c, rho_c_eq)
    w_out = -(w_com + w_exp)

    delta_s, d_hot, d_cold = _entropy_terms(spec)
    valid = is_engine(q_in, q_out)
    kwargs = {}
    if valid:
        kwargs["eta_ratio"] = 1.0 - q_out / q_in
        kwargs["eta_entropy"] = _entropy_form(spec, delta_s, d_hot, d_cold)
    return WeakReport(
        w_com=w_com, q_in=q_in, w_exp=w_exp, q_out=q_out, w_out=w_out,
        delta_s=delta_s, d_hot=d_hot, d_cold=d_cold, engine_valid=valid, **kwargs)


def eta_weak_entropy_form(spec: SystemSpec) -> float:
    """Weak efficiency from entropies: ``1 - (bh/bc)(dS + D_c)/(dS - D_h)``."""
    report = weak_cycle(spec)
    if not report.engine_valid:
        raise NotAnEngineError(
            f"Q_in={report.q_in!r}, Q_out={report.q_out!r} violate Q_in > Q_out > 0")
    return _entropy_form(spec, report.delta_s, report.d_hot, report.d_cold)


def two_level_closed_form(eg_c: float, ee_c: float, k: float, beta_c: float, beta_h: float) -> float:
    """Two-level weak efficiency with hot levels ``k`` times the cold ones.

    Equals ``1 - 1/k`` whenever the cycle is an engine.
    """
    if not ee_c > eg_c:
        raise ValueError("excited level must lie above the ground level")
    if k <= 0:
        raise ValueError("scale factor must be positive")
    eg_h, ee_h = k * eg_c, k * ee_c
    pg_c, pe_c = gibbs_populations([eg_c, ee_c], beta_c)
    pg_h, pe_h = gibbs_populations([eg_h, ee_h], beta_h)
    q_out = (pg_h - pg_c) * eg_c + (pe_h - pe_c) * ee_c
    q_in = (pg_h - pg_c) * eg_h + (pe_h - pe_c) * ee_h
    if q_in == 0:
        raise NotAnEngineError("no heat exchanged", efficiency=None)
    eta = 1.0 - q_out / q_in
    if not is_engine(q_in, q_out):
        raise NotAnEngineError(
            f"Q_in={q_in!r}, Q_out={q_out!r}: not an engine", efficiency=eta)
    return eta
