"""Strong-coupling quantum Otto cycle.

Six strokes: compression, hot thermalization of system + bath, decoupling from
the hot bath, expansion, cold thermalization, decoupling from the cold bath.
Only the endpoints of each stroke are evaluated. Operators on the joint space
are written in the product eigenbasis of ``H_S`` and ``H_B``.

Heats of the cold stage are counted positive when flowing into the system.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .interaction import coupling_cost, free_hamiltonian, interaction_from_unitary
from .linalg import kron, partial_trace
from .states import (
    expectation,
    finite,
    gibbs,
    relative_entropy_product,
    relative_entropy_to_gibbs,
    vn_entropy,
)
from .tolerances import TOL
from .weak import NOT_AN_ENGINE, NotAnEngine, SystemSpec, is_engine, weak_cycle


class CouplingCostError(ValueError):
    """Switching on the interaction would cost work."""


class CouplingCostWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class CoupledStage:
    """System + one bath during a thermalization/decoupling pair of strokes."""

    h_s: np.ndarray
    h_b: np.ndarray
    h_sb: np.ndarray
    beta: float
    rho_s_in: np.ndarray

    def __post_init__(self):
        ds, db = self.h_s.shape[0], self.h_b.shape[0]
        if self.h_sb.shape != (ds * db, ds * db):
            raise ValueError("H_SB does not act on the joint space")
        if self.rho_s_in.shape != (ds, ds):
            raise ValueError("incoming state does not match H_S")
        if np.any(self.h_sb):
            cost = coupling_cost(self.h_sb, kron(self.rho_s_in, self.rho_b))
            if cost > TOL.coupling_hard:
                raise CouplingCostError(
                    f"Tr[H_SB (rho_S (x) rho_B)] is {cost:.3e} relative to ||H_SB||")
            if cost > TOL.coupling_soft:
                warnings.warn(f"coupling cost {cost:.3e} above {TOL.coupling_soft}",
                              CouplingCostWarning, stacklevel=2)

    @property
    def d_system(self) -> int:
        return self.h_s.shape[0]

    @property
    def d_bath(self) -> int:
        return self.h_b.shape[0]

    @property
    def rho_b(self) -> np.ndarray:
        return gibbs(self.h_b, self.beta)

    @property
    def rho_s_eq(self) -> np.ndarray:
        return gibbs(self.h_s, self.beta)

    @property
    def h_total(self) -> np.ndarray:
        return free_hamiltonian(self.h_s, self.h_b) + self.h_sb

    def reduce(self, rho_sb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ds, db = self.d_system, self.d_bath
        return partial_trace(rho_sb, ds, db, "system"), partial_trace(rho_sb, ds, db, "bath")


def joint_gibbs(stage: CoupledStage) -> np.ndarray:
    """Gibbs state of ``H_S + H_B + H_SB`` at the stage temperature."""
    return gibbs(stage.h_total, stage.beta)


def thermalization_heat(stage: CoupledStage, rho_sb: np.ndarray) -> float:
    """``Tr[H_S (rho~_S - rho_S)] + Tr[H_SB rho_SB]``; the stroke does no work."""
    rho_s_red, _ = stage.reduce(rho_sb)
    return (expectation(stage.h_s, rho_s_red - stage.rho_s_in)
            + expectation(stage.h_sb, rho_sb))


def thermalization_heat_entropy_form(stage: CoupledStage, rho_sb: np.ndarray) -> float:
    """Same heat from entropies and relative entropies of the joint state."""
    rho_s_red, _ = stage.reduce(rho_sb)
    rho_b = stage.rho_b
    rho_0 = kron(stage.rho_s_in, rho_b)
    d1 = finite(relative_entropy_product(rho_sb, rho_s_red, rho_b))
    d2 = relative_entropy_to_gibbs(rho_0, stage.h_total, stage.beta)
    return (vn_entropy(rho_s_red) - vn_entropy(stage.rho_s_in) - d1 - d2) / stage.beta


def _split(rho_sb: np.ndarray, d_system: int) -> tuple[np.ndarray, np.ndarray]:
    d_bath = rho_sb.shape[0] // d_system
    return (partial_trace(rho_sb, d_system, d_bath, "system"),
            partial_trace(rho_sb, d_system, d_bath, "bath"))


def decoupling_heat(rho_sb: np.ndarray, rho_s_eq: np.ndarray, beta: float) -> float:
    """Heat into the system while ``rho_SB`` is unitarily decoupled to ``rho_S^eq (x) rho_B``.

    ``beta Q_d = S(rho_S^eq) - S(rho~_S) + D(rho_SB || rho~_S (x) rho~_B)``.
    """
    rho_s_red, rho_b_red = _split(rho_sb, rho_s_eq.shape[0])
    mutual = finite(relative_entropy_product(rho_sb, rho_s_red, rho_b_red),
                    "D(rho_SB || rho_S (x) rho_B)")
    return (vn_entropy(rho_s_eq) - vn_entropy(rho_s_red) + mutual) / beta


def decoupling_work(rho_sb, rho_s_eq, h_s, h_sb, beta: float) -> float:
    rho_s_red, _ = _split(rho_sb, h_s.shape[0])
    return (expectation(h_s, rho_s_eq - rho_s_red) - expectation(h_sb, rho_sb)
            - decoupling_heat(rho_sb, rho_s_eq, beta))


def decoupling_cost(stage: CoupledStage, rho_sb: np.ndarray) -> float:
    """Internal-energy change of system + bath over the decoupling stroke.

    Equal to the free-energy change because the stroke is unitary.
    """
    rho_s_red, rho_b_red = stage.reduce(rho_sb)
    return (expectation(stage.h_s, stage.rho_s_eq - rho_s_red)
            + expectation(stage.h_b, stage.rho_b - rho_b_red)
            - expectation(stage.h_sb, rho_sb))


@dataclass(frozen=True)
class StageResult:
    q_th: float
    q_d: float
    w_d: float
    delta_e_d: float
    d_bath: float        # D(rho~_B || rho_B)
    d_joint: float       # D(rho_S (x) rho_B || rho_SB)
    d_system: float      # D(rho_S || rho_S^eq)
    entropy_defect: float  # |S(rho_S^eq (x) rho_B) - S(rho_SB)|
    a: float

    @property
    def d(self) -> float:
        """``D(rho_S (x) rho_B || rho_SB) - D(rho_S || rho_S^eq)``."""
        return self.d_joint - self.d_system


def evaluate_stage(stage: CoupledStage, a: float = 0.0) -> StageResult:
    rho_sb = joint_gibbs(stage)
    rho_s_red, rho_b_red = stage.reduce(rho_sb)
    rho_s_eq, rho_b = stage.rho_s_eq, stage.rho_b
    q_d = decoupling_heat(rho_sb, rho_s_eq, stage.beta)
    w_d = (expectation(stage.h_s, rho_s_eq - rho_s_red)
           - expectation(stage.h_sb, rho_sb) - q_d)
    return StageResult(
        q_th=thermalization_heat(stage, rho_sb),
        q_d=q_d,
        w_d=w_d,
        delta_e_d=decoupling_cost(stage, rho_sb),
        d_bath=relative_entropy_to_gibbs(rho_b_red, stage.h_b, stage.beta),
        d_joint=relative_entropy_to_gibbs(kron(stage.rho_s_in, rho_b), stage.h_total, stage.beta),
        d_system=relative_entropy_to_gibbs(stage.rho_s_in, stage.h_s, stage.beta),
        entropy_defect=abs(vn_entropy(kron(rho_s_eq, rho_b)) - vn_entropy(rho_sb)),
        a=a,
    )


@dataclass(frozen=True)
class StrongReport:
    q_th_h: float
    q_d_h: float
    q_th_c: float
    q_d_c: float
    w_com: float
    w_exp: float
    w_d_h: float
    w_d_c: float
    q_in: float
    q_out: float
    w_out: float
    delta_s: float
    d_bath_h: float
    d_joint_h: float
    d_bath_c: float
    d_joint_c: float
    delta_e_d_h: float
    delta_e_d_c: float
    d_hot: float
    d_cold: float
    eta_weak: float | NotAnEngine
    carnot: float
    engine_valid: bool
    sufficient_condition: bool
    carnot_ok: bool
    unitary_restriction_ok: bool
    eta_ratio: float | NotAnEngine = field(default=NOT_AN_ENGINE)
    eta_entropy: float | NotAnEngine = field(default=NOT_AN_ENGINE)

    @property
    def eta(self) -> float | NotAnEngine:
        return self.eta_ratio

    @property
    def first_law_residual(self) -> float:
        return abs(self.w_out - (self.q_th_h + self.q_d_h + self.q_th_c + self.q_d_c))


def stages(spec: SystemSpec, u_d_hot: np.ndarray, u_d_cold: np.ndarray,
           check: bool = True) -> tuple[tuple[CoupledStage, float], tuple[CoupledStage, float]]:
    """Build the hot and cold coupled stages with couplings induced by the unitaries."""
    out = []
    for h_s, bath, beta, pops, u, name in (
        (np.diag(spec.e_hot), spec.bath_hot, spec.beta_h, spec.p_cold, u_d_hot, "hot"),
        (np.diag(spec.e_cold), spec.bath_cold, spec.beta_c, spec.q_hot, u_d_cold, "cold"),
    ):
        h_s = h_s.astype(complex)
        h_b = np.diag(bath).astype(complex)
        rho_in = np.diag(pops).astype(complex)
        inter = interaction_from_unitary(u, h_s, h_b, rho_in, gibbs(h_b, beta),
                                         stage=name, check=check)
        out.append((CoupledStage(h_s, h_b, inter.h_sb, beta, rho_in), inter.a))
    return out[0], out[1]


def strong_cycle(spec: SystemSpec, u_d_hot: np.ndarray, u_d_cold: np.ndarray) -> StrongReport:
    (hot, a_h), (cold, a_c) = stages(spec, u_d_hot, u_d_cold)
    h = evaluate_stage(hot, a_h)
    c = evaluate_stage(cold, a_c)
    weak = weak_cycle(spec)

    w_th_h = w_th_c = 0.0
    w_out = -(weak.w_com + w_th_h + h.w_d + weak.w_exp + w_th_c + c.w_d)
    q_in = h.q_th + h.q_d
    q_out = -(c.q_th + c.q_d)
    valid = is_engine(q_in, q_out)
    # roundoff floor: at U_d = I both costs are zero up to ~1e-15
    sufficient = h.delta_e_d >= -1e-12 and c.delta_e_d >= -1e-12
    restriction_ok = max(h.entropy_defect, c.entropy_defect) <= TOL.form_agreement

    kwargs = {}
    carnot_ok = True
    if valid:
        eta_ratio = 1.0 - q_out / q_in
        num = weak.delta_s + c.d_bath + c.d_joint
        den = weak.delta_s - h.d_bath - h.d_joint
        kwargs["eta_ratio"] = eta_ratio
        kwargs["eta_entropy"] = 1.0 - (spec.beta_h / spec.beta_c) * num / den
        carnot_ok = eta_ratio < spec.carnot
    return StrongReport(
        q_th_h=h.q_th, q_d_h=h.q_d, q_th_c=c.q_th, q_d_c=c.q_d,
        w_com=weak.w_com, w_exp=weak.w_exp, w_d_h=h.w_d, w_d_c=c.w_d,
        q_in=q_in, q_out=q_out, w_out=w_out, delta_s=weak.delta_s,
        d_bath_h=h.d_bath, d_joint_h=h.d_joint, d_bath_c=c.d_bath, d_joint_c=c.d_joint,
        delta_e_d_h=h.delta_e_d, delta_e_d_c=c.delta_e_d, d_hot=h.d, d_cold=c.d,
        eta_weak=weak.eta_ratio, carnot=spec.carnot,
        engine_valid=valid, sufficient_condition=sufficient, carnot_ok=carnot_ok,
        unitary_restriction_ok=restriction_ok, **kwargs)
