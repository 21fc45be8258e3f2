"""Weak- and strong-coupling quantum Otto cycles in finite dimensions."""

from __future__ import annotations

from .interaction import (
    InteractionSpec,
    ThetaFamily,
    d_value,
    interaction_from_unitary,
    majorizes,
    optimal_unitary,
    rearrangement_check,
    theta_unitary,
)
from .linalg import eigh, haar_unitary, kron, partial_trace
from .states import (
    INFINITE,
    gibbs,
    relative_entropy,
    vn_entropy,
)
from .strong import CoupledStage, StrongReport, strong_cycle
from .tolerances import TOL
from .weak import NOT_AN_ENGINE, NotAnEngineError, SystemSpec, WeakReport, weak_cycle

__all__ = [
    "INFINITE", "NOT_AN_ENGINE", "TOL",
    "CoupledStage", "InteractionSpec", "NotAnEngineError", "StrongReport", "SystemSpec",
    "ThetaFamily", "WeakReport",
    "d_value", "eigh", "gibbs", "haar_unitary", "interaction_from_unitary", "kron",
    "majorizes", "optimal_unitary", "partial_trace", "rearrangement_check",
    "relative_entropy", "strong_cycle", "theta_unitary", "vn_entropy", "weak_cycle",
]
