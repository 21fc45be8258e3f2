"""Interaction Hamiltonians built from decoupling unitaries.

Any coupling compatible with a unitary decoupling stroke ``U_d`` has the form

    H_SB = U_d^dag H_0 U_d + a I - H_0,     H_0 = H_S (x) I + I (x) H_B,

with the constant ``a`` fixed by requiring that switching the coupling on costs
no work. The total Hamiltonian is then a unitary rotation of ``H_0`` shifted by
``a``, so the joint Gibbs state is ``U_d^dag (rho_S^eq (x) rho_B) U_d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    NotUnitaryError,
    dagger,
    eigh,
    kron,
    unitarity_defect,
    unitary_eig,
)
from .states import relative_entropy_to_gibbs
from .tolerances import TOL


class InteractionError(ValueError):
    """An interaction Hamiltonian violates one of its defining identities."""


def free_hamiltonian(h_s: np.ndarray, h_b: np.ndarray) -> np.ndarray:
    """``H_S (x) I + I (x) H_B``."""
    return kron(h_s, np.eye(h_b.shape[0])) + kron(np.eye(h_s.shape[0]), h_b)


def coupling_cost(h_sb: np.ndarray, rho_0: np.ndarray) -> float:
    """``Tr[H_SB rho_0]`` relative to ``max(1, ||H_SB||_F)``."""
    val = np.einsum("ij,ji->", h_sb, rho_0).real
    return abs(float(val)) / max(1.0, float(np.linalg.norm(h_sb)))


@dataclass(frozen=True)
class InteractionSpec:
    u_d: np.ndarray
    h_sb: np.ndarray
    a: float
    stage: str | None = None


def interaction_from_unitary(
    u_d: np.ndarray,
    h_s: np.ndarray,
    h_b: np.ndarray,
    rho_s_in: np.ndarray,
    rho_b: np.ndarray,
    stage: str | None = None,
    check: bool = True,
) -> InteractionSpec:
    u_d = np.asarray(u_d, dtype=complex)
    n = h_s.shape[0] * h_b.shape[0]
    if u_d.shape != (n, n):
        raise ValueError(f"unitary has shape {u_d.shape}, joint space has dimension {n}")
    if unitarity_defect(u_d) > TOL.unitary:
        raise NotUnitaryError(f"U_d is not unitary (defect {unitarity_defect(u_d):.3e})")
    h0 = free_hamiltonian(h_s, h_b)
    rho_0 = kron(rho_s_in, rho_b)
    rotated = dagger(u_d) @ h0 @ u_d
    a = float(np.einsum("ij,ji->", h0, rho_0).real
              - np.einsum("ij,ji->", h0, u_d @ rho_0 @ dagger(u_d)).real)
    h_sb = rotated + a * np.eye(n) - h0
    h_sb = (h_sb + dagger(h_sb)) / 2
    if check:
        cost = coupling_cost(h_sb, rho_0)
        if cost > TOL.coupling_soft:
            raise InteractionError(f"switching on H_SB costs work ({cost:.3e})")
        shifted = eigh(h0 + h_sb).eigenvalues
        bare = eigh(h0).eigenvalues + a
        if np.max(np.abs(shifted - bare)) > TOL.spectral_shift:
            raise InteractionError("spectrum of H_0 + H_SB is not that of H_0 shifted by a")
    return InteractionSpec(u_d=u_d, h_sb=h_sb, a=a, stage=stage)


class ThetaFamily:
    """One-parameter group ``theta -> exp(i H theta)`` through a fixed unitary.

    ``H`` is the principal Hermitian logarithm of the unitary, so ``theta = 0``
    gives the identity and ``theta = 1`` the unitary itself. The eigenbasis is
    computed once and reused for every ``theta``.
    """

    def __init__(self, u: np.ndarray):
        self.phases, self.basis = unitary_eig(np.asarray(u, dtype=complex))

    @property
    def generator(self) -> np.ndarray:
        z = self.basis
        return (z * self.phases) @ dagger(z)

    def __call__(self, theta: float) -> np.ndarray:
        z = self.basis
        return (z * np.exp(1j * theta * self.phases)) @ dagger(z)


def theta_unitary(u_haar: np.ndarray, theta: float) -> np.ndarray:
    return ThetaFamily(u_haar)(theta)


@dataclass(frozen=True)
class EnergyPopulationLists:
    """Product energies sorted ascending and the matching product populations.

    ``index_map[k]`` is the flat index ``i * d_bath + j`` of the k-th entry.
    """

    energies: np.ndarray
    populations: np.ndarray
    index_map: np.ndarray
    d_bath: int

    def pair(self, k: int) -> tuple[int, int]:
        return divmod(int(self.index_map[k]), self.d_bath)


def product_lists(p, q_b, eps, eps_b) -> tuple[np.ndarray, np.ndarray]:
    """Flat product energies ``eps_i + eps'_j`` and populations ``p_i q'_j``."""
    e = np.add.outer(np.asarray(eps, float), np.asarray(eps_b, float)).ravel()
    pop = np.outer(np.asarray(p, float), np.asarray(q_b, float)).ravel()
    return e, pop


def energy_population_lists(p, q_b, eps, eps_b) -> EnergyPopulationLists:
    e, pop = product_lists(p, q_b, eps, eps_b)
    # stable sort: energy ties fall back to (i, j) order
    order = np.argsort(e, kind="stable")
    return EnergyPopulationLists(e[order], pop[order], order, len(eps_b))


def optimal_permutation(p, q_b, eps, eps_b) -> np.ndarray:
    """Flat index map ``sigma`` with ``U_d |Phi_m> = |Phi_sigma[m]>``.

    The k-th largest product population is sent to the k-th lowest product
    energy.
    """
    lists = energy_population_lists(p, q_b, eps, eps_b)
    _, pop = product_lists(p, q_b, eps, eps_b)
    by_population = np.argsort(-pop, kind="stable")
    sigma = np.empty_like(lists.index_map)
    sigma[by_population] = lists.index_map
    return sigma


def permutation_matrix(sigma: Sequence[int]) -> np.ndarray:
    sigma = np.asarray(sigma)
    u = np.zeros((sigma.size, sigma.size), dtype=complex)
    u[sigma, np.arange(sigma.size)] = 1.0
    return u


def optimal_unitary(p, q_b, eps, eps_b) -> np.ndarray:
    """Permutation unitary (product eigenbasis) that minimises ``d``."""
    p, q_b = np.asarray(p, float), np.asarray(q_b, float)
    if abs(p.sum() - 1) > TOL.density or abs(q_b.sum() - 1) > TOL.density:
        raise ValueError("populations must sum to one")
    return permutation_matrix(optimal_permutation(p, q_b, eps, eps_b))


def doubly_stochastic_from_unitary(u: np.ndarray) -> np.ndarray:
    """``A[m, n] = |U[m, n]|^2``."""
    if unitarity_defect(u) > TOL.unitary:
        raise NotUnitaryError("input is not unitary")
    return np.abs(u) ** 2


def _product_basis(h_s: np.ndarray, h_b: np.ndarray):
    s, b = eigh(h_s), eigh(h_b)
    energies = np.add.outer(s.eigenvalues, b.eigenvalues).ravel()
    return energies, kron(s.eigenvectors, b.eigenvectors)


def d_value_algebraic(u_d, h_s, h_b, rho_s_in, rho_b, beta) -> float:
    """``beta (E^T A P - E^T P)`` in the product energy eigenbasis."""
    energies, phi = _product_basis(h_s, h_b)
    a = np.abs(dagger(phi) @ u_d @ phi) ** 2
    pops = np.real(np.diagonal(dagger(phi) @ kron(rho_s_in, rho_b) @ phi))
    return float(beta * (energies @ a @ pops - energies @ pops))


def d_value(u_d, h_s, h_b, rho_s_in, rho_b, beta: float) -> float:
    """``D(rho_S (x) rho_B || rho_SB) - D(rho_S || rho_S^eq)`` for the coupling induced by ``U_d``.

    The value is also computed algebraically from ``|<Phi_m|U_d|Phi_n>|^2``;
    the two must agree.
    """
    spec = interaction_from_unitary(u_d, h_s, h_b, rho_s_in, rho_b)
    rho_0 = kron(rho_s_in, rho_b)
    # ln rho_SB = -beta H_tot - ln Z_SB, used directly
    definitional = (
        relative_entropy_to_gibbs(rho_0, free_hamiltonian(h_s, h_b) + spec.h_sb, beta)
        - relative_entropy_to_gibbs(rho_s_in, h_s, beta))
    algebraic = d_value_algebraic(u_d, h_s, h_b, rho_s_in, rho_b, beta)
    if abs(definitional - algebraic) > TOL.form_agreement:
        raise InteractionError(
            f"d disagrees between forms: {definitional!r} vs {algebraic!r}")
    return definitional


def majorizes(x, y, atol: float = 1e-12, total_atol: float = 1e-10) -> bool:
    """True when ``x`` majorizes ``y`` (written ``y < x``)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if abs(x.sum() - y.sum()) > total_atol:
        return False
    sx = np.cumsum(np.sort(x)[::-1])
    sy = np.cumsum(np.sort(y)[::-1])
    return bool(np.all(sy <= sx + atol))


def is_doubly_stochastic(a: np.ndarray, atol: float = 1e-8) -> bool:
    a = np.asarray(a, float)
    return (a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.all(a >= -atol))
            and np.allclose(a.sum(axis=0), 1, atol=atol, rtol=0)
            and np.allclose(a.sum(axis=1), 1, atol=atol, rtol=0))


def rearrangement_bound(e, p) -> float:
    """``E^T P_desc``: the smallest value of ``E^T A P`` over doubly stochastic ``A``."""
    return float(np.sort(np.asarray(e, float)) @ np.sort(np.asarray(p, float))[::-1])


def rearrangement_check(e, p, a, atol: float = 1e-12) -> bool:
    """Check ``E^T A P >= E^T P_desc`` for ascending ``E``."""
    e, p = np.asarray(e, float), np.asarray(p, float)
    if np.any(np.diff(e) < 0):
        raise ValueError("E must be sorted ascending")
    if not is_doubly_stochastic(a):
        raise ValueError("A is not doubly stochastic")
    if a.shape != (e.size, e.size) or p.shape != e.shape:
        raise ValueError("shape mismatch")
    return bool(e @ a @ p >= rearrangement_bound(e, p) - atol)
