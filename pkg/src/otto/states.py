"""Density matrices, Gibbs states and entropies (natural logarithms)."""

from __future__ import annotations

import enum

import numpy as np

from .linalg import _square, eigh, hermiticity_defect
from .tolerances import TOL


class Divergence(enum.Enum):
    """Value of a relative entropy whose first argument leaves the support of the second."""

    INFINITE = "+inf"

    def __repr__(self) -> str:
        return "<Divergence.INFINITE>"


INFINITE = Divergence.INFINITE


class InvalidDensityError(ValueError):
    pass


class DivergentEntropyError(ArithmeticError):
    """A relative entropy that must be finite came out infinite."""


def density(m: np.ndarray, strict: bool = True) -> np.ndarray:
    """Validate ``m`` as a density matrix and return it as a complex array.

    Strict mode rejects any violation. Lenient mode clamps eigenvalues in
    ``[-TOL.density, 0)`` to zero and renormalises, which absorbs roundoff that
    builds up along long chains of 32 x 32 products.
    """
    m = _square(np.asarray(m, dtype=complex), "density matrix")
    if hermiticity_defect(m) > TOL.density:
        raise InvalidDensityError("density matrix is not Hermitian")
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    if w[0] < -TOL.density:
        raise InvalidDensityError(f"negative eigenvalue {w[0]:.3e}")
    tr = float(np.sum(w))
    if strict:
        if abs(tr - 1.0) > TOL.density:
            raise InvalidDensityError(f"trace {tr!r} differs from 1")
        return m
    if abs(tr - 1.0) > 1e-6:
        raise InvalidDensityError(f"trace {tr!r} differs from 1")
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    return (v * w) @ v.conj().T


def gibbs_populations(energies: np.ndarray, beta: float) -> np.ndarray:
    """Boltzmann weights ``exp(-beta E) / Z`` of a spectrum."""
    e = np.asarray(energies, dtype=float)
    x = np.exp(-beta * (e - e.min()))
    return x / x.sum()


def log_partition(energies: np.ndarray, beta: float) -> float:
    """``ln Tr exp(-beta H)`` evaluated stably from the spectrum."""
    e = np.asarray(energies, dtype=float)
    e0 = e.min()
    return float(-beta * e0 + np.log(np.sum(np.exp(-beta * (e - e0)))))


def gibbs(h: np.ndarray, beta: float) -> np.ndarray:
    """Thermal state ``exp(-beta H) / Z``.

    The spectrum is shifted by its minimum before exponentiating; otherwise the
    cold bath (beta * E up to ~34) underflows.
    """
    if beta < 0:
        raise ValueError("inverse temperature must be non-negative")
    w, v = eigh(h)
    p = gibbs_populations(w, beta)
    return (v * p) @ v.conj().T


def _spectrum(rho: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2)


def shannon_entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > TOL.lambda_cut]
    return float(-np.sum(p * np.log(p)))


def vn_entropy(rho: np.ndarray) -> float:
    """``S(rho) = -Tr[rho ln rho]`` with ``0 ln 0 = 0``."""
    return shannon_entropy(_spectrum(_square(rho)))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float | Divergence:
    """``D(rho || sigma) = Tr[rho ln rho] - Tr[rho ln sigma]``.

    Returns :data:`INFINITE` when ``rho`` puts more than ``TOL.support`` of
    weight on the kernel of ``sigma``.
    """
    rho, sigma = _square(rho), _square(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    cross = _cross_entropy(rho, sigma)
    if cross is INFINITE:
        return INFINITE
    return -vn_entropy(rho) - cross


def relative_entropy_to_gibbs(rho: np.ndarray, h: np.ndarray, beta: float) -> float:
    """``D(rho || exp(-beta H)/Z)`` through ``ln sigma = -beta H - ln Z``.

    Thermal states of finite temperature have full support, and using the
    logarithm directly avoids re-diagonalising a state whose smallest
    eigenvalues sit near 1e-14.
    """
    rho, h = _square(rho), _square(h)
    if rho.shape != h.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {h.shape}")
    log_z = log_partition(eigh(h).eigenvalues, beta)
    return -vn_entropy(rho) + beta * expectation(h, rho) + log_z


def _cross_entropy(rho: np.ndarray, sigma: np.ndarray) -> float | Divergence:
    # Tr[rho ln sigma], or INFINITE when rho leaves the support of sigma
    ws, vs = eigh(sigma)
    weights = np.real(np.einsum("ji,jk,ki->i", vs.conj(), rho, vs))
    support = ws > TOL.lambda_cut
    if np.sum(weights[~support]) > TOL.support:
        return INFINITE
    return float(np.sum(weights[support] * np.log(ws[support])))


def relative_entropy_product(rho: np.ndarray, sigma_s: np.ndarray, sigma_b: np.ndarray) -> float | Divergence:
    """``D(rho || sigma_S (x) sigma_B)`` using ``ln(A (x) B) = ln A (x) I + I (x) ln B``."""
    ds, db = sigma_s.shape[0], sigma_b.shape[0]
    rho = _square(rho)
    if rho.shape[0] != ds * db:
        raise ValueError("dimension mismatch")
    t = rho.reshape(ds, db, ds, db)
    cs = _cross_entropy(np.einsum("ikjk->ij", t), sigma_s)
    cb = _cross_entropy(np.einsum("kikj->ij", t), sigma_b)
    if cs is INFINITE or cb is INFINITE:
        return INFINITE
    return -vn_entropy(rho) - cs - cb


def finite(value: float | Divergence, what: str = "relative entropy") -> float:
    """Unwrap a relative entropy that has to be finite for the caller."""
    if value is INFINITE:
        raise DivergentEntropyError(f"{what} is infinite")
    return value


def expectation(a: np.ndarray, rho: np.ndarray) -> float:
    """``Tr[A rho]`` for Hermitian ``A``; the imaginary roundoff is checked, then dropped."""
    a, rho = _square(a), _square(rho)
    if a.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {rho.shape}")
    val = np.einsum("ij,ji->", a, rho)
    scale = max(1.0, float(np.linalg.norm(a)))
    if abs(val.imag) > TOL.imag * scale:
        raise ValueError(f"Tr[A rho] has imaginary part {val.imag:.3e}")
    return float(val.real)
