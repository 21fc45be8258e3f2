"""Dense complex linear algebra used throughout the package.

Composite spaces are flattened with the system index slow and the bath index
fast, ``flat = i * d_bath + j``, which is the convention of :func:`numpy.kron`.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .tolerances import TOL


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


class SpectralDecomposition(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermiticity_defect(h: np.ndarray) -> float:
    """Relative Frobenius distance between ``h`` and its adjoint."""
    return _fro(h - dagger(h)) / max(1.0, _fro(h))


def unitarity_defect(u: np.ndarray) -> float:
    return _fro(dagger(u) @ u - np.eye(u.shape[0]))


def _square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with ``out[i*dB + k, j*dB + l] = a[i, j] * b[k, l]``."""
    return np.kron(a, b)


def partial_trace(m: np.ndarray, d_system: int, d_bath: int, keep: str = "system") -> np.ndarray:
    """Reduce an operator on the ``d_system * d_bath`` space.

    ``keep="system"`` traces out the bath, ``keep="bath"`` traces out the system.
    """
    m = _square(m)
    if m.shape[0] != d_system * d_bath:
        raise ValueError(
            f"dimension {m.shape[0]} does not factor as {d_system} x {d_bath}")
    t = m.reshape(d_system, d_bath, d_system, d_bath)
    if keep == "system":
        return np.einsum("ikjk->ij", t)
    if keep == "bath":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'system' or 'bath', not {keep!r}")


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # make the first non-negligible component of every column real positive
    idx = np.argmax(np.abs(v) > 1e-8, axis=0)
    lead = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(lead) / lead).conj()


def eigh(h: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    h = _square(h, "Hermitian input")
    if hermiticity_defect(h) > TOL.herm:
        raise NotHermitianError(
            f"input is not Hermitian (defect {hermiticity_defect(h):.3e})")
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    return SpectralDecomposition(w, _fix_phases(v))


def hermitian_function(h: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Return ``V f(diag(lambda)) V^dag``; ``f`` acts elementwise on the spectrum.

    ``f`` may return complex values (as for ``exp(i theta lambda)``), in which
    case the result is normal rather than Hermitian.
    """
    w, v = eigh(h)
    fw = np.asarray(f(w))
    if not np.all(np.isfinite(fw)):
        raise ValueError("function is undefined on part of the spectrum")
    return (v * fw) @ dagger(v)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of U(n).

    QR of a complex Ginibre matrix, with R's diagonal phases moved into Q so the
    decomposition is unique and the law is invariant.
    """
    if n < 1:
        raise ValueError("n must be positive")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def unitary_eig(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in (-pi, pi] and unitary eigenvectors of a unitary matrix.

    Uses a complex Schur form; for a normal matrix the triangular factor is
    diagonal, which is asserted.
    """
    u = _square(u, "unitary input")
    if unitarity_defect(u) > TOL.unitary:
        raise NotUnitaryError(f"input is not unitary (defect {unitarity_defect(u):.3e})")
    t, z = scipy.linalg.schur(u.astype(complex), output="complex")
    off = t - np.diag(np.diagonal(t))
    if _fro(off) > TOL.schur_offdiag:
        raise NotUnitaryError(
            f"Schur factor is not diagonal (off-diagonal {_fro(off):.3e})")
    phases = np.angle(np.diagonal(t))
    phases[phases <= -np.pi] = np.pi
    return phases, z


def hermitian_log_unitary(u: np.ndarray) -> np.ndarray:
    """Hermitian ``H`` with ``exp(iH) = U`` on the principal branch."""
    phases, z = unitary_eig(u)
    h = (z * phases) @ dagger(z)
    return (h + dagger(h)) / 2


def expm_i(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(i t H)`` for Hermitian ``H``."""
    return hermitian_function(h, lambda w: np.exp(1j * t * w))
