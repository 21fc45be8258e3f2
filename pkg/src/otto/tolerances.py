"""Numerical tolerances shared by every module and test."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10          # relative Frobenius Hermiticity defect
    recon: float = 1e-10         # relative Frobenius eigen-reconstruction error
    lambda_cut: float = 1e-14    # eigenvalues below this count as zero in ln
    unitary: float = 1e-10       # ||U^dag U - I||_F
    schur_offdiag: float = 1e-8  # off-diagonal of Schur factor of a normal matrix
    density: float = 1e-10       # trace / positivity slack of density matrices
    support: float = 1e-10       # weight outside support that makes D infinite
    imag: float = 1e-10          # admissible imaginary residue of Tr[A rho]
    gap: float = 1e-12           # minimal spacing of a non-degenerate spectrum
    coupling_soft: float = 1e-8  # Tr[H_SB rho_0] / max(1, ||H_SB||_F), warn above
    coupling_hard: float = 1e-6  # ... abort above
    spectral_shift: float = 1e-8
    form_agreement: float = 1e-8


TOL = Tolerances()
