"""Cross-module identity checks on randomized instances at fixed seeds."""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from .interaction import (
    ThetaFamily,
    coupling_cost,
    d_value,
    d_value_algebraic,
    doubly_stochastic_from_unitary,
    free_hamiltonian,
    interaction_from_unitary,
    majorizes,
    optimal_unitary,
    product_lists,
    rearrangement_check,
)
from .linalg import dagger, eigh, haar_unitary, hermitian_log_unitary, kron, partial_trace
from .states import (
    gibbs,
    gibbs_populations,
    log_partition,
    relative_entropy,
    relative_entropy_product,
)
from .strong import evaluate_stage, joint_gibbs, stages, strong_cycle, thermalization_heat_entropy_form
from .tolerances import TOL
from .weak import SystemSpec, weak_cycle

DEFAULT_SEEDS = (0,)
FAULTS = ("omit-offset",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    instances: int
    max_error: float
    tolerance: float
    seed: int
    detail: str = ""


# -- random instances -------------------------------------------------------

def random_spectrum(rng: np.random.Generator, n: int, low=0.0, spread=3.0) -> np.ndarray:
    gaps = rng.uniform(0.05, 1.0, n)
    e = low + np.cumsum(gaps)
    return e * spread / max(e[-1], 1e-9) if n > 1 else e


def random_system(rng: np.random.Generator, ds: int | None = None, db: int | None = None,
                  engine: bool = False) -> SystemSpec:
    """Random spec; with ``engine`` the weak cycle is guaranteed to be an engine."""
    while True:
        n = ds or int(rng.integers(2, 5))
        m = db or int(rng.integers(2, 5))
        e_cold = random_spectrum(rng, n, rng.uniform(0, 1), rng.uniform(1, 3))
        k = rng.uniform(1.2, 3.0)
        beta_c = rng.uniform(0.5, 3.0)
        beta_h = beta_c * rng.uniform(0.1, 0.8)
        spec = SystemSpec(
            e_cold=e_cold,
            e_hot=k * e_cold + (0 if engine else rng.uniform(0, 0.1, n).cumsum()),
            bath_cold=random_spectrum(rng, m, 0, rng.uniform(1, 6)),
            bath_hot=random_spectrum(rng, m, 0, rng.uniform(1, 6)),
            beta_c=beta_c,
            beta_h=beta_h,
        )
        if not engine or weak_cycle(spec).engine_valid:
            return spec


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar draw, a partial rotation towards one, or a random permutation."""
    kind = rng.choice(3, p=[0.1, 0.8, 0.1])
    if kind == 0:
        return haar_unitary(n, rng)
    if kind == 1:
        return ThetaFamily(haar_unitary(n, rng))(rng.uniform(0.0, 0.1))
    u = np.zeros((n, n), dtype=complex)
    u[rng.permutation(n), np.arange(n)] = 1.0
    return u


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + dagger(g)) / 2


# -- individual checks ------------------------------------------------------

def _check(name: str, tol: float, errors: Iterable[float], seed: int) -> CheckResult:
    errs = np.fromiter(errors, float)
    worst = float(np.max(errs)) if errs.size else 0.0
    return CheckResult(name, bool(errs.size and worst <= tol), int(errs.size), worst, tol, seed)


def check_kernel(rng, n, seed):
    def recon():
        h = random_hermitian(rng, int(rng.integers(2, 33)))
        return float(np.linalg.norm(eigh(h).reconstruct() - h) / max(1, np.linalg.norm(h)))

    def log_roundtrip():
        u = haar_unitary(int(rng.integers(2, 17)), rng)
        w, v = np.linalg.eigh(hermitian_log_unitary(u))
        return float(np.linalg.norm((v * np.exp(1j * w)) @ dagger(v) - u))

    def trace_kept():
        ds, db = rng.integers(2, 5, 2)
        rho = random_density(rng, ds * db)
        return max(abs(np.trace(partial_trace(rho, ds, db, k)).real - 1) for k in ("system", "bath"))

    return [
        _check("eigh_reconstruction", TOL.recon, (recon() for _ in range(n)), seed),
        _check("unitary_log_roundtrip", 1e-9, (log_roundtrip() for _ in range(n)), seed),
        _check("partial_trace_trace", 1e-12, (trace_kept() for _ in range(n)), seed),
    ]


def check_states(rng, n, seed):
    def shift():
        h = random_hermitian(rng, int(rng.integers(2, 9)))
        beta, c = rng.uniform(0.1, 3), rng.uniform(-50, 50)
        return float(np.linalg.norm(gibbs(h, beta) - gibbs(h + c * np.eye(len(h)), beta)))

    def klein():
        k = int(rng.integers(2, 9))
        d = relative_entropy(random_density(rng, k), random_density(rng, k))
        return max(0.0, -d)

    return [
        _check("gibbs_shift_invariance", 1e-12, (shift() for _ in range(n)), seed),
        _check("klein_inequality", 1e-12, (klein() for _ in range(n)), seed),
    ]


def check_weak(rng, n, seed):
    def first_law(spec):
        r = weak_cycle(spec)
        return abs(r.w_out - (r.q_in - r.q_out))

    def forms(spec):
        r = weak_cycle(spec)
        return abs(r.eta_ratio - r.eta_entropy)

    def heat_identities(spec):
        r = weak_cycle(spec)
        return max(abs(spec.beta_h * r.q_in - (r.delta_s - r.d_hot)),
                   abs(spec.beta_c * r.q_out - (r.delta_s + r.d_cold)))

    def carnot(spec):
        r = weak_cycle(spec)
        return max(0.0, r.eta_ratio - spec.carnot + 1e-15)

    specs = [random_system(rng, engine=True) for _ in range(n)]
    return [
        _check("weak_first_law", 1e-12, map(first_law, specs), seed),
        _check("weak_eta_forms", 1e-10, map(forms, specs), seed),
        _check("weak_heat_identities", 1e-10, map(heat_identities, specs), seed),
        _check("weak_below_carnot", 0.0, map(carnot, specs), seed),
    ]


def _strong_instance(rng):
    spec = random_system(rng, engine=True)
    n_h = spec.d_system * spec.bath_hot.size
    n_c = spec.d_system * spec.bath_cold.size
    return spec, random_unitary(rng, n_h), random_unitary(rng, n_c)


def check_strong(rng, n, seed):
    """Stage identities on ``n`` draws; cycle identities on the first ``n`` engines."""
    errs = {k: [] for k in ("first_law", "heat_forms", "eta_forms", "bath_reduction",
                            "conjugation", "restriction", "decoupling_cost", "sufficient",
                            "carnot")}
    attempts = 0
    while len(errs["eta_forms"]) < n and attempts < 20 * n:
        attempts += 1
        spec, u_h, u_c = _strong_instance(rng)
        r = strong_cycle(spec, u_h, u_c)
        errs["first_law"].append(r.first_law_residual)
        if r.engine_valid:
            errs["eta_forms"].append(abs(r.eta_ratio - r.eta_entropy))
            errs["carnot"].append(0.0 if r.carnot_ok else r.eta_ratio - r.carnot)
            bad = r.sufficient_condition and r.eta_ratio > r.eta_weak + 1e-9
            errs["sufficient"].append(float(bad))
        if attempts > n:
            continue
        for (stage, a), u in zip(stages(spec, u_h, u_c), (u_h, u_c)):
            rho_sb = joint_gibbs(stage)
            s_red, b_red = stage.reduce(rho_sb)
            res = evaluate_stage(stage, a)
            errs["heat_forms"].append(abs(res.q_th - thermalization_heat_entropy_form(stage, rho_sb)))
            lhs = (relative_entropy_product(rho_sb, s_red, stage.rho_b)
                   - relative_entropy_product(rho_sb, s_red, b_red))
            errs["bath_reduction"].append(abs(lhs - res.d_bath))
            target = dagger(u) @ kron(stage.rho_s_eq, stage.rho_b) @ u
            errs["conjugation"].append(float(np.linalg.norm(rho_sb - target)))
            errs["restriction"].append(res.entropy_defect)
            log_ratio = (log_partition(eigh(stage.h_total).eigenvalues, stage.beta)
                         - log_partition(np.diag(stage.h_s).real, stage.beta)
                         - log_partition(np.diag(stage.h_b).real, stage.beta))
            errs["decoupling_cost"].append(max(abs(res.delta_e_d - res.d / stage.beta),
                                               abs(res.d - log_ratio)))
    return [
        _check("strong_first_law", 1e-10, errs["first_law"], seed),
        _check("thermalization_heat_forms", TOL.form_agreement, errs["heat_forms"], seed),
        _check("strong_eta_forms", TOL.form_agreement, errs["eta_forms"], seed),
        _check("bath_reduction_identity", 1e-9, errs["bath_reduction"], seed),
        _check("conjugation_identity", 1e-10, errs["conjugation"], seed),
        _check("unitary_restriction", TOL.form_agreement, errs["restriction"], seed),
        _check("decoupling_cost_identity", TOL.form_agreement, errs["decoupling_cost"], seed),
        _check("sufficient_condition", 0.0, errs["sufficient"], seed),
        _check("strong_below_carnot", 0.0, errs["carnot"], seed),
    ]


def check_interaction(rng, n, seed, inject_fault: str | None = None):
    cost, shift, dvals = [], [], []
    for _ in range(n):
        spec, u, _ = _strong_instance(rng)
        h_s = np.diag(spec.e_hot).astype(complex)
        h_b = np.diag(spec.bath_hot).astype(complex)
        rho_s = np.diag(spec.p_cold).astype(complex)
        rho_b = gibbs(h_b, spec.beta_h)
        inter = interaction_from_unitary(u, h_s, h_b, rho_s, rho_b, check=False)
        h_sb = inter.h_sb
        if inject_fault == "omit-offset":
            h_sb = h_sb - inter.a * np.eye(len(h_sb))
        h0 = free_hamiltonian(h_s, h_b)
        cost.append(coupling_cost(h_sb, kron(rho_s, rho_b)))
        shift.append(float(np.max(np.abs(eigh(h0 + inter.h_sb).eigenvalues
                                          - eigh(h0).eigenvalues - inter.a))))
        alg = d_value_algebraic(u, h_s, h_b, rho_s, rho_b, spec.beta_h)
        dvals.append(abs(d_value(u, h_s, h_b, rho_s, rho_b, spec.beta_h) - alg))
    return [
        _check("coupling_cost_zero", TOL.coupling_soft, cost, seed),
        _check("spectral_shift", TOL.spectral_shift, shift, seed),
        _check("d_value_forms", TOL.form_agreement, dvals, seed),
    ]


def check_majorization(rng, n, seed):
    maj, rear = [], []
    for _ in range(n):
        k = int(rng.choice([4, 8, 32]))
        a = doubly_stochastic_from_unitary(haar_unitary(k, rng))
        x = rng.normal(size=k)
        maj.append(0.0 if majorizes(x, a @ x, atol=1e-10) else 1.0)
        e = np.sort(rng.uniform(0, 5, k))
        p = rng.dirichlet(np.ones(k))
        rear.append(0.0 if rearrangement_check(e, p, a) else 1.0)
    return [
        _check("majorization_ax", 0.0, maj, seed),
        _check("rearrangement_inequality", 0.0, rear, seed),
    ]


SMALL_SHAPES = ((2, 2), (2, 3), (2, 4), (3, 2), (4, 2))


def brute_force_min(energies: np.ndarray, pops: np.ndarray) -> float:
    """Smallest ``sum_n E_n P_pi(n)`` over every permutation."""
    perms = np.array(list(itertools.permutations(range(pops.size))))
    return float(np.min(pops[perms] @ energies))


def optimal_gap(rng, ds: int, db: int) -> float:
    p = rng.dirichlet(np.ones(ds))
    q = gibbs_populations(random_spectrum(rng, db), rng.uniform(0.2, 3))
    eps, eps_b = random_spectrum(rng, ds), random_spectrum(rng, db)
    e, pop = product_lists(p, q, eps, eps_b)
    u = optimal_unitary(p, q, eps, eps_b)
    achieved = float(e @ (np.abs(u) ** 2) @ pop)
    return abs(achieved - brute_force_min(e, pop))


def check_optimal(rng, n, seed):
    per_shape = max(1, n // (10 * len(SMALL_SHAPES)))
    gaps = [optimal_gap(rng, ds, db) for ds, db in SMALL_SHAPES for _ in range(per_shape)]
    return [_check("optimal_vs_exhaustive", 1e-12, gaps, seed)]


SUITES: dict[str, Callable] = {
    "kernel": check_kernel,
    "states": check_states,
    "weak": check_weak,
    "strong": check_strong,
    "interaction": check_interaction,
    "majorization": check_majorization,
    "optimal": check_optimal,
}


@dataclass
class VerifyReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "checks": [asdict(c) for c in self.checks]},
                          indent=2)


def run_verify(seeds: Iterable[int] = DEFAULT_SEEDS, instances: int = 200,
               inject_fault: str | None = None, suites: Iterable[str] | None = None) -> VerifyReport:
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}")
    names = list(SUITES) if suites is None else list(suites)
    checks: list[CheckResult] = []
    for seed in seeds:
        for name in names:
            rng = np.random.default_rng([int(seed), list(SUITES).index(name)])
            if name == "interaction":
                checks += check_interaction(rng, instances, seed, inject_fault)
            else:
                checks += SUITES[name](rng, instances, seed)
    return VerifyReport(checks)
