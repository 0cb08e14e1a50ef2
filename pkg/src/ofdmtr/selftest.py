"""Quick invariant checks runnable from an installed package (``ofdmtr selftest``)."""

from __future__ import annotations

import numpy as np

from .model import FourierOperator, SymbolMatrix, WaveformParams, pmepr, pmepr_cve_bound, synthesize
from .radar import ambiguity_function, chu_code
from .reservation import ReservationPlan, apply_reserved, build_fixed_part, pinv_apply
from .solvers import SolverConfig, e4_gradient, e4_objective, solve_tr_cve


def _direct_synthesis(params, codes):
    K = params.samples_per_bit
    x = np.zeros(params.n_samples, dtype=complex)
    for m in range(params.n_bits):
        for k in range(K):
            x[k + m * K] = sum(
                codes[n, m] * np.exp(2j * np.pi * n * k / K) for n in range(params.n_carriers)
            )
    return x


def _random_plan(rng, params):
    k = rng.integers(1, params.n_codes)
    info = rng.choice(params.n_codes, k, replace=False)
    return ReservationPlan(params, info)


def check_orthogonality(rng):
    worst = 0.0
    for n in (1, 5, 16):
        for os_ in (1, 4, 10):
            F = FourierOperator(WaveformParams(n, 1, os_)).matrix
            worst = max(worst, np.abs(F.conj().T @ F - os_ * n * np.eye(n)).max())
    return worst < 1e-10, f"max |F^H F - O_s N I| = {worst:.2e}"


def check_synthesis(rng):
    params = WaveformParams(5, 3, 4)
    codes = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    fast = synthesize(params, SymbolMatrix(codes)).samples
    ref = _direct_synthesis(params, codes)
    err = np.linalg.norm(fast - ref) / np.linalg.norm(ref)
    return err < 1e-12, f"relative error {err:.2e}"


def check_bound(rng):
    params = WaveformParams(6, 10, 10)
    ok = True
    for _ in range(50):
        codes = np.array([1, 1j, -1, -1j])[rng.integers(0, 4, (6, 10))]
        ok &= pmepr_cve_bound(synthesize(params, SymbolMatrix(codes))).holds
    return bool(ok), "50 random QPSK pulses"


def check_left_inverse(rng):
    params = WaveformParams(6, 4, 4)
    plan = _random_plan(rng, params)
    b = rng.standard_normal(plan.n_reserved) + 1j * rng.standard_normal(plan.n_reserved)
    err = np.abs(pinv_apply(plan, apply_reserved(plan, b)) - b).max()
    return err < 1e-10, f"max error {err:.2e}"


def check_monotone(rng):
    worst = -np.inf
    for _ in range(10):
        params = WaveformParams(int(rng.integers(4, 11)), int(rng.integers(1, 6)), 4)
        plan = _random_plan(rng, params)
        a = rng.standard_normal(plan.n_informative) + 1j * rng.standard_normal(plan.n_informative)
        _, trace = solve_tr_cve(plan, build_fixed_part(plan, a), SolverConfig(100, 0.0))
        worst = max(worst, np.diff(trace.cost).max())
    return worst <= 1e-12, f"largest cost increase {worst:.2e}"


def check_gradient(rng):
    params = WaveformParams(4, 2, 4)
    plan = _random_plan(rng, params)
    fixed = build_fixed_part(plan, rng.standard_normal(plan.n_informative) + 0j)
    b = rng.standard_normal(plan.n_reserved) + 1j * rng.standard_normal(plan.n_reserved)
    g = e4_gradient(plan, fixed, b)
    h = 1e-6
    fd = np.empty_like(g)
    for i in range(b.size):
        e = np.zeros_like(b)
        e[i] = h
        re = (e4_objective(plan, fixed, b + e) - e4_objective(plan, fixed, b - e)) / (2 * h)
        im = (e4_objective(plan, fixed, b + 1j * e) - e4_objective(plan, fixed, b - 1j * e)) / (2 * h)
        fd[i] = re + 1j * im
    err = np.linalg.norm(g - fd) / np.linalg.norm(g)
    return err < 1e-5, f"relative error {err:.2e}"


def check_design_instance(rng):
    params = WaveformParams(6, 1, 10)
    plan = ReservationPlan.from_carriers(params, [2, 3])
    fixed = build_fixed_part(plan, [1, 1])
    b, _ = solve_tr_cve(plan, fixed, SolverConfig(800, 0.0))
    value = pmepr(fixed.c + apply_reserved(plan, b))
    return abs(value - 1.05) <= 0.01, f"TR-CVE PMEPR {value:.4f}"


def check_radar(rng):
    code = chu_code(10, 1)
    x = synthesize(WaveformParams(3, 4, 4), SymbolMatrix(rng.standard_normal((3, 4)) + 0j))
    grid = ambiguity_function(x, n_dopplers=21)
    ok = np.abs(np.abs(code) - 1).max() < 1e-15 and abs(grid.at(0, 0.0) - 1) < 1e-12
    ok = ok and grid.magnitudes.max() <= 1 + 1e-9
    return bool(ok), "unit-modulus Chu code, AF peak at origin"


CHECKS = {
    "orthogonality": check_orthogonality,
    "synthesis-oracle": check_synthesis,
    "pmepr-cve-bound": check_bound,
    "left-inverse": check_left_inverse,
    "tr-cve-monotone": check_monotone,
    "e4-gradient": check_gradient,
    "design-instance": check_design_instance,
    "radar": check_radar,
}


def run(seed: int = 0):
    """Run every check; returns ``[(name, passed, detail), ...]``."""
    rng = np.random.default_rng(seed)
    return [(name, *fn(rng)) for name, fn in CHECKS.items()]
