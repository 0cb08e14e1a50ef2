"""End-to-end studies: envelope/convergence, PMEPR CCDF, ambiguity and detection.

Every function here is a pure function of its :class:`ExperimentConfig`;
randomness comes only from :func:`seeded_rng` streams keyed by the config
seed.  Inside the harness ``tr-cve`` always runs its full iteration budget
(the alternating projections can sit on a plateau and then resume, so a
relative-decrease test stops them too early); the convex baselines stop on
``config.rel_cost_tol``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..model import BasebandSignal, FourierOperator, SymbolMatrix, pmepr, synthesize
from ..radar import (
    AmbiguityGrid,
    DetectionConfig,
    PdCurve,
    ambiguity_function,
    chu_code,
    detection_probability,
)
from ..reservation import ReservationPlan, build_fixed_part
from ..solvers import SolverConfig, SolverTrace, solve, solve_batch
from .config import ExperimentConfig
from .rng import qpsk, seeded_rng, uniform_phase

CHUNK_TRIALS = 500
# Detection Monte-Carlo streams start here so they never collide with trial streams.
DETECT_STREAM_BASE = 1 << 32


def solver_config(config: ExperimentConfig, solver: str) -> SolverConfig:
    tol = 0.0 if solver == "tr-cve" else config.rel_cost_tol
    return SolverConfig(max_iters=config.max_iters, rel_cost_tol=tol)


def draw_instance(config: ExperimentConfig, rng: np.random.Generator):
    """Reservation plan and informative symbols for one trial.

    Informative symbols are listed in bit-major slot order.  Chu codes use
    ``chu_gammas[i]`` on the i-th informative carrier in ascending order.
    """
    params = config.params
    if config.plan == "carriers":
        plan = ReservationPlan.from_carriers(params, config.plan_indices)
        carriers = sorted(config.plan_indices)
    elif config.plan == "indices":
        plan = ReservationPlan(params, config.plan_indices)
        carriers = None
    else:
        carriers = sorted(int(n) for n in rng.choice(params.n_carriers, config.plan_count, replace=False))
        plan = ReservationPlan.from_carriers(params, carriers)

    k = plan.n_informative
    if config.symbols == "explicit":
        a_info = np.array(config.symbol_values, dtype=np.complex128)
    elif config.symbols == "qpsk":
        a_info = qpsk(rng, k)
    elif config.symbols == "uniform-phase":
        a_info = uniform_phase(rng, k)
    else:
        codes = {n: chu_code(params.n_bits, g) for n, g in zip(carriers, config.chu_gammas)}
        a_info = np.array([codes[i % params.n_carriers][i // params.n_carriers] for i in plan.informative])
    return plan, a_info


# -- envelope / convergence -------------------------------------------------


@dataclass
class Design:
    symbols: SymbolMatrix
    signal: BasebandSignal
    trace: SolverTrace = None

    @property
    def pmepr(self) -> float:
        return pmepr(self.signal)


@dataclass
class EnvelopeResult:
    plan: ReservationPlan
    informative: np.ndarray
    initial: BasebandSignal
    designs: dict = field(default_factory=dict)

    def pmeprs(self) -> dict:
        out = {"initial": pmepr(self.initial)}
        out.update({name: d.pmepr for name, d in self.designs.items()})
        return out


def run_envelope_experiment(config: ExperimentConfig) -> EnvelopeResult:
    """Solve one instance with every configured solver; envelopes stay unnormalized."""
    rng = seeded_rng(config.seed, 0)
    plan, a_info = draw_instance(config, rng)
    fixed = build_fixed_part(plan, a_info)
    initial = BasebandSignal(fixed.c, plan.params)
    result = EnvelopeResult(plan, a_info, initial)
    for solver in config.solvers:
        if solver == "none":
            result.designs[solver] = Design(plan.symbols(a_info), initial)
            continue
        b, trace = solve(solver, plan, fixed, solver_config(config, solver))
        symbols = plan.symbols(a_info, b)
        result.designs[solver] = Design(symbols, synthesize(plan.params, symbols), trace)
    return result


# -- CCDF ---------------------------------------------------------------------


@dataclass
class CcdfCurve:
    """Empirical ``P(PMEPR > pmepr0)`` on a grid of thresholds."""

    pmepr0_db: np.ndarray
    prob: np.ndarray
    exceedances: np.ndarray
    n_trials: int
    seed: int

    @property
    def pmepr0(self) -> np.ndarray:
        return 10.0 ** (self.pmepr0_db / 10.0)

    def to_dict(self) -> dict:
        return {
            "pmepr0_db": [float(v) for v in self.pmepr0_db],
            "pmepr0": [float(v) for v in self.pmepr0],
            "prob": [float(v) for v in self.prob],
            "exceedances": [int(v) for v in self.exceedances],
        }


def ccdf_grid_db(config: ExperimentConfig) -> np.ndarray:
    n = int(round(config.ccdf_db_max / config.ccdf_db_step)) + 1
    return np.array([i * config.ccdf_db_step for i in range(n)])


def empirical_ccdf(values, grid_db, seed=0) -> CcdfCurve:
    values = np.asarray(values, dtype=float)
    grid_db = np.asarray(grid_db, dtype=float)
    thresholds = 10.0 ** (grid_db / 10.0)
    exceed = np.count_nonzero(values[:, None] > thresholds[None, :], axis=0)
    return CcdfCurve(grid_db, exceed / values.size, exceed, int(values.size), seed)


@dataclass
class CcdfResult:
    curves: dict
    per_trial: dict
    carriers: np.ndarray


def _pmepr_rows(x):
    power = (x.real**2 + x.imag**2).reshape(x.shape[0], -1)
    return np.maximum(1.0, power.max(axis=1) / power.mean(axis=1))


def _ccdf_chunk(config: ExperimentConfig, start: int, stop: int):
    params = config.params
    op = FourierOperator(params)
    M, N = params.n_bits, params.n_carriers
    n = stop - start
    codes = np.zeros((n, M, N), dtype=np.complex128)
    masks = np.zeros((n, M, N), dtype=bool)
    fills = np.zeros((n, M, N), dtype=np.complex128)
    carriers = []
    for j, trial in enumerate(range(start, stop)):
        rng = seeded_rng(config.seed, trial)
        plan, a_info = draw_instance(config, rng)
        codes[j] = plan.scatter(a_info).reshape(M, N)
        masks[j] = plan.reserved_mask
        fills[j] = plan.scatter(reserved_symbols=qpsk(rng, plan.n_reserved)).reshape(M, N)
        carriers.append(sorted({i % N for i in plan.informative}))
    c = op.forward(codes)
    out = {}
    for solver in config.solvers:
        if solver == "none":
            out[solver] = _pmepr_rows(op.forward(codes + fills))
        else:
            res = solve_batch(solver, params, c, masks, solver_config(config, solver))
            out[solver] = _pmepr_rows(res.x)
    return out, carriers


def run_ccdf_experiment(config: ExperimentConfig) -> CcdfResult:
    """Monte-Carlo PMEPR CCDF per solver.

    Each trial draws its informative carriers and symbols from its own
    stream, so results do not depend on chunking or worker count.  The
    ``none`` curve fills the reserved slots with random QPSK instead of
    optimizing them, i.e. plain random OFDM.
    """
    bounds = [
        (s, min(s + CHUNK_TRIALS, config.n_trials)) for s in range(0, config.n_trials, CHUNK_TRIALS)
    ]
    if config.workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_ccdf_chunk, [config] * len(bounds), *zip(*bounds)))
    else:
        parts = [_ccdf_chunk(config, s, e) for s, e in bounds]
    per_trial = {
        solver: np.concatenate([p[0][solver] for p in parts]) for solver in config.solvers
    }
    carriers = np.array([row for p in parts for row in p[1]])
    grid = ccdf_grid_db(config)
    curves = {s: empirical_ccdf(v, grid, config.seed) for s, v in per_trial.items()}
    return CcdfResult(curves, per_trial, carriers)


# -- ambiguity / detection ----------------------------------------------------


@dataclass
class DetectionResult:
    waveforms: dict
    pmeprs: dict
    ambiguity: dict = field(default_factory=dict)
    pd: dict = field(default_factory=dict)


def build_detection_waveforms(config: ExperimentConfig) -> dict:
    """Unit-power waveforms sharing the informative carriers.

    One per configured solver plus ``uniform``, whose reserved slots carry
    independent uniform random phases.
    """
    rng = seeded_rng(config.seed, 0)
    plan, a_info = draw_instance(config, rng)
    fixed = build_fixed_part(plan, a_info)
    waveforms = {}
    for solver in config.solvers:
        if solver == "none":
            continue
        b, _ = solve(solver, plan, fixed, solver_config(config, solver))
        waveforms[solver] = synthesize(plan.params, plan.symbols(a_info, b)).normalized()
    phases = uniform_phase(rng, plan.n_reserved)
    waveforms["uniform"] = synthesize(plan.params, plan.symbols(a_info, phases)).normalized()
    return waveforms


def detection_config(config: ExperimentConfig) -> DetectionConfig:
    return DetectionConfig(
        noise_power=config.noise_power,
        pfa=config.pfa,
        snr_grid_db=config.snr_grid_db,
        n_trials=config.detect_trials,
    )


def run_detection_experiment(config: ExperimentConfig, ambiguity=True, detection=True):
    waveforms = build_detection_waveforms(config)
    result = DetectionResult(waveforms, {k: pmepr(w) for k, w in waveforms.items()})
    det = detection_config(config)
    for k, (name, wave) in enumerate(waveforms.items()):
        if ambiguity:
            n_delays = config.af_delays or None
            result.ambiguity[name] = ambiguity_function(wave, n_delays, config.af_dopplers)
        if detection:
            rng = seeded_rng(config.seed, DETECT_STREAM_BASE + k)
            result.pd[name] = detection_probability(wave, det, rng)
    return result


__all__ = [
    "AmbiguityGrid",
    "CcdfCurve",
    "CcdfResult",
    "Design",
    "DetectionResult",
    "EnvelopeResult",
    "PdCurve",
    "build_detection_waveforms",
    "ccdf_grid_db",
    "draw_instance",
    "empirical_ccdf",
    "run_ccdf_experiment",
    "run_detection_experiment",
    "run_envelope_experiment",
    "solver_config",
]
