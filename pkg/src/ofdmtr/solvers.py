"""PMEPR reduction solvers over the reserved symbols.

Three objectives are supported:

``tr-cve``
    Alternating least squares on the envelope-variance cost
    ``sum_l (|x_l| - beta)^2``.  Each sweep fixes the mean envelope ``beta``
    and phases ``theta`` of the current waveform, then solves the linear
    least-squares problem ``min_b ||c + B b - beta e^{j theta}||^2`` in closed
    form.  The cost is nonincreasing from any starting point.
``tr-max``
    Peak magnitude ``max_l |x_l|``, minimized through the smooth surrogate
    ``mu * log sum_l exp(|x_l|^2 / mu)`` with ``mu`` halved after every round.
``tr-e4``
    Fourth moment ``mean_l |x_l|^4`` by gradient descent.

All kernels operate on a batch axis so Monte-Carlo sweeps can solve many
independent instances in one pass.  Instances are dropped from the working
set as soon as they stop, so per-instance results do not depend on what
else shares the batch.  Gradients are reported in packed form
``df/dRe(b) + j df/dIm(b)``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import DimensionError, NumericalError
from .model import FourierOperator, WaveformParams
from .reservation import FixedPart, ReservationPlan, apply_reserved

__all__ = [
    "SOLVERS",
    "SolverConfig",
    "SolverTrace",
    "BatchResult",
    "solve",
    "solve_batch",
    "solve_tr_cve",
    "solve_tr_max",
    "solve_tr_e4",
    "e4_objective",
    "e4_gradient",
    "cve_cost",
]

SOLVERS = ("tr-cve", "tr-max", "tr-e4")

ARMIJO_SLOPE = 1e-4
GRAD_TOL = 1e-8
MIN_STEP = 1e-20
SMOOTHING_ROUNDS = 10
SMOOTHING_START = 0.1
# Consecutive below-tolerance sweeps before tr-cve stops; a single flat
# sweep happens at symmetric starting points that are not minima.
STALL_PATIENCE = 10


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget and starting point.

    ``max_iters`` counts least-squares sweeps for ``tr-cve`` and accepted
    gradient steps for ``tr-e4``.  For ``tr-max`` it is split evenly across
    the smoothing rounds.  ``rel_cost_tol = 0`` runs the full budget.
    """

    max_iters: int = 800
    rel_cost_tol: float = 1e-10
    initial_b: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if not self.rel_cost_tol >= 0:
            raise ValueError("rel_cost_tol must be nonnegative")


TRACE_COLUMNS = ("iter", "cost", "beta", "pmepr", "cve", "sqrt_pmepr_upper_bound")


@dataclass
class SolverTrace:
    """Per-iteration history of one solve.

    Row 0 is the starting point.  ``cost`` is the solver's own objective:
    the envelope-variance cost for ``tr-cve``, the smoothed peak for
    ``tr-max`` (one row per smoothing round) and ``mean|x|^4`` for ``tr-e4``.
    """

    solver: str
    cost: np.ndarray
    beta: np.ndarray
    pmepr: np.ndarray
    cve: np.ndarray
    upper: np.ndarray
    b: np.ndarray
    iterations_run: int
    degenerate: bool = False
    converged: bool = False

    @property
    def iters(self) -> np.ndarray:
        return np.arange(len(self.cost))

    def rows(self):
        for i in range(len(self.cost)):
            yield (i, self.cost[i], self.beta[i], self.pmepr[i], self.cve[i], self.upper[i])

    def to_dict(self) -> dict:
        cols = list(zip(*self.rows())) or [()] * len(TRACE_COLUMNS)
        out = {name: [float(v) for v in col] for name, col in zip(TRACE_COLUMNS, cols)}
        out["iter"] = [int(v) for v in out["iter"]]
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for row in self.rows():
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


class _Recorder:
    def __init__(self, n):
        self.rows = [[] for _ in range(n)]

    def add(self, idx, cost, x):
        env = np.abs(x).reshape(len(idx), -1)
        power = env**2
        mean_env = env.mean(axis=1)
        mean_pow = power.mean(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            pm = np.maximum(1.0, power.max(axis=1) / mean_pow)
            cv = ((env - mean_env[:, None]) ** 2).mean(axis=1) / mean_env**2
        upper = np.sqrt(env.shape[1] * cv) + 1.0
        zero = mean_env == 0
        pm[zero] = cv[zero] = upper[zero] = np.nan
        for j, i in enumerate(idx):
            self.rows[i].append((cost[j], mean_env[j], pm[j], cv[j], upper[j]))

    def columns(self, i):
        arr = np.array(self.rows[i], dtype=float).reshape(-1, 5)
        return arr.T


@dataclass
class BatchResult:
    """Outcome of a batched solve; ``b`` is shaped ``(T, M, N)``."""

    b: np.ndarray
    x: np.ndarray
    iterations: np.ndarray
    degenerate: np.ndarray
    converged: np.ndarray
    recorder: Optional[_Recorder] = field(default=None, repr=False)


def cve_cost(x) -> np.ndarray:
    """Envelope-variance cost ``sum_l (|x_l| - mean|x|)^2`` per batch row."""
    x = np.asarray(x)
    env = np.abs(x).reshape(x.shape[0], -1)
    return ((env - env.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)


def _cve_kernel(op, c, mask, b, cfg, rec):
    n = c.shape[0]
    scale = op.block_len
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    track_cost = rec is not None or cfg.rel_cost_tol > 0

    x = c + op.forward(b)
    env = np.abs(x)
    beta = env.mean(axis=(1, 2))
    cost = ((env - beta[:, None, None]) ** 2).sum(axis=(1, 2))
    degenerate = beta == 0
    if rec is not None:
        rec.add(np.arange(n), cost, x)

    active = np.flatnonzero(~degenerate)
    bs, cs, ms, xs, envs = b[active], c[active], mask[active], x[active], env[active]
    # F^H c is loop invariant; the update is b = mask * F^H(beta e^{j theta} - c) / K.
    adj_c = op.adjoint(cs)
    betas, costs = beta[active], cost[active]
    flat = np.zeros(active.size, dtype=int)
    for _ in range(cfg.max_iters):
        if active.size == 0:
            break
        ratio = np.zeros_like(envs)
        np.divide(betas[:, None, None], envs, out=ratio, where=envs > 0)
        target = xs * ratio
        zero = envs == 0
        if zero.any():
            # angle(0) := 0, so the target there is beta itself.
            target[zero] = np.broadcast_to(betas[:, None, None], envs.shape)[zero]
        bs = np.where(ms, (op.adjoint(target) - adj_c) / scale, 0)
        xs = cs + op.forward(bs)
        envs = np.abs(xs)
        betas = envs.mean(axis=(1, 2))
        iters[active] += 1
        if not track_cost:
            continue
        new_cost = ((envs - betas[:, None, None]) ** 2).sum(axis=(1, 2))
        if rec is not None:
            rec.add(active, new_cost, xs)
        if cfg.rel_cost_tol > 0:
            small = (costs - new_cost) <= cfg.rel_cost_tol * costs
            flat = np.where(small, flat + 1, 0)
        done = flat >= STALL_PATIENCE
        costs = new_cost
        if done.any():
            fin = active[done]
            b[fin], x[fin] = bs[done], xs[done]
            converged[fin] = True
            keep = ~done
            active = active[keep]
            bs, cs, ms, xs, envs = bs[keep], cs[keep], ms[keep], xs[keep], envs[keep]
            adj_c, betas, costs, flat = adj_c[keep], betas[keep], costs[keep], flat[keep]
    b[active], x[active] = bs, xs
    return BatchResult(b, x, iters, degenerate, converged | degenerate, rec)


def _take(aux, idx):
    return {k: v[idx] for k, v in aux.items()}


def _descent(op, c, mask, b, fun, wgrad, aux, max_iters, rel_tol, step, on_step=None):
    """Batched gradient descent with Armijo backtracking.

    ``fun(x, aux)`` returns the objective per row from samples ``x``;
    ``wgrad(x, aux)`` returns sample-domain weights whose adjoint transform,
    restricted to reserved slots, is the packed gradient.  ``step`` holds the
    last accepted step length per row; each line search starts from twice
    that value, capped at 1.
    """
    n = c.shape[0]
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    x = c + op.forward(b)
    f = fun(x, aux)

    active = np.arange(n)
    bs, cs, ms, xs, fs, ts = b, c, mask, x, f, step.copy()
    auxs = aux
    for _ in range(max_iters):
        if active.size == 0:
            break
        g = np.where(ms, op.adjoint(wgrad(xs, auxs)), 0)
        gn2 = (g.real**2 + g.imag**2).sum(axis=(1, 2))
        small = np.sqrt(gn2) < GRAD_TOL

        ts = np.minimum(1.0, 2.0 * ts)
        new_b, new_x, new_f = bs.copy(), xs.copy(), fs.copy()
        stalled = np.zeros(active.size, dtype=bool)
        pending = ~small
        while pending.any():
            idx = np.flatnonzero(pending)
            cand_b = bs[idx] - ts[idx, None, None] * g[idx]
            cand_x = cs[idx] + op.forward(cand_b)
            cand_f = fun(cand_x, _take(auxs, idx))
            ok = np.isfinite(cand_f) & (cand_f <= fs[idx] - ARMIJO_SLOPE * ts[idx] * gn2[idx])
            acc = idx[ok]
            new_b[acc], new_x[acc], new_f[acc] = cand_b[ok], cand_x[ok], cand_f[ok]
            pending[acc] = False
            rej = idx[~ok]
            ts[rej] *= 0.5
            dead = rej[ts[rej] < MIN_STEP]
            pending[dead] = False
            stalled[dead] = True

        moved = ~small & ~stalled
        done = small | stalled
        if rel_tol > 0:
            done |= moved & (fs - new_f <= rel_tol * np.abs(fs))
        iters[active[moved]] += 1
        bs, xs, fs = new_b, new_x, new_f
        if on_step is not None and moved.any():
            on_step(active[moved], fs[moved], xs[moved])
        if done.any():
            fin = active[done]
            b[fin], x[fin], f[fin], step[fin] = bs[done], xs[done], fs[done], ts[done]
            converged[fin] = small[done] | ~stalled[done]
            keep = ~done
            active = active[keep]
            bs, cs, ms, xs, fs, ts = bs[keep], cs[keep], ms[keep], xs[keep], fs[keep], ts[keep]
            auxs = _take(auxs, keep)
    b[active], x[active], f[active], step[active] = bs, xs, fs, ts
    return b, x, f, iters, converged


def _e4_fun(x, aux):
    p = (x.real**2 + x.imag**2).reshape(x.shape[0], -1)
    return (p**2).mean(axis=1)


def _e4_wgrad(x, aux):
    length = x[0].size
    return (4.0 / length) * (x.real**2 + x.imag**2) * x


def _e4_kernel(op, c, mask, b, cfg, rec):
    n = c.shape[0]
    x0 = c + op.forward(b)
    degenerate = ~np.any(x0 != 0, axis=(1, 2))
    if rec is not None:
        rec.add(np.arange(n), _e4_fun(x0, None), x0)
        on_step = lambda idx, f, x: rec.add(idx, f, x)  # noqa: E731
    else:
        on_step = None
    step = np.full(n, 0.5)
    b, x, _, iters, conv = _descent(
        op, c, mask, b, _e4_fun, _e4_wgrad, {}, cfg.max_iters, cfg.rel_cost_tol, step, on_step
    )
    return BatchResult(b, x, iters, degenerate, conv, rec)


def _smooth_fun(x, aux):
    p = (x.real**2 + x.imag**2).reshape(x.shape[0], -1)
    mu = aux["mu"]
    return mu * logsumexp(p / mu[:, None], axis=1)


def _smooth_wgrad(x, aux):
    p = (x.real**2 + x.imag**2).reshape(x.shape[0], -1)
    w = softmax(p / aux["mu"][:, None], axis=1).reshape(x.shape)
    return 2.0 * w * x


def _max_kernel(op, c, mask, b, cfg, rec, rounds=SMOOTHING_ROUNDS, mu_start=SMOOTHING_START):
    n = c.shape[0]
    x = c + op.forward(b)
    peak = (x.real**2 + x.imag**2).reshape(n, -1).max(axis=1)
    degenerate = peak == 0
    # Scale-free smoothing: mu starts as a fraction of each instance's peak power.
    mu = np.where(degenerate, 1.0, mu_start * peak)
    if rec is not None:
        rec.add(np.arange(n), _smooth_fun(x, {"mu": mu}), x)
    step = np.full(n, 0.5)
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    per_round = max(1, cfg.max_iters // rounds)
    for _ in range(rounds):
        aux = {"mu": mu}
        b, x, f, it, converged = _descent(
            op, c, mask, b, _smooth_fun, _smooth_wgrad, aux, per_round, cfg.rel_cost_tol, step
        )
        iters += it
        if rec is not None:
            rec.add(np.arange(n), f, x)
        mu = mu / 2
    return BatchResult(b, x, iters, degenerate, converged, rec)


_KERNELS = {"tr-cve": _cve_kernel, "tr-max": _max_kernel, "tr-e4": _e4_kernel}


def solve_batch(solver, params: WaveformParams, c, mask, config=None, initial_b=None, record=False):
    """Solve a stack of independent instances sharing one waveform grid.

    Parameters
    ----------
    solver : {"tr-cve", "tr-max", "tr-e4"}
    params : WaveformParams
    c : ndarray
        Fixed informative samples, shape ``(T, L)`` or ``(T, M, O_s*N)``.
    mask : ndarray of bool
        Reserved slots, shape ``(T, M, N)``.
    config : SolverConfig, optional
        ``config.initial_b`` is ignored here; pass ``initial_b`` on the grid.
    initial_b : ndarray, optional
        Starting reserved symbols shaped ``(T, M, N)``; zero by default.
    record : bool
        Keep per-iteration metrics for every instance.

    Returns
    -------
    BatchResult
    """
    if solver not in _KERNELS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    cfg = config or SolverConfig()
    op = FourierOperator(params)
    M, N, K = params.n_bits, params.n_carriers, params.samples_per_bit
    c = np.asarray(c, dtype=np.complex128)
    n = c.shape[0]
    c = c.reshape(n, M, K)
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), (n, M, N))
    if initial_b is None:
        b = np.zeros((n, M, N), dtype=np.complex128)
    else:
        b = np.where(mask, np.asarray(initial_b, dtype=np.complex128).reshape(n, M, N), 0)
    rec = _Recorder(n) if record else None
    out = _KERNELS[solver](op, c, np.ascontiguousarray(mask), b, cfg, rec)
    if not np.all(np.isfinite(out.b)):
        raise NumericalError(f"{solver} produced non-finite reserved symbols")
    return out


def solve(solver, plan: ReservationPlan, fixed: FixedPart, config: SolverConfig = None):
    """Solve one instance; returns ``(b, trace)`` with ``b`` over the reserved set."""
    cfg = config or SolverConfig()
    if plan.n_reserved == 0:
        raise DimensionError("reserved set is empty; nothing to optimize")
    p = plan.params
    c = np.asarray(fixed.c, dtype=np.complex128)
    if c.shape != (p.n_samples,):
        raise DimensionError(f"fixed part has shape {c.shape}, expected ({p.n_samples},)")
    init = None
    if cfg.initial_b is not None:
        init = plan.scatter(reserved_symbols=cfg.initial_b)[None]
    out = solve_batch(solver, p, c[None], plan.reserved_mask[None], cfg, init, record=True)
    b = out.b.reshape(-1)[list(plan.reserved)].copy()
    cost, beta, pm, cv, upper = out.recorder.columns(0)
    degenerate = bool(out.degenerate[0])
    if degenerate:
        warnings.warn(f"{solver}: all-zero problem, returning the zero fixed point", RuntimeWarning)
    trace = SolverTrace(
        solver=solver,
        cost=cost,
        beta=beta,
        pmepr=pm,
        cve=cv,
        upper=upper,
        b=b,
        iterations_run=int(out.iterations[0]),
        degenerate=degenerate,
        converged=bool(out.converged[0]),
    )
    return b, trace


def solve_tr_cve(plan, fixed, config=None):
    """Minimize the envelope variance by alternating least squares."""
    return solve("tr-cve", plan, fixed, config)


def solve_tr_max(plan, fixed, config=None):
    """Minimize the peak envelope through a log-sum-exp continuation."""
    return solve("tr-max", plan, fixed, config)


def solve_tr_e4(plan, fixed, config=None):
    """Minimize ``mean|x|^4`` by gradient descent with backtracking."""
    return solve("tr-e4", plan, fixed, config)


def e4_objective(plan: ReservationPlan, fixed: FixedPart, b) -> float:
    x = fixed.c + apply_reserved(plan, b)
    return float(np.mean(np.abs(x) ** 4))


def e4_gradient(plan: ReservationPlan, fixed: FixedPart, b) -> np.ndarray:
    """Packed gradient ``(4/L) B^H (|x|^2 x)`` of ``mean|x|^4``."""
    x = fixed.c + apply_reserved(plan, b)
    weights = (4.0 / x.size) * np.abs(x) ** 2 * x
    full = FourierOperator(plan.params).apply_adjoint(weights)
    return full[list(plan.reserved)]
