import numpy as np
import pytest

from _oracles import central_difference_gradient, dense_B, grid_min_peak
from conftest import design_instance, random_instance
from ofdmtr import (
    DimensionError,
    ReservationPlan,
    SolverConfig,
    WaveformParams,
    apply_reserved,
    build_fixed_part,
    pmepr,
    solve,
    solve_batch,
    solve_tr_cve,
    solve_tr_e4,
    solve_tr_max,
)
from ofdmtr.solvers import SOLVERS, TRACE_COLUMNS, cve_cost, e4_gradient, e4_objective


def final_pmepr(plan, fixed, b):
    return pmepr(fixed.c + apply_reserved(plan, b))


@pytest.fixture(scope="module")
def results():
    plan, a = design_instance()
    fixed = build_fixed_part(plan, a)
    cfg = SolverConfig(max_iters=800, rel_cost_tol=0.0)
    return plan, fixed, {s: solve(s, plan, fixed, cfg) for s in SOLVERS}


class TestDesignInstance:
    def test_initial(self, results):
        _, fixed, _ = results
        assert pmepr(fixed.c) == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("solver,target,tol", [("tr-cve", 1.05, 0.01), ("tr-max", 1.30, 0.05), ("tr-e4", 1.51, 0.05)])
    def test_final_pmepr(self, results, solver, target, tol):
        plan, fixed, out = results
        assert final_pmepr(plan, fixed, out[solver][0]) == pytest.approx(target, abs=tol)

    def test_ordering(self, results):
        plan, fixed, out = results
        p = {s: final_pmepr(plan, fixed, out[s][0]) for s in SOLVERS}
        assert p["tr-cve"] < p["tr-max"] < pmepr(fixed.c)

    def test_trace_layout(self, results):
        _, _, out = results
        trace = out["tr-cve"][1]
        assert len(trace.cost) == 801
        assert trace.pmepr[0] == pytest.approx(2.0, abs=1e-9)
        cols = trace.to_dict()
        assert tuple(cols) == TRACE_COLUMNS
        assert cols["iter"][:3] == [0, 1, 2]
        # every row respects the CVE bound
        assert np.all(np.sqrt(trace.pmepr) <= trace.upper + 1e-12)

    def test_trace_csv(self, results, tmp_path):
        trace = results[2]["tr-max"][1]
        trace.to_csv(tmp_path / "t.csv")
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert len(lines) == len(trace.cost) + 1


class TestTrCve:
    def test_monotone_cost(self, rng):
        for _ in range(15):
            plan, a = random_instance(rng, m_range=(1, 4))
            _, trace = solve_tr_cve(plan, build_fixed_part(plan, a), SolverConfig(60, 0.0))
            assert np.diff(trace.cost).max() <= 1e-12

    def test_zero_problem_is_degenerate_fixed_point(self):
        plan = ReservationPlan(WaveformParams(4, 2, 4), [])
        with pytest.warns(RuntimeWarning):
            b, trace = solve_tr_cve(plan, build_fixed_part(plan, []), SolverConfig(10))
        assert trace.degenerate
        np.testing.assert_array_equal(b, 0)

    def test_constant_envelope_is_fixed_point(self):
        # carrier 0 informative; zeroing the reserved carrier leaves a flat envelope
        params = WaveformParams(3, 2, 4)
        plan = ReservationPlan.from_carriers(params, [0])
        fixed = build_fixed_part(plan, [1, 1j])
        b0 = np.zeros(plan.n_reserved, complex)
        b, trace = solve_tr_cve(plan, fixed, SolverConfig(1, 0.0, initial_b=b0))
        np.testing.assert_allclose(b, b0, atol=1e-10)
        assert trace.cost[0] == pytest.approx(0.0, abs=1e-20)

    def test_cost_definition(self, rng):
        x = rng.standard_normal((1, 30)) + 1j * rng.standard_normal((1, 30))
        beta = np.abs(x).mean()
        assert cve_cost(x)[0] == pytest.approx(np.sum((np.abs(x) - beta) ** 2))

    def test_early_stop(self):
        plan, a = design_instance()
        _, trace = solve_tr_cve(plan, build_fixed_part(plan, a), SolverConfig(5000, 1e-6))
        assert trace.converged and trace.iterations_run < 5000


class TestTrMax:
    def test_cancellable_tone(self):
        params = WaveformParams(4, 1, 4)
        plan = ReservationPlan(params, [0], [1, 2, 3])
        # informative symbol zero: c is a reserved-range tone plus nothing else
        fixed = build_fixed_part(plan, [0])
        c = apply_reserved(plan, [1.0, 0, 0])
        fixed = type(fixed)(c=c, a_SI=fixed.a_SI)
        b, _ = solve_tr_max(plan, fixed, SolverConfig(800))
        assert np.abs(c + apply_reserved(plan, b)).max() < 1e-3

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_grid_search(self, seed):
        rng = np.random.default_rng(seed)
        params = WaveformParams(3, 1, 4)
        plan = ReservationPlan(params, [0, 1])
        fixed = build_fixed_part(plan, rng.standard_normal(2) + 1j * rng.standard_normal(2))
        best, _ = grid_min_peak(fixed.c, dense_B(3, 1, 4, [2])[:, 0])
        b, _ = solve_tr_max(plan, fixed)
        assert np.abs(fixed.c + apply_reserved(plan, b)).max() == pytest.approx(best, abs=1e-2)

    def test_one_trace_row_per_round(self):
        plan, a = design_instance()
        _, trace = solve_tr_max(plan, build_fixed_part(plan, a))
        assert 2 <= len(trace.cost) <= 11


class TestTrE4:
    def test_zero_stays_zero(self):
        plan = ReservationPlan(WaveformParams(4, 1, 4), [0])
        with pytest.warns(RuntimeWarning):
            b, _ = solve_tr_e4(plan, build_fixed_part(plan, [0]))
        np.testing.assert_array_equal(b, 0)

    def test_gradient_matches_finite_differences(self, rng):
        for _ in range(10):
            plan, a = random_instance(rng, m_range=(1, 3))
            fixed = build_fixed_part(plan, a)
            b = rng.standard_normal(plan.n_reserved) + 1j * rng.standard_normal(plan.n_reserved)
            g = e4_gradient(plan, fixed, b)
            fd = central_difference_gradient(lambda v: e4_objective(plan, fixed, v), b)
            assert np.linalg.norm(g - fd) <= 1e-5 * np.linalg.norm(g)

    def test_objective_nonincreasing(self, rng):
        plan, a = random_instance(rng, m_range=(2, 4))
        _, trace = solve_tr_e4(plan, build_fixed_part(plan, a), SolverConfig(200))
        assert np.all(np.diff(trace.cost) <= 1e-12 * trace.cost[0])


class TestInterface:
    @pytest.mark.parametrize("solver", SOLVERS)
    def test_empty_reserved_set(self, solver):
        params = WaveformParams(3, 1, 4)
        plan = ReservationPlan(params, [0, 1, 2])
        with pytest.raises(DimensionError):
            solve(solver, plan, build_fixed_part(plan, [1, 1, 1]))

    def test_unknown_solver(self):
        plan, a = design_instance()
        with pytest.raises(ValueError):
            solve("tr-lp", plan, build_fixed_part(plan, a))

    @pytest.mark.parametrize("kw", [dict(max_iters=0), dict(rel_cost_tol=-1.0)])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    @pytest.mark.parametrize("solver", SOLVERS)
    def test_batch_matches_single(self, solver, rng):
        params = WaveformParams(5, 2, 4)
        results = []
        cs, masks = [], []
        for _ in range(3):
            plan = ReservationPlan.from_carriers(params, rng.choice(5, 2, replace=False))
            fixed = build_fixed_part(plan, rng.standard_normal(plan.n_informative) + 0j)
            b, _ = solve(solver, plan, fixed, SolverConfig(100, 0.0))
            results.append(fixed.c + apply_reserved(plan, b))
            cs.append(fixed.c)
            masks.append(plan.reserved_mask)
        batch = solve_batch(solver, params, np.array(cs), np.array(masks), SolverConfig(100, 0.0))
        np.testing.assert_allclose(batch.x.reshape(3, -1), np.array(results), atol=1e-9)

    def test_initial_b_is_used(self):
        plan, a = design_instance()
        fixed = build_fixed_part(plan, a)
        init = np.full(plan.n_reserved, 0.3 + 0.1j)
        _, trace = solve_tr_cve(plan, fixed, SolverConfig(1, 0.0, initial_b=init))
        assert trace.pmepr[0] == pytest.approx(pmepr(fixed.c + apply_reserved(plan, init)))
