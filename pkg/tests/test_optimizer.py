"""Objective, Metropolis rule, step adaptation, Nelder-Mead, Basin Hopping."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cellflex.errors import ConfigurationError
from cellflex.optimizer import (
    BasinHoppingConfig,
    CostTable,
    FlexibilityRequest,
    NelderMeadSettings,
    adapt_step_size,
    basin_hopping,
    metropolis_accept,
    nelder_mead,
    objective_breakdown,
)


class TestCostTable:
    def test_default_weights(self):
        c = CostTable()
        assert c.k_bes == pytest.approx(2.78e-4)
        assert c.k_inv == pytest.approx(1.38e-4)
        assert c.k_ehp == pytest.approx(7.92e-3)
        assert c.k_bev_v1g == pytest.approx(5.56e-4)
        assert c.k_bev_v2g == pytest.approx(9.72e-4)
        assert c.k_pcc_p == c.k_pcc_q == pytest.approx(2.78e-2)
        assert c.k_infeasible == 10.0

    def test_weights_for_classes(self):
        c = CostTable()
        w = c.weights_for(("bes", "ehp", "bev_v1g", "bev_v2g", "inv"))
        assert w.tolist() == [c.k_bes, c.k_ehp, c.k_bev_v1g, c.k_bev_v2g, c.k_inv]

    def test_unknown_class(self):
        with pytest.raises(ConfigurationError, match="unknown plant class"):
            CostTable().weights_for(("bes", "windmill"))


class TestObjectiveBreakdown:
    def test_hand_computed_terms(self):
        c = CostTable()
        bd = objective_breakdown(
            plant_deltas=np.array([1.0, -2.0]),
            plant_weights=np.array([c.k_bes, c.k_bev_v2g]),
            dp_err_kw=0.5, dq_err_kvar=-0.25, n_violations=2, costs=c)
        plant = 1.0 * 2.78e-4 + 2.0 * 9.72e-4
        pcc = 2.78e-2 * 0.5 + 2.78e-2 * 0.25
        assert bd.plant_cost == pytest.approx(plant)
        assert bd.pcc_cost == pytest.approx(pcc)
        assert bd.penalty == pytest.approx(20.0)
        assert bd.of == pytest.approx(plant + pcc + 20.0)
        assert bd.cost_eur == pytest.approx(plant * 0.1)

    def test_zero_everything(self):
        bd = objective_breakdown(np.zeros(3), np.ones(3), 0.0, 0.0, 0, CostTable())
        assert bd.of == 0.0 and bd.cost_eur == 0.0

    @given(st.floats(-50.0, 50.0), st.floats(-50.0, 50.0))
    def test_of_depends_on_error_magnitudes_only(self, dp, dq):
        c = CostTable()
        a = objective_breakdown(np.zeros(1), np.zeros(1), dp, dq, 0, c)
        b = objective_breakdown(np.zeros(1), np.zeros(1), -dp, -dq, 0, c)
        assert a.of == pytest.approx(b.of)
        assert a.of >= 0.0


class TestMetropolis:
    def test_improvement_always_accepted_without_draw(self):
        rng = np.random.default_rng(3)
        state = rng.bit_generator.state
        assert metropolis_accept(-1.0, 0.5, rng) is True
        assert metropolis_accept(0.0, 0.5, rng) is True
        assert rng.bit_generator.state == state

    def test_worsening_consumes_one_draw(self):
        rng_a = np.random.default_rng(9)
        rng_b = np.random.default_rng(9)
        metropolis_accept(0.3, 0.5, rng_a)
        rng_b.random()
        assert rng_a.bit_generator.state == rng_b.bit_generator.state

    def test_zero_temperature_rejects_worsening_without_draw(self):
        rng = np.random.default_rng(5)
        state = rng.bit_generator.state
        assert metropolis_accept(1e-12, 0.0, rng) is False
        assert rng.bit_generator.state == state

    def test_acceptance_probability_near_half(self):
        # exp(-0.3466/0.5) = 0.5000 to four decimals
        rng = np.random.default_rng(123)
        n = 20_000
        hits = sum(metropolis_accept(0.3466, 0.5, rng) for _ in range(n))
        assert 0.47 <= hits / n <= 0.53

    @given(st.floats(-100.0, 0.0), st.floats(0.0, 100.0))
    def test_non_worsening_always_accepted(self, dy, temperature):
        rng = np.random.default_rng(0)
        assert metropolis_accept(dy, temperature, rng) is True


class TestAdaptiveStep:
    def test_high_acceptance_grows_step(self):
        assert adapt_step_size(1.0, 8, 10) == pytest.approx(1.0 / 0.9)

    def test_low_acceptance_shrinks_step(self):
        assert adapt_step_size(1.0, 2, 10) == pytest.approx(0.9)

    def test_on_target_leaves_step(self):
        assert adapt_step_size(1.0, 5, 10) == 1.0

    @given(st.floats(0.01, 100.0), st.integers(0, 10))
    def test_direction_matches_rate(self, step, n_acc):
        out = adapt_step_size(step, n_acc, 10)
        if n_acc > 5:
            assert out > step
        elif n_acc < 5:
            assert out < step
        else:
            assert out == step


class TestNelderMead:
    def test_quadratic_minimum(self):
        f = lambda x: float((x[0] - 3.0) ** 2 + (x[1] + 1.0) ** 2)
        x, fx, _ = nelder_mead(f, np.array([0.0, 0.0]))
        assert x == pytest.approx([3.0, -1.0], abs=1e-4)
        assert fx < 1e-7

    def test_rosenbrock(self):
        f = lambda x: float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)
        settings = NelderMeadSettings(fatol=1e-12, xatol=1e-10, maxfev=2000)
        x, fx, _ = nelder_mead(f, np.array([-1.2, 1.0]), settings=settings)
        assert x == pytest.approx([1.0, 1.0], abs=1e-3)

    def test_bounds_clamp_minimizer(self):
        f = lambda x: float((x[0] - 5.0) ** 2)
        x, fx, _ = nelder_mead(f, np.array([1.0]),
                               bounds=np.array([[0.0, 2.0]]))
        assert x[0] == pytest.approx(2.0, abs=1e-6)
        assert fx == pytest.approx(9.0, abs=1e-4)

    def test_never_worse_than_start(self):
        calls = {"n": 0}

        def nasty(x):
            calls["n"] += 1
            return 0.0 if calls["n"] == 1 else 100.0 + float(np.sum(x ** 2))

        x, fx, _ = nelder_mead(nasty, np.array([1.0, 2.0]),
                               settings=NelderMeadSettings(maxfev=7))
        assert fx == 0.0
        assert np.array_equal(x, [1.0, 2.0])

    def test_respects_eval_budget(self):
        f = lambda x: float(np.sum(np.sin(x * 50.0)))
        for budget in (1, 3, 17, 60):
            _, _, n = nelder_mead(f, np.zeros(4),
                                  settings=NelderMeadSettings(maxfev=budget))
            assert n <= budget

    def test_zero_dimensional_rejected(self):
        with pytest.raises(ConfigurationError, match="zero-dimensional"):
            nelder_mead(lambda x: 0.0, np.array([]))

    @given(st.lists(st.floats(-5.0, 5.0), min_size=1, max_size=4))
    def test_result_never_above_start_value(self, x0):
        f = lambda x: float(np.sum((np.asarray(x) - 1.5) ** 2))
        x0 = np.array(x0)
        _, fx, _ = nelder_mead(f, x0, settings=NelderMeadSettings(maxfev=50))
        assert fx <= f(x0) + 1e-12


def double_well(x):
    """Two basins: local minimum near +2, global minimum near -2."""
    v = float(x[0])
    return (v * v - 4.0) ** 2 + 0.3 * v


class TestBasinHopping:
    def test_start_point_is_iteration_zero(self):
        evals = []

        def f(x):
            evals.append(x.copy())
            return float(np.sum(x ** 2))

        result = basin_hopping(f, np.array([1.5]),
                               BasinHoppingConfig(n_iter=0, seed=1))
        assert len(evals) == 1
        assert result.n_evals == 1
        assert len(result.iterations) == 1
        row = result.iterations[0]
        assert row.iteration == 0 and row.accepted
        assert row.of_local == pytest.approx(2.25)
        assert np.array_equal(result.x, [1.5])

    def test_escapes_local_basin(self):
        start = np.array([2.0])  # inside the shallower basin
        cfg = BasinHoppingConfig(temperature=0.5, n_iter=60, step_size=3.0,
                                 seed=4)
        result = basin_hopping(double_well, start, cfg,
                               bounds=np.array([[-4.0, 4.0]]))
        assert result.x[0] < 0.0
        assert result.of < double_well(np.array([2.0])) - 0.5

    def test_global_best_trace_is_monotone(self):
        cfg = BasinHoppingConfig(n_iter=40, seed=11)
        result = basin_hopping(double_well, np.array([0.5]), cfg,
                               bounds=np.array([[-4.0, 4.0]]))
        assert len(result.iterations) == cfg.n_iter + 1
        best = [r.of_global_best for r in result.iterations]
        assert all(b <= a + 1e-15 for a, b in zip(best, best[1:]))
        assert best[-1] == pytest.approx(result.of)
        assert all(r.iteration == i for i, r in enumerate(result.iterations))

    def test_same_seed_same_run(self):
        cfg = BasinHoppingConfig(n_iter=25, seed=7)
        a = basin_hopping(double_well, np.array([1.0]), cfg)
        b = basin_hopping(double_well, np.array([1.0]), cfg)
        assert np.array_equal(a.x, b.x)
        assert a.of == b.of
        assert [(r.of_local, r.accepted) for r in a.iterations] == \
               [(r.of_local, r.accepted) for r in b.iterations]

    def test_explicit_rng_overrides_seed(self):
        cfg = BasinHoppingConfig(n_iter=15, seed=None)
        a = basin_hopping(double_well, np.array([1.0]), cfg,
                          rng=np.random.default_rng(42))
        b = basin_hopping(double_well, np.array([1.0]), cfg,
                          rng=np.random.default_rng(42))
        assert np.array_equal(a.x, b.x) and a.of == b.of

    def test_prefers_feasible_solution(self):
        # objective falls toward 0 but feasibility requires x >= 1
        def f(x):
            v = float(x[0])
            return v * v, v >= 1.0

        cfg = BasinHoppingConfig(n_iter=40, step_size=1.0, seed=2)
        result = basin_hopping(f, np.array([2.0]), cfg,
                               bounds=np.array([[-3.0, 3.0]]))
        assert result.feasible
        assert result.x[0] >= 1.0 - 1e-9
        # the raw global best it declined to return is infeasible and lower
        assert result.iterations[-1].of_global_best < result.of

    def test_infeasible_everywhere_still_returns_best(self):
        f = lambda x: (float(np.sum(x ** 2)), False)
        result = basin_hopping(f, np.array([1.0, 1.0]),
                               BasinHoppingConfig(n_iter=10, seed=3))
        assert not result.feasible
        assert result.of == pytest.approx(
            min(r.of_local for r in result.iterations))

    def test_x0_outside_bounds_is_clipped(self):
        f = lambda x: float(np.sum(x ** 2))
        result = basin_hopping(f, np.array([10.0]),
                               BasinHoppingConfig(n_iter=0, seed=1),
                               bounds=np.array([[-2.0, 2.0]]))
        assert result.iterations[0].of_local == pytest.approx(4.0)

    def test_flat_objective_grows_step_each_window(self):
        f = lambda x: 0.0  # every move is a tie -> always accepted
        cfg = BasinHoppingConfig(n_iter=20, step_size=1.0, seed=8,
                                 adjust_interval=10, adjust_factor=0.9)
        result = basin_hopping(f, np.zeros(2), cfg)
        steps = [r.step_size for r in result.iterations]
        assert steps[1] == steps[10] == 1.0
        assert steps[11] == pytest.approx(1.0 / 0.9)
        assert steps[20] == pytest.approx(1.0 / 0.9)
        assert result.acceptance_rate == 1.0

    def test_bounds_shape_mismatch(self):
        with pytest.raises(ConfigurationError, match="bounds shape"):
            basin_hopping(lambda x: 0.0, np.zeros(2),
                          BasinHoppingConfig(n_iter=1, seed=1),
                          bounds=np.array([[0.0, 1.0]]))

    @pytest.mark.parametrize("kwargs", [
        {"temperature": -0.1},
        {"n_iter": -1},
        {"step_size": 0.0},
        {"adjust_interval": 0},
        {"adjust_factor": 0.0},
        {"adjust_factor": 1.5},
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ConfigurationError):
            BasinHoppingConfig(**kwargs)

    def test_request_is_a_plain_value_pair(self):
        r = FlexibilityRequest(5.0, 1.0)
        assert (r.dp_kw, r.dq_kvar) == (5.0, 1.0)
