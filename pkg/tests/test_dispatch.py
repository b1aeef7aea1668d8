"""Continuous dispatch loop, technology shares, reporting, grid oracle."""

import numpy as np
import pytest

from cellflex.dispatch import DispatchRun, run_dispatch, technology_shares
from cellflex.errors import ConfigurationError, DispatchError, PowerFlowError
from cellflex.optimizer import BasinHoppingConfig, CostTable, FlexibilityRequest
from cellflex.oracle import grid_search_oracle, make_toy_scenario
from cellflex.reporting import (
    DISPATCH_COLUMNS,
    ITERATION_COLUMNS,
    summary_dict,
    write_dispatch_csv,
    write_iterations_csv,
    write_summary_json,
)
from cellflex.scenario import load_bundled_scenario
from cellflex.twin import CellTwin

TOY_REQUEST = FlexibilityRequest(1.0, 0.3)
TOY_CONFIG = BasinHoppingConfig(n_iter=20, seed=6)


@pytest.fixture(scope="module")
def toy_run():
    return run_dispatch(make_toy_scenario(), TOY_REQUEST, n_steps=3,
                        config=TOY_CONFIG)


class TestTechnologyShares:
    def test_share_arithmetic(self):
        shares = technology_shares(
            plant_deltas=[1.0, 2.0, 0.5, 0.5, 0.3],
            plant_classes=("bes", "ehp", "bev_v1g", "bev_v2g", "inv"),
            dp_target_kw=5.0, dq_target_kvar=1.0)
        assert shares == pytest.approx(
            {"bes": 0.2, "ehp": 0.4, "bev": 0.2, "inv_q": 0.3})

    def test_zero_targets_fall_back_to_raw_sums(self):
        shares = technology_shares([1.5, -0.4], ("bes", "inv"), 0.0, 0.0)
        assert shares["bes"] == pytest.approx(1.5)
        assert shares["inv_q"] == pytest.approx(-0.4)

    def test_unknown_class(self):
        with pytest.raises(DispatchError, match="unknown plant class"):
            technology_shares([1.0], ("geothermal",), 5.0, 1.0)


class TestToyTracking:
    def test_tracks_request_every_step(self, toy_run):
        assert len(toy_run.steps) == 3
        for st in toy_run.steps:
            assert abs(st.dp_pcc_kw - st.dp_target_kw) <= 0.02
            assert abs(st.dq_pcc_kvar - st.dq_target_kvar) <= 0.01
            assert st.feasible

    def test_step_clock_advances_by_dispatch_interval(self, toy_run):
        assert [st.t_s for st in toy_run.steps] == [15.0, 30.0, 45.0]
        assert [st.index for st in toy_run.steps] == [0, 1, 2]

    def test_battery_serves_p_and_inverter_serves_q(self, toy_run):
        for st in toy_run.steps:
            assert st.shares["bes"] == pytest.approx(1.0, abs=0.05)
            assert st.shares["inv_q"] == pytest.approx(1.0, abs=0.05)
            assert st.shares["ehp"] == 0.0
            assert st.shares["bev"] == 0.0

    def test_warm_start_contract(self, toy_run):
        # step 0 starts from the zero vector: its iteration-0 objective is the
        # pure PCC mismatch cost; later steps start from the previous solution
        c = CostTable()
        cold = c.k_pcc_p * abs(TOY_REQUEST.dp_kw) \
            + c.k_pcc_q * abs(TOY_REQUEST.dq_kvar)
        x0 = toy_run.x0_contract
        assert x0[0] == pytest.approx(cold, abs=1e-4)
        assert x0[1] < 0.1 * cold
        assert x0[2] < 0.1 * cold

    def test_offsets_respect_plant_bounds(self, toy_run):
        bounds = CellTwin(make_toy_scenario()).plant_bounds()
        for st in toy_run.steps:
            assert np.all(st.offsets >= bounds[:, 0] - 1e-12)
            assert np.all(st.offsets <= bounds[:, 1] + 1e-12)

    def test_costs_are_consistent(self, toy_run):
        for st in toy_run.steps:
            assert st.cost_eur == pytest.approx(st.plant_cost * 0.1)
            assert st.of == pytest.approx(
                st.plant_cost + st.pcc_cost + st.penalty)
            assert st.penalty == 0.0

    def test_same_seed_reproduces_run(self, toy_run):
        again = run_dispatch(make_toy_scenario(), TOY_REQUEST, n_steps=3,
                             config=TOY_CONFIG)
        for a, b in zip(toy_run.steps, again.steps):
            assert a.pcc_p_kw == b.pcc_p_kw
            assert a.pcc_q_kvar == b.pcc_q_kvar
            assert np.array_equal(a.offsets, b.offsets)
            assert a.of == b.of

    def test_record_iterations_toggle(self):
        run = run_dispatch(make_toy_scenario(), TOY_REQUEST, n_steps=1,
                           config=BasinHoppingConfig(n_iter=5, seed=1),
                           record_iterations=False)
        assert run.steps[0].iterations == []

    def test_initial_bes_soc_override(self):
        run = run_dispatch(make_toy_scenario(), FlexibilityRequest(-1.0, 0.0),
                           n_steps=2, config=BasinHoppingConfig(n_iter=10, seed=3),
                           initial_bes_soc=0.02)
        socs = [st.trace["bes_soc"][0] for st in run.steps]
        assert socs[0] < 0.03          # override took, not the warm ~0.5
        assert socs[1] <= socs[0]      # reduction keeps draining it

    def test_commit_failure_raises_with_partial_trace(self, monkeypatch):
        original = CellTwin.advance_reference
        calls = {"n": 0}

        def flaky(self, ref, offsets, record_trace=True):
            calls["n"] += 1
            if calls["n"] >= 2:
                raise PowerFlowError("synthetic network failure")
            return original(self, ref, offsets, record_trace)

        monkeypatch.setattr(CellTwin, "advance_reference", flaky)
        with pytest.raises(DispatchError, match="step 1") as err:
            run_dispatch(make_toy_scenario(), TOY_REQUEST, n_steps=3,
                         config=BasinHoppingConfig(n_iter=5, seed=1))
        assert len(err.value.trace) == 1
        assert err.value.trace[0].index == 0


class TestReporting:
    def test_dispatch_csv_layout(self, toy_run, tmp_path):
        path = tmp_path / "steps.csv"
        write_dispatch_csv(toy_run, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(DISPATCH_COLUMNS)
        assert len(lines) == 1 + len(toy_run.steps)
        first = lines[1].split(",")
        assert len(first) == len(DISPATCH_COLUMNS)
        assert float(first[0]) == 15.0
        assert float(first[3]) == TOY_REQUEST.dp_kw

    def test_iterations_csv_layout(self, toy_run, tmp_path):
        path = tmp_path / "iters.csv"
        write_iterations_csv(toy_run, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(ITERATION_COLUMNS)
        assert len(lines) == 1 + 3 * (TOY_CONFIG.n_iter + 1)
        row = lines[1].split(",")
        assert row[0] == "0" and row[1] == "0"
        assert row[5] in ("0", "1")  # booleans written as integers

    def test_rewrite_is_byte_identical(self, toy_run, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_dispatch_csv(toy_run, a)
        write_dispatch_csv(toy_run, b)
        assert a.read_bytes() == b.read_bytes()

    def test_summary_fields(self, toy_run):
        s = summary_dict(toy_run)
        assert s["scenario"] == "toy2"
        assert s["request"] == {"dp_kw": 1.0, "dq_kvar": 0.3}
        assert s["n_steps"] == 3
        assert s["optimizer"]["seed"] == 6
        assert s["tracking"]["frac_dp_within_0p1_kw"] == 1.0
        assert s["tracking"]["frac_dq_within_0p05_kvar"] == 1.0
        assert s["tracking"]["max_abs_dp_err_kw"] <= 0.02
        assert s["all_steps_feasible"] is True
        assert s["totals"]["cost_eur"] == pytest.approx(
            sum(st.cost_eur for st in toy_run.steps))

    def test_summary_json_round_trips(self, toy_run, tmp_path):
        import json
        path = tmp_path / "summary.json"
        write_summary_json(toy_run, path)
        assert json.loads(path.read_text()) == summary_dict(toy_run)


class TestOracle:
    def test_oracle_refuses_large_cells(self):
        with pytest.raises(ConfigurationError, match="at most 3"):
            grid_search_oracle(load_bundled_scenario(), TOY_REQUEST)

    def test_oracle_rejects_bad_resolution(self):
        with pytest.raises(ConfigurationError, match="resolution"):
            grid_search_oracle(make_toy_scenario(), TOY_REQUEST,
                               resolution=0.0)

    def test_oracle_covers_the_offset_grid(self):
        result = grid_search_oracle(make_toy_scenario(), TOY_REQUEST,
                                    resolution=0.5)
        # bes spans [-4, 4] in 17 points, inverter [-0.9, 0.9] in 5
        assert result.n_evals == 17 * 5
        assert result.resolution == 0.5

    def test_optimizer_matches_oracle_single_seed(self):
        oracle = grid_search_oracle(make_toy_scenario(), TOY_REQUEST)
        run = run_dispatch(make_toy_scenario(), TOY_REQUEST, n_steps=1,
                           config=BasinHoppingConfig(n_iter=50, seed=1))
        assert run.steps[0].of <= oracle.of + 1e-3
        assert oracle.x[0] == pytest.approx(1.0, abs=0.05)
        assert oracle.x[1] == pytest.approx(0.3, abs=0.05)
