"""Exhaustive grid-search oracle for tiny dispatch problems.

Enumerates the full offset box of a cell with at most three controllable
plants at a fixed resolution and evaluates every grid point through exactly
the same twin-plus-objective path the Basin Hopping dispatcher uses.  Serves
as an independent optimality reference: the dispatcher's objective on the
same problem must not exceed the oracle's best by more than the grid gap.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .optimizer import CostTable, objective_breakdown
from .twin import CellTwin

__all__ = ["make_toy_scenario", "single_step_objective",
           "grid_search_oracle", "OracleResult"]

_MAX_ORACLE_PLANTS = 3


def make_toy_scenario():
    """One prosumer with a 2/2 kW battery and a 3 kVA inverter on a stub feeder.

    Flat household demand, constant weather and zero irradiance make the
    reference stationary, so a single dispatch step is a clean optimization
    problem in (battery ΔP, inverter ΔQ).
    """
    from .scenario import scenario_from_dict
    return scenario_from_dict({
        "name": "toy2",
        "topology": {
            "pcc_bus": "pcc",
            "transformer_kva": 100.0,
            "buses": [{"id": "pcc"}, {"id": "h01"}],
            "lines": [{"from": "pcc", "to": "h01",
                       "r_ohm": 0.01, "x_ohm": 0.004, "i_max_a": 270.0}],
        },
        "weather": {
            "ambient_mean_c": 5.0,
            "ambient_swing_c": 0.0,
            "irradiance_peak_w_m2": 0.0,
            "sunrise_hour": 8.0,
            "sunset_hour": 16.0,
        },
        "simulation": {
            "start": "2023-01-16T20:00:00",
            "internal_dt_s": 1.0,
            "dispatch_step_s": 15.0,
            "warmup_s": 7200.0,
            "profile_back_days": 1.0,
            "profile_forward_days": 1.0,
        },
        "prosumers": [{
            "id": "t01",
            "bus": "h01",
            "household": {"p_base_kw": 0.5, "p_morning_kw": 0.0,
                          "p_evening_kw": 0.0, "tan_phi": 0.2},
            "pv": {"s_rated_kva": 3.0, "p_peak_kwp": 3.0},
            "bes": {"capacity_kwh": 5.0, "p_max_charge_kw": 2.0,
                    "p_max_discharge_kw": 2.0, "soc0": 0.5},
            "bevs": [],
        }],
    })


def single_step_objective(twin, ref, request, costs: CostTable):
    """Objective closure for one dispatch step, shared by oracle and dispatcher.

    Returns ``(f, bounds)`` where ``f(x) -> (of, feasible)``.
    """
    weights = costs.weights_for(twin.plant_classes)
    p_target = ref.pcc_p_kw + request.dp_kw
    q_target = ref.pcc_q_kvar + request.dq_kvar
    collapse_of = costs.k_infeasible * (len(twin.topology.lines) + 1)

    def f(x):
        ev = twin.evaluate_dispatch(ref, x)
        if ev.failure is not None:
            return collapse_of, False
        bd = objective_breakdown(
            ev.plant_values - ref.plant_values, weights,
            ev.pcc_p_kw - p_target, ev.pcc_q_kvar - q_target,
            ev.n_violations, costs)
        return bd.of, ev.feasible

    return f, twin.plant_bounds()


@dataclass
class OracleResult:
    of: float
    x: np.ndarray
    n_evals: int
    resolution: float


def grid_search_oracle(scenario, request, *, resolution=0.05,
                       costs: CostTable = None, warmup_s=None):
    """Exhaustively minimize one dispatch step's objective on an offset grid."""
    costs = costs or CostTable()
    twin = CellTwin(scenario)
    if twin.n_plants > _MAX_ORACLE_PLANTS:
        raise ConfigurationError(
            f"grid-search oracle handles at most {_MAX_ORACLE_PLANTS} plants, "
            f"scenario has {twin.n_plants}")
    if resolution <= 0.0:
        raise ConfigurationError("resolution must be > 0")

    ref = twin.run_warmup(warmup_s)
    f, bounds = single_step_objective(twin, ref, request, costs)

    axes = []
    for lo, hi in bounds:
        n = int(round((hi - lo) / resolution))
        axes.append(lo + resolution * np.arange(n + 1))

    best_of = float("inf")
    best_x = None
    n_evals = 0
    for point in itertools.product(*axes):
        x = np.array(point)
        of, _feasible = f(x)
        n_evals += 1
        if of < best_of:
            best_of = of
            best_x = x
    return OracleResult(of=best_of, x=best_x, n_evals=n_evals,
                        resolution=resolution)
