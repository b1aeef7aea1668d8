"""Digital twin of a low-voltage energy cell.

Wires scenario prosumers (household load, PV inverter, battery, heat pump,
EV chargers) onto the radial feeder and integrates all device dynamics on a
fixed internal substep.  Exposes the dispatch evaluation primitive used by the
optimizer:

* ``run_warmup``            - settle local-control dynamics, then freeze a
                              :class:`ReferenceState` (pre-request baseline).
* ``evaluate_dispatch``     - restore the reference snapshot, apply a vector of
                              plant offsets, integrate one dispatch step and
                              solve the network; side-effect free w.r.t. the
                              reference.
* ``advance_reference``     - commit one dispatch step: same integration, but
                              the end state becomes the next step's snapshot
                              while the frozen baseline powers are kept.

Controllable-plant ordering is class-major and scenario-ordered within each
class: all batteries, then all heat pumps, then all EV chargers, then all PV
inverters.  Offsets are ΔP in kW except for inverters, which take ΔQ in kVAr.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PowerFlowError
from .grid import check_line_limits, solve_power_flow
from .scenario import (
    build_bes,
    build_bev,
    build_ehp,
    build_household,
    build_profiles,
    build_pv,
)

__all__ = ["ReferenceState", "EvaluationResult", "CellTwin",
           "PLANT_KIND_BES", "PLANT_KIND_EHP", "PLANT_KIND_BEV", "PLANT_KIND_INV"]

PLANT_KIND_BES = "bes"
PLANT_KIND_EHP = "ehp"
PLANT_KIND_BEV = "bev"
PLANT_KIND_INV = "inv"

_WARMUP_SUBSTEP_S = 15.0
_WARMUP_BLOCK_S = 900.0


@dataclass
class ReferenceState:
    """Frozen pre-request baseline plus the snapshot evaluations start from.

    ``plant_values`` and ``pcc`` are captured once, before the first request
    step, and stay frozen across ``advance_reference`` calls: deviations and
    PCC targets for the whole dispatch run are measured against them.
    """
    plant_values: np.ndarray
    pcc_p_kw: float
    pcc_q_kvar: float
    snapshot: tuple
    t_s: float


@dataclass
class EvaluationResult:
    """Outcome of integrating one dispatch step under a given offset vector."""
    pcc_p_kw: float
    pcc_q_kvar: float
    plant_values: np.ndarray
    n_violations: int
    feasible: bool
    failure: str | None = None
    violations: tuple = ()
    trace: dict | None = None


class _ProsumerTwin:
    __slots__ = ("id", "bus", "household", "pv", "bes", "ehp", "bevs",
                 "off_bes", "off_ehp", "off_inv", "off_bevs",
                 "load_p", "load_q", "heat", "irr", "amb",
                 "p_kw", "q_kvar")

    def __init__(self, spec, profiles):
        self.id = spec.id
        self.bus = spec.bus
        self.household = build_household(spec.id, profiles)
        self.pv = build_pv(spec.pv) if spec.pv else None
        self.bes = build_bes(spec.bes) if spec.bes else None
        self.ehp = build_ehp(spec.ehp) if spec.ehp else None
        self.bevs = [build_bev(b) for b in spec.bevs]
        self.off_bes = 0.0
        self.off_ehp = 0.0
        self.off_inv = 0.0
        self.off_bevs = [0.0] * len(self.bevs)
        self.load_p = self.load_q = self.heat = 0.0
        self.irr = self.amb = 0.0
        self.p_kw = self.q_kvar = 0.0

    def sample_inputs(self, t_s, ambient, irradiance):
        self.load_p, self.load_q, self.heat = self.household.sample(t_s)
        self.amb = ambient.value(t_s)
        self.irr = irradiance.value(t_s)

    def substep(self, tod_s, dt):
        p = self.load_p
        q = self.load_q
        if self.pv is not None:
            p_pv, q_pv = self.pv.step(self.irr, self.off_inv)
            p -= p_pv
            q += q_pv
        if self.bes is not None:
            bes = self.bes
            wish = bes.feasible_command((p_pv if self.pv is not None else 0.0)
                                        - self.load_p, dt)
            p += bes.step(wish + self.off_bes, dt)
        if self.ehp is not None:
            p += self.ehp.step(self.heat, self.amb, self.off_ehp, dt)
            q += self.ehp.q_kvar
        for k, bev in enumerate(self.bevs):
            p += bev.step(self.off_bevs[k], tod_s, dt)
        self.p_kw = p
        self.q_kvar = q

    def get_state(self):
        return (
            self.pv.get_state() if self.pv is not None else None,
            self.bes.get_state() if self.bes is not None else None,
            self.ehp.get_state() if self.ehp is not None else None,
            tuple(b.get_state() for b in self.bevs),
            (self.p_kw, self.q_kvar),
        )

    def set_state(self, state):
        pv_s, bes_s, ehp_s, bev_s, bus_s = state
        if self.pv is not None:
            self.pv.set_state(pv_s)
        if self.bes is not None:
            self.bes.set_state(bes_s)
        if self.ehp is not None:
            self.ehp.set_state(ehp_s)
        for bev, s in zip(self.bevs, bev_s):
            bev.set_state(s)
        self.p_kw, self.q_kvar = bus_s


class CellTwin:
    """Simulation state machine for one scenario."""

    def __init__(self, scenario):
        self.scenario = scenario
        self.topology = scenario.build_topology()
        self.profiles = build_profiles(scenario)
        self.prosumers = [_ProsumerTwin(p, self.profiles) for p in scenario.prosumers]
        self._by_id = {p.id: p for p in self.prosumers}
        self.internal_dt_s = scenario.simulation.internal_dt_s
        self.dispatch_step_s = scenario.simulation.dispatch_step_s
        self.start_tod_s = scenario.start_tod_s()
        self.t_s = 0.0
        self._build_plant_table()
        self._junctions = [b.id for b in scenario.buses
                           if b.id != scenario.pcc_bus and b.prosumer is None]
        self._line_limit = {ln.id: ln.i_max_a for ln in self.topology.lines}

    # ------------------------------------------------------------------
    # plant table

    def _build_plant_table(self):
        labels, kinds, classes, bounds, setters, getters = [], [], [], [], [], []

        def add(label, kind, cls, lo, hi, setter, getter):
            labels.append(label)
            kinds.append(kind)
            classes.append(cls)
            bounds.append((lo, hi))
            setters.append(setter)
            getters.append(getter)

        def bes_setter(pro):
            def set_(v):
                pro.off_bes = v
            return set_

        def ehp_setter(pro):
            def set_(v):
                pro.off_ehp = v
            return set_

        def inv_setter(pro):
            def set_(v):
                pro.off_inv = v
            return set_

        def bev_setter(pro, k):
            def set_(v):
                pro.off_bevs[k] = v
            return set_

        for pro in self.prosumers:
            if pro.bes is not None:
                span = pro.bes.p_max_charge_kw + pro.bes.p_max_discharge_kw
                add(f"bes:{pro.id}", PLANT_KIND_BES, "bes", -span, span,
                    bes_setter(pro), (lambda p: (lambda: p.bes.p_kw))(pro))
        for pro in self.prosumers:
            if pro.ehp is not None:
                span = pro.ehp.p_el_max_kw + pro.ehp.p_element_kw
                add(f"ehp:{pro.id}", PLANT_KIND_EHP, "ehp", -span, span,
                    ehp_setter(pro), (lambda p: (lambda: p.ehp.p_kw))(pro))
        for pro in self.prosumers:
            for k, bev in enumerate(pro.bevs):
                cls = "bev_v2g" if bev.v2g else "bev_v1g"
                span = 2.0 * bev.p_rated_kw if bev.v2g else bev.p_rated_kw
                add(f"bev:{pro.id}.{k}", PLANT_KIND_BEV, cls, -span, span,
                    bev_setter(pro, k),
                    (lambda b: (lambda: b.p_kw))(bev))
        for pro in self.prosumers:
            if pro.pv is not None:
                span = pro.pv.q_fraction_limit * pro.pv.s_rated_kva
                add(f"inv:{pro.id}", PLANT_KIND_INV, "inv", -span, span,
                    inv_setter(pro), (lambda p: (lambda: p.pv.q_kvar))(pro))

        self.plant_labels = tuple(labels)
        self.plant_kinds = tuple(kinds)
        self.plant_classes = tuple(classes)
        self._offset_setters = setters
        self._value_getters = getters
        self.n_plants = len(labels)
        self._bounds = np.array(bounds, dtype=float) if bounds else np.empty((0, 2))

    def plant_bounds(self):
        return self._bounds.copy()

    def set_offsets(self, offsets):
        if len(offsets) != self.n_plants:
            raise ConfigurationError(
                f"offset vector has {len(offsets)} entries, "
                f"expected {self.n_plants}")
        for setter, v in zip(self._offset_setters, offsets):
            setter(float(v))

    def plant_values(self):
        """Realized costed quantity per plant (P in kW; Q in kVAr for inverters)."""
        return np.array([g() for g in self._value_getters])

    # ------------------------------------------------------------------
    # integration

    def _step_interval(self, dt_total, substep):
        ambient, irradiance = self.profiles.ambient, self.profiles.irradiance
        t0 = self.t_s
        for pro in self.prosumers:
            pro.sample_inputs(t0, ambient, irradiance)
        n = round(dt_total / substep)
        if n < 1 or abs(n * substep - dt_total) > 1e-9 * max(1.0, dt_total):
            raise ConfigurationError(
                f"interval {dt_total} s is not a multiple of substep {substep} s")
        base_tod = self.start_tod_s + t0
        prosumers = self.prosumers
        for k in range(n):
            tod = (base_tod + k * substep) % 86400.0
            for pro in prosumers:
                pro.substep(tod, substep)
        self.t_s = t0 + dt_total

    def step_dispatch_interval(self):
        self._step_interval(self.dispatch_step_s, self.internal_dt_s)

    def injections(self):
        inj = {bus: (0.0, 0.0) for bus in self._junctions}
        for pro in self.prosumers:
            inj[pro.bus] = (pro.p_kw, pro.q_kvar)
        return inj

    def solve(self):
        return solve_power_flow(self.topology, self.injections(), t_s=self.t_s)

    # ------------------------------------------------------------------
    # snapshots

    def snapshot(self):
        return (self.t_s, tuple(p.get_state() for p in self.prosumers))

    def restore(self, snap):
        self.t_s = snap[0]
        for pro, state in zip(self.prosumers, snap[1]):
            pro.set_state(state)

    # ------------------------------------------------------------------
    # reference handling

    def run_warmup(self, duration_s=None):
        """Integrate local-control-only operation, then capture the baseline.

        The warmup rewinds the clock to ``-duration_s`` and integrates forward
        to t=0 with all offsets zero, using coarse substeps (first-order lags
        use exact exponential updates, so coarse stepping does not degrade the
        settled state).  Must be called once, right after construction.
        """
        if duration_s is None:
            duration_s = self.scenario.simulation.warmup_s
        if duration_s < 0:
            raise ConfigurationError("warmup duration must be >= 0")
        self.set_offsets([0.0] * self.n_plants)
        self.t_s = -float(duration_s)
        substep = max(self.internal_dt_s, _WARMUP_SUBSTEP_S)
        remaining = float(duration_s)
        while remaining > 1e-9:
            block = min(_WARMUP_BLOCK_S, remaining)
            n_sub = block / substep
            if abs(n_sub - round(n_sub)) > 1e-9 or block < substep:
                self._step_interval(block, self.internal_dt_s)
            else:
                self._step_interval(block, substep)
            remaining = -self.t_s
        self.t_s = 0.0
        return self.capture_reference()

    def capture_reference(self):
        res = self.solve()
        return ReferenceState(
            plant_values=self.plant_values(),
            pcc_p_kw=res.pcc.p_kw,
            pcc_q_kvar=res.pcc.q_kvar,
            snapshot=self.snapshot(),
            t_s=self.t_s,
        )

    def override_bes_soc(self, soc):
        """Force every battery's state of charge (scenario-study hook)."""
        for pro in self.prosumers:
            if pro.bes is not None:
                pro.bes.soc = float(soc)

    # ------------------------------------------------------------------
    # dispatch evaluation

    def _integrate_offsets(self, ref, offsets, record_trace):
        self.restore(ref.snapshot)
        self.set_offsets(offsets)
        self.step_dispatch_interval()
        try:
            res = self.solve()
        except PowerFlowError as exc:
            return EvaluationResult(
                pcc_p_kw=float("nan"), pcc_q_kvar=float("nan"),
                plant_values=self.plant_values(),
                n_violations=len(self.topology.lines),
                feasible=False, failure=str(exc))
        violations = check_line_limits(res, self.topology)
        trace = self._trace_row(res) if record_trace else None
        return EvaluationResult(
            pcc_p_kw=res.pcc.p_kw,
            pcc_q_kvar=res.pcc.q_kvar,
            plant_values=self.plant_values(),
            n_violations=len(violations),
            feasible=not violations,
            violations=tuple(violations),
            trace=trace,
        )

    def evaluate_dispatch(self, ref, offsets, record_trace=False):
        """Integrate one dispatch step from the reference snapshot.

        Does not mutate ``ref``; the twin's own state is scratch space and is
        left at the end of the evaluated step.
        """
        return self._integrate_offsets(ref, offsets, record_trace)

    def advance_reference(self, ref, offsets, record_trace=True):
        """Commit a dispatch step: integrate and adopt the end state.

        Returns ``(new_ref, evaluation)``.  The new reference keeps the frozen
        baseline plant powers and PCC reading of ``ref``; only the snapshot
        and clock advance.
        """
        evaluation = self._integrate_offsets(ref, offsets, record_trace)
        if evaluation.failure is not None:
            raise PowerFlowError(
                f"network solution failed while committing step at "
                f"t={self.t_s:.0f}s: {evaluation.failure}")
        new_ref = ReferenceState(
            plant_values=ref.plant_values,
            pcc_p_kw=ref.pcc_p_kw,
            pcc_q_kvar=ref.pcc_q_kvar,
            snapshot=self.snapshot(),
            t_s=self.t_s,
        )
        return new_ref, evaluation

    # ------------------------------------------------------------------
    # diagnostics

    def _trace_row(self, res):
        bes_soc, ehp_t, bev_soc, bev_conn, bev_p = [], [], [], [], []
        inv_p, inv_q, inv_s = [], [], []
        tod = (self.start_tod_s + self.t_s) % 86400.0
        for pro in self.prosumers:
            if pro.bes is not None:
                bes_soc.append(pro.bes.soc)
            if pro.ehp is not None:
                ehp_t.append(pro.ehp.t_storage_c)
            for bev in pro.bevs:
                bev_soc.append(bev.soc)
                bev_conn.append(bev.connected(tod))
                bev_p.append(bev.p_kw)
            if pro.pv is not None:
                inv_p.append(pro.pv.p_ac_kw)
                inv_q.append(pro.pv.q_kvar)
                inv_s.append(pro.pv.s_rated_kva)
        return {
            "t_s": self.t_s,
            "bes_soc": tuple(bes_soc),
            "ehp_t_c": tuple(ehp_t),
            "bev_soc": tuple(bev_soc),
            "bev_connected": tuple(bev_conn),
            "bev_p_kw": tuple(bev_p),
            "inv_p_kw": tuple(inv_p),
            "inv_q_kvar": tuple(inv_q),
            "inv_s_rated_kva": tuple(inv_s),
            "v_min_pu": min(res.v_pu.values()),
            "line_loading_max": max(
                (amps / self._line_limit[lid]
                 for lid, amps in res.currents_a.items()),
                default=0.0),
        }
