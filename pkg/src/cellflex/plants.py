"""Controllable and inflexible plant models of the energy cell.

Sign conventions used everywhere in the package:

* active power P in kW, consumption positive (a discharging battery or a
  generating PV plant contributes negative P at its bus);
* reactive power Q in kVAr, inductive consumption positive;
* state of charge as a fraction in [0, 1];
* temperatures in deg C, energies in kWh, times in seconds.

Dispatch interacts with plants through additive power offsets on top of each
plant's local control.  The local command is reduced to what the plant can
actually do first (an empty battery's discharge wish collapses to zero), the
offset is added on top, and the sum is clamped again — so a request beyond the
feasible range pins at the bound and the excess is ignored; the plant flags
this via its `saturated` attribute.  Commanded power then passes through a
first-order lag before it acts on the stored energy.
"""

import math

from .dynamics import FirstOrderLag, clamp

__all__ = [
    "BatteryStorage",
    "PvInverter",
    "HeatPumpSystem",
    "ElectricVehicle",
    "HouseholdLoad",
    "heat_pump_cop",
]


def heat_pump_cop(t_sink_c, t_source_c, effectiveness):
    """Carnot-based coefficient of performance.

    COP = effectiveness * T_sink / (T_sink - T_source), temperatures taken in
    Kelvin for the numerator.  Raises ValueError when the sink is not warmer
    than the source (the cycle degenerates).
    """
    if t_sink_c <= t_source_c:
        raise ValueError(
            f"t_sink ({t_sink_c} degC) must exceed t_source ({t_source_c} degC)"
        )
    if effectiveness <= 0.0:
        raise ValueError(f"effectiveness must be > 0, got {effectiveness}")
    return effectiveness * (t_sink_c + 273.15) / (t_sink_c - t_source_c)


class BatteryStorage:
    """Stationary battery with SOC bookkeeping and a lagged power response.

    Charging (P > 0) stores P*eta_charge, discharging (P < 0) drains
    |P|/eta_discharge from the store.  The per-substep SOC headroom is turned
    into a power bound before the lag so the state never leaves [0, 1]; if the
    lag's momentum still overshoots a collapsing headroom the output is pinned
    to the bound.
    """

    __slots__ = (
        "capacity_kwh", "p_max_charge_kw", "p_max_discharge_kw",
        "eta_charge", "eta_discharge", "lag", "soc", "p_kw", "saturated",
    )

    def __init__(self, capacity_kwh, p_max_charge_kw, p_max_discharge_kw,
                 eta_charge=0.95, eta_discharge=0.95, soc0=0.5,
                 time_constant_s=2.0, p0_kw=0.0):
        if capacity_kwh <= 0.0:
            raise ValueError(f"capacity_kwh must be > 0, got {capacity_kwh}")
        if p_max_charge_kw < 0.0 or p_max_discharge_kw < 0.0:
            raise ValueError("power limits must be >= 0")
        if not 0.0 < eta_charge <= 1.0 or not 0.0 < eta_discharge <= 1.0:
            raise ValueError("efficiencies must lie in (0, 1]")
        if not 0.0 <= soc0 <= 1.0:
            raise ValueError(f"soc0 must lie in [0, 1], got {soc0}")
        self.capacity_kwh = capacity_kwh
        self.p_max_charge_kw = p_max_charge_kw
        self.p_max_discharge_kw = p_max_discharge_kw
        self.eta_charge = eta_charge
        self.eta_discharge = eta_discharge
        self.lag = FirstOrderLag(1.0, time_constant_s, y0=p0_kw)
        self.soc = soc0
        self.p_kw = p0_kw
        self.saturated = False

    def _headroom_clamp(self, p_kw, dt):
        """Limit `p_kw` so the SOC stays in [0, 1] over a dt-second substep."""
        if p_kw > 0.0:
            room = (1.0 - self.soc) * self.capacity_kwh * 3600.0 / (self.eta_charge * dt)
            if p_kw > room:
                return room
        elif p_kw < 0.0:
            room = self.soc * self.capacity_kwh * 3600.0 * self.eta_discharge / dt
            if -p_kw > room:
                return -room
        return p_kw

    def feasible_command(self, wish_kw, dt):
        """Local-control wish reduced to what the plant can deliver right now."""
        return self._headroom_clamp(
            clamp(wish_kw, -self.p_max_discharge_kw, self.p_max_charge_kw), dt)

    def step(self, setpoint_kw, dt):
        """Advance one substep toward `setpoint_kw`; returns realized power."""
        cmd = self._headroom_clamp(
            clamp(setpoint_kw, -self.p_max_discharge_kw, self.p_max_charge_kw), dt)
        self.saturated = cmd != setpoint_kw
        p = self.lag.step(cmd, dt)
        pinned = self._headroom_clamp(
            clamp(p, -self.p_max_discharge_kw, self.p_max_charge_kw), dt)
        if pinned != p:
            p = pinned
            self.lag.reset(p)
            self.saturated = True
        if p > 0.0:
            self.soc += p * self.eta_charge * dt / 3600.0 / self.capacity_kwh
        elif p < 0.0:
            self.soc += p / self.eta_discharge * dt / 3600.0 / self.capacity_kwh
        self.soc = clamp(self.soc, 0.0, 1.0)
        self.p_kw = p
        return p

    def get_state(self):
        return (self.soc, self.lag.y, self.p_kw, self.saturated)

    def set_state(self, state):
        self.soc, self.lag.y, self.p_kw, self.saturated = state


class PvInverter:
    """PV inverter with active-power priority and a reactive capability band.

    p_ac = min(p_dc, s_rated); the reactive setpoint is clamped to
    +-min(q_fraction_limit * s_rated, sqrt(s_rated^2 - p_ac^2)), which keeps
    the operating point inside the apparent-power circle at all times.
    Reactive response is treated as instantaneous (power-electronic control is
    far faster than the simulation substep).
    """

    __slots__ = ("s_rated_kva", "p_peak_kwp", "q_fraction_limit",
                 "p_ac_kw", "q_kvar", "saturated")

    def __init__(self, s_rated_kva, p_peak_kwp, q_fraction_limit=0.30):
        if s_rated_kva <= 0.0:
            raise ValueError(f"s_rated_kva must be > 0, got {s_rated_kva}")
        if p_peak_kwp < 0.0:
            raise ValueError(f"p_peak_kwp must be >= 0, got {p_peak_kwp}")
        if not 0.0 <= q_fraction_limit <= 1.0:
            raise ValueError(f"q_fraction_limit must lie in [0, 1], got {q_fraction_limit}")
        self.s_rated_kva = s_rated_kva
        self.p_peak_kwp = p_peak_kwp
        self.q_fraction_limit = q_fraction_limit
        self.p_ac_kw = 0.0
        self.q_kvar = 0.0
        self.saturated = False

    def q_capability(self, p_ac_kw):
        """Symmetric reactive band (lo, hi) available at the given active power."""
        s = self.s_rated_kva
        circle = math.sqrt(max(0.0, s * s - p_ac_kw * p_ac_kw))
        m = min(self.q_fraction_limit * s, circle)
        return -m, m

    def step(self, irradiance_w_m2, q_setpoint_kvar):
        """Update output for the current irradiance and reactive setpoint.

        Returns (p_ac_kw, q_kvar) where p_ac is generation (>= 0, enters the
        bus balance with negative sign).
        """
        p_dc = self.p_peak_kwp * max(0.0, irradiance_w_m2) / 1000.0
        p_ac = min(p_dc, self.s_rated_kva)
        lo, hi = self.q_capability(p_ac)
        q = clamp(q_setpoint_kvar, lo, hi)
        self.saturated = q != q_setpoint_kvar
        self.p_ac_kw = p_ac
        self.q_kvar = q
        return p_ac, q

    def get_state(self):
        return (self.p_ac_kw, self.q_kvar, self.saturated)

    def set_state(self, state):
        self.p_ac_kw, self.q_kvar, self.saturated = state


class HeatPumpSystem:
    """Heat pump + resistive element feeding a hot-water storage.

    A two-point thermostat duty-cycles the compressor against the storage: it
    switches on at full power when the storage cools to `t_on_c` and off again
    once it reaches `t_off_c`.  Dispatch offsets add to that command; anything
    beyond the compressor rating spills into the heating element.  The
    compressor cannot lift the storage above `t_element_threshold_c` — beyond
    it only the element keeps heating, up to `t_max_c`.  The storage never
    leaves [t_min_c, t_max_c]: at the floor the system raises power to cover
    demand, at the ceiling it backs off.  Heat demand is always served from
    storage.

    Electric power is drawn at a fixed inductive power factor, so every kW of
    compressor or element power also consumes P*tan(phi) kVAr.
    """

    __slots__ = (
        "p_el_max_kw", "p_element_kw", "storage_kwh_per_k", "effectiveness",
        "t_on_c", "t_off_c", "t_min_c", "t_max_c", "t_element_threshold_c",
        "tan_phi", "heating", "lag", "t_storage_c", "p_kw", "q_kvar",
        "saturated", "last_cop", "last_p_compressor_kw", "last_p_element_kw",
    )

    def __init__(self, p_el_max_kw, p_element_kw, storage_kwh_per_k,
                 effectiveness=0.5, t_on_c=42.0, t_off_c=48.0, t_min_c=35.0,
                 t_max_c=90.0, t_element_threshold_c=50.0, t0_c=45.0,
                 heating0=False, time_constant_s=8.0, power_factor=0.95):
        if p_el_max_kw <= 0.0:
            raise ValueError(f"p_el_max_kw must be > 0, got {p_el_max_kw}")
        if p_element_kw < 0.0:
            raise ValueError(f"p_element_kw must be >= 0, got {p_element_kw}")
        if storage_kwh_per_k <= 0.0:
            raise ValueError(f"storage_kwh_per_k must be > 0, got {storage_kwh_per_k}")
        if not t_min_c <= t_on_c < t_off_c <= t_element_threshold_c <= t_max_c:
            raise ValueError("need t_min <= t_on < t_off <= t_element_threshold <= t_max")
        if not t_min_c <= t0_c <= t_max_c:
            raise ValueError(f"t0_c {t0_c} outside [{t_min_c}, {t_max_c}]")
        if not 0.0 < power_factor <= 1.0:
            raise ValueError(f"power_factor must lie in (0, 1], got {power_factor}")
        self.p_el_max_kw = p_el_max_kw
        self.p_element_kw = p_element_kw
        self.storage_kwh_per_k = storage_kwh_per_k
        self.effectiveness = effectiveness
        self.t_on_c = t_on_c
        self.t_off_c = t_off_c
        self.t_min_c = t_min_c
        self.t_max_c = t_max_c
        self.t_element_threshold_c = t_element_threshold_c
        self.tan_phi = math.tan(math.acos(power_factor))
        self.heating = bool(heating0)
        self.lag = FirstOrderLag(1.0, time_constant_s, y0=0.0)
        self.t_storage_c = t0_c
        self.p_kw = 0.0
        self.q_kvar = 0.0
        self.saturated = False
        self.last_cop = 0.0
        self.last_p_compressor_kw = 0.0
        self.last_p_element_kw = 0.0

    def step(self, heat_demand_kw, ambient_c, offset_kw, dt):
        """Advance one substep; returns total electric power (compressor + element)."""
        t = self.t_storage_c
        # keep the source strictly below the sink so the cycle stays defined
        cop = heat_pump_cop(t, min(ambient_c, t - 1.0), self.effectiveness)
        if self.heating:
            if t >= self.t_off_c:
                self.heating = False
        elif t <= self.t_on_c:
            self.heating = True
        local = self.p_el_max_kw if self.heating else 0.0
        wanted = local + offset_kw
        cmd_total = clamp(wanted, 0.0, self.p_el_max_kw + self.p_element_kw)
        self.saturated = cmd_total != wanted
        if t >= self.t_element_threshold_c:
            cmd_comp = 0.0
            cmd_elem = min(cmd_total, self.p_element_kw)
        else:
            cmd_comp = min(cmd_total, self.p_el_max_kw)
            cmd_elem = min(cmd_total - cmd_comp, self.p_element_kw)
        p_comp = self.lag.step(cmd_comp, dt)
        p_elem = cmd_elem
        c3600 = self.storage_kwh_per_k * 3600.0
        t_new = t + (cop * p_comp + p_elem - heat_demand_kw) * dt / c3600

        if t_new < self.t_min_c:
            # floor hold: cover demand plus the shortfall down to t_min
            self.heating = True
            need = heat_demand_kw + (self.t_min_c - t) * c3600 / dt
            p_comp = clamp(need / cop, 0.0, self.p_el_max_kw)
            self.lag.reset(p_comp)
            p_elem = clamp(need - cop * p_comp, 0.0, self.p_element_kw)
            t_new = t + (cop * p_comp + p_elem - heat_demand_kw) * dt / c3600
            if t_new < self.t_min_c:  # undersized for this demand: pin
                t_new = self.t_min_c
            self.saturated = True
        elif t_new > self.t_max_c:
            # ceiling: shed the element first, then the compressor
            allowed = heat_demand_kw + (self.t_max_c - t) * c3600 / dt
            p_elem = clamp(allowed - cop * p_comp, 0.0, p_elem)
            if cop * p_comp + p_elem > allowed:
                p_elem = 0.0
                p_comp = max(0.0, allowed) / cop
                self.lag.reset(p_comp)
            t_new = t + (cop * p_comp + p_elem - heat_demand_kw) * dt / c3600
            if t_new > self.t_max_c:
                t_new = self.t_max_c
            self.saturated = True

        self.t_storage_c = t_new
        p_total = p_comp + p_elem
        self.p_kw = p_total
        self.q_kvar = p_total * self.tan_phi
        self.last_cop = cop
        self.last_p_compressor_kw = p_comp
        self.last_p_element_kw = p_elem
        return p_total

    def get_state(self):
        return (self.t_storage_c, self.lag.y, self.heating, self.p_kw,
                self.q_kvar, self.saturated, self.last_cop,
                self.last_p_compressor_kw, self.last_p_element_kw)

    def set_state(self, state):
        (self.t_storage_c, self.lag.y, self.heating, self.p_kw, self.q_kvar,
         self.saturated, self.last_cop, self.last_p_compressor_kw,
         self.last_p_element_kw) = state


class ElectricVehicle:
    """Plug-in vehicle with daily trips and optional bidirectional charging.

    The vehicle is disconnected from its first departure to its last return
    each day; while away, each trip's consumption drains the battery uniformly
    over the trip interval and the charger output is exactly zero.  While
    connected, local control charges at rated power until the battery is full.
    Dispatch offsets move the command in [0, p_rated] (unidirectional) or
    [-p_rated, p_rated] (V2G).
    """

    __slots__ = (
        "capacity_kwh", "p_rated_kw", "v2g", "eta_charge", "eta_discharge",
        "trips", "_away", "lag", "soc", "p_kw", "saturated", "trip_drain_kwh",
    )

    def __init__(self, capacity_kwh, p_rated_kw, v2g=False, eta_charge=0.95,
                 eta_discharge=0.95, soc0=0.7, trips=(), time_constant_s=1.0):
        if capacity_kwh <= 0.0:
            raise ValueError(f"capacity_kwh must be > 0, got {capacity_kwh}")
        if p_rated_kw <= 0.0:
            raise ValueError(f"p_rated_kw must be > 0, got {p_rated_kw}")
        if not 0.0 <= soc0 <= 1.0:
            raise ValueError(f"soc0 must lie in [0, 1], got {soc0}")
        trips = tuple(sorted((float(d), float(r), float(e)) for d, r, e in trips))
        prev_ret = 0.0
        for dep, ret, energy in trips:
            if not 0.0 <= dep < ret <= 86400.0:
                raise ValueError(f"trip window ({dep}, {ret}) outside a day")
            if dep < prev_ret:
                raise ValueError("trips overlap")
            if energy < 0.0:
                raise ValueError(f"trip energy must be >= 0, got {energy}")
            prev_ret = ret
        self.capacity_kwh = capacity_kwh
        self.p_rated_kw = p_rated_kw
        self.v2g = bool(v2g)
        self.eta_charge = eta_charge
        self.eta_discharge = eta_discharge
        self.trips = trips
        self._away = (trips[0][0], trips[-1][1]) if trips else None
        self.lag = FirstOrderLag(1.0, time_constant_s, y0=0.0)
        self.soc = soc0
        self.p_kw = 0.0
        self.saturated = False
        self.trip_drain_kwh = 0.0

    def connected(self, time_of_day_s):
        if self._away is None:
            return True
        dep, ret = self._away
        return not (dep <= time_of_day_s < ret)

    def _headroom_clamp(self, p_kw, dt):
        if p_kw > 0.0:
            room = (1.0 - self.soc) * self.capacity_kwh * 3600.0 / (self.eta_charge * dt)
            if p_kw > room:
                return room
        elif p_kw < 0.0:
            room = self.soc * self.capacity_kwh * 3600.0 * self.eta_discharge / dt
            if -p_kw > room:
                return -room
        return p_kw

    def feasible_command(self, wish_kw, dt):
        lo = -self.p_rated_kw if self.v2g else 0.0
        return self._headroom_clamp(clamp(wish_kw, lo, self.p_rated_kw), dt)

    def local_command(self):
        """Uncontrolled behavior: charge at rated power until full."""
        return self.p_rated_kw if self.soc < 1.0 else 0.0

    def step(self, offset_kw, time_of_day_s, dt):
        """Advance one substep; returns charger power (0 while away)."""
        if not self.connected(time_of_day_s):
            for dep, ret, energy in self.trips:
                if dep <= time_of_day_s < ret:
                    drain = min(energy * dt / (ret - dep), self.soc * self.capacity_kwh)
                    self.soc -= drain / self.capacity_kwh
                    self.trip_drain_kwh += drain
                    break
            self.lag.reset(0.0)
            self.p_kw = 0.0
            self.saturated = offset_kw != 0.0
            return 0.0
        lo = -self.p_rated_kw if self.v2g else 0.0
        wanted = self.local_command() + offset_kw
        cmd = self._headroom_clamp(clamp(wanted, lo, self.p_rated_kw), dt)
        self.saturated = cmd != wanted
        p = self.lag.step(cmd, dt)
        pinned = self._headroom_clamp(clamp(p, lo, self.p_rated_kw), dt)
        if pinned != p:
            p = pinned
            self.lag.reset(p)
            self.saturated = True
        if p > 0.0:
            self.soc += p * self.eta_charge * dt / 3600.0 / self.capacity_kwh
        elif p < 0.0:
            self.soc += p / self.eta_discharge * dt / 3600.0 / self.capacity_kwh
        self.soc = clamp(self.soc, 0.0, 1.0)
        self.p_kw = p
        return p

    def get_state(self):
        return (self.soc, self.lag.y, self.p_kw, self.saturated, self.trip_drain_kwh)

    def set_state(self, state):
        self.soc, self.lag.y, self.p_kw, self.saturated, self.trip_drain_kwh = state


class HouseholdLoad:
    """Inflexible household demand sampled from profile series.

    `p_series`/`q_series`/`heat_series` are any objects exposing value(t_s);
    sample() caches the last values for the bus balance.
    """

    __slots__ = ("p_series", "q_series", "heat_series", "p_kw", "q_kvar", "heat_kw")

    def __init__(self, p_series, q_series, heat_series):
        self.p_series = p_series
        self.q_series = q_series
        self.heat_series = heat_series
        self.p_kw = 0.0
        self.q_kvar = 0.0
        self.heat_kw = 0.0

    def sample(self, t_s):
        self.p_kw = self.p_series.value(t_s)
        self.q_kvar = self.q_series.value(t_s)
        self.heat_kw = self.heat_series.value(t_s)
        return self.p_kw, self.q_kvar, self.heat_kw

    def get_state(self):
        return (self.p_kw, self.q_kvar, self.heat_kw)

    def set_state(self, state):
        self.p_kw, self.q_kvar, self.heat_kw = state
