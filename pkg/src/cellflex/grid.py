"""Balanced radial power flow via backward/forward current sweeps.

The cell operates a radial low-voltage feeder:  one slack bus (the PCC,
held at nominal voltage, angle zero) and a tree of lines below it.  The
solver works on the single-phase equivalent: per-phase voltages in volts,
three-phase powers in kW/kVAr (consumption positive).  A backward sweep
accumulates branch currents from the leaves, a forward sweep updates the
voltage drops; iteration stops once the largest per-sweep voltage change
falls below `tol` (in per unit).

The PCC reading is defined as the complex sum of all bus injections plus all
series losses (3 * |I|^2 * Z per line) — by construction it equals the power
entering through the slack once the sweep has converged.
"""

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError, InfeasibleNetworkError, PowerFlowError

__all__ = [
    "Bus",
    "Line",
    "GridTopology",
    "PccReading",
    "PowerFlowResult",
    "LineLoading",
    "solve_power_flow",
    "check_line_limits",
    "worst_balance_error_pu",
    "reset_balance_tracker",
]

# magnitude floor below which a solution is treated as voltage collapse
V_COLLAPSE_PU = 0.5

# worst slack-vs-injection mismatch seen by any solve in this process;
# lets test suites assert conservation across entire runs
_worst_balance_error_pu = 0.0


def worst_balance_error_pu():
    return _worst_balance_error_pu


def reset_balance_tracker():
    global _worst_balance_error_pu
    _worst_balance_error_pu = 0.0


@dataclass(frozen=True)
class Bus:
    id: str
    v_nom_ll_v: float = 400.0       # line-to-line nominal voltage
    prosumer: str | None = None     # attached prosumer id, if any


@dataclass(frozen=True)
class Line:
    from_bus: str
    to_bus: str
    r_ohm: float                    # per-phase series resistance
    x_ohm: float                    # per-phase series reactance
    i_max_a: float                  # thermal limit per phase
    id: str = ""


@dataclass(frozen=True)
class PccReading:
    """Active/reactive power crossing the PCC (consumption positive)."""
    p_kw: float
    q_kvar: float
    t_s: float = 0.0


@dataclass(frozen=True)
class LineLoading:
    line_id: str
    current_a: float
    limit_a: float
    ratio: float


@dataclass(frozen=True)
class PowerFlowResult:
    pcc: PccReading
    v_pu: dict                      # bus id -> |V| in per unit
    currents_a: dict                # line id -> |I| per phase in ampere
    loss_p_kw: float
    loss_q_kvar: float
    sweeps: int
    balance_error_pu: float         # |slack flow - (sum inj + losses)| / S_base


class GridTopology:
    """Validated radial grid: |lines| = |buses| - 1, all reachable from the PCC."""

    def __init__(self, buses, lines, pcc_bus, transformer_kva=160.0):
        self.buses = list(buses)
        self.pcc_bus = pcc_bus
        self.transformer_kva = transformer_kva

        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ConfigurationError(f"duplicate bus ids: {dup}")
        if pcc_bus not in ids:
            raise ConfigurationError(f"pcc bus '{pcc_bus}' is not a declared bus")
        if transformer_kva <= 0.0:
            raise ConfigurationError(f"transformer_kva must be > 0, got {transformer_kva}")
        v_noms = {b.v_nom_ll_v for b in self.buses}
        if len(v_noms) != 1:
            raise ConfigurationError(f"mixed nominal voltages not supported: {sorted(v_noms)}")
        self.v_nom_ll_v = v_noms.pop()

        self.lines = []
        seen_line_ids = set()
        for ln in lines:
            for end in (ln.from_bus, ln.to_bus):
                if end not in ids:
                    raise ConfigurationError(
                        f"line '{ln.id or ln.from_bus + '-' + ln.to_bus}' references "
                        f"unknown bus '{end}'")
            if ln.r_ohm < 0.0 or ln.x_ohm < 0.0:
                raise ConfigurationError(f"line '{ln.id}' has negative impedance")
            if ln.i_max_a <= 0.0:
                raise ConfigurationError(f"line '{ln.id}' needs i_max_a > 0")
            lid = ln.id or f"{ln.from_bus}-{ln.to_bus}"
            if lid in seen_line_ids:
                raise ConfigurationError(f"duplicate line id '{lid}'")
            seen_line_ids.add(lid)
            if ln.id != lid:
                ln = Line(ln.from_bus, ln.to_bus, ln.r_ohm, ln.x_ohm, ln.i_max_a, lid)
            self.lines.append(ln)

        if len(self.lines) != len(self.buses) - 1:
            raise ConfigurationError(
                f"radial grid needs |lines| = |buses|-1, got {len(self.lines)} lines "
                f"for {len(self.buses)} buses")
        self._build_tree()

    def _build_tree(self):
        """BFS from the PCC; orients every line parent->child and orders buses."""
        self._bus_index = {b.id: i for i, b in enumerate(self.buses)}
        n = len(self.buses)
        adjacency = [[] for _ in range(n)]
        for li, ln in enumerate(self.lines):
            a, b = self._bus_index[ln.from_bus], self._bus_index[ln.to_bus]
            adjacency[a].append((b, li))
            adjacency[b].append((a, li))

        root = self._bus_index[self.pcc_bus]
        order = [root]
        parent = [-1] * n
        parent_line = [-1] * n
        seen = [False] * n
        seen[root] = True
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            for v, li in adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    parent_line[v] = li
                    order.append(v)
        if len(order) != n:
            missing = sorted(self.buses[i].id for i in range(n) if not seen[i])
            raise ConfigurationError(f"buses not connected to the PCC: {missing}")

        self._order = order
        self._parent = parent
        self._parent_line = parent_line
        self._z_ohm = [complex(ln.r_ohm, ln.x_ohm) for ln in self.lines]

    @property
    def bus_ids(self):
        return [b.id for b in self.buses]

    @property
    def line_ids(self):
        return [ln.id for ln in self.lines]


def solve_power_flow(topology, injections, *, tol=1e-8, max_sweeps=100, t_s=0.0):
    """Solve the radial power flow for three-phase injections in kW/kVAr.

    `injections` must contain exactly the non-slack bus ids, each mapping to a
    (p_kw, q_kvar) pair with consumption positive.  Raises PowerFlowError if
    the sweep does not converge within `max_sweeps` and InfeasibleNetworkError
    if any voltage drops below 0.5 pu on the way.
    """
    non_slack = [b.id for b in topology.buses if b.id != topology.pcc_bus]
    missing = [b for b in non_slack if b not in injections]
    if missing:
        raise ConfigurationError(f"injections missing for buses: {missing}")
    extra = [b for b in injections if b not in non_slack]
    if extra:
        raise ConfigurationError(f"injections given for slack/unknown buses: {extra}")

    v_ph_nom = topology.v_nom_ll_v / math.sqrt(3.0)
    idx = topology._bus_index
    order = topology._order
    parent = topology._parent
    parent_line = topology._parent_line
    z = topology._z_ohm
    n = len(topology.buses)

    # per-phase apparent power in VA (three-phase total / 3), consumption positive
    s_ph = [0j] * n
    for bid, (p_kw, q_kvar) in injections.items():
        s_ph[idx[bid]] = complex(p_kw, q_kvar) * (1000.0 / 3.0)

    v = [complex(v_ph_nom, 0.0)] * n
    i_branch = [0j] * len(topology.lines)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        # backward: load currents, then accumulate toward the root
        acc = [0j] * n
        for i in range(n):
            if i != order[0] and s_ph[i] != 0j:
                acc[i] = (s_ph[i] / v[i]).conjugate()
        for bus in reversed(order[1:]):
            i_branch[parent_line[bus]] = acc[bus]
            acc[parent[bus]] += acc[bus]
        # forward: voltage drops from the root outward
        max_dv = 0.0
        for bus in order[1:]:
            v_new = v[parent[bus]] - z[parent_line[bus]] * i_branch[parent_line[bus]]
            dv = abs(v_new - v[bus])
            if dv > max_dv:
                max_dv = dv
            v[bus] = v_new
            if abs(v_new) < V_COLLAPSE_PU * v_ph_nom:
                raise InfeasibleNetworkError(
                    f"voltage collapse at bus '{topology.buses[bus].id}' "
                    f"({abs(v_new) / v_ph_nom:.3f} pu)")
        if max_dv / v_ph_nom < tol:
            converged = True
            break
    if not converged:
        raise PowerFlowError(
            f"backward/forward sweep did not converge within {max_sweeps} sweeps "
            f"(last voltage change {max_dv / v_ph_nom:.2e} pu)")

    loss = 0j
    for li in range(len(topology.lines)):
        i_mag2 = (i_branch[li] * i_branch[li].conjugate()).real
        loss += 3.0 * i_mag2 * z[li]
    s_total = sum(s_ph) * 3.0 + loss          # VA, three-phase

    # cross-check against the physical slack inflow (root branch currents)
    root = order[0]
    i_root = 0j
    for bus in range(n):
        if parent[bus] == root:
            i_root += i_branch[parent_line[bus]]
    s_slack = 3.0 * v[root] * i_root.conjugate()
    s_base = topology.transformer_kva * 1000.0
    balance_error = abs(s_slack - s_total) / s_base
    global _worst_balance_error_pu
    if balance_error > _worst_balance_error_pu:
        _worst_balance_error_pu = balance_error

    v_pu = {topology.buses[i].id: abs(v[i]) / v_ph_nom for i in range(n)}
    currents = {topology.lines[li].id: abs(i_branch[li])
                for li in range(len(topology.lines))}
    return PowerFlowResult(
        pcc=PccReading(s_total.real / 1000.0, s_total.imag / 1000.0, t_s),
        v_pu=v_pu,
        currents_a=currents,
        loss_p_kw=loss.real / 1000.0,
        loss_q_kvar=loss.imag / 1000.0,
        sweeps=sweeps,
        balance_error_pu=balance_error,
    )


def check_line_limits(result, topology):
    """Return a LineLoading entry for every line whose current exceeds its limit."""
    limits = {ln.id: ln.i_max_a for ln in topology.lines}
    violations = []
    for lid, amps in result.currents_a.items():
        limit = limits[lid]
        if amps > limit:
            violations.append(LineLoading(lid, amps, limit, amps / limit))
    return violations
