"""Dispatch optimizer: Basin Hopping around a Nelder-Mead local search.

The optimizer minimizes a weighted disaggregation objective over the vector of
plant offsets::

    OF = sum_i k_i * |delta_i|                       (plant deviation cost)
       + k_pcc_p * |P_pcc - P_target|                (active-power tracking)
       + k_pcc_q * |Q_pcc - Q_target|                (reactive-power tracking)
       + k_infeasible * n_violating_lines            (network penalty)

where delta_i is the realized plant power minus its frozen reference value and
the targets are the frozen reference PCC reading plus the requested change.

Basin Hopping: each iteration perturbs the incumbent uniformly within the
current step size, runs a budgeted Nelder-Mead refinement and accepts the
result via the Metropolis criterion (worsening moves pass with probability
exp(-delta/T)).  Every ``adjust_interval`` iterations the step size is scaled
to steer the acceptance rate toward 50 %: divided by ``adjust_factor`` when
acceptance was above target (bolder exploration), multiplied when below.

The candidate objective series and the running global best (minimum over all
candidates including the start point) are logged per iteration.  The returned
solution prefers network-feasible candidates; the global-best log column is
the unconditional minimum and is therefore monotone non-increasing.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "CostTable", "FlexibilityRequest", "NelderMeadSettings",
    "BasinHoppingConfig", "IterationRecord", "BasinHoppingResult",
    "ObjectiveBreakdown", "objective_breakdown",
    "metropolis_accept", "adapt_step_size", "nelder_mead", "basin_hopping",
]


# ---------------------------------------------------------------------------
# objective

@dataclass(frozen=True)
class CostTable:
    """Per-kW deviation weights (dimensionless OF units; 1 unit = 0.1 EUR)."""
    k_bes: float = 2.78e-4
    k_inv: float = 1.38e-4
    k_ehp: float = 7.92e-3
    k_bev_v1g: float = 5.56e-4
    k_bev_v2g: float = 9.72e-4
    k_pcc_p: float = 2.78e-2
    k_pcc_q: float = 2.78e-2
    k_infeasible: float = 10.0
    eur_per_unit: float = 0.1

    _CLASS_FIELDS = {
        "bes": "k_bes",
        "inv": "k_inv",
        "ehp": "k_ehp",
        "bev_v1g": "k_bev_v1g",
        "bev_v2g": "k_bev_v2g",
    }

    def weights_for(self, plant_classes):
        """Vector of per-plant deviation weights for a class-label sequence."""
        try:
            return np.array([getattr(self, self._CLASS_FIELDS[c])
                             for c in plant_classes])
        except KeyError as exc:
            raise ConfigurationError(f"unknown plant class {exc}") from None


@dataclass(frozen=True)
class FlexibilityRequest:
    """Requested sustained change of the PCC operating point."""
    dp_kw: float
    dq_kvar: float


@dataclass(frozen=True)
class ObjectiveBreakdown:
    of: float
    plant_cost: float          # sum k_i |delta_i|  (OF units)
    pcc_cost: float            # PCC tracking terms (OF units)
    penalty: float             # infeasibility term (OF units)
    cost_eur: float            # plant_cost expressed in EUR


def objective_breakdown(plant_deltas, plant_weights, dp_err_kw, dq_err_kvar,
                        n_violations, costs: CostTable):
    plant_cost = float(np.abs(plant_deltas) @ plant_weights)
    pcc_cost = costs.k_pcc_p * abs(dp_err_kw) + costs.k_pcc_q * abs(dq_err_kvar)
    penalty = costs.k_infeasible * n_violations
    return ObjectiveBreakdown(
        of=plant_cost + pcc_cost + penalty,
        plant_cost=plant_cost,
        pcc_cost=pcc_cost,
        penalty=penalty,
        cost_eur=plant_cost * costs.eur_per_unit,
    )


# ---------------------------------------------------------------------------
# acceptance and step adaptation

def metropolis_accept(delta_y, temperature, rng):
    """Accept improvement unconditionally; worsening with p = exp(-delta/T).

    Draws from ``rng`` only when ``delta_y > 0`` so that acceptance of
    improving moves never consumes random state.
    """
    if delta_y <= 0.0:
        return True
    if temperature <= 0.0:
        return False
    return rng.random() < math.exp(-delta_y / temperature)


def adapt_step_size(step_size, n_accepted, interval, target=0.5, factor=0.9):
    """Steer acceptance toward the target rate by rescaling the step size."""
    rate = n_accepted / interval
    if rate > target:
        return step_size / factor
    if rate < target:
        return step_size * factor
    return step_size


# ---------------------------------------------------------------------------
# Nelder-Mead local search

@dataclass(frozen=True)
class NelderMeadSettings:
    fatol: float = 1e-9
    xatol: float = 1e-9
    maxfev: int = 200


def nelder_mead(f, x0, *, bounds=None, scale=0.1, settings=NelderMeadSettings()):
    """Downhill-simplex minimization with clamp-at-evaluation box handling.

    The simplex itself may wander outside ``bounds``; every objective
    evaluation sees the clamped point and the returned minimizer is clamped.
    Returns ``(x_best, f_best, n_evals)`` and never returns a point worse
    than the evaluated start point.
    """
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    if d == 0:
        raise ConfigurationError("cannot optimize a zero-dimensional vector")
    if bounds is not None:
        bounds = np.asarray(bounds, dtype=float)
        lo, hi = bounds[:, 0], bounds[:, 1]

    best = {"f": math.inf, "x": None}
    n_evals = 0

    def evaluate(x):
        nonlocal n_evals
        xe = np.clip(x, lo, hi) if bounds is not None else x
        fx = float(f(xe))
        n_evals += 1
        if fx < best["f"]:
            best["f"] = fx
            best["x"] = xe.copy()
        return fx

    maxfev = settings.maxfev
    scale_vec = np.broadcast_to(np.asarray(scale, dtype=float), (d,))

    # initial simplex: start point plus one displaced vertex per dimension
    simplex = [x0.copy()]
    fvals = [evaluate(x0)]
    for i in range(d):
        if n_evals >= maxfev:
            return best["x"], best["f"], n_evals
        v = x0.copy()
        v[i] += scale_vec[i] if scale_vec[i] != 0.0 else 0.1
        simplex.append(v)
        fvals.append(evaluate(v))
    simplex = np.array(simplex)
    fvals = np.array(fvals)

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5

    while n_evals < maxfev:
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]

        if (fvals[-1] - fvals[0] <= settings.fatol
                and np.max(np.abs(simplex[1:] - simplex[0])) <= settings.xatol):
            break

        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = evaluate(xr)

        if fr < fvals[0]:
            if n_evals < maxfev:
                xe_ = centroid + gamma * (xr - centroid)
                fe = evaluate(xe_)
                if fe < fr:
                    simplex[-1], fvals[-1] = xe_, fe
                else:
                    simplex[-1], fvals[-1] = xr, fr
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + rho * (xr - centroid)       # outside contraction
            else:
                xc = centroid - rho * (centroid - simplex[-1])  # inside
            if n_evals >= maxfev:
                break
            fc = evaluate(xc)
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, d + 1):
                    if n_evals >= maxfev:
                        break
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    fvals[i] = evaluate(simplex[i])

    return best["x"], best["f"], n_evals


# ---------------------------------------------------------------------------
# Basin Hopping

@dataclass(frozen=True)
class BasinHoppingConfig:
    temperature: float = 0.5
    n_iter: int = 50
    step_size: float = 1.0
    target_acceptance: float = 0.5
    adjust_interval: int = 10
    adjust_factor: float = 0.9
    seed: int | None = None
    nm: NelderMeadSettings = field(default_factory=NelderMeadSettings)

    def __post_init__(self):
        if self.temperature < 0.0:
            raise ConfigurationError("temperature must be >= 0")
        if self.n_iter < 0:
            raise ConfigurationError("n_iter must be >= 0")
        if self.step_size <= 0.0:
            raise ConfigurationError("step_size must be > 0")
        if self.adjust_interval < 1:
            raise ConfigurationError("adjust_interval must be >= 1")
        if not 0.0 < self.adjust_factor <= 1.0:
            raise ConfigurationError("adjust_factor must lie in (0, 1]")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    of_local: float            # candidate objective produced this iteration
    of_global_best: float      # running min over all candidates so far
    step_size: float           # step size in force when the move was drawn
    accepted: bool


@dataclass
class BasinHoppingResult:
    x: np.ndarray
    of: float
    feasible: bool
    iterations: list           # IterationRecord per iteration (row 0 = start)
    n_evals: int
    n_accepted: int

    @property
    def acceptance_rate(self):
        n_moves = len(self.iterations) - 1
        return self.n_accepted / n_moves if n_moves else 0.0


def _normalize_objective(f):
    """Let f return either a float or an (of, feasible) pair."""
    def call(x):
        r = f(x)
        if isinstance(r, tuple):
            return float(r[0]), bool(r[1])
        return float(r), True
    return call


def basin_hopping(f, x0, config: BasinHoppingConfig, *, bounds=None, rng=None):
    """Global search over ``f`` starting from (and warm-started by) ``x0``.

    ``f`` maps a vector to an objective value, optionally paired with a
    network-feasibility flag.  The start point is evaluated as iteration 0 and
    becomes the first incumbent; the first candidate of a warm-started run is
    therefore refined from the previous solution, not from scratch.
    """
    call = _normalize_objective(f)
    if rng is None:
        rng = np.random.default_rng(config.seed)

    x0 = np.asarray(x0, dtype=float)
    if bounds is not None:
        bounds = np.asarray(bounds, dtype=float)
        if bounds.shape != (x0.size, 2):
            raise ConfigurationError(
                f"bounds shape {bounds.shape} does not match vector size {x0.size}")
        x0 = np.clip(x0, bounds[:, 0], bounds[:, 1])

    of0, feas0 = call(x0)
    n_evals = 1
    incumbent_x, incumbent_of = x0.copy(), of0
    best_any = {"x": x0.copy(), "of": of0, "feasible": feas0}
    best_feasible = {"x": x0.copy(), "of": of0} if feas0 else None

    records = [IterationRecord(0, of0, of0, config.step_size, True)]
    step = config.step_size
    n_accepted_total = 0
    window_accepted = 0

    for i in range(1, config.n_iter + 1):
        x_try = incumbent_x + rng.uniform(-step, step, size=x0.size)
        if bounds is not None:
            x_try = np.clip(x_try, bounds[:, 0], bounds[:, 1])

        # budgeted local refinement; track feasibility of its best point
        local = {"of": math.inf, "x": None, "feasible": False}

        def scalar_f(x, _local=local):
            of, feas = call(x)
            if of < _local["of"]:
                _local["of"] = of
                _local["x"] = np.array(x, dtype=float, copy=True)
                _local["feasible"] = feas
            return of

        nm_scale = max(0.25 * step, 0.01)
        x_cand, of_cand, evals = nelder_mead(
            scalar_f, x_try, bounds=bounds, scale=nm_scale, settings=config.nm)
        n_evals += evals
        cand_feasible = local["feasible"] if local["x"] is not None else False

        accepted = metropolis_accept(of_cand - incumbent_of,
                                     config.temperature, rng)
        if accepted:
            incumbent_x, incumbent_of = x_cand.copy(), of_cand
            n_accepted_total += 1
            window_accepted += 1

        if of_cand < best_any["of"]:
            best_any = {"x": x_cand.copy(), "of": of_cand,
                        "feasible": cand_feasible}
        if cand_feasible and (best_feasible is None
                              or of_cand < best_feasible["of"]):
            best_feasible = {"x": x_cand.copy(), "of": of_cand}

        records.append(IterationRecord(i, of_cand, best_any["of"], step, accepted))

        if i % config.adjust_interval == 0:
            step = adapt_step_size(step, window_accepted, config.adjust_interval,
                                   config.target_acceptance, config.adjust_factor)
            window_accepted = 0

    if best_feasible is not None:
        return BasinHoppingResult(
            x=best_feasible["x"], of=best_feasible["of"], feasible=True,
            iterations=records, n_evals=n_evals, n_accepted=n_accepted_total)
    return BasinHoppingResult(
        x=best_any["x"], of=best_any["of"], feasible=False,
        iterations=records, n_evals=n_evals, n_accepted=n_accepted_total)
