"""Command-line interface.

Subcommands:

* ``validate``           - load a scenario, print its plant census.
* ``simulate``           - zero-offset baseline run; prints/writes PCC series.
* ``dispatch``           - disaggregate a flexibility request; writes
                           dispatch.csv, iterations.csv and summary.json.
* ``sweep-temperature``  - dispatch at several Basin Hopping temperatures,
                           writing one iteration log per temperature.
* ``oracle``             - compare the dispatcher against the exhaustive
                           grid-search oracle on the built-in toy cell.

Exit codes: 0 success, 1 configuration/scenario errors, 2 runtime failures
(power-flow or dispatch aborts; argparse usage errors also exit 2).
"""

import argparse
import json
import logging
import pathlib
import sys

import numpy as np

from .dispatch import run_dispatch
from .errors import CellflexError, ConfigurationError, DispatchError, PowerFlowError
from .optimizer import (
    BasinHoppingConfig,
    CostTable,
    FlexibilityRequest,
    NelderMeadSettings,
    basin_hopping,
)
from .reporting import (
    summary_dict,
    write_dispatch_csv,
    write_iterations_csv,
    write_summary_json,
)
from .scenario import load_bundled_scenario, load_scenario
from .twin import CellTwin

log = logging.getLogger("cellflex.cli")


def _load(args):
    if args.scenario is None:
        return load_bundled_scenario()
    return load_scenario(args.scenario)


def _warmup_s(args):
    return None if args.warmup_days is None else args.warmup_days * 86400.0


def _add_common(parser):
    parser.add_argument("--scenario", default=None,
                        help="scenario JSON path (default: bundled rural cell)")
    parser.add_argument("--warmup-days", type=float, default=None,
                        help="override warmup duration in days")


def _add_optimizer_flags(parser):
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--t-bh", type=float, default=0.5,
                        help="Basin Hopping temperature")
    parser.add_argument("--n-iter", type=int, default=50)
    parser.add_argument("--step-size", type=float, default=1.0)
    parser.add_argument("--nm-maxfev", type=int, default=200)


def _config(args, seed=None, temperature=None):
    return BasinHoppingConfig(
        temperature=args.t_bh if temperature is None else temperature,
        n_iter=args.n_iter,
        step_size=args.step_size,
        seed=args.seed if seed is None else seed,
        nm=NelderMeadSettings(maxfev=args.nm_maxfev),
    )


def _cmd_validate(args):
    scenario = _load(args)
    census = scenario.plant_census()
    print(json.dumps({"name": scenario.name, "census": census}, indent=2,
                     sort_keys=True))
    return 0


def _cmd_simulate(args):
    scenario = _load(args)
    twin = CellTwin(scenario)
    ref = twin.run_warmup(_warmup_s(args))
    twin.set_offsets([0.0] * twin.n_plants)
    rows = [(0.0, ref.pcc_p_kw, ref.pcc_q_kvar)]
    for _ in range(args.steps):
        twin.step_dispatch_interval()
        res = twin.solve()
        rows.append((twin.t_s, res.pcc.p_kw, res.pcc.q_kvar))
    lines = ["t_s,p_pcc_kw,q_pcc_kvar"]
    lines += [f"{t:.9g},{p:.9g},{q:.9g}" for t, p, q in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        pathlib.Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_dispatch(args):
    scenario = _load(args)
    run = run_dispatch(
        scenario,
        FlexibilityRequest(args.dp_kw, args.dq_kvar),
        n_steps=args.steps,
        config=_config(args),
        warmup_s=_warmup_s(args),
        initial_bes_soc=args.bes_soc,
    )
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dispatch_csv(run, out / "dispatch.csv")
    write_iterations_csv(run, out / "iterations.csv")
    write_summary_json(run, out / "summary.json")
    summary = summary_dict(run)
    print(json.dumps(summary["tracking"], indent=2, sort_keys=True))
    print(f"wrote {out}/dispatch.csv , iterations.csv , summary.json "
          f"({run.runtime_s:.1f}s)", file=sys.stderr)
    return 0


def _cmd_sweep_temperature(args):
    scenario = _load(args)
    temperatures = [float(t) for t in args.temperatures.split(",") if t.strip()]
    if not temperatures:
        raise ConfigurationError("--temperatures must name at least one value")
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep = {}
    for t_bh in temperatures:
        run = run_dispatch(
            scenario,
            FlexibilityRequest(args.dp_kw, args.dq_kvar),
            n_steps=args.steps,
            config=_config(args, temperature=t_bh),
            warmup_s=_warmup_s(args),
        )
        tag = f"{t_bh:g}".replace(".", "p")
        write_iterations_csv(run, out / f"iterations_T{tag}.csv")
        locals_ = [rec.of_local for st in run.steps for rec in st.iterations
                   if rec.iteration > 0]
        bests = [rec.of_global_best for st in run.steps for rec in st.iterations]
        sweep[f"{t_bh:g}"] = {
            "mean_of_local": sum(locals_) / len(locals_) if locals_ else 0.0,
            "final_of_global_best": bests[-1] if bests else 0.0,
        }
    with open(out / "sweep_summary.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(sweep, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(sweep, indent=2, sort_keys=True))
    return 0


def _cmd_oracle(args):
    from .oracle import grid_search_oracle, make_toy_scenario, single_step_objective

    scenario = make_toy_scenario()
    request = FlexibilityRequest(args.dp_kw, args.dq_kvar)
    oracle = grid_search_oracle(scenario, request, resolution=args.resolution)

    twin = CellTwin(scenario)
    ref = twin.run_warmup()
    f, bounds = single_step_objective(twin, ref, request, CostTable())
    config = _config(args)
    result = basin_hopping(f, np.zeros(twin.n_plants), config, bounds=bounds)

    report = {
        "oracle_of": oracle.of,
        "oracle_x": [float(v) for v in oracle.x],
        "oracle_evals": oracle.n_evals,
        "dispatcher_of": result.of,
        "dispatcher_x": [float(v) for v in result.x],
        "gap": result.of - oracle.of,
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cellflex",
        description="Energy-cell digital twin and flexibility dispatcher")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file and print its census")
    _add_common(p)

    p = sub.add_parser("simulate", help="zero-offset baseline PCC series")
    _add_common(p)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--out", default=None, help="CSV output path (default: stdout)")

    p = sub.add_parser("dispatch", help="disaggregate a flexibility request")
    _add_common(p)
    _add_optimizer_flags(p)
    p.add_argument("--dp-kw", type=float, required=True)
    p.add_argument("--dq-kvar", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--bes-soc", type=float, default=None,
                   help="override all battery SOCs before the reference capture")
    p.add_argument("--out", default="out")

    p = sub.add_parser("sweep-temperature",
                       help="dispatch at several Basin Hopping temperatures")
    _add_common(p)
    _add_optimizer_flags(p)
    p.add_argument("--temperatures", default="0.2,0.5,2,10")
    p.add_argument("--dp-kw", type=float, default=5.0)
    p.add_argument("--dq-kvar", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--out", default="out/sweep")

    p = sub.add_parser("oracle",
                       help="compare dispatcher vs grid-search oracle on the toy cell")
    _add_optimizer_flags(p)
    p.add_argument("--dp-kw", type=float, default=1.0)
    p.add_argument("--dq-kvar", type=float, default=0.3)
    p.add_argument("--resolution", type=float, default=0.05)

    return parser


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "dispatch": _cmd_dispatch,
    "sweep-temperature": _cmd_sweep_temperature,
    "oracle": _cmd_oracle,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(name)s %(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DispatchError, PowerFlowError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except CellflexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
