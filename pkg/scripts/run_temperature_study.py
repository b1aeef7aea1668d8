#!/usr/bin/env python3
"""Basin Hopping temperature study on the bundled cell.

Solves one large single-step request (+28 kW by default, near the feeder's
headroom) at several Metropolis temperatures, a small seed panel per
temperature.  Reports the panel mean of the per-iteration candidate
objective: hotter chains accept worse intermediate solutions, so this mean
rises with temperature while the returned global best stays comparable.
"""

import argparse
import json
import logging
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from cellflex.optimizer import (
    BasinHoppingConfig,
    CostTable,
    FlexibilityRequest,
    NelderMeadSettings,
    basin_hopping,
)
from cellflex.oracle import single_step_objective
from cellflex.scenario import load_bundled_scenario
from cellflex.twin import CellTwin


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--temperatures", default="0.2,0.5,2,10")
    parser.add_argument("--seeds", default="5,11,23,31,47")
    parser.add_argument("--dp-kw", type=float, default=28.0)
    parser.add_argument("--dq-kvar", type=float, default=1.0)
    parser.add_argument("--n-iter", type=int, default=120)
    parser.add_argument("--step-size", type=float, default=4.0)
    parser.add_argument("--nm-maxfev", type=int, default=45)
    parser.add_argument("--out", default="out/temperature_study")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO,
                        format="%(name)s %(levelname)s %(message)s")

    temperatures = [float(t) for t in args.temperatures.split(",") if t.strip()]
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]

    twin = CellTwin(load_bundled_scenario())
    ref = twin.run_warmup()
    f, bounds = single_step_objective(
        twin, ref, FlexibilityRequest(args.dp_kw, args.dq_kvar), CostTable())

    study = {}
    print("T_BH   mean candidate OF   mean final best   accept rate")
    for t_bh in temperatures:
        of_means, best_finals, rates = [], [], []
        for seed in seeds:
            cfg = BasinHoppingConfig(
                temperature=t_bh, n_iter=args.n_iter,
                step_size=args.step_size, seed=seed,
                nm=NelderMeadSettings(maxfev=args.nm_maxfev))
            res = basin_hopping(f, np.zeros(twin.n_plants), cfg,
                                bounds=bounds)
            locals_ = [r.of_local for r in res.iterations if r.iteration > 0]
            of_means.append(sum(locals_) / len(locals_))
            best_finals.append(res.iterations[-1].of_global_best)
            rates.append(res.acceptance_rate)
        entry = {
            "mean_of_local": sum(of_means) / len(of_means),
            "mean_final_best": sum(best_finals) / len(best_finals),
            "mean_acceptance": sum(rates) / len(rates),
            "per_seed_mean_of_local": of_means,
        }
        study[f"{t_bh:g}"] = entry
        print(f"{t_bh:5g}   {entry['mean_of_local']:17.4f}   "
              f"{entry['mean_final_best']:15.4f}   "
              f"{entry['mean_acceptance']:11.3f}")

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "study.json", "w", encoding="utf-8", newline="") as fh:
        json.dump({"request": {"dp_kw": args.dp_kw, "dq_kvar": args.dq_kvar},
                   "seeds": seeds, "results": study}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}/study.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
