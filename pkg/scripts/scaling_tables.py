"""Scaling slopes and reductions versus Set_1 for Set_1..Set_5.

    python scripts/scaling_tables.py --cost-model catalyst-direct --out results/
    python scripts/scaling_tables.py --cost-model catalyst-magic --targets 500
"""

import argparse
from pathlib import Path

from hiersynth.costs import parse_cost_model
from hiersynth.experiment import (ExperimentSpec, default_epsilons, emit, ols_fit, run_experiment,
                                  scaling_reduction)
from hiersynth.psu2 import GateSetSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    ap.add_argument("--cost-model", default="catalyst-direct")
    ap.add_argument("--sets", default="1,2,3,4,5")
    ap.add_argument("--targets", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--eps-max", type=float, default=0.1)
    ap.add_argument("--eps-min", type=float, default=0.02)
    ap.add_argument("--n-eps", type=int, default=8)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    epsilons = default_epsilons(args.n_eps, args.eps_max, args.eps_min)
    tag = args.cost_model.replace(":", "_")
    fits = {}
    for k in map(int, args.sets.split(",")):
        spec = GateSetSpec.named(k)
        model = parse_cost_model(args.cost_model, max_order=spec.max_order)
        table = run_experiment(ExperimentSpec(spec, model, epsilons, args.targets, args.seed))
        emit(table, out / f"table_{tag}_set{k}.csv")
        fits[k] = ols_fit(table.points())
        emit(fits[k], out / f"fit_{tag}_set{k}.csv")
        print(f"Set_{k}: watermark {table.watermark:g}  slope {fits[k].slope:.3f} "
              f"+/- {fits[k].slope_ci:.3f}", flush=True)

    base = fits.get(1)
    lines = ["set,slope,slope_ci,reduction_pct,reduction_unc"]
    for k, f in fits.items():
        pct, unc = scaling_reduction(base, f) if base else (float("nan"), float("nan"))
        lines.append(f"{k},{f.slope:.6g},{f.slope_ci:.6g},{pct:.4g},{unc:.4g}")
    (out / f"reductions_{tag}.csv").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
