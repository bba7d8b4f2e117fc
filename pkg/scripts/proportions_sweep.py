"""Empirical versus modelled T_4 share for Set_2 while sweeping the cost of T_4.

    python scripts/proportions_sweep.py --c4 176,186.5,211.2,246.4,281.6,333.2
"""

import argparse
from pathlib import Path

from hiersynth.costs import CostModel
from hiersynth.experiment import ExperimentSpec, run_experiment
from hiersynth.proportions import ProportionParams, empirical_proportions, proportions
from hiersynth.psu2 import GateSetSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    ap.add_argument("--c3", type=float, default=70.4)
    ap.add_argument("--c4", default="176,186.5,211.2,246.4,281.6,333.2")
    ap.add_argument("--epsilon", type=float, default=0.03)
    ap.add_argument("--targets", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="results/proportions_sweep.csv")
    args = ap.parse_args()

    lines = ["c4,watermark,empirical,model,difference"]
    for c4 in (float(c) for c in args.c4.split(",")):
        model = CostModel.custom({3: args.c3, 4: c4})
        spec = ExperimentSpec(GateSetSpec.named(2), model, [args.epsilon], args.targets, args.seed)
        table = run_experiment(spec, keep_results=True)
        emp = empirical_proportions(table.results[args.epsilon])[4]
        mod = proportions(ProportionParams({3: args.c3, 4: c4}, table.watermark)).p[4]
        lines.append(f"{c4:g},{table.watermark:g},{emp:.6f},{mod:.6f},{emp - mod:+.6f}")
        print(lines[-1], flush=True)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
