"""Model proportions p_n as a function of the budget C and of one order's cost.

Writes two CSVs: ``p_vs_budget.csv`` (plateau in C) and ``p_vs_cost.csv``
(decrease of p_n as c_n grows, other costs fixed).

    python scripts/model_curves.py --costs 70.4,186.5,333.2 --out results/
"""

import argparse
from pathlib import Path

import numpy as np

from hiersynth.proportions import ProportionParams, proportions


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    ap.add_argument("--costs", default="70.4,186.5,333.2", help="c_3,c_4,... in order")
    ap.add_argument("--budgets", type=int, default=25, help="number of C values")
    ap.add_argument("--max-mult", type=float, default=30, help="largest C as a multiple of max c")
    ap.add_argument("--vary", type=int, default=4, help="order whose cost is swept")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    costs = {3 + i: float(c) for i, c in enumerate(args.costs.split(","))}
    orders = sorted(costs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmax = max(costs.values())

    lines = ["C," + ",".join(f"p{l}" for l in orders)]
    for C in np.linspace(costs[3], args.max_mult * cmax, args.budgets):
        p = proportions(ProportionParams(costs, float(C))).p
        lines.append(f"{C:.6g}," + ",".join(f"{p[l]:.6g}" for l in orders))
    (out / "p_vs_budget.csv").write_text("\n".join(lines) + "\n")

    C = 20 * cmax
    lines = [f"c{args.vary}," + ",".join(f"p{l}" for l in orders)]
    for c in np.linspace(0.5, 2.5, 21) * costs[args.vary]:
        p = proportions(ProportionParams({**costs, args.vary: float(c)}, C)).p
        lines.append(f"{c:.6g}," + ",".join(f"{p[l]:.6g}" for l in orders))
    (out / "p_vs_cost.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'p_vs_budget.csv'} and {out / 'p_vs_cost.csv'}")


if __name__ == "__main__":
    main()
