"""Command line entry point: ``hiersynth <command> ...`` (or ``python -m hiersynth``)."""

from __future__ import annotations

import argparse
import json
import math
import sys

from hiersynth import costs as cm
from hiersynth import experiment as ex
from hiersynth import proportions as pr
from hiersynth import seqdb
from hiersynth.kdindex import index_database
from hiersynth.psu2 import GateSetSpec, build_gate_set, parse_gate
from hiersynth.synth import GrowthPolicy, batch_synthesize, synthesize, verify

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CEILING = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def parse_set(text: str) -> GateSetSpec:
    """``2``, ``Set_2``, ``set2`` or ``L=4`` -> Clifford + T_3..T_4."""
    digits = "".join(ch for ch in text if ch.isdigit())
    if not digits:
        raise UsageError(f"bad gate set {text!r}; expected e.g. Set_2 or L=4")
    try:
        if text.strip().upper().startswith("L="):
            return GateSetSpec(max_order=int(digits))
        return GateSetSpec.named(int(digits))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _cost_model(text: str, spec: GateSetSpec) -> cm.CostModel:
    try:
        return cm.parse_cost_model(text, max_order=spec.max_order)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _print_json(obj):
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


# ------------------------------------------------------------------ commands
def cmd_gen(args):
    spec = parse_set(args.set)
    model = _cost_model(args.cost_model, spec)
    db = seqdb.generate(build_gate_set(spec), model, args.max_cost, node_limit=args.node_limit)
    seqdb.save(db, args.out)
    _print_json(_stats_dict(db))


def cmd_grow(args):
    db = seqdb.load(args.db)
    db.grow(args.max_cost)
    seqdb.save(db, args.out or args.db)
    _print_json(_stats_dict(db))


def _stats_dict(db) -> dict:
    s = seqdb.db_stats(db)
    return {"accepted": s.accepted, "watermark": s.watermark, "frontier": s.frontier,
            "max_cost": s.max_cost}


def cmd_synth(args):
    db = seqdb.load(args.db)
    index = index_database(db)
    policy = GrowthPolicy(ceiling=args.ceiling)
    try:
        targets = [parse_gate(t) for t in args.target]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = []
    try:
        for t in targets:
            res = synthesize(db, index, t, args.epsilon, policy)
            row = res.to_dict()
            row["target"] = list(t.q)
            row["verified"] = verify(res, t, db.cost_model).passed
            out.append(row)
    finally:
        if args.save:
            seqdb.save(db, args.db)
    if args.emit == "text":
        for row in out:
            sys.stdout.write(f"cost={row['cost']:g} error={row['achieved_error']:.3e} "
                             f"sequence={' '.join(row['sequence']) or '(empty)'}\n")
    else:
        _print_json(out)


def cmd_experiment(args):
    gspec = parse_set(args.set)
    epsilons = _floats(args.epsilons) if args.epsilons else ex.default_epsilons()
    try:
        spec = ex.ExperimentSpec(gspec, _cost_model(args.cost_model, gspec), epsilons,
                                 args.targets, args.seed, args.ceiling, args.db_cache, None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        table = ex.run_experiment(spec)
    except ex.ExperimentIncomplete as exc:
        _write(exc.table, args.out, args.emit)
        raise
    _write(table, args.out, args.emit)


def _write(obj, out, fmt):
    if out:
        ex.emit(obj, out, fmt)
    else:
        sys.stdout.write(ex.dumps(obj, fmt or "csv"))


def cmd_fit(args):
    try:
        fit = ex.fit_table(ex.read_table(args.table))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.baseline:
        base = ex.fit_table(ex.read_table(args.baseline))
        pct, unc = ex.scaling_reduction(base, fit)
        sys.stderr.write(f"reduction vs baseline: {pct:.1f} +/- {unc:.1f} %\n")
    _write(fit, args.out, args.emit)


def cmd_proportions(args):
    if args.mode == "model":
        costs = _floats(args.costs)
        if len(costs) != args.L - 2:
            raise UsageError(f"--costs needs {args.L - 2} values for L={args.L}")
        orders = range(3, args.L + 1)
        sizes = {} if args.sizes == "auto" else dict(zip(orders, map(int, _floats(args.sizes))))
        try:
            params = pr.ProportionParams(dict(zip(orders, costs)), args.max_cost, sizes)
            p = pr.proportions(params).p
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        db = seqdb.load(args.db)
        targets = ex.draw_targets(args.seed, args.targets)
        results = batch_synthesize(db, index_database(db), targets, args.epsilon,
                                   GrowthPolicy(ceiling=args.ceiling))
        try:
            p = pr.empirical_proportions(results)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if (args.emit or "csv") == "json":
        _print_json({"proportions": {str(k): v for k, v in p.items()}})
    else:
        sys.stdout.write("order,proportion\n")
        for k, v in p.items():
            sys.stdout.write(f"{k},{ex.FLOAT_FMT % v}\n")


def cmd_selftest(args):
    from hiersynth.selftest import run_selftest
    ok = run_selftest(sys.stdout)
    return EXIT_OK if ok else 1


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hiersynth", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a sequence database")
    g.add_argument("--set", required=True)
    g.add_argument("--cost-model", default="catalyst-direct")
    g.add_argument("--max-cost", type=float, required=True)
    g.add_argument("--node-limit", type=int, default=seqdb.DEFAULT_NODE_LIMIT)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    g = sub.add_parser("grow", help="extend a saved database to a higher cost")
    g.add_argument("--db", required=True)
    g.add_argument("--max-cost", type=float, required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_grow)

    g = sub.add_parser("synth", help="approximate target gates")
    g.add_argument("--db", required=True)
    g.add_argument("--target", action="append", required=True,
                   help="e.g. 'Rz(0.3)', 'H*T', 'U(w,x,y,z)'; repeatable")
    g.add_argument("--epsilon", type=float, required=True)
    g.add_argument("--grow-ceiling", "--ceiling", dest="ceiling", type=float, default=math.inf)
    g.add_argument("--save", action="store_true", help="write back any growth")
    g.add_argument("--emit", choices=("json", "text"), default="json")
    g.set_defaults(func=cmd_synth)

    g = sub.add_parser("experiment", help="mean cost over an epsilon grid")
    g.add_argument("--set", required=True)
    g.add_argument("--cost-model", default="catalyst-direct")
    g.add_argument("--epsilons")
    g.add_argument("--targets", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--ceiling", type=float, default=math.inf)
    g.add_argument("--db-cache")
    g.add_argument("--out")
    g.add_argument("--emit", choices=("csv", "json"))
    g.set_defaults(func=cmd_experiment)

    g = sub.add_parser("fit", help="least-squares slope of an experiment table")
    g.add_argument("table")
    g.add_argument("--baseline", help="table to report the slope reduction against")
    g.add_argument("--out")
    g.add_argument("--emit", choices=("csv", "json"))
    g.set_defaults(func=cmd_fit)

    g = sub.add_parser("proportions", help="hierarchy-order proportions")
    psub = g.add_subparsers(dest="mode", required=True)
    m = psub.add_parser("model")
    m.add_argument("--L", type=int, required=True)
    m.add_argument("--costs", required=True)
    m.add_argument("--sizes", default="auto")
    m.add_argument("--max-cost", type=float, required=True)
    m.add_argument("--emit", choices=("csv", "json"))
    m.set_defaults(func=cmd_proportions)
    e = psub.add_parser("empirical")
    e.add_argument("--db", required=True)
    e.add_argument("--epsilon", type=float, required=True)
    e.add_argument("--targets", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--ceiling", type=float, default=math.inf)
    e.add_argument("--emit", choices=("csv", "json"))
    e.set_defaults(func=cmd_proportions)

    g = sub.add_parser("selftest", help="quick end-to-end sanity checks")
    g.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except seqdb.ResourceLimitError as exc:
        sys.stderr.write(f"resource ceiling: {exc}\n")
        return EXIT_CEILING
    except (OSError, seqdb.DatabaseFormatError) as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
