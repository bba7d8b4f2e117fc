"""Fast end-to-end checks run by ``hiersynth selftest``."""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from hiersynth import costs, seqdb
from hiersynth.experiment import draw_targets
from hiersynth.kdindex import index_database
from hiersynth.proportions import ProportionParams, proportions
from hiersynth.psu2 import GateSetSpec, build_gate_set, clifford_group
from hiersynth.synth import batch_synthesize, scan_optimum, verify


def _checks():
    yield "catalyst costs", (costs.catalyst_direct_cost(4) == 2.5
                             and costs.catalyst_magic_cost(5) == 5.0)
    yield "distillation table", costs.distillation_cost(4, 1e-15) == 186.5

    gates = build_gate_set(GateSetSpec.named(1))
    model = costs.CostModel.catalyst_direct()
    db0 = seqdb.generate(gates, model, 0.0)
    yield "clifford closure", db0.n == 24 == len(clifford_group())

    db = seqdb.generate(gates, model, 6.0)
    grown = seqdb.generate(gates, model, 3.0).grow(6.0)
    yield "grow matches generate", (db.n == grown.n
                                    and np.array_equal(db.cost_units[:db.n], grown.cost_units[:db.n]))

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "db.hsdb"
        seqdb.save(db, path)
        back = seqdb.load(path)
        yield "save/load", back.n == db.n and np.array_equal(back.quat[:db.n], db.quat[:db.n])

    targets = draw_targets(0, 20)
    results = batch_synthesize(db, index_database(db), targets, 0.1)
    yield "synthesis optimal", all(
        r.node_id == scan_optimum(db, t, 0.1) for r, t in zip(results, targets))
    yield "synthesis verifies", all(verify(r, t, model).passed for r, t in zip(results, targets))

    p = proportions(ProportionParams({3: 1.0, 4: 2.0}, 10.0)).p
    yield "proportions normalized", abs(sum(p.values()) - 1) < 1e-9


def run_selftest(out) -> bool:
    ok = True
    for name, passed in _checks():
        ok &= bool(passed)
        out.write(f"{'PASS' if passed else 'FAIL'}  {name}\n")
    return ok
