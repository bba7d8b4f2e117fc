import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hiersynth.costs import CostModel
from hiersynth.experiment import (FIT_COLUMNS, TABLE_COLUMNS, ExperimentIncomplete, ExperimentRow,
                                  ExperimentSpec, ExperimentTable, FitResult, default_epsilons,
                                  draw_targets, dumps, emit, fit_table, ols_fit, read_records,
                                  read_table, run_experiment, scaling_reduction, target_hash)
from hiersynth.psu2 import GateSetSpec
from hiersynth.seqdb import ResourceLimitError

EPS = [0.2, 0.15, 0.1]


def spec(k=2, **kw):
    kw.setdefault("epsilons", EPS)
    kw.setdefault("n_targets", 30)
    return ExperimentSpec(GateSetSpec.named(k), CostModel.catalyst_direct(), **kw)


def _fit(slope, ci=0.0):
    return FitResult(slope, 0.0, ci, 0.0, 0.0, 1.0, 8)


def test_default_epsilons():
    e = default_epsilons(8, 0.1, 0.02)
    assert len(e) == 8 and e[0] == pytest.approx(0.1) and e[-1] == pytest.approx(0.02)
    assert np.allclose(np.diff(np.log(e)), np.log(0.2) / 7)


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(epsilons=[])
    with pytest.raises(ValueError):
        spec(epsilons=[0.1, 0.0])
    with pytest.raises(ValueError):
        spec(n_targets=0)


def test_identity_target_costs_zero():
    table = run_experiment(spec(n_targets=1), targets=[[1.0, 0, 0, 0]])
    assert [r.mean_cost for r in table.rows] == [0, 0, 0]
    assert all(r.stderr_cost == 0 and r.n == 1 for r in table.rows)


def test_targets_deterministic():
    a, b = draw_targets(7, 20), draw_targets(7, 20)
    assert np.array_equal(a, b)
    assert target_hash(a) == target_hash(b)
    assert target_hash(a) != target_hash(draw_targets(8, 20))
    assert np.allclose(np.linalg.norm(a, axis=1), 1)


def test_experiment_deterministic():
    a = run_experiment(spec(seed=3))
    b = run_experiment(spec(seed=3), threads=2)
    assert a.rows == b.rows and a.target_hash == b.target_hash
    assert [r.epsilon for r in a.rows] == EPS
    means = [r.mean_cost for r in a.rows]
    assert means == sorted(means)


def test_keep_results():
    t = run_experiment(spec(seed=1, n_targets=10), keep_results=True)
    for row in t.rows:
        costs = [r.cost for r in t.results[row.epsilon]]
        assert np.mean(costs) == pytest.approx(row.mean_cost)
        assert np.std(costs, ddof=1) / math.sqrt(10) == pytest.approx(row.stderr_cost)


def test_set2_dominates_set1():
    kw = dict(seed=5, n_targets=200, epsilons=[0.15, 0.1])
    t1 = run_experiment(spec(1, **kw), keep_results=True)
    t2 = run_experiment(spec(2, **kw), keep_results=True)
    assert t1.target_hash == t2.target_hash
    for e in kw["epsilons"]:
        assert all(b.cost <= a.cost for a, b in zip(t1.results[e], t2.results[e]))


def test_db_cache_reuse(tmp_path):
    cache = tmp_path / "db.hsdb"
    first = run_experiment(spec(seed=2, db_cache=str(cache)))
    assert cache.exists()
    second = run_experiment(spec(seed=2, db_cache=str(cache)))
    assert first.rows == second.rows
    assert second.watermark == first.watermark


def test_ceiling_partial_table(tmp_path):
    out = tmp_path / "t.csv"
    with pytest.raises(ExperimentIncomplete) as info:
        run_experiment(spec(seed=4, epsilons=[0.2, 0.02], ceiling=5.0, out=str(out)))
    t = info.value.table
    assert isinstance(info.value, ResourceLimitError)
    assert t.partial and [r.epsilon for r in t.rows] == [0.2]
    assert len(read_table(out)) == 1


def test_ols_exact_line():
    x = np.linspace(1, 2, 6)
    f = ols_fit(np.column_stack([x, 3 * x - 1]))
    assert f.slope == pytest.approx(3) and f.intercept == pytest.approx(-1)
    assert f.slope_ci == pytest.approx(0, abs=1e-9) and f.r_squared == pytest.approx(1)
    assert f.n == 6


def test_ols_constant():
    f = ols_fit([(1, 5), (2, 5), (3, 5)])
    assert f.slope == pytest.approx(0) and f.intercept == pytest.approx(5)
    assert f.residual_std == pytest.approx(0, abs=1e-12)


def test_ols_rejects_degenerate():
    with pytest.raises(ValueError):
        ols_fit([(1, 2), (2, 3)])
    with pytest.raises(ValueError):
        ols_fit([(1, 2), (1, 3), (1, 4)])


def test_ols_ci_calibration():
    rng = np.random.Generator(np.random.Philox(99))
    x = np.linspace(1, 2, 8)
    covered = 0
    for _ in range(100):
        f = ols_fit(np.column_stack([x, 4 * x + 2 + rng.normal(0, 0.3, len(x))]))
        covered += abs(f.slope - 4) <= f.slope_ci
    assert covered >= 90


@given(st.floats(-10, 10), st.floats(-10, 10), st.lists(st.floats(0, 5), min_size=3, max_size=12,
                                                        unique=True))
def test_ols_recovers_line_property(a, b, xs):
    x = np.array(xs)
    if np.ptp(x) < 1e-3:
        return
    f = ols_fit(np.column_stack([x, a * x + b]))
    assert f.slope == pytest.approx(a, abs=1e-6)
    assert f.intercept == pytest.approx(b, abs=1e-6)


def test_scaling_reduction_examples():
    assert scaling_reduction(_fit(10.46), _fit(6.89))[0] == pytest.approx(34.13, abs=0.01)
    assert scaling_reduction(_fit(52.4), _fit(40.6))[0] == pytest.approx(22.52, abs=0.01)
    assert scaling_reduction(_fit(7.0, 0.3), _fit(7.0, 0.3))[0] == 0
    with pytest.raises(ValueError):
        scaling_reduction(_fit(0.0), _fit(1.0))
    with pytest.raises(ValueError):
        scaling_reduction(_fit(-1.0), _fit(1.0))


def test_scaling_reduction_uncertainty():
    _, u = scaling_reduction(_fit(10.0, 0.5), _fit(5.0, 0.2))
    assert u == pytest.approx(100 * math.hypot(0.02, 0.025))
    assert scaling_reduction(_fit(10.0), _fit(5.0))[1] == 0


def _table():
    rows = [ExperimentRow(0.1, 20.5, 0.25, 50), ExperimentRow(0.05, 24.125, 0.3, 50),
            ExperimentRow(0.025, 28.0, 1 / 3, 50)]
    return ExperimentTable(rows, "abc", 9.0)


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_emit_roundtrip(tmp_path, suffix):
    t = _table()
    path = emit(t, tmp_path / f"t{suffix}")
    back = read_table(path)
    assert [r.epsilon for r in back] == [r.epsilon for r in t.rows]
    for a, b in zip(back, t.rows):
        assert a.mean_cost == pytest.approx(b.mean_cost, rel=1e-11)
        assert a.stderr_cost == pytest.approx(b.stderr_cost, rel=1e-11)
        assert a.n == b.n
    assert b"\r\n" not in path.read_bytes()


def test_emit_empty_table():
    text = dumps(ExperimentTable([], "x", 0.0))
    assert text == ",".join(TABLE_COLUMNS) + "\n"


def test_fit_schema(tmp_path):
    f = fit_table(_table().rows)
    path = emit(f, tmp_path / "fit.csv")
    rec = read_records(path)
    assert len(rec) == 1 and tuple(rec[0]) == FIT_COLUMNS
    assert rec[0]["slope"] == pytest.approx(f.slope, rel=1e-11)


def test_emit_rejects_unknown():
    with pytest.raises(TypeError):
        dumps({"a": 1})
    with pytest.raises(ValueError):
        dumps(_table(), "xml")
