import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hiersynth import costs
from hiersynth.costs import (CostModel, NoPublishedCostError, base_gate_cost, catalyst_direct_cost,
                             catalyst_magic_cost, distillation_cost, load_cost_model,
                             parse_cost_model, save_cost_model)
from hiersynth.psu2 import GateSetSpec, build_gate_set, parse_gate, same_element

TABLE_1A = {3: 1, 4: 2.5, 5: 3.25, 6: 3.625, 7: 3.8125}
TABLE_1B = {3: 1, 4: 3, 5: 5, 6: 7, 7: 9}
TABLE_2 = {
    1e-5: [5.1, 16.7, 34.8, 49.0, 64.7],
    1e-10: [36.2, 103.1, 172.7, 255.8, 344.8],
    1e-15: [70.4, 186.5, 333.2, 486.1, 671.5],
    1e-20: [120.1, 358.7, 635.8, 962.2, 1351.2],
}


def _gate(label):
    gates = build_gate_set(GateSetSpec(max_order=7))
    target = parse_gate(label)
    return next(g for g in gates if same_element(g.element, target))


def test_tables_exact():
    for l, c in TABLE_1A.items():
        assert catalyst_direct_cost(l) == c
    for l, c in TABLE_1B.items():
        assert catalyst_magic_cost(l) == c
    for mu, row in TABLE_2.items():
        for l, c in zip(range(3, 8), row):
            assert distillation_cost(l, mu) == c


def test_closed_form_matches_recurrence():
    direct = magic = 1.0
    for l in range(3, 13):
        if l > 3:
            direct = (4 + direct) / 2
            magic = 2 + magic
        assert abs(catalyst_direct_cost(l) - direct) <= 1e-12
        assert abs(catalyst_magic_cost(l) - magic) <= 1e-12


def test_catalyst_monotone_and_ordered():
    for l in range(3, 12):
        assert catalyst_direct_cost(l + 1) > catalyst_direct_cost(l)
        assert catalyst_magic_cost(l + 1) > catalyst_magic_cost(l)
        assert catalyst_direct_cost(l) < 4
        assert catalyst_magic_cost(l) >= catalyst_direct_cost(l)


@pytest.mark.parametrize("f", [catalyst_direct_cost, catalyst_magic_cost])
def test_catalyst_rejects_low_orders(f):
    with pytest.raises(ValueError):
        f(2)


@pytest.mark.parametrize("l,mu", [(8, 1e-15), (2, 1e-15), (3, 1e-7)])
def test_distillation_unpublished(l, mu):
    with pytest.raises(NoPublishedCostError):
        distillation_cost(l, mu)


def test_distillation_model_rejects_unpublished_mu():
    with pytest.raises(NoPublishedCostError):
        CostModel.distillation(1e-7)


def test_base_gate_cost_examples():
    direct = CostModel.catalyst_direct()
    assert base_gate_cost(direct, _gate("H")) == 0
    assert base_gate_cost(direct, _gate("Rz(3*pi/8)")) == 2.5
    assert base_gate_cost(CostModel.distillation(1e-5), _gate("T")) == 5.1
    for g in build_gate_set(GateSetSpec(max_order=7))[:24]:
        assert base_gate_cost(CostModel.distillation(1e-20), g) == 0


def test_base_gate_cost_missing_order():
    model = CostModel.custom({3: 1.0})
    with pytest.raises((KeyError, ValueError)):
        base_gate_cost(model, _gate("Rz(pi/8)"))


@pytest.mark.parametrize("table", [{3: 0.0}, {3: -1.0}, {2: 1.0}])
def test_custom_rejects_bad_tables(table):
    with pytest.raises(ValueError):
        CostModel.custom(table)


@given(st.dictionaries(st.integers(3, 8), st.floats(1e-6, 1e6, allow_nan=False), min_size=1))
def test_custom_roundtrip_bit_exact(tmp_path_factory, table):
    path = tmp_path_factory.mktemp("cm") / "model.json"
    model = CostModel.custom(table)
    save_cost_model(model, path)
    back = load_cost_model(path)
    assert back == model
    assert all(back.order_cost(l) == c for l, c in table.items())
    assert back.fingerprint() == model.fingerprint()


def test_config_schema(tmp_path):
    path = tmp_path / "m.json"
    save_cost_model(CostModel.distillation(1e-15), path)
    d = json.loads(path.read_text())
    assert d["kind"] == costs.DISTILLATION
    assert d["mu"] == 1e-15
    assert d["table"]["4"] == 186.5


def test_parse_cost_model(tmp_path):
    assert parse_cost_model("catalyst-direct").order_cost(4) == 2.5
    assert parse_cost_model("catalyst-magic").order_cost(4) == 3
    assert parse_cost_model("distillation:1e-10").order_cost(5) == 172.7
    path = tmp_path / "c.json"
    save_cost_model(CostModel.custom({3: 2.0, 4: 3.0}), path)
    assert parse_cost_model(f"custom:{path}").order_cost(4) == 3.0
    with pytest.raises(ValueError):
        parse_cost_model("free")


def test_fingerprints_distinguish_models():
    fps = {CostModel.catalyst_direct().fingerprint(), CostModel.catalyst_magic().fingerprint(),
           CostModel.distillation(1e-15).fingerprint()}
    assert len(fps) == 3
