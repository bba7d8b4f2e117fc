"""Per-gate costs for Clifford-hierarchy Z-rotations.

Cliffords are free.  Hierarchy rotations of order ``l`` all share one cost,
taken from one of three sources: the recursive catalyst circuit applied
directly (T-count ``4 - 3 * 2**(3-l)``), the same circuit applied via
intermediate magic states (T-count ``1 + 2*(l-3)``), or published
raw-magic-state distillation counts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from hiersynth.psu2 import BaseGate

CATALYST_DIRECT = "catalyst_direct"
CATALYST_MAGIC = "catalyst_via_magic"
DISTILLATION = "distillation"
CUSTOM = "custom"
KINDS = (CATALYST_DIRECT, CATALYST_MAGIC, DISTILLATION, CUSTOM)

MAX_CATALYST_ORDER = 12

# raw magic states per logical gate, physical error 0.1%; keyed by mu then order
DISTILLATION_TABLE: dict[float, dict[int, float]] = {
    1e-5: {3: 5.1, 4: 16.7, 5: 34.8, 6: 49.0, 7: 64.7},
    1e-10: {3: 36.2, 4: 103.1, 5: 172.7, 6: 255.8, 7: 344.8},
    1e-15: {3: 70.4, 4: 186.5, 5: 333.2, 6: 486.1, 7: 671.5},
    1e-20: {3: 120.1, 4: 358.7, 5: 635.8, 6: 962.2, 7: 1351.2},
}


class NoPublishedCostError(ValueError):
    pass


def catalyst_direct_cost(l: int) -> float:
    if l < 3:
        raise ValueError(f"order {l} has no catalyst cost (need l >= 3)")
    return 4.0 - 3.0 * 2.0 ** (3 - l)


def catalyst_magic_cost(l: int) -> float:
    if l < 3:
        raise ValueError(f"order {l} has no catalyst cost (need l >= 3)")
    return 1.0 + 2.0 * (l - 3)


def _match_mu(mu: float) -> float | None:
    for key in DISTILLATION_TABLE:
        if abs(mu - key) <= 1e-9 * key:
            return key
    return None


def distillation_cost(l: int, mu: float) -> float:
    key = _match_mu(mu)
    if key is None or l not in DISTILLATION_TABLE[key]:
        raise NoPublishedCostError(f"no published cost for order {l} at mu={mu:g}")
    return DISTILLATION_TABLE[key][l]


@dataclass(frozen=True)
class CostModel:
    kind: str
    table: dict[int, float] = field(default_factory=dict)
    mu: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cost model kind {self.kind!r}")
        table = {int(k): float(v) for k, v in self.table.items()}
        for l, c in table.items():
            if l < 3 or not c > 0:
                raise ValueError(f"cost for order {l} must be > 0 (got {c})")
        object.__setattr__(self, "table", table)

    @classmethod
    def catalyst_direct(cls, max_order: int = 8) -> "CostModel":
        return cls(CATALYST_DIRECT, {l: catalyst_direct_cost(l) for l in range(3, max_order + 1)})

    @classmethod
    def catalyst_magic(cls, max_order: int = 8) -> "CostModel":
        return cls(CATALYST_MAGIC, {l: catalyst_magic_cost(l) for l in range(3, max_order + 1)})

    @classmethod
    def distillation(cls, mu: float) -> "CostModel":
        key = _match_mu(mu)
        if key is None:
            raise NoPublishedCostError(
                f"no published costs at mu={mu:g}; supply a custom table instead"
            )
        return cls(DISTILLATION, dict(DISTILLATION_TABLE[key]), mu=key)

    @classmethod
    def custom(cls, table: dict[int, float]) -> "CostModel":
        return cls(CUSTOM, table)

    def order_cost(self, l: int) -> float:
        if l <= 2:
            return 0.0
        try:
            return self.table[l]
        except KeyError:
            raise KeyError(f"cost model {self.kind} has no entry for order {l}") from None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "mu": self.mu,
            "table": {str(l): c for l, c in sorted(self.table.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CostModel":
        return cls(d["kind"], {int(k): float(v) for k, v in d.get("table", {}).items()}, d.get("mu"))

    def fingerprint(self) -> int:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


def base_gate_cost(model: CostModel, gate: BaseGate) -> float:
    return model.order_cost(gate.order)


def save_cost_model(model: CostModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def load_cost_model(path) -> CostModel:
    d = json.loads(Path(path).read_text())
    d.setdefault("kind", CUSTOM)
    return CostModel.from_dict(d)


def parse_cost_model(text: str, max_order: int = 8) -> CostModel:
    """CLI form: catalyst-direct | catalyst-magic | distillation:<mu> | custom:<path>."""
    if text == "catalyst-direct":
        return CostModel.catalyst_direct(max_order)
    if text == "catalyst-magic":
        return CostModel.catalyst_magic(max_order)
    if text.startswith("distillation:"):
        return CostModel.distillation(float(text.split(":", 1)[1]))
    if text.startswith("custom:"):
        return load_cost_model(text.split(":", 1)[1])
    raise ValueError(f"unknown cost model {text!r}")
