"""Databases of cost-optimal gate sequences, grown in order of increasing cost.

Nodes are only ever appended, and only once they are known to be the cheapest
sequence for their combined gate, so node ids double as acceptance order and
costs are non-decreasing along the arena.  Each node stores its parent and the
base gate appended to it; sequences are recovered by walking parent links.

Costs are held internally as integer multiples of ``COST_QUANTUM`` so that
equal-cost ties compare exactly regardless of summation order.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import fastcrc
import numpy as np

from hiersynth import _kernels as K
from hiersynth.costs import CostModel, base_gate_cost
from hiersynth.psu2 import BaseGate, GateElement, GateSetSpec, build_gate_set, pauli_vectors

COST_QUANTUM = 1e-9
_UNITS_PER_COST = 1_000_000_000
DEFAULT_NODE_LIMIT = 50_000_000
KEY_DELTA = K.KEY_DELTA

MAGIC = b"HSDB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQQQQqI")
_NODE = np.dtype(
    [("parent", "<u8"), ("gate", "<u2"), ("q", "<f8", (4,)), ("cost", "<f8")]
)
_ROOT_PARENT = np.iinfo(np.uint64).max


class ResourceLimitError(RuntimeError):
    """Raised when a node ceiling is hit; the database stays consistent and can be grown later."""


class DatabaseFormatError(ValueError):
    pass


class ChecksumError(DatabaseFormatError):
    pass


def to_units(cost: float) -> int:
    return int(round(cost * _UNITS_PER_COST))


def to_cost(units) -> float | np.ndarray:
    # division, not multiplication by 1e-9, so dyadic and decimal costs come back exact
    return np.asarray(units) / _UNITS_PER_COST if np.ndim(units) else units / _UNITS_PER_COST


def gate_set_fingerprint(gates: list[BaseGate]) -> int:
    h = hashlib.sha256()
    for g in gates:
        h.update(struct.pack("<Ii", g.id, g.order))
        h.update(np.round(np.array(g.element.q), 12).tobytes())
    return int.from_bytes(h.digest()[:8], "little")


@dataclass
class DbStats:
    accepted: int
    watermark: float
    frontier: int
    max_cost: float
    per_depth: dict[int, int]
    per_order: dict[int, int]

    def total_gates(self) -> int:
        return sum(self.per_order.values())


class SequenceDatabase:
    def __init__(self, gate_set: list[BaseGate], cost_model: CostModel,
                 node_limit: int = DEFAULT_NODE_LIMIT, capacity: int = 1024):
        self.gate_set = list(gate_set)
        self.cost_model = cost_model
        self.node_limit = int(node_limit)
        self.gate_quat = np.array([g.element.q for g in self.gate_set], dtype=float)
        self.gate_units = np.array(
            [to_units(base_gate_cost(cost_model, g)) for g in self.gate_set], dtype=np.int64
        )
        if (self.gate_units < 0).any():
            raise ValueError("base gate costs must be nonnegative")
        self._setup_groups()

        self.quat = np.zeros((capacity, 4))
        self.cost_units = np.zeros(capacity, dtype=np.int64)
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.gate = np.full(capacity, -1, dtype=np.int32)
        self.depth = np.zeros(capacity, dtype=np.int32)
        self.table = K.new_table(4 * capacity)
        self.n = 0
        self.n_keys = 0
        self.watermark_units = 0
        self.popped = 0

        # root: the identity, accepted first at cost 0
        self.quat[0] = (1.0, 0.0, 0.0, 0.0)
        self.n = 1
        K.key_insert(self.table, 0.0, 0.0, 0.0)
        self.n_keys = 1

    def _setup_groups(self):
        levels = sorted(set(self.gate_units.tolist()))
        members = [[i for i, u in enumerate(self.gate_units) if u == lv] for lv in levels]
        width = max(len(m) for m in members)
        self.group_cost = np.array(levels, dtype=np.int64)
        self.group_gates = np.full((len(levels), width), -1, dtype=np.int64)
        for g, m in enumerate(members):
            self.group_gates[g, : len(m)] = m
        self.group_len = np.array([len(m) for m in members], dtype=np.int64)
        self.ptr = np.zeros(len(levels), dtype=np.int64)
        self.sub = np.zeros(len(levels), dtype=np.int64)

    # ------------------------------------------------------------------ views
    @property
    def accepted(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def generated_up_to(self) -> float:
        return to_cost(self.watermark_units)

    def quaternions(self) -> np.ndarray:
        return self.quat[: self.n]

    def costs(self) -> np.ndarray:
        return to_cost(self.cost_units[: self.n])

    def vectors(self) -> np.ndarray:
        return pauli_vectors(self.quaternions())

    def combined(self, node_id: int) -> GateElement:
        self._check_node(node_id)
        return GateElement(tuple(self.quat[node_id]))

    def node_cost(self, node_id: int) -> float:
        self._check_node(node_id)
        return to_cost(int(self.cost_units[node_id]))

    def frontier_size(self) -> int:
        total = 0
        for g in range(len(self.group_cost)):
            pending_parents = self.n - self.ptr[g]
            if pending_parents > 0:
                total += int(pending_parents * self.group_len[g] - self.sub[g])
        return total

    def frontier_min_cost(self) -> float | None:
        live = [int(self.cost_units[p] + c) for p, c in zip(self.ptr, self.group_cost) if p < self.n]
        return to_cost(min(live)) if live else None

    def _check_node(self, node_id):
        if not 0 <= node_id < self.n:
            raise KeyError(f"node {node_id} is not an accepted node")

    # ------------------------------------------------------------- expansion
    def _reserve_nodes(self):
        cap = 2 * self.quat.shape[0]
        cap = min(cap, max(self.node_limit, self.n + 1))
        for name in ("quat", "cost_units", "parent", "gate", "depth"):
            old = getattr(self, name)
            new = np.zeros((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)

    def _reserve_table(self):
        new = K.new_table(2 * self.table.shape[0])
        K.rehash(self.table, new)
        self.table = new

    def _run(self, max_units: int):
        while True:
            status, self.n, self.n_keys, popped = K.expand(
                self.quat, self.cost_units, self.parent, self.gate, self.depth, self.n,
                self.table, self.n_keys,
                self.gate_quat, self.group_cost, self.group_gates, self.group_len,
                self.ptr, self.sub,
                max_units, self.node_limit,
            )
            self.popped += popped
            if status == K.STATUS_GROW_NODES:
                self._reserve_nodes()
            elif status == K.STATUS_GROW_TABLE:
                self._reserve_table()
            elif status == K.STATUS_LIMIT:
                nxt = self.frontier_min_cost()
                # everything strictly cheaper than the interrupted level is complete
                done = self.cost_units[self.n - 1] - 1 if nxt is None else to_units(nxt) - 1
                self.watermark_units = max(self.watermark_units, min(int(done), max_units))
                raise ResourceLimitError(
                    f"node limit {self.node_limit} reached at cost "
                    f"{to_cost(int(self.cost_units[self.n - 1])):g}"
                )
            else:
                self.watermark_units = max(self.watermark_units, max_units)
                return

    def grow(self, new_max_cost: float) -> "SequenceDatabase":
        if new_max_cost < 0:
            raise ValueError("max_cost must be nonnegative")
        units = to_units(new_max_cost)
        if units < self.watermark_units:
            raise ValueError(
                f"cannot grow to {new_max_cost:g} below watermark {self.generated_up_to:g}"
            )
        self._run(units)
        return self

    # ---------------------------------------------------------------- output
    def decode_sequence(self, node_id: int) -> list[BaseGate]:
        self._check_node(node_id)
        seq = []
        i = int(node_id)
        while i > 0:
            seq.append(self.gate_set[self.gate[i]])
            i = int(self.parent[i])
        return seq[::-1]

    def stats(self) -> DbStats:
        return db_stats(self)

    def __len__(self):
        return self.n

    def __repr__(self):
        return (f"SequenceDatabase(n={self.n}, watermark={self.generated_up_to:g}, "
                f"gates={len(self.gate_set)}, model={self.cost_model.kind})")


def generate(gate_set: list[BaseGate], cost_model: CostModel, max_cost: float,
             node_limit: int = DEFAULT_NODE_LIMIT) -> SequenceDatabase:
    """Every element reachable at cost <= ``max_cost``, each with one cheapest sequence."""
    if max_cost < 0:
        raise ValueError("max_cost must be nonnegative")
    db = SequenceDatabase(gate_set, cost_model, node_limit=node_limit)
    return db.grow(max_cost)


def grow(db: SequenceDatabase, new_max_cost: float) -> SequenceDatabase:
    return db.grow(new_max_cost)


def decode_sequence(db: SequenceDatabase, node_id: int) -> list[BaseGate]:
    return db.decode_sequence(node_id)


def db_stats(db: SequenceDatabase) -> DbStats:
    n = db.n
    depth = db.depth[:n]
    per_depth = {int(d): int(c) for d, c in zip(*np.unique(depth, return_counts=True))}
    # gate usage summed over every accepted node's sequence: a node contributes its own
    # gate plus everything on the path above it
    orders = np.array([g.order for g in db.gate_set], dtype=np.int64)
    subtree = K.subtree_sizes(db.parent[:n], n)
    per_order = {}
    node_orders = orders[db.gate[1:n]] if n > 1 else np.zeros(0, dtype=np.int64)
    for o in sorted(set(orders.tolist())):
        per_order[int(o)] = int(subtree[1:n][node_orders == o].sum())
    return DbStats(
        accepted=n,
        watermark=db.generated_up_to,
        frontier=db.frontier_size(),
        max_cost=float(db.costs().max()) if n else 0.0,
        per_depth=per_depth,
        per_order=per_order,
    )


# ------------------------------------------------------------------- storage
def _params_blob(db: SequenceDatabase) -> bytes:
    spec = {
        "gate_set": [
            {"id": g.id, "label": g.label, "order": g.order, "k": g.rotation_index,
             "q": list(g.element.q)}
            for g in db.gate_set
        ],
        "cost_model": db.cost_model.to_dict(),
        "node_limit": db.node_limit,
    }
    return json.dumps(spec, sort_keys=True).encode()


def save(db: SequenceDatabase, path) -> None:
    """Little-endian: header, params JSON, node records, frontier pointers; trailing CRC-64/XZ."""
    n = db.n
    params = _params_blob(db)
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION,
        gate_set_fingerprint(db.gate_set), db.cost_model.fingerprint(),
        n, len(db.group_cost), db.popped, db.watermark_units, len(params),
    )
    recs = np.zeros(n, dtype=_NODE)
    par = db.parent[:n].astype(np.int64)
    recs["parent"] = np.where(par < 0, _ROOT_PARENT, par).astype(np.uint64)
    recs["gate"] = np.where(db.gate[:n] < 0, 0xFFFF, db.gate[:n]).astype(np.uint16)
    recs["q"] = db.quat[:n]
    recs["cost"] = to_cost(db.cost_units[:n])
    frontier = np.stack([db.group_cost, db.ptr, db.sub], axis=1).astype("<i8")
    body = header + params + recs.tobytes() + frontier.tobytes() + struct.pack("<q", db.watermark_units)
    crc = fastcrc.crc64.xz(body)
    Path(path).write_bytes(body + struct.pack("<Q", crc))


def load(path, gate_set: list[BaseGate] | None = None,
         cost_model: CostModel | None = None) -> SequenceDatabase:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + 8:
        raise DatabaseFormatError("file too short")
    body, (crc,) = raw[:-8], struct.unpack("<Q", raw[-8:])
    (magic, version, gs_fp, cm_fp, n, n_groups, popped, watermark, plen) = _HEADER.unpack_from(body)
    if magic != MAGIC:
        raise DatabaseFormatError("not a sequence database (bad magic)")
    if version != FORMAT_VERSION:
        raise DatabaseFormatError(f"format version {version} != {FORMAT_VERSION}")
    if fastcrc.crc64.xz(body) != crc:
        raise ChecksumError("checksum mismatch")
    off = _HEADER.size
    params = json.loads(body[off: off + plen])
    off += plen
    stored_gates = [
        BaseGate(id=g["id"], element=GateElement(tuple(g["q"])), label=g["label"],
                 order=g["order"], rotation_index=g["k"])
        for g in params["gate_set"]
    ]
    stored_model = CostModel.from_dict(params["cost_model"])
    if gate_set is not None and gate_set_fingerprint(gate_set) != gs_fp:
        raise DatabaseFormatError("gate set fingerprint mismatch")
    if cost_model is not None and cost_model.fingerprint() != cm_fp:
        raise DatabaseFormatError("cost model fingerprint mismatch")
    if gate_set_fingerprint(stored_gates) != gs_fp or stored_model.fingerprint() != cm_fp:
        raise DatabaseFormatError("stored parameters do not match header fingerprints")

    recs = np.frombuffer(body, dtype=_NODE, count=n, offset=off)
    off += n * _NODE.itemsize
    frontier = np.frombuffer(body, dtype="<i8", count=3 * n_groups, offset=off).reshape(-1, 3)
    off += frontier.nbytes
    (wm_check,) = struct.unpack_from("<q", body, off)
    if wm_check != watermark:
        raise DatabaseFormatError("watermark trailer mismatch")

    db = SequenceDatabase(stored_gates, stored_model, node_limit=params["node_limit"],
                          capacity=max(1024, n))
    if not np.array_equal(frontier[:, 0], db.group_cost):
        raise DatabaseFormatError("frontier cost groups do not match the cost model")
    db.quat[:n] = recs["q"]
    db.cost_units[:n] = np.rint(recs["cost"] * _UNITS_PER_COST).astype(np.int64)
    par = recs["parent"].astype(np.uint64)
    db.parent[:n] = np.where(par == _ROOT_PARENT, -1, par.astype(np.int64))
    gates = recs["gate"].astype(np.int32)
    db.gate[:n] = np.where(gates == 0xFFFF, -1, gates)
    db.depth[:n] = K.depths_from_parents(db.parent[:n], n)
    db.n = n
    db.table = K.new_table(4 * n)
    K.keys_insert(db.table, pauli_vectors(db.quat[:n]))
    db.n_keys = n
    db.ptr[:] = frontier[:, 1]
    db.sub[:] = frontier[:, 2]
    db.watermark_units = watermark
    db.popped = popped
    return db


def gate_set_for(spec: GateSetSpec) -> list[BaseGate]:
    return build_gate_set(spec)
