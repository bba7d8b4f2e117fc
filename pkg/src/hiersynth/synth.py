"""Approximate target gates by the cheapest database sequence within a trace distance.

Candidates come from a Euclidean radius query in Pauli-vector space and are
then re-checked with the exact trace distance, so the index only ever narrows
the search.  A target with no candidate grows the database by a fixed cost
increment and retries.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hiersynth.costs import base_gate_cost
from hiersynth.kdindex import SpatialIndex, sync_index
from hiersynth.psu2 import (BaseGate, GateElement, compose_all, pauli_vectors, trace_distance,
                             trace_distances)
from hiersynth.seqdb import ResourceLimitError, SequenceDatabase

RADIUS_FACTOR = 2 * math.sqrt(2)
RADIUS_MARGIN = 0.25
THREADS_ENV = "HIER_SYNTH_THREADS"


def search_radius(epsilon: float, margin: float = RADIUS_MARGIN) -> float:
    return RADIUS_FACTOR * epsilon * (1 + margin)


@dataclass
class GrowthPolicy:
    """Linear growth: add ``increment`` (default: cheapest hierarchy cost) until ``ceiling``."""

    increment: float | None = None
    ceiling: float = math.inf

    def step(self, db: SequenceDatabase) -> float:
        if self.increment is not None:
            return self.increment
        costs = [base_gate_cost(db.cost_model, g) for g in db.gate_set if g.order >= 3]
        return min(c for c in costs if c > 0)


@dataclass
class SynthesisResult:
    sequence: list[BaseGate]
    cost: float
    achieved_error: float
    node_id: int
    grew_to: float

    def labels(self) -> list[str]:
        return [g.label for g in self.sequence]

    def to_dict(self) -> dict:
        return {
            "sequence": self.labels(),
            "cost": self.cost,
            "achieved_error": self.achieved_error,
            "node_id": self.node_id,
            "watermark": self.grew_to,
        }


@dataclass
class VerifyReport:
    passed: bool
    recomputed_cost: float
    recomputed_error: float
    problems: list[str] = field(default_factory=list)


def _as_element(target) -> GateElement:
    return target if isinstance(target, GateElement) else GateElement(tuple(target))


def _best_node(db: SequenceDatabase, index: SpatialIndex, target: GateElement,
               epsilon: float) -> int | None:
    q = target.as_array()
    radius = search_radius(epsilon)
    if radius > index.r_mirror:
        # mirrors only cover points within r_mirror of the boundary
        return scan_optimum(db, target, epsilon)
    ids, _ = index.query_arrays(pauli_vectors(q), radius)
    if len(ids) == 0:
        return None
    ok = ids[trace_distances(db.quat[ids], q) <= epsilon]
    # node ids follow acceptance order, so the smallest id is the cheapest
    return int(ok.min()) if len(ok) else None


def scan_optimum(db: SequenceDatabase, target: GateElement, epsilon: float) -> int | None:
    """Linear-scan reference: cheapest accepted node within ``epsilon`` of ``target``."""
    ok = np.flatnonzero(trace_distances(db.quaternions(), target) <= epsilon)
    return int(ok[0]) if len(ok) else None


def _result(db: SequenceDatabase, node: int, target: GateElement) -> SynthesisResult:
    return SynthesisResult(
        sequence=db.decode_sequence(node),
        cost=db.node_cost(node),
        achieved_error=trace_distance(db.combined(node), target),
        node_id=node,
        grew_to=db.generated_up_to,
    )


def _grow_step(db: SequenceDatabase, index: SpatialIndex, policy: GrowthPolicy):
    if db.generated_up_to >= policy.ceiling:
        raise ResourceLimitError(
            f"growth ceiling {policy.ceiling:g} reached without a sequence within epsilon"
        )
    db.grow(min(db.generated_up_to + policy.step(db), policy.ceiling))
    sync_index(index, db)


def synthesize(db: SequenceDatabase, index: SpatialIndex, target, epsilon: float,
               policy: GrowthPolicy | None = None) -> SynthesisResult:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    policy = policy or GrowthPolicy()
    target = _as_element(target)
    sync_index(index, db)
    while True:
        node = _best_node(db, index, target, epsilon)
        if node is not None:
            return _result(db, node, target)
        _grow_step(db, index, policy)


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def batch_synthesize(db: SequenceDatabase, index: SpatialIndex, targets, epsilon: float,
                     policy: GrowthPolicy | None = None,
                     threads: int | None = None) -> list[SynthesisResult]:
    """Grow once to the watermark the hardest target needs, then answer all read-only."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    policy = policy or GrowthPolicy()
    targets = [_as_element(t) for t in targets]
    if not targets:
        return []
    sync_index(index, db)
    pending = list(range(len(targets)))
    while pending:
        pending = [i for i in pending if _best_node(db, index, targets[i], epsilon) is None]
        if pending:
            _grow_step(db, index, policy)

    def answer(t):
        return _result(db, _best_node(db, index, t, epsilon), t)

    n_threads = _thread_count(threads)
    if n_threads == 1:
        return [answer(t) for t in targets]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(answer, targets))


def verify(result: SynthesisResult, target, cost_model, tol: float = 1e-10) -> VerifyReport:
    """Recompose the sequence and recompute cost and error from scratch."""
    target = _as_element(target)
    combined = compose_all(g.element for g in result.sequence)
    cost = sum(base_gate_cost(cost_model, g) for g in result.sequence)
    err = trace_distance(combined, target)
    problems = []
    if abs(cost - result.cost) > tol:
        problems.append(f"cost mismatch: stored {result.cost:g}, recomputed {cost:g}")
    if abs(err - result.achieved_error) > tol:
        problems.append(f"distance mismatch: stored {result.achieved_error:.3g}, recomputed {err:.3g}")
    return VerifyReport(not problems, cost, err, problems)
