"""Combinatorial model for the share of each hierarchy order among all t gates.

A sequence in canonical form is fixed by its ordered string of t gates (the
Cliffords between them do not change the count), so with ``k_l`` gates of
order ``l`` there are

    Gamma(k) = (sum_l k_l)! * prod_l |T_l|**k_l / k_l!

distinct sequences.  Summing ``k_n * Gamma(k)`` and ``K * Gamma(k)`` over all
count vectors with ``sum_l c_l k_l <= C`` gives the expected proportion of
order-``n`` gates.  Everything is accumulated in log space because the
factorials overflow long before realistic budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.special import gammaln

BOUND_SLACK = 1e-9


class DegenerateProportionError(ValueError):
    pass


@dataclass(frozen=True)
class ProportionParams:
    costs: dict[int, float]
    max_cost: float
    set_sizes: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        costs = {int(l): float(c) for l, c in self.costs.items()}
        if not costs:
            raise ValueError("need at least one order")
        if sorted(costs) != list(range(3, 3 + len(costs))):
            raise ValueError("orders must run contiguously from 3")
        if any(not c > 0 for c in costs.values()):
            raise ValueError("every order needs a positive cost")
        sizes = {int(l): int(s) for l, s in self.set_sizes.items()} or {
            l: 2 ** (l - 2) for l in costs
        }
        if sorted(sizes) != sorted(costs) or any(s < 1 for s in sizes.values()):
            raise ValueError("set sizes must be positive and cover every order")
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "set_sizes", sizes)

    @property
    def orders(self) -> list[int]:
        return sorted(self.costs)

    @property
    def L(self) -> int:
        return max(self.costs)


@dataclass
class ProportionResult:
    p: dict[int, float]
    log_total_configs: float


def log_config_count(k, set_sizes) -> float:
    """log Gamma(k) for counts ``k`` (sequence or order->count map) and matching sizes."""
    if isinstance(k, dict):
        orders = sorted(k)
        k = [k[o] for o in orders]
        set_sizes = [set_sizes[o] for o in orders]
    elif isinstance(set_sizes, dict):
        set_sizes = [set_sizes[o] for o in sorted(set_sizes)]
    k = list(k)
    total = math.lgamma(1 + sum(k))
    for kl, size in zip(k, set_sizes):
        total += kl * math.log(size) - math.lgamma(1 + kl)
    return total


def _bound(remaining: float, cost: float) -> int:
    return int(math.floor(remaining / cost + BOUND_SLACK))


def enumerate_admissible(params: ProportionParams) -> Iterator[tuple[int, ...]]:
    """Lattice points with sum c_l k_l <= C, in lexicographic order (k_3 outermost)."""
    costs = [params.costs[o] for o in params.orders]

    def rec(i, remaining, prefix):
        if i == len(costs):
            yield tuple(prefix)
            return
        for kl in range(_bound(remaining, costs[i]) + 1):
            prefix.append(kl)
            yield from rec(i + 1, remaining - kl * costs[i], prefix)
            prefix.pop()

    yield from rec(0, params.max_cost, [])


def _prefix_blocks(params: ProportionParams):
    """Admissible points grouped by every coordinate but the last, as arrays."""
    orders = params.orders
    costs = [params.costs[o] for o in orders]
    head = ProportionParams(
        {o: params.costs[o] for o in orders[:-1]} or {3: 1.0},
        params.max_cost,
        {o: params.set_sizes[o] for o in orders[:-1]} or {3: 1},
    ) if len(orders) > 1 else None
    prefixes = enumerate_admissible(head) if head else iter([()])
    for prefix in prefixes:
        spent = sum(kl * c for kl, c in zip(prefix, costs))
        if spent > params.max_cost + BOUND_SLACK * max(1.0, params.max_cost):
            continue
        last = np.arange(_bound(params.max_cost - spent, costs[-1]) + 1)
        block = np.empty((len(last), len(orders)), dtype=np.int64)
        block[:, :-1] = prefix
        block[:, -1] = last
        yield block


class _LogSum:
    """Streaming log-sum-exp with a running max shift."""

    def __init__(self):
        self.shift = -math.inf
        self.acc = 0.0

    def add(self, logs: np.ndarray):
        if logs.size == 0:
            return
        m = float(logs.max())
        if m == -math.inf:
            return
        if m > self.shift:
            self.acc = self.acc * math.exp(self.shift - m) if self.shift > -math.inf else 0.0
            self.shift = m
        self.acc += float(np.exp(logs - self.shift).sum())

    def value(self) -> float:
        return self.shift + math.log(self.acc) if self.acc > 0 else -math.inf


def proportions(params: ProportionParams) -> ProportionResult:
    orders = params.orders
    log_sizes = np.log([params.set_sizes[o] for o in orders])
    zeta = _LogSum()
    denom = _LogSum()
    numer = {o: _LogSum() for o in orders}
    with np.errstate(divide="ignore"):
        for block in _prefix_blocks(params):
            total = block.sum(axis=1)
            log_gamma = gammaln(1 + total) + (block * log_sizes - gammaln(1 + block)).sum(axis=1)
            zeta.add(log_gamma)
            denom.add(np.log(total) + log_gamma)
            for j, o in enumerate(orders):
                numer[o].add(np.log(block[:, j]) + log_gamma)
    log_denom = denom.value()
    if log_denom == -math.inf:
        raise DegenerateProportionError(
            f"max cost {params.max_cost:g} is below the cheapest gate; no t gates to count"
        )
    p = {o: math.exp(numer[o].value() - log_denom) for o in orders}
    return ProportionResult(p=p, log_total_configs=zeta.value())


def empirical_proportions(results) -> dict[int, float]:
    """Share of each hierarchy order among all non-Clifford gates in the sequences."""
    counts: dict[int, int] = {}
    for r in results:
        for g in r.sequence:
            if g.order >= 3:
                counts[g.order] = counts.get(g.order, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise DegenerateProportionError("sequences contain no hierarchy gates")
    return {o: c / total for o, c in sorted(counts.items())}
