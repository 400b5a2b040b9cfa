"""Finite-level content of the discerning flow.

An order on the universe of a reduct prefix belongs to the flow at this level
when every finite substructure, expanded by the restricted order, lies in the
order class. For ordered posets this says the order is a linear extension,
and the share of such orders among all ``n!`` orders of the prefix is the
measure of the corresponding union of cylinders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable

from . import structures as st
from .classes import ClassSpec, builtin_class
from .errors import CapExceeded, InvalidInput, WorkbenchError
from .limit import LimitPrefix, build_limit
from .measure import (SUPPORT_CAP, FinitePermutation, Literal, OrderEvent, OrderPrefix,
                      act, cylinder_union, dyadic, mu_exact, sample_prefix, _rng)
from .structures import FinStructure

DECAY_ENUMERATION_CAP = 8


@dataclass(frozen=True)
class FlowMembershipReport:
    cls: ClassSpec
    prefix_size: int
    order: OrderPrefix
    member: bool
    failing_substructure: FinStructure | None = None
    failing_subset: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        out = {"class": self.cls.name, "prefix_size": self.prefix_size,
               "order": self.order.to_json(), "member": self.member}
        if self.failing_substructure is not None:
            out["failing_substructure"] = self.failing_substructure.to_json()
            out["failing_subset"] = list(self.failing_subset)
        return out


def _prefix_structure(prefix) -> FinStructure:
    return prefix.structure if isinstance(prefix, LimitPrefix) else prefix


def flow_membership(cls: ClassSpec, F0_prefix: LimitPrefix | FinStructure,
                    xi: OrderPrefix) -> FlowMembershipReport:
    """Check every induced substructure of the prefix against the class.

    For a hereditary class, the whole expansion being a member settles every
    substructure at once; otherwise, or to locate a failure, subsets are
    scanned by size then lexicographically and the first failing one is
    reported.
    """
    if not cls.is_order_class or cls.reduct_class is None:
        raise InvalidInput(f"{cls.name} is not an order class with a reduct class")
    P = _prefix_structure(F0_prefix)
    if P.signature != cls.reduct_class.signature:
        raise InvalidInput(f"prefix is not over the reduct signature of {cls.name}")
    if xi.support != frozenset(range(P.size)):
        raise InvalidInput("order support differs from the prefix universe")

    def ok(subset):
        sub = st.induced_substructure(P, subset)
        restricted = [subset.index(x) for x in xi.sequence if x in subset]
        return cls.contains(st.expand(sub, restricted, cls.signature))

    full = tuple(range(P.size))
    if cls.hereditary and ok(full):
        return FlowMembershipReport(cls, P.size, xi, True)
    for size in range(P.size + 1):
        for subset in combinations(full, size):
            if not ok(subset):
                return FlowMembershipReport(cls, P.size, xi, False,
                                            st.induced_substructure(P, subset), subset)
    return FlowMembershipReport(cls, P.size, xi, True)


def is_linear_extension(poset: FinStructure, xi: OrderPrefix) -> bool:
    """Pairwise test: every ``x prec y`` has ``x`` below ``y`` in ``xi``."""
    rank = {x: i for i, x in enumerate(xi.sequence)}
    return all(rank[x] < rank[y] for x, y in poset.relations[0])


# ---------------------------------------------------------------------------
# linear extensions

def _require_poset(poset: FinStructure):
    builtin_class("Poset").require(poset, "poset")


def count_linear_extensions(poset: FinStructure) -> int:
    """Number of linear extensions, by dynamic programming over down-sets."""
    _require_poset(poset)
    n = poset.size
    pred = [0] * n
    for x, y in poset.relations[0]:
        pred[y] |= 1 << x
    layer = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for mask, ways in layer.items():
            for x in range(n):
                if not mask >> x & 1 and pred[x] & ~mask == 0:
                    key = mask | 1 << x
                    nxt[key] = nxt.get(key, 0) + ways
        layer = nxt
    return layer.get((1 << n) - 1, 0)


def count_linear_extensions_bruteforce(poset: FinStructure) -> int:
    rel = poset.relations[0]
    total = 0
    for seq in permutations(range(poset.size)):
        rank = {x: i for i, x in enumerate(seq)}
        total += all(rank[x] < rank[y] for x, y in rel)
    return total


def linear_extensions(poset: FinStructure) -> Iterable[OrderPrefix]:
    """All linear extensions, lexicographic in their least-first sequences."""
    _require_poset(poset)
    n = poset.size
    pred = [0] * n
    for x, y in poset.relations[0]:
        pred[y] |= 1 << x
    seq: list[int] = []

    def rec(mask):
        if len(seq) == n:
            yield OrderPrefix(tuple(seq))
            return
        for x in range(n):
            if not mask >> x & 1 and pred[x] & ~mask == 0:
                seq.append(x)
                yield from rec(mask | 1 << x)
                seq.pop()

    yield from rec(0)


def flow_event(cls: ClassSpec, prefix: LimitPrefix | FinStructure) -> OrderEvent:
    """The union of cylinders over every order of the prefix that lies in the flow."""
    P = _prefix_structure(prefix)
    if cls.name == "OrderedPoset":
        return cylinder_union(linear_extensions(P))
    if P.size > DECAY_ENUMERATION_CAP:
        raise CapExceeded(f"enumeration of orders capped at {DECAY_ENUMERATION_CAP} points")
    return cylinder_union(o for o in map(OrderPrefix, permutations(range(P.size)))
                          if flow_membership(cls, P, o).member)


def count_flow_orders(cls: ClassSpec, prefix: LimitPrefix | FinStructure) -> int:
    P = _prefix_structure(prefix)
    if cls.name == "OrderedPoset":
        return count_linear_extensions(P)
    if P.size > DECAY_ENUMERATION_CAP:
        raise CapExceeded(f"enumeration of orders capped at {DECAY_ENUMERATION_CAP} points")
    return sum(flow_membership(cls, P, OrderPrefix(seq)).member
               for seq in permutations(range(P.size)))


@dataclass(frozen=True)
class DecayRow:
    n: int
    extensions: int
    level: Fraction
    dyadic: Fraction

    def to_json(self) -> dict:
        return {"n": self.n, "extensions": self.extensions, "level": str(self.level),
                "dyadic": str(self.dyadic)}


@dataclass(frozen=True)
class DecayTable:
    cls_name: str
    rows: tuple[DecayRow, ...]
    k: int = 20

    def to_json(self) -> dict:
        return {"class": self.cls_name, "k": self.k, "rows": [r.to_json() for r in self.rows]}


def decay_table(cls: ClassSpec, n_max: int, k: int = 20) -> DecayTable:
    """Level measure ``e(P|n) / n!`` of the flow over the canonical reduct prefixes.

    Rows run over n = 0..n_max. Restricting an order of n+1 points to the
    first n and reinserting the last point shows the column cannot increase;
    a violation raises.
    """
    if not cls.is_order_class or cls.reduct_class is None:
        raise InvalidInput(f"{cls.name} is not an order class with a reduct class")
    rows = []
    for n in range(n_max + 1):
        prefix = build_limit(cls.reduct_class, n)
        e = count_flow_orders(cls, prefix)
        level = Fraction(e, math.factorial(n))
        if rows and level > rows[-1].level:
            raise WorkbenchError(f"level measure increased at n = {n}")
        rows.append(DecayRow(n, e, level, dyadic(level, k)))
    return DecayTable(cls.name, tuple(rows), k)


# ---------------------------------------------------------------------------
# group action laws and statistics

def randomizer_identity_check(alpha: FinitePermutation, pi: FinitePermutation,
                              xi: OrderPrefix) -> bool:
    """``(alpha pi^-1)(pi xi) == alpha xi``."""
    return act(alpha @ pi.inverse(), act(pi, xi)) == act(alpha, xi)


@dataclass(frozen=True)
class StatRow:
    name: str
    count: int
    frequency: float
    exact: Fraction
    sigma: float

    @property
    def within_3sigma(self) -> bool:
        return abs(self.frequency - float(self.exact)) <= 3 * self.sigma

    def to_json(self) -> dict:
        return {"name": self.name, "count": self.count, "frequency": self.frequency,
                "exact": str(self.exact), "sigma": self.sigma, "within_3sigma": self.within_3sigma}


@dataclass(frozen=True)
class DensityReport:
    n: int
    trials: int
    seed: int | None
    rows: tuple[StatRow, ...] = field(default=())

    def to_json(self) -> dict:
        return {"n": self.n, "trials": self.trials, "seed": self.seed,
                "rows": [r.to_json() for r in self.rows]}


def between_event(n: int) -> OrderEvent:
    """Some point of {2..n-1} lies strictly between 0 and 1."""
    return OrderEvent(tuple((Literal(OrderPrefix(s)),) for p in range(2, n)
                            for s in ((0, p, 1), (1, p, 0))))


def minimum_event(n: int) -> OrderEvent:
    """Point 0 lies below every other point of {1..n-1}."""
    return OrderEvent((tuple(Literal(OrderPrefix((0, j))) for j in range(1, n)),))


def density_statistics(n: int, trials: int, seed) -> DensityReport:
    """Empirical frequencies of two order events against their exact measures.

    The exact values come from ``mu_exact`` while ``n`` is within the support
    cap, and from the closed forms ``1 - 2/n`` and ``1/n`` beyond it.
    """
    if n < 2:
        raise InvalidInput("n must be >= 2")
    if trials == 0:
        return DensityReport(n, 0, seed)
    rng = _rng(seed)
    between = minimum = 0
    for _ in range(trials):
        xi = sample_prefix(n, rng)
        rank = {x: i for i, x in enumerate(xi.sequence)}
        between += abs(rank[0] - rank[1]) > 1
        minimum += rank[0] == 0
    if n <= SUPPORT_CAP:
        exact_between, exact_min = mu_exact(between_event(n)), mu_exact(minimum_event(n))
    else:
        exact_between, exact_min = 1 - Fraction(2, n), Fraction(1, n)
    rows = []
    for name, count, p in (("between", between, exact_between), ("zero_is_minimum", minimum, exact_min)):
        sigma = math.sqrt(float(p) * (1 - float(p)) / trials)
        rows.append(StatRow(name, count, count / trials, p, sigma))
    return DensityReport(n, trials, seed if isinstance(seed, int) else None, tuple(rows))
