"""Total orders of the naturals at finite support.

Events of the cylinder algebra are kept in disjunctive normal form over
literals ``Z_l`` / complement of ``Z_l``. The invariant measure of an event
is the fraction of the ``|S|!`` relative orderings of its joint support ``S``
that satisfy it; evaluation enumerates those orderings as a rank table.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInput, SupportTooLarge

SUPPORT_CAP = 10


@dataclass(frozen=True, order=True)
class OrderPrefix:
    """A finite total order, listed from least to greatest."""

    sequence: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sequence", tuple(int(x) for x in self.sequence))
        if len(set(self.sequence)) != len(self.sequence):
            raise InvalidInput(f"repeated point in {self.sequence}")
        if any(x < 0 for x in self.sequence):
            raise InvalidInput("points must be natural numbers")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.sequence)

    def less(self, x: int, y: int) -> bool:
        s = self.sequence
        return s.index(x) < s.index(y)

    def restrict(self, points: Iterable[int]) -> OrderPrefix:
        keep = set(points)
        return OrderPrefix(tuple(x for x in self.sequence if x in keep))

    def pairs(self) -> list[tuple[int, int]]:
        s = self.sequence
        return [(s[i], s[i + 1]) for i in range(len(s) - 1)]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]], support: Iterable[int] = ()) -> OrderPrefix:
        """Order generated by ``pairs`` (x below y); must be total on its support."""
        pairs = [(int(x), int(y)) for x, y in pairs]
        points = set(support) | {p for pr in pairs for p in pr}
        below: dict[int, set[int]] = {p: set() for p in points}
        for x, y in pairs:
            below[y].add(x)
        changed = True
        while changed:
            changed = False
            for p in points:
                extra = set().union(*(below[q] for q in below[p])) - below[p]
                if extra:
                    below[p] |= extra
                    changed = True
        if any(p in below[p] for p in points):
            raise InvalidInput("order pairs contain a cycle")
        seq = sorted(points, key=lambda p: len(below[p]))
        if [len(below[p]) for p in seq] != list(range(len(seq))):
            raise InvalidInput("order pairs do not determine a total order")
        return cls(tuple(seq))

    def to_json(self) -> dict:
        return {"order": [list(p) for p in self.pairs()], "support": sorted(self.sequence)}

    @classmethod
    def from_json(cls, data: Mapping) -> OrderPrefix:
        if "sequence" in data:
            return cls(tuple(data["sequence"]))
        try:
            return cls.from_pairs(data["order"], data.get("support", ()))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed order object: {exc!r}") from None


@dataclass(frozen=True, order=True)
class Literal:
    prefix: OrderPrefix
    polarity: int = 1

    def __post_init__(self):
        if self.polarity not in (0, 1):
            raise InvalidInput("polarity must be 0 or 1")

    def negate(self) -> Literal:
        return Literal(self.prefix, 1 - self.polarity)


@dataclass(frozen=True)
class OrderEvent:
    """A finite union of intersections of cylinders and their complements.

    ``disjuncts == ()`` is the empty event and ``disjuncts == ((),)`` the full
    space. Construction normalises: literals deduplicated and sorted within a
    conjunction, conjunctions containing both ``Z_l`` and its complement
    dropped, conjunctions deduplicated and sorted.
    """

    disjuncts: tuple[tuple[Literal, ...], ...]

    def __post_init__(self):
        out = set()
        for conj in self.disjuncts:
            lits = {}
            contradiction = False
            for lit in conj:
                prev = lits.setdefault(lit.prefix, lit.polarity)
                if prev != lit.polarity:
                    contradiction = True
                    break
            if not contradiction:
                out.add(tuple(sorted(Literal(p, d) for p, d in lits.items())))
        object.__setattr__(self, "disjuncts", tuple(sorted(out)))

    @classmethod
    def full(cls) -> OrderEvent:
        return cls(((),))

    @classmethod
    def empty(cls) -> OrderEvent:
        return cls(())

    @classmethod
    def cylinder(cls, prefix: OrderPrefix | Sequence[int], polarity: int = 1) -> OrderEvent:
        if not isinstance(prefix, OrderPrefix):
            prefix = OrderPrefix(tuple(prefix))
        return cls(((Literal(prefix, polarity),),))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(x for conj in self.disjuncts for lit in conj for x in lit.prefix.sequence)

    def __or__(self, other: OrderEvent) -> OrderEvent:
        return union(self, other)

    def __and__(self, other: OrderEvent) -> OrderEvent:
        return intersection(self, other)

    def __invert__(self) -> OrderEvent:
        return complement(self)

    def to_json(self) -> dict:
        return {"disjuncts": [[dict(OrderPrefix.to_json(l.prefix), polarity=l.polarity) for l in conj]
                              for conj in self.disjuncts]}

    @classmethod
    def from_json(cls, data: Mapping) -> OrderEvent:
        try:
            return cls(tuple(tuple(Literal(OrderPrefix.from_json(lit), int(lit.get("polarity", 1)))
                                   for lit in conj) for conj in data["disjuncts"]))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidInput(f"malformed event object: {exc!r}") from None


def union(E: OrderEvent, F: OrderEvent) -> OrderEvent:
    return OrderEvent(E.disjuncts + F.disjuncts)


def intersection(E: OrderEvent, F: OrderEvent) -> OrderEvent:
    return OrderEvent(tuple(a + b for a in E.disjuncts for b in F.disjuncts))


def complement(E: OrderEvent) -> OrderEvent:
    # De Morgan, then distribute back into DNF
    out = OrderEvent.full()
    for conj in E.disjuncts:
        out = intersection(out, OrderEvent(tuple((lit.negate(),) for lit in conj)))
    return out


# ---------------------------------------------------------------------------
# evaluation

@lru_cache(maxsize=None)
def _rankings(m: int) -> np.ndarray:
    """All m! rank assignments of m points, one per row."""
    table = np.zeros((1, 0), dtype=np.int8)
    for k in range(m):
        table = np.concatenate([np.insert(table, p, k, axis=1) for p in range(k + 1)])
    table.setflags(write=False)
    return table


def _truth_table(E: OrderEvent, support: Sequence[int]) -> np.ndarray:
    col = {x: i for i, x in enumerate(support)}
    R = _rankings(len(support))
    result = np.zeros(len(R), dtype=bool)
    for conj in E.disjuncts:
        acc = np.ones(len(R), dtype=bool)
        for lit in conj:
            cols = [col[x] for x in lit.prefix.sequence]
            if len(cols) > 1:
                sat = np.all(R[:, cols[:-1]] < R[:, cols[1:]], axis=1)
            else:
                sat = np.ones(len(R), dtype=bool)
            acc &= sat if lit.polarity else ~sat
        result |= acc
    return result


def _joint_support(*events: OrderEvent, cap: int) -> list[int]:
    support = sorted(frozenset().union(*(E.support for E in events)))
    if len(support) > cap:
        raise SupportTooLarge(f"joint support has {len(support)} points; cap is {cap}", cap=cap)
    return support


def mu_exact(E: OrderEvent, cap: int = SUPPORT_CAP) -> Fraction:
    """Exact invariant measure of ``E``: the satisfying share of orderings of its support."""
    support = _joint_support(E, cap=cap)
    count = int(_truth_table(E, support).sum())
    return Fraction(count, math.factorial(len(support)))


def mu_approx(E: OrderEvent, k: int, cap: int = SUPPORT_CAP) -> Fraction:
    """Binary rational within ``2**-k`` of ``mu_exact(E)``.

    The exact value truncated toward zero at ``k + 1`` fractional bits; the
    truncation error is below ``2**-(k+1)``.
    """
    return dyadic(mu_exact(E, cap=cap), k)


def dyadic(q: Fraction, k: int) -> Fraction:
    """``q`` truncated toward zero at ``k + 1`` binary digits."""
    if k < 0:
        raise InvalidInput("k must be >= 0")
    scale = 1 << (k + 1)
    beta = Fraction(int(q * scale), scale)
    assert abs(q - beta) < Fraction(1, 1 << k)
    return beta


def extensionally_equal(E: OrderEvent, F: OrderEvent, cap: int = SUPPORT_CAP) -> bool:
    support = _joint_support(E, F, cap=cap)
    return bool(np.array_equal(_truth_table(E, support), _truth_table(F, support)))


def satisfies(xi: OrderPrefix, E: OrderEvent) -> bool:
    """Whether the finite order ``xi`` (covering ``E``'s support) lies in ``E``."""
    if not E.support <= xi.support:
        raise InvalidInput("order does not cover the event's support")
    rank = {x: i for i, x in enumerate(xi.sequence)}

    def holds(lit: Literal) -> bool:
        s = lit.prefix.sequence
        ok = all(rank[s[i]] < rank[s[i + 1]] for i in range(len(s) - 1))
        return ok if lit.polarity else not ok

    return any(all(holds(l) for l in conj) for conj in E.disjuncts)


# ---------------------------------------------------------------------------
# the permutation action

@dataclass(frozen=True)
class FinitePermutation:
    """A permutation of the naturals moving finitely many points."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        mapping = {int(x): int(y) for x, y in self.pairs if int(x) != int(y)}
        if sorted(mapping) != sorted(mapping.values()):
            raise InvalidInput("map is not a bijection of its support")
        object.__setattr__(self, "pairs", tuple(sorted(mapping.items())))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> FinitePermutation:
        return cls(tuple(mapping.items()))

    @classmethod
    def identity(cls) -> FinitePermutation:
        return cls(())

    @classmethod
    def transposition(cls, a: int, b: int) -> FinitePermutation:
        return cls(((a, b), (b, a)))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(x for x, _ in self.pairs)

    def __call__(self, x: int) -> int:
        return dict(self.pairs).get(x, x)

    def __matmul__(self, other: FinitePermutation) -> FinitePermutation:
        """Composition ``self . other`` (apply ``other`` first)."""
        mine = dict(self.pairs)
        points = self.support | other.support
        theirs = dict(other.pairs)
        return FinitePermutation(tuple((x, mine.get(theirs.get(x, x), theirs.get(x, x))) for x in points))

    def inverse(self) -> FinitePermutation:
        return FinitePermutation(tuple((y, x) for x, y in self.pairs))

    def to_json(self) -> dict:
        return {"map": [list(p) for p in self.pairs]}


def act(sigma: FinitePermutation, xi: OrderPrefix) -> OrderPrefix:
    """``x <_{sigma xi} y  iff  sigma^-1 x <_xi sigma^-1 y``."""
    return OrderPrefix(tuple(sigma(x) for x in xi.sequence))


def act_event(sigma: FinitePermutation, E: OrderEvent) -> OrderEvent:
    return OrderEvent(tuple(tuple(Literal(act(sigma, l.prefix), l.polarity) for l in conj)
                            for conj in E.disjuncts))


# ---------------------------------------------------------------------------
# sampling

def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def sample_prefix(n: int, seed) -> OrderPrefix:
    """Uniformly random total order on {0..n-1}; ``seed`` is an int or a ``random.Random``."""
    if n < 0:
        raise InvalidInput("n must be >= 0")
    seq = list(range(n))
    _rng(seed).shuffle(seq)
    return OrderPrefix(tuple(seq))


def random_permutation(points: Sequence[int], seed) -> FinitePermutation:
    rng = _rng(seed)
    image = list(points)
    rng.shuffle(image)
    return FinitePermutation(tuple(zip(points, image)))


def random_event(seed, support_size: int = 5, max_disjuncts: int = 3,
                 max_literals: int = 3, max_length: int = 4) -> OrderEvent:
    """Random DNF event with literals drawn over {0..support_size-1}."""
    rng = _rng(seed)
    disjuncts = []
    for _ in range(rng.randint(0, max_disjuncts)):
        conj = []
        for _ in range(rng.randint(0, max_literals)):
            length = rng.randint(1, min(max_length, support_size))
            pts = rng.sample(range(support_size), length)
            conj.append(Literal(OrderPrefix(tuple(pts)), rng.randint(0, 1)))
        disjuncts.append(tuple(conj))
    return OrderEvent(tuple(disjuncts))


def all_orders(points: Sequence[int]) -> Iterable[OrderPrefix]:
    """Every total order of ``points``, in lexicographic order of sequences."""
    for seq in permutations(sorted(points)):
        yield OrderPrefix(seq)


def cylinder_union(orders: Iterable[OrderPrefix]) -> OrderEvent:
    return OrderEvent(tuple((Literal(o, 1),) for o in orders))
