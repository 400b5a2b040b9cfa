"""Pluggable Fraïssé classes: membership, age enumeration, amalgamation.

A class is described by a membership predicate plus a generator of one-point
extensions. Hereditary classes enumerate their age by extending members one
point at a time; non-hereditary (experimental) classes filter the age of a
hereditary hull.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product
from typing import Callable, Sequence

from . import structures as st
from .errors import (CapExceeded, InvalidInput, NoAmalgamationStrategy,
                     NotReasonableWitness, SignatureMismatch, WorkbenchError)
from .structures import Embedding, FinStructure, Signature

Extender = Callable[["ClassSpec", FinStructure], list]


@dataclass(frozen=True, eq=False)
class ClassSpec:
    name: str
    signature: Signature
    is_order_class: bool
    membership: Callable[[FinStructure], bool] = field(repr=False)
    amalgamation: str | None
    reduct_class: ClassSpec | None = None
    extender: Extender | None = field(default=None, repr=False)
    hull: ClassSpec | None = None
    experimental: bool = False
    enumeration_cap: int | None = None

    @property
    def hereditary(self) -> bool:
        return self.hull is None

    def contains(self, A: FinStructure) -> bool:
        return A.signature == self.signature and self.membership(A)

    def require(self, A: FinStructure, what: str = "structure"):
        if A.signature != self.signature:
            raise SignatureMismatch(f"{what} is not over the signature of {self.name}")
        if not self.membership(A):
            raise InvalidInput(f"{what} is not a member of {self.name}")

    def one_point_extensions(self, S: FinStructure) -> list[FinStructure]:
        """Members on {0..k} whose restriction to {0..k-1} is ``S``.

        Each extension type over ``S`` appears once, in a fixed order.
        """
        if self.hull is not None:
            return [E for E in self.hull.one_point_extensions(S) if self.membership(E)]
        return self.extender(self, S)


# ---------------------------------------------------------------------------
# membership predicates

def is_strict_partial_order(rel: frozenset, n: int) -> bool:
    if any(x == y for x, y in rel):
        return False
    succ: dict[int, list[int]] = {}
    for x, y in rel:
        succ.setdefault(x, []).append(y)
    return all((x, z) in rel for x, y in rel for z in succ.get(y, ()))


def _is_graph(A: FinStructure) -> bool:
    E = A.relations[0]
    return all(x != y and (y, x) in E for x, y in E)


def _is_poset(A: FinStructure) -> bool:
    return is_strict_partial_order(A.relations[0], A.size)


def _is_lattice_poset(A: FinStructure) -> bool:
    if A.size == 0 or not _is_poset(A):
        return False
    prec = A.relations[0]
    n = A.size

    def le(x, y):
        return x == y or (x, y) in prec

    for x in range(n):
        for y in range(x + 1, n):
            ups = [z for z in range(n) if le(x, z) and le(y, z)]
            if not any(all(le(u, w) for w in ups) for u in ups):
                return False
            downs = [z for z in range(n) if le(z, x) and le(z, y)]
            if not any(all(le(w, u) for w in downs) for u in downs):
                return False
    return True


def _ordered(reduct_test: Callable[[FinStructure], bool], extends: bool):
    def test(A: FinStructure) -> bool:
        if not st.is_order_structure(A):
            return False
        base = st.reduct(A)
        if not reduct_test(base):
            return False
        if extends:
            less = A.rel(A.signature.order_symbol)
            return base.relations[0] <= less
        return True
    return test


# ---------------------------------------------------------------------------
# one-point extension generators

def _add_point(S: FinStructure, symbol: int, new_tuples) -> FinStructure:
    rels = list(S.relations)
    rels[symbol] = rels[symbol] | frozenset(new_tuples)
    return FinStructure(S.signature, S.size + 1, tuple(rels))


def _extend_set(cls: ClassSpec, S: FinStructure) -> list[FinStructure]:
    return [FinStructure(S.signature, S.size + 1, S.relations)]


def _extend_graph(cls: ClassSpec, S: FinStructure) -> list[FinStructure]:
    k = S.size
    out = []
    for mask in range(1 << k):
        nbrs = [i for i in range(k) if mask >> i & 1]
        out.append(_add_point(S, 0, [t for i in nbrs for t in ((i, k), (k, i))]))
    return out


def _extend_poset(cls: ClassSpec, S: FinStructure) -> list[FinStructure]:
    # 0: incomparable, 1: below the new point, 2: above it
    k = S.size
    prec = S.relations[0]
    out = []
    for choice in product((0, 1, 2), repeat=k):
        down = {i for i in range(k) if choice[i] == 1}
        up = {i for i in range(k) if choice[i] == 2}
        if any((j, i) in prec and j not in down for i in down for j in range(k)):
            continue
        if any((i, j) in prec and j not in up for i in up for j in range(k)):
            continue
        if any((d, u) not in prec for d in down for u in up):
            continue
        E = _add_point(S, 0, [(d, k) for d in sorted(down)] + [(k, u) for u in sorted(up)])
        if cls.membership(E):
            out.append(E)
    return out


def _extend_ordered(cls: ClassSpec, S: FinStructure) -> list[FinStructure]:
    k = S.size
    seq = st.order_sequence(S)
    oi = cls.signature.index(cls.signature.order_symbol)
    out = []
    for base in cls.reduct_class.one_point_extensions(st.reduct(S)):
        for pos in range(k + 1):
            new_seq = seq[:pos] + [k] + seq[pos:]
            E = st.expand(base, new_seq, cls.signature)
            assert E.relations[oi] >= S.relations[oi]
            if cls.membership(E):
                out.append(E)
    return out


# ---------------------------------------------------------------------------
# builtin classes

BUILTIN_NAMES = ("LO", "Graph", "Poset", "OrderedPoset", "OrderedGraph", "Lattice-experimental")
LATTICE_CAP = 5


@lru_cache(maxsize=None)
def builtin_class(name: str) -> ClassSpec:
    """Look up a builtin class by name.

    Besides the public names, ``Set`` (bare sets, the reduct of ``LO``) and
    ``Lattice`` (the reduct of ``Lattice-experimental``) are available.
    """
    if name == "Set":
        return ClassSpec("Set", st.EMPTY, False, lambda A: True, "disjoint", extender=_extend_set)
    if name == "Graph":
        return ClassSpec("Graph", st.GRAPH, False, _is_graph, "free", extender=_extend_graph)
    if name == "Poset":
        return ClassSpec("Poset", st.POSET, False, _is_poset, "free-poset", extender=_extend_poset)
    if name == "LO":
        return ClassSpec("LO", st.ORDER, True, st.is_order_structure, "ordered",
                         reduct_class=builtin_class("Set"), extender=_extend_ordered)
    if name == "OrderedGraph":
        return ClassSpec("OrderedGraph", st.ORDERED_GRAPH, True, _ordered(_is_graph, False),
                         "ordered", reduct_class=builtin_class("Graph"), extender=_extend_ordered)
    if name == "OrderedPoset":
        return ClassSpec("OrderedPoset", st.ORDERED_POSET, True, _ordered(_is_poset, True),
                         "ordered", reduct_class=builtin_class("Poset"), extender=_extend_ordered)
    if name == "Lattice":
        return ClassSpec("Lattice", st.POSET, False, _is_lattice_poset, None,
                         hull=builtin_class("Poset"), experimental=True, enumeration_cap=LATTICE_CAP)
    if name == "Lattice-experimental":
        return ClassSpec("Lattice-experimental", st.ORDERED_POSET, True,
                         _ordered(_is_lattice_poset, True), None,
                         reduct_class=builtin_class("Lattice"), hull=builtin_class("OrderedPoset"),
                         experimental=True, enumeration_cap=LATTICE_CAP)
    raise InvalidInput(f"unknown class {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")


# ---------------------------------------------------------------------------
# age enumeration

@dataclass(frozen=True)
class AgeSlice:
    cls: ClassSpec
    max_size: int
    members: tuple[FinStructure, ...]
    index: dict = field(repr=False, compare=False)

    def grade(self, n: int) -> list[FinStructure]:
        return [A for A in self.members if A.size == n]

    def ordinal(self, A: FinStructure) -> int:
        return self.index[st.canonical_form(A)[0].key]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def to_json(self) -> list[dict]:
        return [A.to_json() for A in self.members]


_GRADES: dict[str, list[list[FinStructure]]] = {}


def _grades(cls: ClassSpec, max_size: int) -> list[list[FinStructure]]:
    if cls.hull is not None:
        hull = _grades(cls.hull, max_size)
        return [[A for A in grade if cls.membership(A)] for grade in hull]
    grades = _GRADES.setdefault(cls.name, [])
    if not grades:
        empty = FinStructure(cls.signature, 0, tuple(frozenset() for _ in cls.signature.symbols))
        grades.append([empty] if cls.membership(empty) else [])
    while len(grades) <= max_size:
        seen = {}
        for M in grades[-1]:
            for E in cls.one_point_extensions(M):
                canon = st.canonical_form(E)[0]
                seen.setdefault(canon.key, canon)
        grades.append([seen[k] for k in sorted(seen)])
    return grades[:max_size + 1]


def enumerate_age(cls: ClassSpec, max_size: int) -> AgeSlice:
    """Isomorphism types of members of size <= ``max_size``.

    Graded by size, then ordered by canonical key. Rebuilding is deterministic
    and the slice for ``m`` is a prefix of the slice for ``m + 1``.
    """
    if max_size < 0:
        raise InvalidInput("max_size must be >= 0")
    if cls.enumeration_cap is not None and max_size > cls.enumeration_cap:
        raise CapExceeded(f"{cls.name} enumeration is capped at size {cls.enumeration_cap}",
                          cap=cls.enumeration_cap)
    members = tuple(A for grade in _grades(cls, max_size) for A in grade)
    return AgeSlice(cls, max_size, members, {A.key: i for i, A in enumerate(members)})


# ---------------------------------------------------------------------------
# amalgamation

def lex_least_linear_extension(n: int, pairs) -> list[int] | None:
    """Lexicographically least topological order of ``pairs`` on {0..n-1}, or None if cyclic."""
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for x, y in set(pairs):
        succ[x].append(y)
        indeg[y] += 1
    heap = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        v = heapq.heappop(heap)
        out.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return out if len(out) == n else None


def _free_union(cls, B1, B2, g2):
    rels = []
    for si, _ in enumerate(cls.signature.symbols):
        r = set(B1.relations[si]) | {tuple(g2[x] for x in t) for t in B2.relations[si]}
        rels.append(r)
    return rels


def amalgamate(cls: ClassSpec, A: FinStructure, B1: FinStructure, B2: FinStructure,
               f1: Embedding, f2: Embedding) -> tuple[FinStructure, Embedding, Embedding]:
    """Amalgam ``C`` of ``B1`` and ``B2`` over ``A`` with ``g1 . f1 == g2 . f2``.

    ``B1`` keeps its labels in ``C`` (``g1`` is the inclusion of the initial
    segment) and the points of ``B2`` outside ``f2(A)`` follow in increasing
    order, so ``|C| = |B1| + |B2| - |A|``.
    """
    strategy = cls.amalgamation
    if strategy is None:
        raise NoAmalgamationStrategy(f"class {cls.name} has no amalgamation strategy")
    if f1.source != A or f2.source != A or f1.target != B1 or f2.target != B2:
        raise InvalidInput("f1: A -> B1 and f2: A -> B2 are required")
    for S, what in ((A, "A"), (B1, "B1"), (B2, "B2")):
        cls.require(S, what)

    n1 = B1.size
    back = {f2.map[a]: f1.map[a] for a in range(A.size)}
    fresh = [b for b in range(B2.size) if b not in back]
    g2map = [back.get(b) for b in range(B2.size)]
    for j, b in enumerate(fresh):
        g2map[b] = n1 + j
    nC = n1 + len(fresh)
    rels = _free_union(cls, B1, B2, g2map)

    if strategy == "ordered":
        base = cls.reduct_class
        names = cls.signature.names
        oi = names.index(cls.signature.order_symbol)
        constraints = set(rels[oi])
        if base.amalgamation == "free-poset":
            # the order must also extend the amalgamated partial order
            pi = next(i for i in range(len(names)) if i != oi)
            rels[pi] = st.transitive_closure(rels[pi])
            constraints |= rels[pi]
        seq = lex_least_linear_extension(nC, constraints)
        if seq is None:
            raise WorkbenchError("amalgamation failed: no compatible linear order")
        rels[oi] = set(st.order_pairs(seq))
    elif strategy == "free-poset":
        rels[0] = st.transitive_closure(rels[0])
    elif strategy not in ("free", "disjoint"):
        raise NoAmalgamationStrategy(f"unknown strategy {strategy!r}")

    C = FinStructure(cls.signature, nC, tuple(frozenset(r) for r in rels))
    if not cls.contains(C):
        raise WorkbenchError(f"amalgam is not a member of {cls.name}")
    g1 = Embedding(B1, C, tuple(range(n1)))
    g2 = Embedding(B2, C, tuple(g2map))
    if any(g1.map[f1.map[a]] != g2.map[f2.map[a]] for a in range(A.size)):
        raise WorkbenchError("amalgamation square does not commute")
    return C, g1, g2


# ---------------------------------------------------------------------------
# reasonableness

def check_reasonable(cls: ClassSpec, A0: FinStructure, B0: FinStructure,
                     orderA: Sequence[int], pi: Embedding) -> list[int]:
    """Find an order on ``B0`` making ``pi`` an embedding of the expansions.

    Returns the lexicographically least such order (as a least-first
    sequence) by exhaustive search, or raises ``NotReasonableWitness``.
    """
    if not cls.is_order_class or cls.reduct_class is None:
        raise InvalidInput(f"{cls.name} is not an order class with a reduct class")
    A = st.expand(A0, orderA, cls.signature)
    cls.require(A, "(A0, <)")
    cls.reduct_class.require(A0, "A0")
    cls.reduct_class.require(B0, "B0")
    if pi.source != A0 or pi.target != B0:
        raise InvalidInput("pi must be an embedding A0 -> B0")
    rankA = {x: i for i, x in enumerate(orderA)}
    image_order = sorted(range(A0.size), key=rankA.__getitem__)
    wanted = [pi.map[x] for x in image_order]
    for seq in permutations(range(B0.size)):
        pos = {x: i for i, x in enumerate(seq)}
        if any(pos[wanted[i]] > pos[wanted[i + 1]] for i in range(len(wanted) - 1)):
            continue
        if cls.contains(st.expand(B0, seq, cls.signature)):
            return list(seq)
    raise NotReasonableWitness(f"no admissible order on B0 extends the given order on A0")


def admissible_orders(cls: ClassSpec, A0: FinStructure) -> list[list[int]]:
    """All orders ``<`` on ``A0``'s universe with ``(A0, <)`` a member of ``cls``."""
    return [list(seq) for seq in permutations(range(A0.size))
            if cls.contains(st.expand(A0, seq, cls.signature))]
