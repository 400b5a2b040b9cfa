"""Finite relational structures on initial segments {0..n-1}.

Signatures, structures and embeddings are immutable values. Relations are
stored as frozensets of integer tuples, one per symbol, aligned with the
signature's symbol order; anything that iterates them sorts first so every
traversal is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product
from typing import Iterable, Mapping, Sequence

from .errors import InvalidInput, SignatureMismatch

Tuple = tuple[int, ...]


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]
    order_symbol: str | None = None

    def __post_init__(self):
        symbols = tuple((str(name), int(arity)) for name, arity in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        names = [name for name, _ in symbols]
        if len(set(names)) != len(names):
            raise InvalidInput(f"duplicate symbol names in {names}")
        if any(arity < 1 for _, arity in symbols):
            raise InvalidInput("arities must be >= 1")
        if self.order_symbol is not None and (self.order_symbol, 2) not in symbols:
            raise InvalidInput(f"order symbol {self.order_symbol!r} is not a binary symbol")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidInput(f"unknown symbol {name!r}") from None

    def arity(self, name: str) -> int:
        return self.symbols[self.index(name)][1]

    def without_order(self) -> Signature:
        if self.order_symbol is None:
            raise InvalidInput("signature has no order symbol")
        return Signature(tuple(s for s in self.symbols if s[0] != self.order_symbol))

    def to_json(self) -> dict:
        out = {"signature": [{"name": n, "arity": a} for n, a in self.symbols]}
        if self.order_symbol is not None:
            out["order_symbol"] = self.order_symbol
        return out


EMPTY = Signature(())
ORDER = Signature((("<", 2),), "<")
GRAPH = Signature((("E", 2),))
POSET = Signature((("prec", 2),))
ORDERED_GRAPH = Signature((("E", 2), ("<", 2)), "<")
ORDERED_POSET = Signature((("prec", 2), ("<", 2)), "<")


@dataclass(frozen=True)
class FinStructure:
    """A structure with universe {0..size-1}.

    ``relations[i]`` interprets ``signature.symbols[i]``. Use :meth:`build`
    to construct from a name-keyed mapping.
    """

    signature: Signature
    size: int
    relations: tuple[frozenset[Tuple], ...]

    def __post_init__(self):
        if self.size < 0:
            raise InvalidInput("size must be >= 0")
        if len(self.relations) != len(self.signature.symbols):
            raise InvalidInput("relations do not match the signature")
        for (name, arity), rel in zip(self.signature.symbols, self.relations):
            for t in rel:
                if len(t) != arity:
                    raise InvalidInput(f"tuple {t} has wrong arity for {name!r}")
                if any(not 0 <= x < self.size for x in t):
                    raise InvalidInput(f"tuple {t} of {name!r} leaves the universe")

    @classmethod
    def build(cls, signature: Signature, size: int,
              relations: Mapping[str, Iterable[Sequence[int]]] | None = None) -> FinStructure:
        relations = dict(relations or {})
        unknown = set(relations) - set(signature.names)
        if unknown:
            raise InvalidInput(f"unknown symbols {sorted(unknown)}")
        rels = tuple(frozenset(tuple(int(x) for x in t) for t in relations.get(name, ()))
                     for name in signature.names)
        return cls(signature, size, rels)

    def rel(self, name: str) -> frozenset[Tuple]:
        return self.relations[self.signature.index(name)]

    @property
    def relation_map(self) -> dict[str, frozenset[Tuple]]:
        return dict(zip(self.signature.names, self.relations))

    @cached_property
    def key(self) -> tuple:
        """Total-order key used for canonical comparison and sorting."""
        return (self.size, tuple(tuple(sorted(r)) for r in self.relations))

    @cached_property
    def incidence(self) -> tuple[tuple[tuple[int, Tuple], ...], ...]:
        inc: list[list[tuple[int, Tuple]]] = [[] for _ in range(self.size)]
        for si, rel in enumerate(self.relations):
            for t in sorted(rel):
                for x in set(t):
                    inc[x].append((si, t))
        return tuple(tuple(i) for i in inc)

    def relabel(self, mapping: Sequence[int]) -> FinStructure:
        """Image of the structure under the bijection ``i -> mapping[i]``."""
        return FinStructure(self.signature, self.size, tuple(
            frozenset(tuple(mapping[x] for x in t) for t in rel) for rel in self.relations))

    def to_json(self) -> dict:
        out = self.signature.to_json()
        out["size"] = self.size
        out["relations"] = {name: [list(t) for t in sorted(rel)]
                            for name, rel in zip(self.signature.names, self.relations)}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> FinStructure:
        try:
            sig = Signature(tuple((s["name"], s["arity"]) for s in data["signature"]),
                            data.get("order_symbol"))
            return cls.build(sig, int(data["size"]), data.get("relations", {}))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed structure object: {exc!r}") from None

    def __repr__(self):
        rels = ", ".join(f"{n}={sorted(r)}" for n, r in zip(self.signature.names, self.relations))
        return f"FinStructure(size={self.size}, {rels})"


@dataclass(frozen=True)
class Embedding:
    source: FinStructure
    target: FinStructure
    map: Tuple

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if self.source.signature != self.target.signature:
            raise SignatureMismatch("embedding between different signatures")
        if len(self.map) != self.source.size:
            raise InvalidInput("map length differs from source size")
        if len(set(self.map)) != len(self.map):
            raise InvalidInput(f"map {self.map} is not injective")
        if any(not 0 <= y < self.target.size for y in self.map):
            raise InvalidInput(f"map {self.map} leaves the target")
        image = set(self.map)
        for rs, rt in zip(self.source.relations, self.target.relations):
            pushed = {tuple(self.map[x] for x in t) for t in rs}
            if not pushed <= rt:
                raise InvalidInput(f"map {self.map} does not preserve relations")
            if sum(1 for t in rt if image.issuperset(t)) != len(rs):
                raise InvalidInput(f"map {self.map} does not reflect relations")

    @classmethod
    def _unchecked(cls, source: FinStructure, target: FinStructure, mapping: Tuple) -> Embedding:
        emb = object.__new__(cls)
        object.__setattr__(emb, "source", source)
        object.__setattr__(emb, "target", target)
        object.__setattr__(emb, "map", tuple(mapping))
        return emb

    def __call__(self, x: int) -> int:
        return self.map[x]

    def __repr__(self):
        return f"Embedding({self.map}: {self.source.size}->{self.target.size})"


def identity_embedding(A: FinStructure) -> Embedding:
    return Embedding._unchecked(A, A, tuple(range(A.size)))


def _check_same_signature(a: FinStructure, b: FinStructure):
    if a.signature != b.signature:
        raise SignatureMismatch(f"{a.signature.names} vs {b.signature.names}")


def _new_point_tuples(arity: int, i: int) -> list[Tuple]:
    """All tuples over {0..i} that mention i."""
    return [t for t in product(range(i + 1), repeat=arity) if i in t]


def enumerate_embeddings(small: FinStructure, big: FinStructure) -> list[Embedding]:
    """All embeddings of ``small`` into ``big``, lexicographic on the map."""
    _check_same_signature(small, big)
    k = small.size
    arities = [a for _, a in small.signature.symbols]
    # checks[i]: (symbol index, source tuple, present in source) for tuples whose max is i
    checks = [[(si, t, t in small.relations[si])
               for si, a in enumerate(arities) for t in _new_point_tuples(a, i)]
              for i in range(k)]
    out: list[Embedding] = []
    current: list[int] = []
    used = set()

    def extend(i: int):
        if i == k:
            out.append(Embedding._unchecked(small, big, tuple(current)))
            return
        for y in range(big.size):
            if y in used:
                continue
            current.append(y)
            if all((tuple(current[x] for x in t) in big.relations[si]) == present
                   for si, t, present in checks[i]):
                used.add(y)
                extend(i + 1)
                used.discard(y)
            current.pop()

    extend(0)
    return out


def push_embedding(alpha: Embedding, x: Embedding) -> Embedding:
    """The composite ``alpha . x``: the image of ``x`` under ``alpha_*``."""
    if x.target != alpha.source:
        raise InvalidInput("codomain of x is not the domain of alpha")
    return Embedding(x.source, alpha.target, tuple(alpha.map[i] for i in x.map))


def induced_substructure(big: FinStructure, subset: Sequence[int]) -> FinStructure:
    """Restriction of ``big`` to ``subset``; point ``subset[j]`` becomes ``j``."""
    subset = [int(p) for p in subset]
    if len(set(subset)) != len(subset):
        raise InvalidInput(f"duplicate points in {subset}")
    if any(not 0 <= p < big.size for p in subset):
        raise InvalidInput(f"points {subset} out of range for size {big.size}")
    pos = {p: j for j, p in enumerate(subset)}
    rels = []
    for (_, arity), rel in zip(big.signature.symbols, big.relations):
        k = len(subset)
        if k ** arity <= len(rel):
            sub = {t for t in product(range(k), repeat=arity)
                   if tuple(subset[j] for j in t) in rel}
        else:
            sub = {tuple(pos[x] for x in t) for t in rel if all(x in pos for x in t)}
        rels.append(frozenset(sub))
    return FinStructure(big.signature, len(subset), tuple(rels))


def inclusion(big: FinStructure, subset: Sequence[int]) -> Embedding:
    """The embedding of ``induced_substructure(big, subset)`` back into ``big``."""
    return Embedding._unchecked(induced_substructure(big, subset), big, tuple(subset))


def reduct(A: FinStructure) -> FinStructure:
    """Forget the designated order symbol."""
    sig = A.signature
    if sig.order_symbol is None:
        raise InvalidInput("structure has no order symbol to remove")
    keep = [i for i, name in enumerate(sig.names) if name != sig.order_symbol]
    return FinStructure(sig.without_order(), A.size, tuple(A.relations[i] for i in keep))


def order_pairs(sequence: Sequence[int]) -> frozenset[tuple[int, int]]:
    """Strict order relation listing ``sequence`` from least to greatest."""
    return frozenset((sequence[i], sequence[j])
                     for i in range(len(sequence)) for j in range(i + 1, len(sequence)))


def expand(A0: FinStructure, order: Sequence[int], signature: Signature) -> FinStructure:
    """Expansion of ``A0`` by the linear order ``order`` (least first).

    ``signature`` must be ``A0``'s signature with the order symbol added.
    """
    if signature.order_symbol is None or signature.without_order() != A0.signature:
        raise SignatureMismatch("target signature is not an order expansion of A0's")
    if sorted(order) != list(range(A0.size)):
        raise InvalidInput(f"{list(order)} is not an ordering of {A0.size} points")
    rels = dict(zip(A0.signature.names, A0.relations))
    rels[signature.order_symbol] = order_pairs(order)
    return FinStructure(signature, A0.size, tuple(rels[n] for n in signature.names))


def order_sequence(A: FinStructure) -> list[int]:
    """Points of an order structure listed from least to greatest."""
    less = A.rel(A.signature.order_symbol)
    below = [0] * A.size
    for _, y in less:
        below[y] += 1
    return sorted(range(A.size), key=below.__getitem__)


def is_order_structure(A: FinStructure) -> bool:
    if A.signature.order_symbol is None:
        raise InvalidInput("signature has no order symbol")
    less = A.rel(A.signature.order_symbol)
    n = A.size
    if any(x == y for x, y in less):
        return False
    if any((i, j) not in less and (j, i) not in less for i in range(n) for j in range(i + 1, n)):
        return False
    succ: dict[int, set[int]] = {}
    for x, y in less:
        succ.setdefault(x, set()).add(y)
    return all((x, z) in less for x, y in less for z in succ.get(y, ()))


# ---------------------------------------------------------------------------
# canonical labelling

def _refine(A: FinStructure, colors: list[int]) -> list[int]:
    """Colour refinement to a stable partition; colours are normalised ranks."""
    inc = A.incidence
    ncells = -1
    while True:
        sigs = []
        for v in range(A.size):
            local = sorted((si, tuple(colors[x] for x in t), tuple(i for i, x in enumerate(t) if x == v))
                           for si, t in inc[v])
            sigs.append((colors[v], tuple(local)))
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == ncells:
            return new
        ncells = len(ranks)
        colors = new


def _is_transposition_automorphism(A: FinStructure, u: int, w: int) -> bool:
    swap = {u: w, w: u}
    for si, t in A.incidence[u] + A.incidence[w]:
        if tuple(swap.get(x, x) for x in t) not in A.relations[si]:
            return False
    return True


def _labelling_key(A: FinStructure, lab: Sequence[int]) -> tuple:
    return tuple(tuple(sorted(tuple(lab[x] for x in t) for t in rel)) for rel in A.relations)


def canonical_form(A: FinStructure) -> tuple[FinStructure, Tuple]:
    """Canonical representative of the isomorphism class of ``A``.

    Returns ``(canon, relabeling)`` where ``relabeling[i]`` is the label of
    point ``i`` in ``canon``. Individualisation-refinement: the canonical
    labelling is the key-minimal leaf of the search tree; branches through
    vertices related by a transposition automorphism are skipped.
    """
    n = A.size
    best: list = [None, None]

    def search(colors: list[int]):
        colors = _refine(A, colors)
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = next((cells[c] for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            key = _labelling_key(A, colors)
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, tuple(colors)
            return
        reps: list[int] = []
        for v in target:
            if not any(_is_transposition_automorphism(A, r, v) for r in reps):
                reps.append(v)
        c = colors[target[0]]
        for v in reps:
            search([2 * x + (1 if x == c and u != v else 0) for u, x in enumerate(colors)])

    search([0] * n)
    lab = best[1] if n else ()
    canon = A.relabel(lab)
    if canon == A:
        lab = tuple(range(n))
    return canon, lab


def canonical_form_exhaustive(A: FinStructure) -> tuple[FinStructure, Tuple]:
    """Brute-force canonical form: key-minimal image over all n! relabelings."""
    best = None
    for lab in permutations(range(A.size)):
        key = _labelling_key(A, lab)
        if best is None or key < best[0]:
            best = (key, lab)
    canon = A.relabel(best[1])
    return canon, (tuple(range(A.size)) if canon == A else best[1])


def is_isomorphic(A: FinStructure, B: FinStructure) -> bool:
    if A.signature != B.signature or A.size != B.size:
        return False
    return canonical_form(A)[0] == canonical_form(B)[0]


# ---------------------------------------------------------------------------
# small constructors

def bare_set(n: int) -> FinStructure:
    return FinStructure(EMPTY, n, ())


def chain(n: int) -> FinStructure:
    """The n-element linear order 0 < 1 < ... < n-1."""
    return FinStructure(ORDER, n, (order_pairs(range(n)),))


def poset(n: int, pairs: Iterable[tuple[int, int]] = (), close: bool = True) -> FinStructure:
    """A poset (strict relation ``prec``); ``close`` takes the transitive closure."""
    rel = set(map(tuple, pairs))
    if close:
        rel = transitive_closure(rel)
    return FinStructure(POSET, n, (frozenset(rel),))


def poset_chain(n: int) -> FinStructure:
    return FinStructure(POSET, n, (order_pairs(range(n)),))


def antichain(n: int) -> FinStructure:
    return FinStructure(POSET, n, (frozenset(),))


def graph(n: int, edges: Iterable[tuple[int, int]] = ()) -> FinStructure:
    rel = set()
    for x, y in edges:
        rel.update({(x, y), (y, x)})
    return FinStructure(GRAPH, n, (frozenset(rel),))


def transitive_closure(pairs: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    rel = set(pairs)
    while True:
        succ: dict[int, set[int]] = {}
        for x, y in rel:
            succ.setdefault(x, set()).add(y)
        new = {(x, z) for x, y in rel for z in succ.get(y, ()) if (x, z) not in rel}
        if not new:
            return rel
        rel |= new
