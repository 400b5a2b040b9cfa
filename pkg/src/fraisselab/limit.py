"""Finite prefixes of recursive Fraïssé limits and effective back-and-forth.

The construction appends points one at a time and never revisits earlier
relations, so ``build_limit(cls, n)`` restricted to {0..n-2} is
``build_limit(cls, n-1)``.

Schedule. Requirements are pairs (S, E): a subset S of existing points and a
one-point extension type E of the induced structure on S. They are consumed
in stages; stage ``t`` covers every subset of {0..t-1} of size at most
``subset_bound(t)`` not covered by an earlier stage, ordered by (largest
point, size, lexicographic), then by the class's extension order. A
requirement already realised by some point outside S is certified with the
least such point; otherwise a new point is created by amalgamating the
extension with the current prefix over S. Since ``subset_bound`` is
unbounded, every requirement is eventually met.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Mapping, Sequence

from . import structures as st
from .classes import ClassSpec, amalgamate, builtin_class
from .errors import InsufficientSaturation, InvalidInput, NoAmalgamationStrategy
from .structures import Embedding, FinStructure


def subset_bound(stage: int) -> int:
    """Largest subset size scheduled by ``stage``.

    0, 1, 2, then 3 from stage 3, 4 from stage 8, 5 from stage 128: unbounded
    (so the schedule is fair) but slow enough to keep stages small.
    """
    return min(stage, 1 + stage.bit_length().bit_length())


def certified_bound(n: int) -> int:
    """Published fairness bound: a prefix of size n carries at least this many certificates."""
    return n // 4


@dataclass(frozen=True)
class Certificate:
    subset: tuple[int, ...]
    extension: FinStructure
    realizer: int

    def to_json(self) -> dict:
        return {"subset": list(self.subset), "extension": self.extension.to_json(),
                "realizer": self.realizer}


@dataclass(frozen=True)
class LimitPrefix:
    cls: ClassSpec
    structure: FinStructure
    schedule_position: int = 0
    certificates: tuple[Certificate, ...] = ()
    completed_stage: int = -1
    seed: int | None = None

    @property
    def size(self) -> int:
        return self.structure.size

    @classmethod
    def wrap(cls, klass: ClassSpec, structure: FinStructure) -> LimitPrefix:
        """A prefix given directly as a structure, with no schedule behind it."""
        klass.require(structure, "prefix")
        return cls(klass, structure)

    def saturation_level(self, k: int) -> int:
        """Largest m such that every requirement over a subset of {0..m-1}
        of size < k is certified (0 if none)."""
        t = self.completed_stage
        return t if t >= 0 and subset_bound(t) >= k - 1 else 0

    def certificates_sound(self) -> bool:
        for c in self.certificates:
            if c.realizer in c.subset:
                return False
            if st.induced_substructure(self.structure, c.subset + (c.realizer,)) != c.extension:
                return False
        return True

    def to_json(self) -> dict:
        return {"class": self.cls.name, "seed": self.seed, "size": self.size,
                "structure": self.structure.to_json(),
                "schedule_position": self.schedule_position,
                "completed_stage": self.completed_stage,
                "certificates": [c.to_json() for c in self.certificates]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: Mapping) -> LimitPrefix:
        if "structure" not in data:
            raise InvalidInput("prefix object needs 'class' and 'structure'")
        klass = builtin_class(data["class"])
        structure = FinStructure.from_json(data["structure"])
        certs = tuple(Certificate(tuple(c["subset"]), FinStructure.from_json(c["extension"]),
                                  int(c["realizer"])) for c in data.get("certificates", ()))
        klass.require(structure, "prefix")
        return cls(klass, structure, int(data.get("schedule_position", len(certs))), certs,
                   int(data.get("completed_stage", -1)), data.get("seed"))


# ---------------------------------------------------------------------------
# the builder

class _Builder:
    """Mutable construction state: relation sets plus per-point bitmask indexes."""

    def __init__(self, cls: ClassSpec):
        self.cls = cls
        self.sig = cls.signature
        if any(a != 2 for _, a in self.sig.symbols):
            raise InvalidInput("limit construction supports binary signatures only")
        k = len(self.sig.symbols)
        self.rels: list[set] = [set() for _ in range(k)]
        self.out: list[list[int]] = [[] for _ in range(k)]   # out[s][x]: {y : (x, y) in R_s}
        self.inn: list[list[int]] = [[] for _ in range(k)]   # inn[s][x]: {y : (y, x) in R_s}
        self.loops = [0] * k
        self.size = 0
        self.order: list[int] = []
        self.oi = self.sig.index(self.sig.order_symbol) if self.sig.order_symbol else None
        self.pi = None
        if cls.is_order_class and cls.reduct_class.amalgamation == "free-poset":
            self.pi = next(i for i in range(k) if i != self.oi)
        elif cls.amalgamation == "free-poset":
            self.pi = 0
        self._ext_cache: dict[FinStructure, list[FinStructure]] = {}

    def induced(self, S: Sequence[int]) -> FinStructure:
        rels = []
        for rel in self.rels:
            rels.append(frozenset((i, j) for i, x in enumerate(S) for j, y in enumerate(S)
                                  if (x, y) in rel))
        return FinStructure(self.sig, len(S), tuple(rels))

    def extensions(self, S: Sequence[int]) -> list[FinStructure]:
        base = self.induced(S)
        if base not in self._ext_cache:
            self._ext_cache[base] = self.cls.one_point_extensions(base)
        return self._ext_cache[base]

    def realizers(self, S: Sequence[int], E: FinStructure) -> int:
        """Bitmask of points outside S realising the extension type E over S."""
        s = len(S)
        mask = (1 << self.size) - 1
        for x in S:
            mask &= ~(1 << x)
        for si, rel in enumerate(E.relations):
            for j, x in enumerate(S):
                mask &= self.out[si][x] if (j, s) in rel else ~self.out[si][x]
                mask &= self.inn[si][x] if (s, j) in rel else ~self.inn[si][x]
            mask &= self.loops[si] if (s, s) in rel else ~self.loops[si]
            if not mask:
                return 0
        return mask

    def _add(self, tuples_by_symbol: list[set]):
        x = self.size
        for si in range(len(self.rels)):
            self.out[si].append(0)
            self.inn[si].append(0)
        self.size += 1
        for si, tuples in enumerate(tuples_by_symbol):
            for a, b in tuples:
                self.rels[si].add((a, b))
                self.out[si][a] |= 1 << b
                self.inn[si][b] |= 1 << a
                if a == b:
                    self.loops[si] |= 1 << a
        return x

    def add_point(self, S: Sequence[int], E: FinStructure) -> int:
        """Append the point of the amalgam of the prefix and E over S.

        Produces the same new tuples as :func:`classes.amalgamate` with the
        prefix as ``B1`` and ``E`` as ``B2``.
        """
        x, s = self.size, len(S)
        lab = list(S) + [x]
        new: list[set] = []
        for si, rel in enumerate(E.relations):
            new.append({(lab[a], lab[b]) for a, b in rel if s in (a, b)} if si != self.oi else set())
        if self.pi is not None:
            # free poset amalgam: close the new point's relations transitively
            prec = self.pi
            down = {a for a, b in new[prec] if b == x}
            up = {b for a, b in new[prec] if a == x}
            down_mask = up_mask = 0
            for d in down:
                down_mask |= self.inn[prec][d] | (1 << d)
            for u in up:
                up_mask |= self.out[prec][u] | (1 << u)
            new[prec] = ({(d, x) for d in _bits(down_mask)} | {(x, u) for u in _bits(up_mask)})
        if self.oi is not None:
            rank = {p: i for i, p in enumerate(self.order)}
            seqE = st.order_sequence(E)
            posE = seqE.index(s)
            lower = {lab[a] for a in seqE[:posE]}
            upper = {lab[a] for a in seqE[posE + 1:]}
            if self.pi is not None:
                lower |= {a for a, b in new[self.pi] if b == x}
                upper |= {b for a, b in new[self.pi] if a == x}
            pos = min((rank[u] for u in upper), default=len(self.order))
            if any(rank[l] >= pos for l in lower):
                raise InvalidInput("no order position compatible with the extension")
            self.order.insert(pos, x)
            new[self.oi] = {(p, x) for p in self.order[:pos]} | {(x, p) for p in self.order[pos + 1:]}
        return self._add(new)

    def add_point_slow(self, S: Sequence[int], E: FinStructure) -> int:
        """Reference path through the general amalgamation routine."""
        B1 = self.freeze()
        A = st.induced_substructure(B1, S)
        f1 = Embedding(A, B1, tuple(S))
        f2 = Embedding(A, E, tuple(range(len(S))))
        C, _, _ = amalgamate(self.cls, A, B1, E, f1, f2)
        x = self.size
        new = [{t for t in rel if x in t} for rel in C.relations]
        if self.oi is not None:
            self.order = st.order_sequence(C)
        return self._add(new)

    def freeze(self) -> FinStructure:
        return FinStructure(self.sig, self.size, tuple(frozenset(r) for r in self.rels))


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _stage_subsets(t: int) -> list[tuple[int, ...]]:
    g, g_prev = subset_bound(t), subset_bound(t - 1) if t > 0 else -1
    out = []
    for size in range(g + 1):
        for S in combinations(range(t), size):
            if (S and S[-1] == t - 1) or size > g_prev:
                out.append(S)
    out.sort(key=lambda S: (S[-1] if S else -1, len(S), S))
    return out


def build_limit(cls: ClassSpec, n: int, seed: int | None = None) -> LimitPrefix:
    """Deterministic prefix of size ``n`` of a recursive representation of the limit.

    With ``seed`` the order of subsets and of extension types inside each
    stage is shuffled by a seeded generator; the schedule stays fair. After
    the n-th point is placed, already-realised requirements keep being
    certified until one would need a new point.
    """
    if cls.amalgamation is None:
        raise NoAmalgamationStrategy(f"class {cls.name} has no amalgamation strategy")
    if n < 0:
        raise InvalidInput("n must be >= 0")
    b = _Builder(cls)
    rng = random.Random(seed) if seed is not None else None
    certs: list[Certificate] = []
    completed = -1
    t = 0
    while True:
        if b.size < t:
            if b.size == n:
                break
            b.add_point((), b.extensions(())[0])
            continue
        subsets = _stage_subsets(t)
        if rng is not None:
            rng.shuffle(subsets)
        stopped = False
        for S in subsets:
            types = list(b.extensions(S))
            if rng is not None:
                rng.shuffle(types)
            for E in types:
                mask = b.realizers(S, E)
                if mask:
                    p = (mask & -mask).bit_length() - 1
                elif b.size == n:
                    stopped = True
                    break
                else:
                    p = b.add_point(S, E)
                certs.append(Certificate(S, E, p))
            if stopped:
                break
        if stopped:
            break
        completed = t
        t += 1
    return LimitPrefix(cls, b.freeze(), len(certs), tuple(certs), completed, seed)


def verify_extension_property(prefix: LimitPrefix, k: int, within: int | None = None) -> bool:
    """Check one-point extension realisation directly on the structure.

    True iff for every subset S of {0..within-1} with ``|S| < k`` and every
    one-point extension type E of S in the class, some point of the prefix
    outside S realises E over S. ``within`` defaults to the whole prefix.
    """
    A = prefix.structure
    within = A.size if within is None else min(within, A.size)
    for size in range(k):
        for S in combinations(range(within), size):
            base = st.induced_substructure(A, S)
            realized = {st.induced_substructure(A, S + (p,)) for p in range(A.size) if p not in S}
            if any(E not in realized for E in prefix.cls.one_point_extensions(base)):
                return False
    return True


# ---------------------------------------------------------------------------
# back and forth

@dataclass(frozen=True)
class PartialIso:
    source: LimitPrefix
    target: LimitPrefix
    pairs: tuple[tuple[int, int], ...]

    def is_partial_isomorphism(self) -> bool:
        dom = [c for c, _ in self.pairs]
        rng = [d for _, d in self.pairs]
        if len(set(dom)) != len(dom) or len(set(rng)) != len(rng):
            return False
        return (st.induced_substructure(self.source.structure, dom)
                == st.induced_substructure(self.target.structure, rng))

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs]}


def _compatible(X: FinStructure, Y: FinStructure, dom: list[int], rng: list[int]) -> bool:
    """Whether dom[-1] -> rng[-1] extends the partial isomorphism on the rest."""
    last = len(dom) - 1
    for (_, arity), rx, ry in zip(X.signature.symbols, X.relations, Y.relations):
        for t in product(range(last + 1), repeat=arity):
            if last in t and ((tuple(dom[i] for i in t) in rx) != (tuple(rng[i] for i in t) in ry)):
                return False
    return True


def back_and_forth(C: LimitPrefix, D: LimitPrefix, steps: int) -> PartialIso:
    """Alternate forth (least unmatched point of C) and back (least unmatched of D).

    Each absorbed point is matched with the least-index point on the other
    side that extends the current partial isomorphism, so the result for
    ``steps`` extends the result for any smaller number of steps.
    """
    if C.cls.name != D.cls.name or C.structure.signature != D.structure.signature:
        raise InvalidInput("back-and-forth needs prefixes of the same class")
    X, Y = C.structure, D.structure
    pairs: list[tuple[int, int]] = []
    for step in range(steps):
        forth = step % 2 == 0
        dom = [c for c, _ in pairs]
        rng = [d for _, d in pairs]
        if forth:
            src, dst, have_src, have_dst = X, Y, dom, rng
        else:
            src, dst, have_src, have_dst = Y, X, rng, dom
        used_src, used_dst = set(have_src), set(have_dst)
        a = next((p for p in range(src.size) if p not in used_src), None)
        if a is None:
            raise InsufficientSaturation(f"step {step}: {'C' if forth else 'D'} has no unmatched point",
                                         step=step)
        b = next((q for q in range(dst.size) if q not in used_dst
                  and _compatible(src, dst, have_src + [a], have_dst + [q])), None)
        if b is None:
            side = "D" if forth else "C"
            raise InsufficientSaturation(
                f"step {step}: no point of {side} realises the type of {a} over {have_dst}",
                step=step, point=a, over=list(have_dst))
        pairs.append((a, b) if forth else (b, a))
    return PartialIso(C, D, tuple(pairs))
