"""Arrow predicate B -> (A)^pi_r by exhaustive colouring search.

Deciding the arrow relation is a hypergraph colouring question: the vertices
are the copies of ``pi`` in ``B`` and each copy of ``A`` contributes the edge
``alpha_*(A^pi)``. The relation fails exactly when some r-colouring leaves
every edge non-monochromatic.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Sequence

from . import structures as st
from .classes import ClassSpec, admissible_orders, enumerate_age
from .errors import CapExceeded, EmptyPattern, InvalidInput, SignatureMismatch
from .structures import Embedding, FinStructure

log = logging.getLogger(__name__)

DEFAULT_PATTERN_CAP = 24


@dataclass(frozen=True)
class ArrowVerdict:
    holds: bool
    bad_coloring: dict[tuple[int, ...], int] | None
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"holds": self.holds, "stats": dict(self.stats)}
        if self.bad_coloring is not None:
            out["bad_coloring"] = [{"embedding": list(e), "color": c}
                                   for e, c in sorted(self.bad_coloring.items())]
        return out


@dataclass(frozen=True)
class _Problem:
    copies: tuple[tuple[int, ...], ...]      # B^pi as maps, canonical order
    edges: tuple[frozenset[int], ...]        # one per distinct alpha_*(A^pi)
    r: int
    n_alpha: int


def _setup(B: FinStructure, A: FinStructure, pi: FinStructure, r: int) -> _Problem:
    if not (B.signature == A.signature == pi.signature):
        raise SignatureMismatch("B, A and pi must share a signature")
    if r < 1:
        raise InvalidInput("r must be a positive integer")
    a_pi = st.enumerate_embeddings(pi, A)
    if not a_pi:
        raise EmptyPattern("A has no copy of pi")
    copies = [e.map for e in st.enumerate_embeddings(pi, B)]
    index = {m: i for i, m in enumerate(copies)}
    alphas = st.enumerate_embeddings(A, B)
    edges = []
    seen = set()
    for alpha in alphas:
        edge = frozenset(index[tuple(alpha.map[i] for i in x.map)] for x in a_pi)
        if edge not in seen:
            seen.add(edge)
            edges.append(edge)
    return _Problem(tuple(copies), tuple(edges), r, len(alphas))


def _search(m: int, r: int, edges: Sequence[frozenset[int]], prefix: Sequence[int] = ()):
    """Lexicographically least restricted-growth colouring with no monochromatic edge.

    Returns ``(colouring or None, nodes visited)``. Restricted growth strings
    are complete up to colour permutation and contain the lex-least solution.
    """
    closing: list[list[tuple[int, ...]]] = [[] for _ in range(m)]
    for e in edges:
        members = sorted(e)
        closing[members[-1]].append(tuple(members[:-1]))
    colors = [0] * m
    nodes = 0

    def consistent(i: int) -> bool:
        c = colors[i]
        return not any(all(colors[j] == c for j in rest) for rest in closing[i])

    for i, c in enumerate(prefix):
        colors[i] = c
        if not consistent(i):
            return None, 1
    start = len(prefix)
    top = max(prefix, default=-1)

    def extend(i: int, used: int) -> bool:
        nonlocal nodes
        nodes += 1
        if i == m:
            return True
        for c in range(min(r, used + 2)):
            colors[i] = c
            if consistent(i) and extend(i + 1, max(used, c)):
                return True
        return False

    found = extend(start, top)
    return (list(colors) if found else None), nodes


def _prefixes(r: int, depth: int):
    """Restricted growth strings of length ``depth`` in lexicographic order."""
    def rec(prefix, used):
        if len(prefix) == depth:
            yield tuple(prefix)
            return
        for c in range(min(r, used + 2)):
            yield from rec(prefix + [c], max(used, c))
    yield from rec([], -1)


def arrow_check(B: FinStructure, A: FinStructure, pi: FinStructure, r: int,
                cap: int = DEFAULT_PATTERN_CAP, threads: int = 1) -> ArrowVerdict:
    """Decide ``B -> (A)^pi_r``.

    On failure the verdict carries the lexicographically least bad colouring
    of ``B^pi`` (copies in canonical embedding order). ``cap`` bounds
    ``|B^pi|``; with ``threads > 1`` the colouring space is split by prefix
    across worker processes, which does not change the verdict.
    """
    prob = _setup(B, A, pi, r)
    m = len(prob.copies)
    stats = {"embeddings_A_in_B": prob.n_alpha, "embeddings_pi_in_B": m,
             "colorings_examined": 0}
    if m > cap:
        raise CapExceeded(f"|B^pi| = {m} exceeds the cap {cap}", cap=cap)
    if r == 1 or m == 0:
        # a single colour is constant on every copy of A
        stats["colorings_examined"] = 1
        if prob.n_alpha == 0:
            return ArrowVerdict(False, {c: 0 for c in prob.copies}, stats)
        return ArrowVerdict(True, None, stats)

    if threads > 1 and m > 8:
        depth = min(m - 1, 6)
        prefixes = list(_prefixes(r, depth))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_search, m, r, prob.edges, p) for p in prefixes]
            results = [f.result() for f in futures]
        coloring = next((c for c, _ in results if c is not None), None)
        stats["colorings_examined"] = sum(n for _, n in results)
    else:
        coloring, stats["colorings_examined"] = _search(m, r, prob.edges)

    if coloring is None:
        return ArrowVerdict(True, None, stats)
    return ArrowVerdict(False, dict(zip(prob.copies, coloring)), stats)


def arrow_check_naive(B: FinStructure, A: FinStructure, pi: FinStructure, r: int) -> ArrowVerdict:
    """Reference implementation: odometer over all ``r^|B^pi|`` colourings."""
    prob = _setup(B, A, pi, r)
    count = 0
    for colors in product(range(r), repeat=len(prob.copies)):
        count += 1
        if not any(len({colors[i] for i in e}) == 1 for e in prob.edges):
            return ArrowVerdict(False, dict(zip(prob.copies, colors)), {"colorings_examined": count})
    return ArrowVerdict(True, None, {"colorings_examined": count})


def verify_bad_coloring(B: FinStructure, A: FinStructure, pi: FinStructure,
                        coloring: dict[tuple[int, ...], int], r: int) -> bool:
    """Independent check that ``coloring`` witnesses the failure of the arrow.

    Recomputes all embeddings by brute force over injections; shares nothing
    with the search.
    """
    def embeds(small, big):
        for m in permutations(range(big.size), small.size):
            ok = True
            for (_, arity), rs, rb in zip(small.signature.symbols, small.relations, big.relations):
                for t in product(range(small.size), repeat=arity):
                    if (t in rs) != (tuple(m[x] for x in t) in rb):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield m

    b_pi = set(embeds(pi, B))
    if set(coloring) != b_pi or any(not 0 <= c < r for c in coloring.values()):
        return False
    a_pi = list(embeds(pi, A))
    for alpha in embeds(A, B):
        if len({coloring[tuple(alpha[i] for i in x)] for x in a_pi}) == 1:
            return False
    return True


def find_ramsey_witness(cls: ClassSpec, A: FinStructure, pi: FinStructure, r: int,
                        size_cap: int, cap: int = DEFAULT_PATTERN_CAP,
                        threads: int = 1) -> tuple[FinStructure, ArrowVerdict] | None:
    """Least member ``B`` (in age order, size <= ``size_cap``) with ``B -> (A)^pi_r``.

    ``None`` only bounds the search; it refutes nothing.
    """
    cls.require(A, "A")
    cls.require(pi, "pi")
    if not st.enumerate_embeddings(pi, A):
        raise EmptyPattern("A has no copy of pi")
    for B in enumerate_age(cls, size_cap):
        if B.size < A.size:
            continue
        verdict = arrow_check(B, A, pi, r, cap=cap, threads=threads)
        log.debug("witness scan: size %d -> %s", B.size, verdict.holds)
        if verdict.holds:
            return B, verdict
    return None


@dataclass(frozen=True)
class OrderingCertificate:
    B0: FinStructure
    entries: tuple[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]], ...]

    def to_json(self) -> dict:
        return {"B0": self.B0.to_json(),
                "entries": [{"order_A0": list(a), "order_B0": list(b), "embedding": list(e)}
                            for a, b, e in self.entries]}


def ordering_property_check(cls: ClassSpec, A0: FinStructure,
                            size_cap: int) -> tuple[FinStructure, OrderingCertificate] | None:
    """Least ``B0`` such that every admissible ordering of ``A0`` embeds in every
    admissible ordering of ``B0``; ``None`` when nothing up to ``size_cap`` works.
    """
    if not cls.is_order_class or cls.reduct_class is None:
        raise InvalidInput(f"{cls.name} is not an order class with a reduct class")
    cls.reduct_class.require(A0, "A0")
    expansions_A = [(tuple(o), st.expand(A0, o, cls.signature)) for o in admissible_orders(cls, A0)]
    for B0 in enumerate_age(cls.reduct_class, size_cap):
        orders_B = admissible_orders(cls, B0)
        if not orders_B or B0.size < A0.size:
            continue
        entries = []
        for ob in orders_B:
            B = st.expand(B0, ob, cls.signature)
            for oa, A in expansions_A:
                embs = st.enumerate_embeddings(A, B)
                if not embs:
                    break
                entries.append((oa, tuple(ob), embs[0].map))
            else:
                continue
            break
        else:
            return B0, OrderingCertificate(B0, tuple(entries))
    return None
