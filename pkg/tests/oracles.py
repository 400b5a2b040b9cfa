"""Brute-force reference implementations.

Nothing here imports the search, refinement or enumeration code of the
package; only the plain data types are shared.
"""

from fractions import Fraction
from itertools import combinations, permutations, product


def injections(k, n):
    return permutations(range(n), k)


def embeds_by(small, big, m):
    for (_, arity), rs, rb in zip(small.signature.symbols, small.relations, big.relations):
        for t in product(range(small.size), repeat=arity):
            if (t in rs) != (tuple(m[x] for x in t) in rb):
                return False
    return True


def embeddings(small, big):
    """All embeddings as maps, lexicographic."""
    return [m for m in injections(small.size, big.size) if embeds_by(small, big, m)]


def isomorphic(A, B):
    return A.signature == B.signature and A.size == B.size and bool(embeddings(A, B))


def relation_count_types(n, pairs_ok, predicate):
    """Number of isomorphism types of one-binary-relation structures on n points.

    Brute force over every subset of admissible pairs, deduplicated by the
    lexicographically least relabelled edge set.
    """
    cells = [(i, j) for i in range(n) for j in range(n) if pairs_ok(i, j)]
    perms = list(permutations(range(n)))
    seen = set()
    for bits in range(1 << len(cells)):
        rel = frozenset(c for k, c in enumerate(cells) if bits >> k & 1)
        if not predicate(rel, n):
            continue
        seen.add(min(tuple(sorted((p[a], p[b]) for a, b in rel)) for p in perms))
    return len(seen)


def is_strict_order(rel, n):
    if any((i, i) in rel for i in range(n)):
        return False
    return all((a, d) in rel for a, b in rel for c, d in rel if b == c)


def linear_extensions(n, rel):
    out = []
    for seq in permutations(range(n)):
        pos = {x: i for i, x in enumerate(seq)}
        if all(pos[a] < pos[b] for a, b in rel):
            out.append(seq)
    return out


def literal_holds(seq_rank, lit_sequence, polarity):
    ok = all(seq_rank[a] < seq_rank[b] for a, b in zip(lit_sequence, lit_sequence[1:]))
    return ok if polarity else not ok


def measure(disjuncts):
    """Measure of a DNF given as [[(sequence, polarity), ...], ...] by enumeration."""
    support = sorted({x for conj in disjuncts for s, _ in conj for x in s})
    hits = total = 0
    for seq in permutations(support):
        rank = {x: i for i, x in enumerate(seq)}
        total += 1
        hits += any(all(literal_holds(rank, s, p) for s, p in conj) for conj in disjuncts)
    return Fraction(hits, total)


def induced(structure, subset):
    pos = {x: i for i, x in enumerate(subset)}
    return tuple(frozenset(tuple(pos[x] for x in t) for t in rel if all(x in pos for x in t))
                 for rel in structure.relations)


def all_subsets(n, below):
    for k in range(below):
        yield from combinations(range(n), k)
