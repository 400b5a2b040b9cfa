from hypothesis import strategies as hst

from fraisselab import structures as st


@hst.composite
def graphs(draw, max_n=6):
    n = draw(hst.integers(0, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = [p for p in pairs if draw(hst.booleans())]
    return st.graph(n, edges)


@hst.composite
def posets(draw, max_n=6):
    # orient every chosen pair upward in a random ranking, so the closure stays acyclic
    n = draw(hst.integers(0, max_n))
    rank = draw(hst.permutations(range(n)))
    pairs = [(rank[i], rank[j]) for i in range(n) for j in range(i + 1, n) if draw(hst.booleans())]
    return st.poset(n, pairs)


@hst.composite
def digraphs(draw, max_n=5):
    n = draw(hst.integers(0, max_n))
    cells = [(i, j) for i in range(n) for j in range(n)]
    rel = {c for c in cells if draw(hst.integers(0, 3)) == 0}
    return st.FinStructure(st.Signature((("R", 2),)), n, (frozenset(rel),))
