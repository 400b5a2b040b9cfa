import json
from math import factorial

import pytest
from hypothesis import given, strategies as hst

from fraisselab import structures as st
from fraisselab.errors import InvalidInput, SignatureMismatch

import oracles
from strategies import digraphs, graphs, posets

V = st.poset(3, [(0, 2), (1, 2)])


def test_signature_validation():
    with pytest.raises(InvalidInput):
        st.Signature((("R", 2), ("R", 1)))
    with pytest.raises(InvalidInput):
        st.Signature((("R", 0),))
    with pytest.raises(InvalidInput):
        st.Signature((("E", 2),), "<")


def test_structure_rejects_out_of_range_tuple():
    with pytest.raises(InvalidInput):
        st.FinStructure.build(st.ORDER, 2, {"<": [(0, 2)]})
    with pytest.raises(InvalidInput):
        st.FinStructure.build(st.ORDER, 2, {"E": [(0, 1)]})


def test_v_poset_embeds_chain_twice():
    two = st.poset_chain(2)
    maps = [e.map for e in st.enumerate_embeddings(two, V)]
    assert maps == [(0, 2), (1, 2)]


def test_bare_set_embedding_count():
    for k, n in [(0, 3), (2, 4), (3, 3), (4, 2)]:
        expected = factorial(n) // factorial(n - k) if k <= n else 0
        assert len(st.enumerate_embeddings(st.bare_set(k), st.bare_set(n))) == expected


@given(digraphs(3), digraphs(4))
def test_embeddings_match_brute_force(A, B):
    assert [e.map for e in st.enumerate_embeddings(A, B)] == oracles.embeddings(A, B)


def test_embedding_must_reflect():
    with pytest.raises(InvalidInput):
        st.Embedding(st.antichain(2), st.poset_chain(2), (0, 1))
    with pytest.raises(InvalidInput):
        st.Embedding(st.antichain(2), st.antichain(2), (0, 0))
    with pytest.raises(SignatureMismatch):
        st.Embedding(st.antichain(1), st.graph(1), (0,))


def test_push_embedding_lands_in_embeddings():
    pi, A, B = st.chain(2), st.chain(3), st.chain(5)
    copies = {e.map for e in st.enumerate_embeddings(pi, B)}
    for alpha in st.enumerate_embeddings(A, B):
        for x in st.enumerate_embeddings(pi, A):
            assert st.push_embedding(alpha, x).map in copies


def test_composition_associative():
    a, b, c, d = st.chain(1), st.chain(2), st.chain(3), st.chain(4)
    for f in st.enumerate_embeddings(a, b):
        for g in st.enumerate_embeddings(b, c):
            for h in st.enumerate_embeddings(c, d):
                left = st.push_embedding(h, st.push_embedding(g, f))
                right = st.push_embedding(st.push_embedding(h, g), f)
                assert left.map == right.map
        assert st.push_embedding(st.identity_embedding(b), f).map == f.map


@given(graphs(6), hst.data())
def test_induced_then_embed(G, data):
    subset = data.draw(hst.lists(hst.sampled_from(range(G.size)), unique=True)) if G.size else []
    sub = st.induced_substructure(G, subset)
    assert tuple(subset) in {e.map for e in st.enumerate_embeddings(sub, G)}
    assert sub.relations == oracles.induced(G, subset)


def test_order_structure_examples():
    assert st.is_order_structure(st.chain(3))
    assert not st.is_order_structure(st.FinStructure.build(st.ORDER, 2, {"<": [(0, 1), (1, 0)]}))
    assert not st.is_order_structure(st.FinStructure.build(st.ORDER, 2))


def test_expand_and_reduct():
    A = st.expand(V, [1, 0, 2], st.ORDERED_POSET)
    assert st.reduct(A) == V
    assert st.order_sequence(A) == [1, 0, 2]
    with pytest.raises(InvalidInput):
        st.expand(V, [0, 1], st.ORDERED_POSET)


@given(digraphs(5))
def test_canonical_form_idempotent(A):
    canon, lab = st.canonical_form(A)
    assert A.relabel(lab) == canon
    again, lab2 = st.canonical_form(canon)
    assert again == canon and lab2 == tuple(range(A.size))


@given(digraphs(5), hst.data())
def test_canonical_form_is_invariant(A, data):
    perm = data.draw(hst.permutations(range(A.size)))
    assert st.canonical_form(A.relabel(perm))[0] == st.canonical_form(A)[0]


@given(digraphs(5), digraphs(5))
def test_isomorphism_agrees_with_exhaustive(A, B):
    refined = st.canonical_form(A)[0] == st.canonical_form(B)[0]
    exhaustive = st.canonical_form_exhaustive(A)[0] == st.canonical_form_exhaustive(B)[0]
    assert refined == exhaustive == oracles.isomorphic(A, B)


def test_canonical_form_on_regular_graphs():
    # same degree sequence; refinement alone cannot split them
    c6 = st.graph(6, [(i, (i + 1) % 6) for i in range(6)])
    two_triangles = st.graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    assert not st.is_isomorphic(c6, two_triangles)
    assert st.is_isomorphic(c6, c6.relabel([3, 5, 1, 0, 2, 4]))


@given(posets(6))
def test_json_round_trip(P):
    data = json.loads(json.dumps(P.to_json()))
    back = st.FinStructure.from_json(data)
    assert back == P
    assert st.canonical_form(back)[0] == st.canonical_form(P)[0]


def test_json_shape():
    assert st.chain(2).to_json() == {"signature": [{"name": "<", "arity": 2}], "order_symbol": "<",
                                     "size": 2, "relations": {"<": [[0, 1]]}}
    with pytest.raises(InvalidInput):
        st.FinStructure.from_json({"size": 2})
