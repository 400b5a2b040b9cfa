import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given

from fraisselab import classes as cl
from fraisselab import flow as fl
from fraisselab import limit as lm
from fraisselab import measure as ms
from fraisselab import structures as st
from fraisselab.errors import InvalidInput
from fraisselab.measure import FinitePermutation as Perm, OrderPrefix

import oracles
from strategies import posets

OPOSET, LO, OGRAPH = (cl.builtin_class(n) for n in ("OrderedPoset", "LO", "OrderedGraph"))
V = st.poset(3, [(0, 2), (1, 2)])

# Frozen after cross-checking every row against brute-force permutation counts
# (rows n <= 8 in test_decay_rows_against_brute_force).
DECAY_10 = [1, 1, 2, 3, 4, 10, 20, 140, 416, 1224, 3060]


def test_lo_every_order_is_member():
    P = lm.build_limit(cl.builtin_class("Set"), 4)
    for xi in ms.all_orders(range(4)):
        assert fl.flow_membership(LO, P, xi).member


def test_two_point_violation():
    rep = fl.flow_membership(OPOSET, st.poset(2, [(0, 1)]), OrderPrefix((1, 0)))
    assert not rep.member
    assert rep.failing_subset == (0, 1)
    assert rep.failing_substructure == st.poset(2, [(0, 1)])


def test_topological_sort_witness_is_member():
    P = lm.build_limit(cl.builtin_class("Poset"), 6)
    seq = cl.lex_least_linear_extension(6, P.structure.rel("prec"))
    assert fl.flow_membership(OPOSET, P, OrderPrefix(tuple(seq))).member


def test_membership_errors():
    with pytest.raises(InvalidInput):
        fl.flow_membership(OPOSET, V, OrderPrefix((0, 1)))
    with pytest.raises(InvalidInput):
        fl.flow_membership(OPOSET, st.graph(2), OrderPrefix((0, 1)))
    with pytest.raises(InvalidInput):
        fl.flow_membership(cl.builtin_class("Poset"), V, OrderPrefix((0, 1, 2)))


@given(posets(6))
def test_membership_matches_linear_extension_predicate(P):
    for xi in list(ms.all_orders(range(P.size)))[:40]:
        rep = fl.flow_membership(OPOSET, P, xi)
        assert rep.member == fl.is_linear_extension(P, xi)
        if not rep.member:
            sub = rep.failing_substructure
            order = [rep.failing_subset.index(x) for x in xi.sequence if x in rep.failing_subset]
            assert not OPOSET.contains(st.expand(sub, order, st.ORDERED_POSET))
            assert len(rep.failing_subset) == 2


def test_ordered_graph_flow_is_everything():
    P = lm.build_limit(cl.builtin_class("Graph"), 5)
    assert fl.count_flow_orders(OGRAPH, P) == factorial(5)


@pytest.mark.parametrize("n", range(7))
def test_linear_extension_examples(n):
    assert fl.count_linear_extensions(st.poset_chain(n)) == 1
    assert fl.count_linear_extensions(st.antichain(n)) == factorial(n)


def test_v_poset():
    assert fl.count_linear_extensions(V) == 2 == len(oracles.linear_extensions(3, V.rel("prec")))
    assert [x.sequence for x in fl.linear_extensions(V)] == [(0, 1, 2), (1, 0, 2)]


def test_not_a_poset():
    with pytest.raises(InvalidInput):
        fl.count_linear_extensions(st.FinStructure.build(st.POSET, 2, {"prec": [(0, 1), (1, 0)]}))


@given(posets(7))
def test_dp_matches_brute_force(P):
    expected = oracles.linear_extensions(P.size, P.rel("prec"))
    assert fl.count_linear_extensions(P) == len(expected) == fl.count_linear_extensions_bruteforce(P)
    assert [x.sequence for x in fl.linear_extensions(P)] == expected


def test_decay_small_rows():
    table = fl.decay_table(OPOSET, 2)
    assert table.rows[1].level == 1
    assert fl.count_linear_extensions(st.antichain(2)) / 2 == 1
    assert Fraction(fl.count_linear_extensions(st.poset_chain(2)), 2) == Fraction(1, 2)


def test_decay_table_frozen():
    table = fl.decay_table(OPOSET, 10)
    assert [r.extensions for r in table.rows] == DECAY_10
    levels = [r.level for r in table.rows]
    assert all(q > 0 for q in levels)
    assert all(a >= b for a, b in zip(levels, levels[1:]))
    for r in table.rows:
        assert r.level == Fraction(r.extensions, factorial(r.n))
        assert abs(r.dyadic - r.level) < Fraction(1, 2**20)


def test_decay_rows_against_brute_force():
    poset = cl.builtin_class("Poset")
    for n in range(9):
        P = lm.build_limit(poset, n).structure
        assert len(oracles.linear_extensions(n, P.rel("prec"))) == DECAY_10[n]


def test_level_measure_is_a_mu_value():
    table = fl.decay_table(OPOSET, 7)
    poset = cl.builtin_class("Poset")
    for r in table.rows:
        event = fl.flow_event(OPOSET, lm.build_limit(poset, r.n))
        assert ms.mu_exact(event) == r.level


def test_decay_general_class():
    table = fl.decay_table(OGRAPH, 4)
    assert all(r.level == 1 for r in table.rows)


def test_randomizer_examples():
    xi = OrderPrefix((3, 1, 0, 2))
    pi = Perm.from_mapping({0: 2, 2: 3, 3: 0})
    assert fl.randomizer_identity_check(Perm.identity(), Perm.identity(), xi)
    assert fl.randomizer_identity_check(pi, pi, xi)
    assert ms.act(pi @ pi.inverse(), ms.act(pi, xi)) == ms.act(pi, xi)


def test_randomizer_battery():
    rng = random.Random(2)
    for _ in range(500):
        n = rng.randint(0, 8)
        alpha = ms.random_permutation(range(12), rng)
        pi = ms.random_permutation(range(12), rng)
        assert fl.randomizer_identity_check(alpha, pi, ms.sample_prefix(n, rng))


def test_density_examples():
    assert fl.density_statistics(5, 0, 1).rows == ()
    rep = fl.density_statistics(4, 10_000, 7)
    minimum = next(r for r in rep.rows if r.name == "zero_is_minimum")
    assert minimum.exact == Fraction(1, 4) and minimum.within_3sigma
    between = next(r for r in fl.density_statistics(3, 100, 1).rows if r.name == "between")
    assert 1 - between.exact == Fraction(2, 3)


def test_density_exact_values_enumerated():
    for n in range(2, 8):
        rows = {r.name: r.exact for r in fl.density_statistics(n, 1, 0).rows}
        count_min = count_between = 0
        for xi in ms.all_orders(range(n)):
            pos = {x: i for i, x in enumerate(xi.sequence)}
            count_min += pos[0] == 0
            count_between += abs(pos[0] - pos[1]) > 1
        assert rows["zero_is_minimum"] == Fraction(count_min, factorial(n)) == Fraction(1, n)
        assert rows["between"] == Fraction(count_between, factorial(n)) == 1 - Fraction(2, n)


def test_density_closed_form_beyond_cap():
    rows = {r.name: r.exact for r in fl.density_statistics(12, 50, 3).rows}
    assert rows == {"between": Fraction(5, 6), "zero_is_minimum": Fraction(1, 12)}


def test_density_deterministic():
    assert fl.density_statistics(6, 2000, 7) == fl.density_statistics(6, 2000, 7)
    with pytest.raises(InvalidInput):
        fl.density_statistics(1, 10, 0)
