import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as hst

from fraisselab import measure as ms
from fraisselab.errors import InvalidInput, SupportTooLarge
from fraisselab.measure import FinitePermutation as Perm, OrderEvent, OrderPrefix

import oracles

Z = OrderEvent.cylinder


def as_oracle(E):
    return [[(l.prefix.sequence, l.polarity) for l in conj] for conj in E.disjuncts]


@hst.composite
def events(draw, support=5):
    return ms.random_event(draw(hst.integers(0, 2**32)), support_size=support)


@hst.composite
def perms(draw, points=8):
    return ms.random_permutation(range(points), draw(hst.integers(0, 2**32)))


def test_worked_values():
    assert ms.mu_exact(Z((0, 1))) == Fraction(1, 2)
    assert ms.mu_exact(Z((0, 1, 2))) == Fraction(1, 6)
    assert ms.mu_exact(Z((0, 1)) & Z((1, 2), 0)) == Fraction(1, 3)
    assert ms.mu_exact(OrderEvent.full()) == 1
    assert ms.mu_exact(OrderEvent.empty()) == 0


def test_dyadic_examples():
    assert ms.mu_approx(OrderEvent.full(), 5) == 1
    assert ms.mu_approx(Z((0, 1, 2)), 3) == Fraction(1, 8)
    assert ms.dyadic(Fraction(1, 3), 1) == Fraction(1, 4)


@given(hst.fractions(0, 1), hst.integers(0, 30))
def test_dyadic_bound(q, k):
    b = ms.dyadic(q, k)
    assert abs(b - q) < Fraction(1, 2**k)
    assert b.denominator & (b.denominator - 1) == 0


@given(events())
def test_mu_matches_oracle(E):
    assert ms.mu_exact(E) == oracles.measure(as_oracle(E))


def test_normal_form():
    a = ms.Literal(OrderPrefix((0, 1)))
    assert OrderEvent(((a, a),)) == Z((0, 1))
    assert OrderEvent(((a, a.negate()),)) == OrderEvent.empty()
    assert OrderEvent(((), (a,))).disjuncts[0] == ()


def test_algebra_examples():
    assert ms.extensionally_equal(Z((0, 1)) | Z((1, 0)), OrderEvent.full())
    assert ms.mu_exact(Z((0, 1)) | Z((1, 0))) == 1


@given(events(), events())
def test_boolean_laws(E, F):
    assert ms.extensionally_equal(~~E, E)
    assert ms.extensionally_equal(~(E | F), ~E & ~F)
    assert ms.extensionally_equal(E & (E | F), E)
    assert ms.mu_exact(E | F) == ms.mu_exact(E) + ms.mu_exact(F) - ms.mu_exact(E & F)
    assert ms.mu_exact(~E) == 1 - ms.mu_exact(E)


@given(events(6))
def test_additivity_on_disjoint_parts(E):
    F = Z((0, 1, 2))
    assert ms.mu_exact(E) == ms.mu_exact(E & F) + ms.mu_exact(E & ~F)


@given(hst.permutations(range(6)), hst.integers(1, 6))
def test_cylinder_value(seq, m):
    assert ms.mu_exact(Z(seq[:m])) == Fraction(1, factorial(m))


@given(events(), perms())
def test_invariance(E, sigma):
    assert ms.mu_exact(ms.act_event(sigma, E)) == ms.mu_exact(E)


def test_act_examples():
    xi = OrderPrefix((0, 1))
    assert ms.act(Perm.identity(), xi) == xi
    assert ms.act(Perm.transposition(0, 1), xi) == OrderPrefix((1, 0))
    assert ms.act_event(Perm.transposition(0, 1), OrderEvent.full()) == OrderEvent.full()
    assert ms.act_event(Perm.transposition(0, 1), OrderEvent.empty()) == OrderEvent.empty()


@given(perms(), perms(), hst.permutations(range(6)))
def test_action_laws(sigma, tau, seq):
    xi = OrderPrefix(tuple(seq))
    assert ms.act(sigma @ tau, xi) == ms.act(sigma, ms.act(tau, xi))
    assert ms.act(sigma.inverse() @ sigma, xi) == xi
    moved = ms.act(sigma, xi)
    # the defining equivalence, pointwise
    inv = sigma.inverse()
    for x in moved.sequence:
        for y in moved.sequence:
            if x != y:
                assert moved.less(x, y) == xi.less(inv(x), inv(y))


def test_support_cap():
    E = Z(tuple(range(11)))
    with pytest.raises(SupportTooLarge):
        ms.mu_exact(E)
    assert ms.mu_exact(Z(tuple(range(10)))) == Fraction(1, factorial(10))


def test_prefix_validation_and_json():
    with pytest.raises(InvalidInput):
        OrderPrefix((0, 0))
    p = OrderPrefix((2, 0, 1))
    assert OrderPrefix.from_json(p.to_json()) == p
    assert OrderPrefix.from_json({"sequence": [2, 0, 1]}) == p
    with pytest.raises(InvalidInput):
        OrderPrefix.from_pairs([(0, 1)], support=[0, 1, 2])
    with pytest.raises(InvalidInput):
        Perm(((0, 1),))


@given(events())
def test_event_json_round_trip(E):
    assert OrderEvent.from_json(E.to_json()) == E


def test_satisfies():
    assert ms.satisfies(OrderPrefix((2, 0, 1)), Z((0, 1)) & Z((2, 1)))
    assert not ms.satisfies(OrderPrefix((2, 0, 1)), Z((1, 0)))


def test_sampler():
    assert ms.sample_prefix(0, 1) == OrderPrefix(())
    assert ms.sample_prefix(1, 1) == OrderPrefix((0,))
    assert ms.sample_prefix(7, 3) == ms.sample_prefix(7, 3)
    rng = random.Random(11)
    trials = 10_000
    hits = sum(ms.sample_prefix(5, rng).less(0, 1) for _ in range(trials))
    assert abs(hits / trials - 0.5) <= 3 * (0.25 / trials) ** 0.5


def test_sampler_is_uniform_on_three_points():
    rng = random.Random(5)
    counts = {}
    for _ in range(6000):
        s = ms.sample_prefix(3, rng).sequence
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 6
    sigma = (1000 * 5 / 6) ** 0.5
    assert all(abs(c - 1000) <= 4 * sigma for c in counts.values())
