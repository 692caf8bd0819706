"""
Tests for modules.qdiff
"""

import numpy as np
import pytest

from modules.algebra import INFINITY, Moebius, Poly, is_infinite
from modules.errors import CriticalValue, NearPole, PreconditionError, PreimageAtPoleOfQ, RelationNotRealized
from modules.qdiff import (
    QuadDiff,
    infinity_moments,
    integrable_at_infinity,
    invariance_residual,
    preimages,
    pushforward_eval,
    q_relation,
    q_relation_reduced,
    regular_samples,
    sample_points,
)
from modules.ratmap import RatMap, critical_set
from modules.relations import CriticalRelation


def chebyshev2():
    return RatMap.polynomial((-2, 0, 1))


def misiurewicz_i():
    return RatMap.polynomial((1j, 0, 1))


def test_relation_differential_of_chebyshev():
    q = q_relation(chebyshev2(), CriticalRelation(1, 1, 3, 2))
    terms = dict(q.terms)
    assert len(terms) == 2
    assert abs(terms[-2] + 12) < 1e-12
    assert abs(terms[2] - 4) < 1e-12


def test_trivial_relation_gives_zero_differential():
    q = q_relation(chebyshev2(), CriticalRelation(1, 1, 1, 1))
    assert q.is_zero
    assert q(0.5) == 0


@pytest.mark.parametrize("f, rel", [
    (chebyshev2(), CriticalRelation(1, 1, 3, 2)),
    (misiurewicz_i(), CriticalRelation(1, 1, 4, 2)),
])
def test_reduced_form_agrees(f, rel):
    crit = critical_set(f)
    full = q_relation(f, rel, crit)
    reduced = q_relation_reduced(f, rel, crit)
    for z in sample_points(0.5j, count=10, seed=1, avoid=full.poles):
        assert abs(full(z) - reduced(z)) <= 1e-8 * max(1.0, abs(full(z)))


def test_reduced_form_needs_a_realized_relation():
    with pytest.raises(RelationNotRealized):
        q_relation_reduced(chebyshev2(), CriticalRelation(1, 1, 2, 1))
    with pytest.raises(PreconditionError):
        q_relation_reduced(chebyshev2(), CriticalRelation(1, 1, 1, 0))


def test_pushforward_of_pullback_multiplies_by_degree():
    f = RatMap(Poly((1, 0, 2)), Poly((0, 1, 1)))
    q = QuadDiff.from_terms([(0.3, 1.0), (-1.5, 2.0j)])

    def pulled_back(w):
        return q(f(w)) * f.derivative(w) ** 2

    for z in sample_points(count=6, seed=2, avoid=[f(c) for c in critical_set(f).locations]):
        assert abs(pushforward_eval(f, pulled_back, z) - 2 * q(z)) <= 1e-9 * max(1.0, abs(q(z)))


def test_relation_differential_is_not_invariant_for_transversal_map():
    f = chebyshev2()
    crit = critical_set(f)
    q = q_relation(f, CriticalRelation(1, 1, 3, 2), crit).normalized()
    samples = regular_samples(f, q, crit, seed=0)
    assert len(samples) == 24
    assert invariance_residual(f, q, samples) >= 0.1


def test_preimages_count_the_degree_deficit():
    f = RatMap(Poly((0, 0, 1)), Poly((1, 0, 1)))
    points = preimages(f, 1)
    assert len(points) == 2
    assert all(is_infinite(p) for p in points)
    assert len(preimages(f, 0.5)) == 2


def test_preimage_at_infinity_is_a_pole():
    f = RatMap(Poly((0, 0, 1)), Poly((1, 0, 1)))
    with pytest.raises(PreimageAtPoleOfQ):
        pushforward_eval(f, QuadDiff.from_terms([(0.2, 1)]), f(INFINITY))


def test_critical_value_rejected():
    with pytest.raises(CriticalValue):
        preimages(chebyshev2(), -2)


def test_evaluation_at_pole_rejected():
    q = QuadDiff.from_terms([(1, 1)])
    with pytest.raises(NearPole):
        q(1)


def test_coincident_poles_merge_and_cancel():
    q = QuadDiff.from_terms([(1, 2), (1 + 1e-12, -2), (3, 1)])
    assert q.poles == (3,)


def test_affine_transport():
    q = QuadDiff.from_terms([(1, 1)])
    moved = q.transport(Moebius(2, 1, 0, 1))
    assert moved.terms[0][0] == 3
    assert abs(moved.terms[0][1] - 0.5) < 1e-15
    with pytest.raises(PreconditionError):
        q.transport(Moebius.inversion())


def test_moments_of_third_difference_vanish():
    q = QuadDiff.from_terms([(-1, -1), (0, 3), (1, -3), (2, 1)])
    assert max(abs(m) for m in infinity_moments(q)) < 1e-12
    assert integrable_at_infinity(q)
    assert not integrable_at_infinity(QuadDiff.from_terms([(0, 1)]))


def test_sample_points_are_deterministic_and_avoid_points():
    first = sample_points(seed=5)
    second = sample_points(seed=5)
    assert first == second
    assert len(first) == 24
    avoid = [3.0, -7.0]
    assert all(abs(z - p) > 1e-2 * abs(p) for z in sample_points(avoid=avoid) for p in avoid)


def test_pushforward_commutes_with_affine_conjugation():
    f = chebyshev2()
    A = Moebius(2 - 1j, 0.5, 0, 1)
    g = f.conjugate(A)
    q = QuadDiff.from_terms([(0.3, 1.0), (-1.5, 2.0j)])
    moved = q.transport(A)
    for z in sample_points(count=6, seed=4, avoid=[-2]):
        expected = pushforward_eval(f, q, z) / A.a ** 2
        assert abs(pushforward_eval(g, moved, A(z)) - expected) <= 1e-9 * max(1.0, abs(expected))
