"""
Tests for modules.transversality
"""

import numpy as np
import pytest

from modules.algebra import Moebius, Poly
from modules.errors import NonRepelling, PreconditionError, RelationNotRealized
from modules.ratmap import RatMap, critical_set
from modules.relations import CriticalRelation, OrbitModel, build_proper
from modules.transversality import (
    RepellingAssignment,
    certify,
    deficit_identity_check,
    jacobian,
    kernel_qdiff,
    normalize_at_infinity,
    polynomial_chart_certify,
    random_combination_residuals,
    rank_full_collection_independence,
    rank_sigma_independence,
    relation_component_derivative,
    relation_derivative_fd,
    repelling_variant,
    sigma_ranks,
)


def chebyshev2():
    return RatMap.polynomial((-2, 0, 1))


def misiurewicz_i():
    return RatMap.polynomial((1j, 0, 1))


def chebyshev3():
    return RatMap.polynomial((0, -3, 0, 1))


def unit(k, size):
    e = np.zeros(size, dtype=complex)
    e[k] = 1
    return e


ADMISSIBLE_SIGMAS = [
    Moebius.from_pole(10),
    Moebius.from_pole(-7j),
    Moebius(1, 1, 1, 3),
    Moebius(2, -1j, 1, 5 + 5j),
    Moebius.from_pole(4 - 6j),
]


@pytest.mark.parametrize("f, rel, expected", [
    (chebyshev2(), CriticalRelation(1, 1, 3, 2), -8),
    (misiurewicz_i(), CriticalRelation(1, 1, 4, 2), -4 + 8j),
])
def test_quadratic_family_entries(f, rel, expected):
    report = jacobian(f, [rel], 'family:num0')
    assert report.matrix.shape == (1, 1)
    assert abs(report.matrix[0, 0] - expected) < 1e-6
    assert report.certified_rank == 1


def test_repelling_variant_of_chebyshev():
    report = repelling_variant(chebyshev2(), [RepellingAssignment(1, 2, 2.0, 1)], 'family:num0')
    assert abs(report.matrix[0, 0] + 8 / 3) < 1e-6
    assert report.certified_rank == 1


def test_repelling_variant_rejects_parabolic_points():
    f = RatMap.polynomial((0.25, 0, 1))
    with pytest.raises(NonRepelling):
        repelling_variant(f, [RepellingAssignment(1, 1, 0.5, 1)], 'family:num0')


def test_cubic_chebyshev_in_monic_chart():
    F = [CriticalRelation(1, 1, 2, 1), CriticalRelation(2, 2, 2, 1)]
    report = jacobian(chebyshev3(), F, 'monic')
    assert np.allclose(report.matrix, [[9, 6], [9, -6]], atol=1e-8)
    assert report.certified_rank == 2


def test_landing_on_fixed_critical_point():
    f = RatMap.polynomial((0, 0, 1))
    e = unit(0, 6)
    assert abs(relation_component_derivative(f, CriticalRelation(1, 1, 1, 0), e) - 1) < 1e-12
    assert abs(relation_component_derivative(f, CriticalRelation(1, 1, 2, 1), e)) < 1e-10


@pytest.mark.parametrize("f, rel", [
    (chebyshev2(), CriticalRelation(1, 1, 3, 2)),
    (misiurewicz_i(), CriticalRelation(1, 1, 4, 2)),
    (chebyshev3(), CriticalRelation(1, 1, 2, 1)),
    (chebyshev3(), CriticalRelation(2, 2, 2, 1)),
    (RatMap.polynomial((0, 0, 1)), CriticalRelation(1, 1, 1, 0)),
])
def test_closed_form_matches_finite_differences(f, rel):
    rng = np.random.default_rng(7)
    size = 2 * f.degree + 2
    for _ in range(10):
        direction = rng.normal(size=size) + 1j * rng.normal(size=size)
        direction /= np.linalg.norm(direction)
        closed = relation_component_derivative(f, rel, direction)
        difference = relation_derivative_fd(f, rel, direction)
        assert abs(closed - difference) <= 1e-7 * max(1.0, abs(closed))


@pytest.mark.parametrize("f", [chebyshev2(), misiurewicz_i()])
def test_polynomial_certificate(f):
    result = certify(f, build_proper(OrbitModel.numeric(f)), 'poly')
    assert result.certified
    assert result.report.certified_rank == 1
    assert result.kernel_vector is None
    assert result.report.moebius_residual <= 1e-6


def test_rational_certificate_kills_conjugation_directions():
    f = chebyshev2()
    F = build_proper(OrbitModel.numeric(f, polynomial=False))
    result = certify(f, F, 'rat')
    assert result.report.conjugator is not None
    assert result.report.certified_rank == 2
    assert result.report.moebius_residual <= 1e-6
    assert result.certified
    assert result.kernel_dimension == 3


@pytest.mark.parametrize("f", [chebyshev2(), misiurewicz_i()])
def test_rank_does_not_depend_on_sigma(f):
    F = build_proper(OrbitModel.numeric(f, polynomial=False))
    ranks = sigma_ranks(f, F, ADMISSIBLE_SIGMAS, 'rat')
    assert ranks == [len(F)] * len(ADMISSIBLE_SIGMAS)
    assert rank_sigma_independence(f, F, ADMISSIBLE_SIGMAS, 'rat')


def test_sigma_sending_a_marked_point_to_infinity_is_rejected():
    f = chebyshev2()
    F = build_proper(OrbitModel.numeric(f, polynomial=False))
    with pytest.raises(PreconditionError):
        sigma_ranks(f, F, [Moebius.identity()], 'rat')


@pytest.mark.parametrize("f, first, second", [
    (chebyshev2(), CriticalRelation(1, 1, 3, 2), CriticalRelation(1, 1, 4, 3)),
    (misiurewicz_i(), CriticalRelation(1, 1, 4, 2), CriticalRelation(1, 1, 5, 3)),
])
def test_rank_does_not_depend_on_the_full_collection(f, first, second):
    assert rank_full_collection_independence(f, [first], [second], 'poly')


def test_collection_independence_needs_full_collections():
    with pytest.raises(PreconditionError):
        rank_full_collection_independence(
            chebyshev2(), [CriticalRelation(1, 1, 3, 2)], [CriticalRelation(1, 1, 4, 2)], 'poly')


@pytest.mark.parametrize("f", [chebyshev2(), misiurewicz_i()])
def test_no_combination_is_invariant_for_transversal_maps(f):
    report = jacobian(f, build_proper(OrbitModel.numeric(f)), 'poly')
    residuals = random_combination_residuals(report, count=20, seed=0)
    assert residuals
    assert min(residuals) >= 1e-3


def test_kernel_qdiff_skips_unit_relations():
    f = chebyshev2()
    q = kernel_qdiff(f, [CriticalRelation(1, 1, 1, 1), CriticalRelation(1, 1, 3, 2)], [5.0, 1.0])
    assert len(q.poles) == 2


def test_normalization_sends_a_fixed_point_to_infinity():
    f = chebyshev2()
    g, _, s = normalize_at_infinity(f, CriticalRelation(1, 1, 3, 2), critical_set(f))
    assert s is not None
    assert g.num.degree == 2 and g.den.degree == 1
    assert abs(g.num.coeffs[2] / g.den.coeffs[1] + 0.5) < 1e-10


@pytest.mark.parametrize("f, rel", [
    (chebyshev2(), CriticalRelation(1, 1, 3, 2)),
    (misiurewicz_i(), CriticalRelation(1, 1, 4, 2)),
])
def test_critical_value_identity(f, rel):
    assert deficit_identity_check(f, rel, seed=0) <= 1e-5


def test_polynomial_chart_ranks():
    f = chebyshev3()
    monic = polynomial_chart_certify(f, chart='monic')
    assert monic.certified_rank == 2
    assert monic.moebius_residual is None
    poly = polynomial_chart_certify(f)
    assert poly.certified_rank == 2
    assert poly.tangent_dimension == 4


def test_polynomial_chart_needs_polynomial():
    rational = RatMap(Poly((0, 0, 1)), Poly((1, 1)))
    with pytest.raises(PreconditionError):
        polynomial_chart_certify(rational)


def test_jacobian_rejects_unrealized_relations():
    with pytest.raises(RelationNotRealized):
        jacobian(chebyshev2(), [CriticalRelation(1, 1, 2, 1)], 'poly')
    with pytest.raises(PreconditionError):
        jacobian(chebyshev2(), [CriticalRelation(3, 1, 1, 1)], 'poly')
