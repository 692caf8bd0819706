"""
Tests for modules.relations
"""

import pytest

from modules.errors import HorizonExhausted, InputError, PreconditionError
from modules.ratmap import RatMap
from modules.relations import (
    CriticalRelation,
    EquivClosure,
    OrbitModel,
    TriState,
    assess,
    build_proper,
    closure,
    detect_relations,
    is_full,
    is_minimally_full,
    is_noncyclic,
    is_proper,
    zeta,
)


def rels(*quads):
    return {CriticalRelation(*q) for q in quads}


FIG1_GENERATORS = [
    CriticalRelation(2, 1, 1, 2), CriticalRelation(3, 1, 4, 1), CriticalRelation(4, 6, 3, 0),
    CriticalRelation(5, 6, 4, 0), CriticalRelation(8, 7, 4, 1), CriticalRelation(9, 8, 1, 1),
]


@pytest.fixture
def fig1():
    return OrbitModel.symbolic(9, FIG1_GENERATORS)


def test_parse_and_format():
    rel = CriticalRelation.parse("1,1,3,2")
    assert rel == CriticalRelation(1, 1, 3, 2)
    assert str(rel) == "(1,1;3,2)"
    assert CriticalRelation.parse("(2,1;1,2)") == CriticalRelation(2, 1, 1, 2)


@pytest.mark.parametrize("text", ["1,1,3", "a,b,c,d", "0,1,1,1", "1,1,0,0", "1,1,-1,2"])
def test_invalid_relations(text):
    with pytest.raises(InputError):
        CriticalRelation.parse(text)


def test_closure_is_shift_invariant():
    cl = closure([CriticalRelation(1, 1, 3, 2)], nu=1, H=10)
    assert cl.equiv((1, 3), (1, 2))
    assert cl.equiv((1, 7), (1, 2))
    assert not cl.equiv((1, 1), (1, 2))


def test_closure_rejects_nodes_beyond_horizon():
    cl = EquivClosure(2, 5)
    with pytest.raises(HorizonExhausted):
        cl.find((1, 6))
    with pytest.raises(PreconditionError):
        closure([CriticalRelation(1, 3, 1, 1)], nu=2, H=5)


def test_identifying_two_critical_points_is_inconsistent():
    with pytest.raises(PreconditionError):
        OrbitModel.symbolic(3, [], landings=[(3, 1, 1), (3, 1, 2)])


def test_fig1_proper_collection(fig1):
    collection = build_proper(fig1)
    assert set(collection.relations) == rels(
        (2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 4, 4, 3), (8, 7, 4, 1), (9, 8, 1, 1))
    assert collection.zeta == 3
    assert collection.proper == TriState.TRUE
    assert zeta(fig1) == 3


@pytest.mark.parametrize("quads", [
    [(2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 6, 4, 0), (9, 7, 4, 1), (9, 8, 1, 1)],
    [(2, 1, 2, 3), (3, 1, 5, 2), (4, 6, 3, 0), (5, 6, 4, 0), (9, 7, 4, 1), (9, 8, 2, 2)],
])
def test_fig1_alternative_collections_are_minimally_full(fig1, quads):
    F = [CriticalRelation(*q) for q in quads]
    assert is_minimally_full(F, fig1) == TriState.TRUE


def test_fig1_collection_missing_a_relation_is_not_full(fig1):
    F = list(build_proper(fig1).relations)[:-1]
    assert is_minimally_full(F, fig1) == TriState.FALSE


def test_collection_with_an_extra_shifted_relation_is_not_minimal(fig1):
    F = list(build_proper(fig1).relations)
    F.append(F[0].shifted(1))
    assert is_minimally_full(F, fig1) == TriState.FALSE


def test_generators_of_fig1_are_detected(fig1):
    detected = set(detect_relations(fig1))
    assert set(FIG1_GENERATORS) <= detected


def test_noncyclic():
    assert is_noncyclic([CriticalRelation(2, 1, 1, 1), CriticalRelation(3, 2, 1, 1)])
    assert not is_noncyclic([CriticalRelation(2, 1, 1, 1), CriticalRelation(1, 2, 1, 1)])


def test_chebyshev_polynomial_model():
    model = OrbitModel.numeric(RatMap.polynomial((-2, 0, 1)))
    collection = build_proper(model)
    assert set(collection.relations) == rels((1, 1, 3, 2))
    assert collection.zeta == 0
    assert model.ray_status(1) == 'finite'


def test_chebyshev_rational_model():
    model = OrbitModel.numeric(RatMap.polynomial((-2, 0, 1)), polynomial=False)
    assert set(build_proper(model).relations) == rels((1, 1, 3, 2), (2, 2, 1, 0))


def test_misiurewicz_model():
    model = OrbitModel.numeric(RatMap.polynomial((1j, 0, 1)))
    assert set(build_proper(model).relations) == rels((1, 1, 4, 2))


def test_cubic_chebyshev_model():
    model = OrbitModel.numeric(RatMap.polynomial((0, -3, 0, 1)))
    assert set(build_proper(model).relations) == rels((1, 1, 2, 1), (2, 2, 2, 1))


def test_escaping_orbit_has_no_relations():
    model = OrbitModel.numeric(RatMap.polynomial((0.3, 0, 1)))
    collection = build_proper(model)
    assert len(collection) == 0
    assert collection.zeta == 1
    assert model.ray_status(1) == 'infinite'


def test_assess_flags_the_proper_collection():
    model = OrbitModel.numeric(RatMap.polynomial((-2, 0, 1)))
    result = assess([CriticalRelation(1, 1, 3, 2)], model)
    assert result.full == TriState.TRUE
    assert is_proper(result.relations, model) == TriState.TRUE


def test_model_json_round_trip(fig1):
    data = fig1.to_json()
    again = OrbitModel.from_json(data)
    assert set(build_proper(again).relations) == set(build_proper(fig1).relations)


@pytest.mark.parametrize("data", [
    {'nu': 'x', 'generators': []},
    {'nu': 2, 'generators': [['a', 1, 1, 1]]},
    {'nu': 2, 'generators': [], 'horizon': 'long'},
])
def test_malformed_model_json_is_an_input_error(data):
    with pytest.raises(InputError):
        OrbitModel.from_json(data)


def test_rays_merge_through_a_shared_critical_point():
    cl = closure([CriticalRelation(4, 6, 3, 0), CriticalRelation(5, 6, 4, 0)], nu=9, H=10)
    assert cl.equiv((5, 4), (4, 3))


def test_constructed_fig1_collection_is_proper(fig1):
    assert is_proper(build_proper(fig1).relations, fig1) == TriState.TRUE


def test_empty_collection_is_not_full_for_chebyshev():
    model = OrbitModel.numeric(RatMap.polynomial((-2, 0, 1)))
    assert is_full([], model) == TriState.FALSE


def test_shifted_relation_stays_full():
    model = OrbitModel.numeric(RatMap.polynomial((-2, 0, 1)))
    assert is_full([CriticalRelation(1, 1, 4, 3)], model) == TriState.TRUE
    assert is_full([CriticalRelation(1, 1, 4, 2)], model) == TriState.FALSE
