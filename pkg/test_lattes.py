"""
Tests for modules.lattes
"""

import numpy as np
import pytest

from modules import lattes as lattes_module
from modules.algebra import is_infinite, rank_decision
from modules.config import Settings
from modules.errors import PreconditionError, ValidationFailure
from modules.lattes import (
    INVARIANCE_TOL,
    MOMENT_TOL,
    degeneracy_demo,
    flexible_lattes,
    lattes_family_direction,
)
from modules.ratmap import critical_set, cycle_multiplier, g_map_jacobian
from modules.relations import OrbitModel, build_proper
from scipy import linalg

PARAMETERS = [2, 2 + 0.5j, -1 + 1j]


@pytest.mark.parametrize("a", PARAMETERS)
def test_flexible_lattes_structure(a):
    lattes = flexible_lattes(a)
    f = lattes.map
    assert f.degree == 4
    crit = critical_set(f)
    assert crit.nu == 6
    assert crit.multiplicities == [1] * 6
    assert is_infinite(f(0))
    assert is_infinite(f(complex("inf")))


@pytest.mark.parametrize("a", [0, 1])
def test_degenerate_parameters_rejected(a):
    with pytest.raises(PreconditionError):
        flexible_lattes(a)


def test_family_direction_matches_differences():
    a = 2 + 0.5j
    h = 1e-6
    plus = flexible_lattes(a + h).map.coefficient_vector()
    minus = flexible_lattes(a - h).map.coefficient_vector()
    assert np.allclose((plus - minus) / (2 * h), lattes_family_direction(a), atol=1e-6)


@pytest.mark.parametrize("a", PARAMETERS)
def test_relation_jacobian_drops_rank(a):
    report = degeneracy_demo(a, seed=0)
    assert len(report.relations) == 6
    assert report.jacobian.tangent_dimension == 9
    assert report.jacobian.certified_rank == 5
    assert report.kernel.residual <= 1e-8


@pytest.mark.parametrize("a", PARAMETERS)
def test_kernel_differential_is_invariant(a):
    report = degeneracy_demo(a, seed=0)
    assert report.invariance_residual <= INVARIANCE_TOL
    assert max(abs(m) for m in report.moments) <= MOMENT_TOL
    assert report.passed


@pytest.mark.parametrize("a", PARAMETERS)
def test_family_direction_is_annihilated(a):
    report = degeneracy_demo(a, seed=0)
    assert report.family_residual <= 1e-6


def test_report_json():
    data = degeneracy_demo(2, seed=0).to_json()
    assert data['rank'] == 5
    assert data['passed'] is True
    assert len(data['moments']) == 3


@pytest.mark.parametrize("a", PARAMETERS)
def test_postcritical_cycle_is_repelling(a):
    lattes = flexible_lattes(a)
    assert len(lattes.multipliers) == 4
    # every postcritical point lands on the fixed point at infinity, multiplier 4
    for multiplier in lattes.multipliers:
        assert abs(multiplier - 4) < 1e-8
    assert abs(cycle_multiplier(lattes.map, [complex("inf")]) - 4) < 1e-8


def test_non_repelling_cycle_is_rejected(monkeypatch):
    monkeypatch.setattr(lattes_module, 'cycle_multiplier', lambda f, cycle: 0.5 + 0j)
    with pytest.raises(ValidationFailure):
        flexible_lattes(2)


@pytest.mark.parametrize("a", PARAMETERS)
def test_critical_value_jacobian_has_full_rank(a):
    f = flexible_lattes(a).map
    matrix = g_map_jacobian(f, 'rat')
    assert matrix.shape[0] == 2 * f.degree - 2
    s = linalg.svd(matrix / np.linalg.norm(matrix, axis=1, keepdims=True), compute_uv=False)
    decision = rank_decision(s, shape=matrix.shape)
    assert decision.rank == 6
    # full rank has nothing below it to separate; the margin above the cutoff plays the gap
    assert decision.path == 'cutoff'
    assert s[-1] / s[0] >= Settings.GAP_THRESHOLD * Settings.RANK_CUTOFF


@pytest.mark.parametrize("a", [0.5 + 0.5j, 3, -2 - 1j, 1.5j])
def test_combinatorics_do_not_depend_on_a(a):
    lattes = flexible_lattes(a)
    crit = critical_set(lattes.map)
    assert crit.nu == 6
    collection = build_proper(OrbitModel.numeric(lattes.map, crit=crit))
    assert len(collection) == 6
    assert degeneracy_demo(a, seed=0).jacobian.certified_rank == 5
