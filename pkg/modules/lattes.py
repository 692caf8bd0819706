"""
Lattès Module
The flexible Lattès family and its invariant quadratic differential
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .algebra import INFINITY, Poly, chordal_distance
from .config import Settings
from .errors import PreconditionError, ValidationFailure
from .qdiff import QuadDiff, infinity_moments, invariance_residual, regular_samples
from .ratmap import RatMap, critical_set, cycle_multiplier
from .relations import OrbitModel, RelationCollection, build_proper
from .transversality import JacobianReport, KernelVector, jacobian, kernel_qdiff, left_kernel

logger = logging.getLogger(__name__)

INVARIANCE_TOL = 1e-5
MOMENT_TOL = 1e-6


@dataclass(frozen=True)
class LattesMap:
    """Degree 4 Lattès map induced by doubling on the torus with modulus a"""

    a: complex
    map: RatMap
    # multiplier of the cycle each of 0, 1, a, infinity lands on
    multipliers: Tuple[complex, ...] = ()

    @property
    def postcritical(self) -> Tuple[complex, ...]:
        return (0j, 1 + 0j, self.a, INFINITY)

    def to_json(self) -> dict:
        return {
            'a': [self.a.real, self.a.imag],
            'map': self.map.to_json(),
            'multipliers': [[m.real, m.imag] for m in self.multipliers],
        }


def _postcritical_cycle(f: RatMap, points: np.ndarray, start: int) -> List[complex]:
    """Cycle of the finite set `points` under f reached from points[start], by nearest point"""
    image = [int(np.argmin(chordal_distance(f(p), points))) for p in points]
    seen: List[int] = []
    k = start
    while k not in seen:
        seen.append(k)
        k = image[k]
    return [complex(points[j]) for j in seen[seen.index(k):]]


def flexible_lattes(a: complex, tol: float = 1e-8) -> LattesMap:
    """
    f_a(z) = (z^2 - a)^2 / (4 z (z - 1)(z - a))

    Raises:
        PreconditionError: a in {0, 1}
        ValidationFailure: the computed critical data disagree with the Lattès structure,
            or a cycle reached from the postcritical set is not repelling
    """
    a = complex(a)
    if abs(a) < tol or abs(a - 1) < tol:
        raise PreconditionError(f"Lattès parameter must avoid 0 and 1, got {a}")

    num = Poly((a * a, 0, -2 * a, 0, 1))
    den = Poly((0, 4 * a, -4 * (1 + a), 4))
    f = RatMap(num, den)

    postcritical = np.array([0j, 1 + 0j, a, INFINITY], dtype=complex)
    crit = critical_set(f)
    if crit.nu != 6 or crit.total != 6:
        raise ValidationFailure(f"expected 6 simple critical points, found multiplicities {crit.multiplicities}")
    for c in crit.locations:
        if np.min(chordal_distance(f(c), postcritical)) > tol:
            raise ValidationFailure(f"critical value f({c}) = {f(c)} is outside the postcritical set")
    for p in postcritical:
        if np.min(chordal_distance(f(p), postcritical)) > tol:
            raise ValidationFailure(f"postcritical point {p} is not forward invariant")

    multipliers = []
    for k, p in enumerate(postcritical):
        cycle = _postcritical_cycle(f, postcritical, k)
        multiplier = cycle_multiplier(f, cycle)
        if abs(multiplier) <= 1 + tol:
            raise ValidationFailure(f"cycle reached from {p} is not repelling: multiplier {multiplier}")
        multipliers.append(multiplier)

    return LattesMap(a, f, tuple(multipliers))


def lattes_family_direction(a: complex) -> np.ndarray:
    """d f_a / da in the coefficient layout of flexible_lattes(a).map"""
    a = complex(a)
    num = np.array([2 * a, 0, -2, 0, 0], dtype=complex)
    den = np.array([0, 4, -4, 0, 0], dtype=complex)
    return np.concatenate([num, den])


@dataclass
class LattesReport:
    lattes: LattesMap
    relations: RelationCollection
    jacobian: JacobianReport
    kernel: KernelVector
    qdiff: QuadDiff
    invariance_residual: float
    moments: Tuple[complex, complex, complex]
    family_residual: float
    samples: List[complex] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return (
            self.invariance_residual <= INVARIANCE_TOL
            and max(abs(m) for m in self.moments) <= MOMENT_TOL
            and self.family_residual <= Settings.KERNEL_TOL
        )

    def to_json(self) -> dict:
        return {
            'lattes': self.lattes.to_json(),
            'relations': self.relations.to_json(),
            'rank': self.jacobian.certified_rank,
            'singular_values': [float(s) for s in self.jacobian.singular_values],
            'kernel': self.kernel.to_json(),
            'qdiff': self.qdiff.to_json(),
            'invariance_residual': self.invariance_residual,
            'moments': [[m.real, m.imag] for m in self.moments],
            'family_residual': self.family_residual,
            'passed': self.passed,
        }


def degeneracy_demo(a: complex, samples: Optional[Sequence[complex]] = None,
                    seed: Optional[int] = None) -> LattesReport:
    """
    Show that the relation Jacobian of f_a drops rank

    The left kernel vector is turned into a quadratic differential, which
    must be invariant under push-forward and integrable at infinity.
    The flexible direction d f_a / da must be annihilated by every relation.

    Args:
        a: Lattès parameter, not 0 or 1
        samples: Points in the conjugated coordinate; chosen automatically when omitted
        seed: Seed for the conjugating pole and the sample jitter
    """
    lattes = flexible_lattes(a)
    f = lattes.map
    crit = critical_set(f)
    F = build_proper(OrbitModel.numeric(f, crit=crit))
    logger.info(f"Lattès a={lattes.a}: {len(F)} relations")

    report = jacobian(f, F, 'rat', crit, seed=seed)
    kernel = left_kernel(report)
    if kernel is None:
        raise ValidationFailure(f"relation Jacobian has full rank {report.certified_rank}")

    q = kernel_qdiff(report.map, F, kernel, report.critical).normalized()
    points = list(samples) if samples is not None else regular_samples(report.map, q, report.critical, seed=seed)
    residual = invariance_residual(report.map, q, points)
    moments = infinity_moments(q)

    rows = report.coefficient_rows
    direction = lattes_family_direction(lattes.a)
    family_residual = float(np.linalg.norm(rows @ direction) / (np.linalg.norm(rows, 2) * np.linalg.norm(direction)))

    logger.info(f"rank {report.certified_rank}, invariance residual {residual:.2e}, "
                f"family residual {family_residual:.2e}")
    return LattesReport(
        lattes=lattes,
        relations=F,
        jacobian=report,
        kernel=kernel,
        qdiff=q,
        invariance_residual=residual,
        moments=moments,
        family_residual=family_residual,
        samples=points,
    )
