"""
Transversality Module
Derivatives of critical relations, rank certification and the quadratic differential duality
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .algebra import (
    INFINITY,
    Moebius,
    Poly,
    RankDecision,
    chordal_distance,
    is_infinite,
    poly_roots,
    rank_decision,
)
from .config import Settings
from .errors import (
    ChartSolveFailure,
    NewtonDivergence,
    NonRepelling,
    OrbitHitsInfinity,
    PreconditionError,
    RelationNotRealized,
    ValidationFailure,
)
from .qdiff import (
    QuadDiff,
    invariance_residual,
    pushforward_eval,
    q_relation,
    regular_samples,
)
from .ratmap import (
    CriticalPoint,
    CriticalSet,
    RatMap,
    affine_directions,
    choose_conjugator,
    continue_critical_point,
    critical_set,
    critical_value_jet,
    family_chart,
    iterate_derivative,
    moebius_directions,
    orbit,
    tangent_basis_pol,
    tangent_basis_ratmu,
)
from .relations import CriticalRelation, OrbitModel, TriState, build_proper, is_full

logger = logging.getLogger(__name__)

# Chordal distance within which a relation counts as satisfied by the map
REALIZED_TOL = 1e-6


def _json_float(value: float):
    return 'inf' if np.isinf(value) else float(value)


def _json_complex_matrix(matrix: np.ndarray) -> list:
    return [[[z.real, z.imag] for z in row] for row in np.atleast_2d(matrix)]


@dataclass
class JacobianReport:
    """Jacobian of a relation map with its certified rank"""

    matrix: np.ndarray
    singular_values: np.ndarray
    certified_rank: int
    gap: float
    tolerance: float
    chart: str
    relations: Tuple[CriticalRelation, ...] = ()
    coefficient_rows: Optional[np.ndarray] = field(default=None, repr=False)
    row_scales: Optional[np.ndarray] = field(default=None, repr=False)
    directions: Optional[np.ndarray] = field(default=None, repr=False)
    map: Optional[RatMap] = field(default=None, repr=False)
    critical: Optional[CriticalSet] = field(default=None, repr=False)
    conjugator: Optional[Moebius] = None
    moebius_residual: Optional[float] = None
    rank_path: str = 'gap'

    @property
    def n_rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def tangent_dimension(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def full_rank(self) -> bool:
        return self.certified_rank == self.n_rows

    def to_json(self) -> dict:
        return {
            'matrix': _json_complex_matrix(self.matrix),
            'singular_values': [float(s) for s in self.singular_values],
            'rank': self.certified_rank,
            'gap': _json_float(self.gap),
            'rank_path': self.rank_path,
            'tolerance': self.tolerance,
            'chart': self.chart,
            'relations': [r.to_json() for r in self.relations],
            'moebius_residual': self.moebius_residual,
            'conjugator': self.conjugator.to_json() if self.conjugator else None,
        }


@dataclass
class KernelVector:
    """Left kernel vector a with J^T a = 0; map_coefficients combine the relations of the evaluated map"""

    a: np.ndarray
    residual: float
    map_coefficients: Optional[np.ndarray] = None

    def to_json(self) -> dict:
        return {'a': [[z.real, z.imag] for z in self.a], 'residual': self.residual}


@dataclass
class CertifyReport:
    certified: bool
    report: JacobianReport
    kernel_dimension: int
    kernel_vector: Optional[KernelVector] = None

    def to_json(self) -> dict:
        return {
            'certified': self.certified,
            'n_relations': self.report.n_rows,
            'kernel_dimension': self.kernel_dimension,
            'jacobian': self.report.to_json(),
            'kernel_vector': self.kernel_vector.to_json() if self.kernel_vector else None,
        }


@dataclass(frozen=True)
class RepellingAssignment:
    """f^m(c_i) lands on the repelling periodic point `point` of period `period`"""

    i: int
    m: int
    point: complex
    period: int = 1


def _relation_list(F) -> Tuple[CriticalRelation, ...]:
    return tuple(F.relations) if hasattr(F, 'relations') else tuple(F)


def _orbit_velocity_row(g: RatMap, start: complex, m: int) -> np.ndarray:
    """Coefficient functional of d/dt g_t^m(start) for a fixed start point"""
    points = orbit(g, start, m)
    row = np.zeros(2 * g.degree + 2, dtype=complex)
    weight = 1 + 0j
    # Accumulate from the end: weight = Dg^(m-r)(g^r(start))
    for r in range(m, 0, -1):
        if is_infinite(points[r - 1]) or is_infinite(points[r]):
            raise OrbitHitsInfinity(f"orbit of {start} reaches infinity within {m} steps")
        row += weight * g.velocity_jet(points[r - 1], 0)[0]
        if r > 1:
            df = g.derivative(points[r - 1])
            if is_infinite(df):
                raise OrbitHitsInfinity(f"orbit of {start} passes through a pole")
            weight *= df
    return row


def _critical_velocity_row(g: RatMap, c: complex, mu: int) -> np.ndarray:
    """Coefficient functional of the motion of a critical point of multiplicity mu"""
    if is_infinite(c):
        raise OrbitHitsInfinity("critical point at infinity; conjugate first")
    jet = g.velocity_jet(c, mu)
    curvature = factorial(mu + 1) * g.taylor(c, mu + 1)[mu + 1]
    return -factorial(mu) * jet[mu] / curvature


def relation_row(g: RatMap, crit: CriticalSet, rel: CriticalRelation) -> np.ndarray:
    """Coefficient functional of d/dt [g^m(c_i(g)) - g^n(c_j(g))]"""
    if max(rel.i, rel.j) > crit.nu:
        raise PreconditionError(f"{rel} refers to a critical point beyond nu = {crit.nu}")

    def side(index: int, steps: int) -> np.ndarray:
        point = crit.points[index - 1]
        if steps == 0:
            return _critical_velocity_row(g, point.location, point.multiplicity)
        if point.at_infinity:
            raise OrbitHitsInfinity("critical point at infinity; conjugate first")
        return _orbit_velocity_row(g, point.location, steps)

    return side(rel.i, rel.m) - side(rel.j, rel.n)


def relation_component_derivative(f: RatMap, rel: CriticalRelation, direction: np.ndarray,
                                  crit: Optional[CriticalSet] = None) -> complex:
    """
    Derivative of f^m(c_i) - f^n(c_j) along a coefficient perturbation

    Args:
        f: Rational map
        rel: Relation (i, j; m, n)
        direction: Vector in the layout of f.coefficient_vector()
        crit: Critical set of f
    """
    crit = critical_set(f) if crit is None else crit
    return complex(relation_row(f, crit, rel) @ np.asarray(direction, dtype=complex))


def relation_value(g: RatMap, rel: CriticalRelation, crit: CriticalSet) -> complex:
    """g^m(zeta_i) - g^n(zeta_j), critical points continued from crit"""

    def end(index: int, steps: int) -> complex:
        point = crit.points[index - 1]
        zeta = continue_critical_point(g, point.location, point.multiplicity)
        value = orbit(g, zeta, steps)[-1]
        if is_infinite(value):
            raise OrbitHitsInfinity(f"relation {rel} has an infinite end point")
        return value

    return end(rel.i, rel.m) - end(rel.j, rel.n)


def relation_derivative_fd(f: RatMap, rel: CriticalRelation, direction: np.ndarray,
                           crit: Optional[CriticalSet] = None, step: Optional[float] = None) -> complex:
    """Central differences with one Richardson step, for cross-checking the closed form"""
    crit = critical_set(f) if crit is None else crit
    x = f.coefficient_vector()
    direction = np.asarray(direction, dtype=complex)
    h = (Settings.FD_STEP if step is None else step) * float(np.max(np.abs(x)))
    d = f.degree

    def central(t: float) -> complex:
        plus = relation_value(RatMap.from_vector(x + t * direction, d), rel, crit)
        minus = relation_value(RatMap.from_vector(x - t * direction, d), rel, crit)
        return (plus - minus) / (2 * t)

    return (4 * central(h / 2) - central(h)) / 3


def _marked_points(f: RatMap, crit: CriticalSet, relations: Sequence[CriticalRelation]) -> List[complex]:
    """Critical points named by the relations and their orbit segments"""
    points = []
    for rel in relations:
        for index, steps in ((rel.i, rel.m), (rel.j, rel.n)):
            points.extend(orbit(f, crit.locations[index - 1], steps))
    return points


def _prepare(f: RatMap, crit: CriticalSet, relations: Sequence[CriticalRelation],
             seed: Optional[int] = None):
    """Conjugate when any marked point is at infinity; returns (g, g_crit, L, s)"""
    points = _marked_points(f, crit, relations)
    if any(is_infinite(p) for p in points):
        s = choose_conjugator(points, seed)
        g, L = f.raw_conjugate(s)
        logger.debug("pre-conjugating before differentiating the relations")
        return g, crit.transport(s), L, s
    d = f.degree
    return f, crit, np.eye(2 * d + 2, dtype=complex), None


def coefficient_rows(f: RatMap, relations: Sequence[CriticalRelation], crit: Optional[CriticalSet] = None,
                     seed: Optional[int] = None):
    """
    Relation functionals in f's coefficient layout

    After a conjugation by s each row is divided by s' at the relation's
    end point, so the entries are those of f whenever that point is finite.

    Returns:
        (rows, scales, g, g_crit, s): rows are N x (2d+2); g is the map they
        were evaluated at and rows / scales are its own functionals
    """
    crit = critical_set(f) if crit is None else crit
    g, g_crit, L, s = _prepare(f, crit, relations, seed)
    rows = np.array([relation_row(g, g_crit, rel) for rel in relations], dtype=complex)
    rows = rows.reshape(len(relations), 2 * f.degree + 2) @ L
    scales = np.ones(len(relations), dtype=complex)
    if s is not None:
        for k, rel in enumerate(relations):
            end = orbit(f, crit.locations[rel.i - 1], rel.m)[-1]
            if not is_infinite(end):
                scales[k] = s.derivative(end)
        rows = rows / scales[:, None]
    return rows, scales, g, g_crit, s


def chart_directions(f: RatMap, chart: str, crit: CriticalSet, seed: Optional[int] = None) -> Tuple[str, np.ndarray]:
    """Tangent directions for a chart name"""
    if chart == 'auto':
        chart = 'poly' if f.is_polynomial else 'rat'
    if chart == 'rat':
        return chart, tangent_basis_ratmu(f, crit, seed).directions
    if chart in ('poly', 'monic'):
        return chart, tangent_basis_pol(f, chart, crit).directions
    if chart.startswith('family:'):
        return chart, family_chart(f, chart[len('family:'):]).directions
    raise PreconditionError(f"unsupported chart: {chart}")


def _equilibrated_svd(matrix: np.ndarray):
    norms = np.linalg.norm(matrix, axis=1)
    norms = np.where(norms > 0, norms, 1.0)
    scaled = matrix / norms[:, None]
    u, s, vh = linalg.svd(scaled)
    return u, s, vh, norms


def _rank_of(matrix: np.ndarray, gap_threshold: Optional[float], cutoff: Optional[float]):
    if matrix.size == 0:
        return np.zeros(0), RankDecision(0, float('inf'), 'zero')
    _, s, _, _ = _equilibrated_svd(matrix)
    return s, rank_decision(s, gap_threshold, cutoff, matrix.shape)


def check_realized(f: RatMap, relations: Sequence[CriticalRelation], crit: CriticalSet,
                   tol: float = REALIZED_TOL):
    """
    Raises:
        PreconditionError: a relation names a critical point beyond nu
        RelationNotRealized: f^m(c_i) and f^n(c_j) are further apart than tol (chordal)
    """
    for rel in relations:
        if max(rel.i, rel.j) > crit.nu:
            raise PreconditionError(f"{rel} refers to a critical point beyond nu = {crit.nu}")
        left = orbit(f, crit.locations[rel.i - 1], rel.m)[-1]
        right = orbit(f, crit.locations[rel.j - 1], rel.n)[-1]
        distance = chordal_distance(left, right)
        if distance > tol:
            raise RelationNotRealized(f"{rel} is not realized: chordal distance {distance:.3g}")


def jacobian(f: RatMap, F, chart: str = 'rat', crit: Optional[CriticalSet] = None,
             gap_threshold: Optional[float] = None, cutoff: Optional[float] = None,
             seed: Optional[int] = None) -> JacobianReport:
    """
    Jacobian of g -> (g^m_k(c_i_k(g)) - g^n_k(c_j_k(g)))_k along a chart

    Rows are equilibrated to unit norm before the singular value
    decomposition; the rank is read from the largest gap.

    Raises:
        UncertifiableRank: when no decisive gap exists
        RelationNotRealized: the map does not satisfy one of the relations
    """
    gap_threshold = Settings.GAP_THRESHOLD if gap_threshold is None else gap_threshold
    relations = _relation_list(F)
    crit = critical_set(f) if crit is None else crit
    check_realized(f, relations, crit)
    chart, directions = chart_directions(f, chart, crit, seed)

    rows, scales, g, g_crit, s = coefficient_rows(f, relations, crit, seed)
    matrix = rows @ directions.T
    singular_values, decision = _rank_of(matrix, gap_threshold, cutoff)
    logger.info(f"{chart} chart: {len(relations)} relations, certified rank {decision.rank} "
                f"({decision.path}, gap {decision.gap:.3g})")
    return JacobianReport(
        matrix=matrix,
        singular_values=singular_values,
        certified_rank=decision.rank,
        gap=decision.gap,
        rank_path=decision.path,
        tolerance=gap_threshold,
        chart=chart,
        relations=relations,
        coefficient_rows=rows,
        row_scales=scales,
        directions=directions,
        map=g,
        critical=g_crit,
        conjugator=s,
    )


def left_kernel(report: JacobianReport) -> Optional[KernelVector]:
    """A unit vector a with J^T a = 0, or None at full rank"""
    matrix = report.matrix
    if report.certified_rank >= report.n_rows:
        return None
    u, _, _, norms = _equilibrated_svd(matrix)
    a = np.conj(u[:, report.certified_rank]) / norms
    a = a / np.linalg.norm(a)
    scale = max(np.linalg.norm(matrix, 2), np.finfo(float).tiny)
    residual = float(np.linalg.norm(matrix.T @ a) / scale)
    scales = report.row_scales if report.row_scales is not None else np.ones(len(a))
    return KernelVector(a, residual, a / scales)


def _moebius_residual(f: RatMap, rows: np.ndarray, chart: str) -> Optional[float]:
    if rows.shape[0] == 0:
        return 0.0
    if chart == 'rat':
        vectors = moebius_directions(f)
    elif chart == 'poly':
        vectors = affine_directions(f)
    else:
        return None
    scale = max(np.linalg.norm(rows, 2), np.finfo(float).tiny)
    return float(max(
        np.linalg.norm(rows @ v) / (scale * max(np.linalg.norm(v), np.finfo(float).tiny))
        for v in vectors
    ))


def certify(f: RatMap, F, chart: str = 'rat', crit: Optional[CriticalSet] = None,
            seed: Optional[int] = None) -> CertifyReport:
    """
    Certify that the relation map has rank |F| and kills the conjugation directions

    Returns:
        CertifyReport with a kernel vector when the rank drops
    """
    report = jacobian(f, F, chart, crit, seed=seed)
    report.moebius_residual = _moebius_residual(f, report.coefficient_rows, report.chart)
    moebius_ok = report.moebius_residual is None or report.moebius_residual <= Settings.KERNEL_TOL
    if not moebius_ok:
        logger.warning(f"conjugation directions leave the kernel: residual {report.moebius_residual:.2e}")

    kernel = left_kernel(report)
    return CertifyReport(
        certified=report.full_rank and moebius_ok,
        report=report,
        kernel_dimension=report.tangent_dimension - report.certified_rank,
        kernel_vector=kernel,
    )


def sigma_ranks(f: RatMap, F, sigmas: Sequence[Moebius], chart: str = 'rat',
                crit: Optional[CriticalSet] = None) -> List[int]:
    """Certified ranks of the sigma-composed relation maps"""
    relations = _relation_list(F)
    crit = critical_set(f) if crit is None else crit
    chart, directions = chart_directions(f, chart, crit)
    ranks = []
    for s in sigmas:
        g, L = f.raw_conjugate(s)
        g_crit = crit.transport(s)
        for p in _marked_points(g, g_crit, relations):
            if is_infinite(p):
                raise PreconditionError(f"sigma {s.to_json()} sends a marked orbit point to infinity")
        rows = np.array([relation_row(g, g_crit, rel) for rel in relations], dtype=complex)
        matrix = rows.reshape(len(relations), -1) @ L @ directions.T
        _, decision = _rank_of(matrix, None, None)
        ranks.append(decision.rank)
    logger.info(f"ranks across {len(sigmas)} conjugations: {ranks}")
    return ranks


def rank_sigma_independence(f: RatMap, F, sigmas: Sequence[Moebius], chart: str = 'rat',
                            crit: Optional[CriticalSet] = None) -> bool:
    return len(set(sigma_ranks(f, F, sigmas, chart, crit))) <= 1


def rank_full_collection_independence(f: RatMap, F1, F2, chart: str = 'rat',
                                      crit: Optional[CriticalSet] = None) -> bool:
    """
    Certified ranks of two full collections agree

    Raises:
        PreconditionError: either collection is not full for the orbit model of f
    """
    crit = critical_set(f) if crit is None else crit
    model = OrbitModel.numeric(f, polynomial=chart in ('poly', 'monic'), crit=crit)
    for name, F in (('first', F1), ('second', F2)):
        verdict = is_full(_relation_list(F), model)
        if verdict != TriState.TRUE:
            raise PreconditionError(f"{name} collection is not full for this map ({verdict.value})")
    first = jacobian(f, F1, chart, crit).certified_rank
    second = jacobian(f, F2, chart, crit).certified_rank
    return first == second


def repelling_variant(f: RatMap, assignments: Sequence[RepellingAssignment], chart: str = 'rat',
                      crit: Optional[CriticalSet] = None, tol: float = 1e-8) -> JacobianReport:
    """
    Jacobian of g -> g^m_i(c_i(g)) - p_i(g) where p_i(g) follows a repelling periodic point

    The periodic point moves with velocity L_s(p) / (1 - Df^s(p)).
    """
    crit = critical_set(f) if crit is None else crit
    chart, directions = chart_directions(f, chart, crit)
    rows = []
    for item in assignments:
        p = complex(item.point)
        if is_infinite(p):
            raise OrbitHitsInfinity("periodic point at infinity; conjugate first")
        if chordal_distance(orbit(f, p, item.period)[-1], p) > tol:
            raise PreconditionError(f"{p} is not periodic with period {item.period}")
        multiplier = iterate_derivative(f, p, item.period)
        if abs(multiplier) <= 1 + tol:
            raise NonRepelling(f"periodic point {p} has multiplier {multiplier}", multiplier)

        c = crit.locations[item.i - 1]
        path = orbit(f, c, item.m)
        if chordal_distance(path[-1], p) > tol:
            raise RelationNotRealized(f"f^{item.m}(c_{item.i}) = {path[-1]} is not {p}")
        for point in path[1:]:
            if np.min(chordal_distance(point, np.array(crit.locations, dtype=complex))) <= tol:
                raise PreconditionError(f"orbit of c_{item.i} meets a critical point")

        periodic_motion = _orbit_velocity_row(f, p, item.period) / (1 - multiplier)
        rows.append(_orbit_velocity_row(f, c, item.m) - periodic_motion)

    rows = np.array(rows, dtype=complex).reshape(len(assignments), 2 * f.degree + 2)
    matrix = rows @ directions.T
    singular_values, decision = _rank_of(matrix, None, None)
    return JacobianReport(
        matrix=matrix,
        singular_values=singular_values,
        certified_rank=decision.rank,
        gap=decision.gap,
        rank_path=decision.path,
        tolerance=Settings.GAP_THRESHOLD,
        chart=chart,
        coefficient_rows=rows,
        directions=directions,
        map=f,
        critical=crit,
    )


def kernel_qdiff(f: RatMap, F, a, crit: Optional[CriticalSet] = None) -> QuadDiff:
    """
    sum a_k Q_k over the relations with (m_k, n_k) != (1, 1)

    f and crit must be the map the Jacobian rows were evaluated at
    (JacobianReport.map and .critical).
    """
    relations = _relation_list(F)
    if isinstance(a, KernelVector):
        coeffs = a.a if a.map_coefficients is None else a.map_coefficients
    else:
        coeffs = np.asarray(a, dtype=complex)
    if len(coeffs) != len(relations):
        raise PreconditionError(f"{len(coeffs)} coefficients for {len(relations)} relations")
    crit = critical_set(f) if crit is None else crit
    total = QuadDiff()
    for coeff, rel in zip(coeffs, relations):
        if (rel.m, rel.n) == (1, 1) or coeff == 0:
            continue
        total = total + q_relation(f, rel, crit).scaled(coeff)
    return total


def random_combination_residuals(report: JacobianReport, count: int = 20,
                                 seed: Optional[int] = None, samples: Optional[Sequence[complex]] = None) -> List[float]:
    """Invariance residuals of q built from random unit coefficient vectors"""
    rng = np.random.default_rng(Settings.SEED if seed is None else seed)
    n = report.n_rows
    residuals = []
    for _ in range(count):
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        a /= np.linalg.norm(a)
        q = kernel_qdiff(report.map, report.relations, a, report.critical)
        if q.is_zero:
            continue
        points = samples or regular_samples(report.map, q, report.critical, seed=seed)
        residuals.append(invariance_residual(report.map, q, points))
    return residuals


# Critical value coordinates


def normalize_at_infinity(f: RatMap, rel: CriticalRelation, crit: CriticalSet):
    """
    Conjugate so infinity is a non-critical fixed point off the marked orbits

    Returns:
        (g, g_crit, s) with g(z) = sigma z + b + O(1/z)
    """
    d = f.degree
    marked = _marked_points(f, crit, [rel])
    if (f.num.degree == d and f.den.degree == d - 1 and not any(is_infinite(p) for p in marked)):
        return f, crit, None

    fixed = f.num - Poly.monomial(1) * f.den
    marked += list(crit.locations) + [f(c) for c in crit.locations]
    avoid = np.array([p for p in marked if not is_infinite(p)] + [INFINITY], dtype=complex)
    best, best_distance = None, 0.0
    for cl in poly_roots(fixed):
        p = cl.center
        if cl.multiplicity > 1 or abs(f.derivative(p)) < 1e-6:
            continue
        distance = float(np.min(chordal_distance(p, avoid)))
        if distance > 1e-3 and distance > best_distance:
            best, best_distance = p, distance
    if best is None:
        raise ChartSolveFailure("no fixed point available to send to infinity")

    s = Moebius(0, 1, 1, -best)
    logger.debug(f"normalizing with the fixed point {best:.6g} sent to infinity")
    g, _ = f.raw_conjugate(s)
    g = g.normalized()
    if not (g.num.degree == d and g.den.degree == d - 1):
        g = RatMap(Poly(g.num.coeffs[:d + 1]), Poly(g.den.coeffs[:d]))
    return g, crit.transport(s), s


def _sigma_b(h: RatMap) -> Tuple[complex, complex]:
    d = h.degree
    a = h.num.padded(d + 1)
    b = h.den.padded(d + 1)
    sigma = a[d] / b[d - 1]
    return sigma, (a[d - 1] - sigma * b[d - 2]) / b[d - 1]


def _sigma_b_rows(h: RatMap) -> np.ndarray:
    d = h.degree
    a = h.num.padded(d + 1)
    b = h.den.padded(d + 1)
    sigma, shift = _sigma_b(h)
    ds = np.zeros(2 * d + 2, dtype=complex)
    ds[d] = 1 / b[d - 1]
    ds[d + 1 + d - 1] = -a[d] / b[d - 1] ** 2
    db = -b[d - 2] / b[d - 1] * ds
    db[d - 1] += 1 / b[d - 1]
    db[d + 1 + d - 2] += -sigma / b[d - 1]
    db[d + 1 + d - 1] += -shift / b[d - 1]
    return np.vstack([ds, db])


class _CriticalValueChart:
    """Newton solver for maps with prescribed sigma, b and critical value jets"""

    def __init__(self, g: RatMap, crit: CriticalSet):
        self.d = g.degree
        self.crit = crit
        self.base = g.coefficient_vector()
        pin = int(np.argmax(np.abs(self.base)))
        fixed = {pin, 2 * self.d + 1}
        self.free = [k for k in range(2 * self.d + 2) if k not in fixed]
        if len(self.free) != 2 * self.d:
            raise ChartSolveFailure("normalized chart has the wrong dimension")

    def evaluate(self, x: np.ndarray, seeds: Sequence[complex]):
        h = RatMap.from_vector(x, self.d)
        zetas = [continue_critical_point(h, z, p.multiplicity) for z, p in zip(seeds, self.crit.points)]
        values = list(_sigma_b(h))
        for zeta, p in zip(zetas, self.crit.points):
            values.extend(critical_value_jet(h, zeta, p.multiplicity))
        return np.array(values), zetas, h

    def derivative(self, h: RatMap, zetas: Sequence[complex]) -> np.ndarray:
        rows = [_sigma_b_rows(h)]
        for zeta, p in zip(zetas, self.crit.points):
            jet = h.velocity_jet(zeta, p.multiplicity - 1)
            rows.append(np.array([factorial(j) * jet[j] for j in range(p.multiplicity)]))
        return np.vstack(rows)[:, self.free]

    def solve(self, target: np.ndarray, tol: Optional[float] = None, max_iter: Optional[int] = None):
        tol = Settings.NEWTON_TOL if tol is None else tol
        max_iter = Settings.NEWTON_MAX_ITER if max_iter is None else max_iter
        x = self.base.copy()
        seeds = list(self.crit.locations)
        values, seeds, h = self.evaluate(x, seeds)
        residual = target - values
        scale = max(1.0, float(np.max(np.abs(target))))

        for iteration in range(max_iter):
            if np.linalg.norm(residual) <= tol * scale:
                return h, seeds
            try:
                step = linalg.solve(self.derivative(h, seeds), residual)
            except linalg.LinAlgError as e:
                raise ChartSolveFailure(f"singular chart Jacobian: {e}")
            damping = 1.0
            while damping >= 1e-4:
                trial = x.copy()
                trial[self.free] += damping * step
                try:
                    trial_values, trial_seeds, trial_h = self.evaluate(trial, seeds)
                except (NewtonDivergence, OrbitHitsInfinity):
                    damping /= 2
                    continue
                trial_residual = target - trial_values
                if np.linalg.norm(trial_residual) < np.linalg.norm(residual):
                    x, seeds, h, residual = trial, trial_seeds, trial_h, trial_residual
                    break
                damping /= 2
            else:
                if np.linalg.norm(residual) <= 1e3 * tol * scale:
                    return h, seeds
                raise ChartSolveFailure(f"damped Newton stalled at residual {np.linalg.norm(residual):.2e}")
            logger.debug(f"chart solve iteration {iteration}: residual {np.linalg.norm(residual):.2e}")
        raise ChartSolveFailure("chart solve did not converge")


def critical_value_partials(g: RatMap, crit: CriticalSet, rel: CriticalRelation,
                            step: Optional[float] = None) -> List[Tuple[complex, complex]]:
    """
    Partial derivatives of the relation along each critical value coordinate

    Returns:
        [(v_k, dR/dv_k)] for every critical point c_k
    """
    h_step = Settings.CHART_STEP if step is None else step
    chart = _CriticalValueChart(g, crit)
    base, zetas, _ = chart.evaluate(chart.base, crit.locations)
    if not np.all(np.isfinite(base)):
        raise ChartSolveFailure("critical values must be finite")

    offsets = []
    position = 2
    for p in crit.points:
        offsets.append(position)
        position += p.multiplicity

    partials = []
    for k, offset in enumerate(offsets):
        ends = []
        for sign in (1, -1):
            target = base.copy()
            target[offset] += sign * h_step
            moved, seeds = chart.solve(target)
            moved_crit = CriticalSet(
                tuple(CriticalPoint(z, p.multiplicity) for z, p in zip(seeds, crit.points)), crit.tol)
            ends.append(relation_value(moved, rel, moved_crit))
        partials.append((complex(base[offset]), (ends[0] - ends[1]) / (2 * h_step)))
    return partials


def deficit_identity_check(f: RatMap, rel: CriticalRelation, samples: Optional[Sequence[complex]] = None,
                           crit: Optional[CriticalSet] = None, step: Optional[float] = None,
                           count: int = 10, seed: Optional[int] = None) -> float:
    """
    Largest mismatch of Q(x) - (f_* Q)(x) = sum_k (dR/dv_k) / (x - v_k)

    The map is first normalized so that infinity is a non-critical fixed
    point; samples are taken in the normalized coordinate.
    """
    crit = critical_set(f) if crit is None else crit
    g, g_crit, _ = normalize_at_infinity(f, rel, crit)

    ends = [orbit(g, g_crit.locations[rel.i - 1], rel.m)[-1], orbit(g, g_crit.locations[rel.j - 1], rel.n)[-1]]
    if chordal_distance(ends[0], ends[1]) > 1e-8:
        raise RelationNotRealized(f"{rel} is not realized by the map")

    q = q_relation(g, rel, g_crit)
    partials = critical_value_partials(g, g_crit, rel, step)
    if samples is None:
        samples = regular_samples(g, q, g_crit, count=count, seed=seed)

    mismatch = 0.0
    for x in samples:
        lhs = q(x) - pushforward_eval(g, q, x)
        rhs = sum(coeff / (x - v) for v, coeff in partials)
        mismatch = max(mismatch, abs(lhs - rhs))
    logger.info(f"identity check for {rel}: mismatch {mismatch:.2e}")
    return mismatch


def polynomial_chart_certify(f: RatMap, F=None, chart: str = 'poly',
                             crit: Optional[CriticalSet] = None) -> JacobianReport:
    """
    Relation Jacobian in a polynomial chart; its rank should be |F| = nu - zeta

    When F is omitted the proper collection of the finite critical orbits is used.
    """
    if not f.is_polynomial:
        raise PreconditionError("polynomial chart needs a polynomial map")
    crit = critical_set(f) if crit is None else crit
    if F is None:
        F = build_proper(OrbitModel.numeric(f, polynomial=True, crit=crit))
    report = jacobian(f, F, chart, crit)
    report.moebius_residual = _moebius_residual(f, report.coefficient_rows, report.chart)
    if report.moebius_residual is not None and report.moebius_residual > Settings.KERNEL_TOL:
        raise ValidationFailure(f"affine conjugation directions leave the kernel: {report.moebius_residual:.2e}")
    return report
