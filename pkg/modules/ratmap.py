"""
Rational Map Module
Rational maps as dynamical systems: critical points, orbits, charts and tangent spaces
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass
from math import factorial
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg

from .algebra import (
    INFINITY,
    Moebius,
    Poly,
    RootCluster,
    certified_rank,
    chordal_distance,
    conjugation_matrix,
    is_infinite,
    normalize_pair,
    poly_derivative,
    poly_roots,
    ratfn_reduce,
    series_divide,
    taylor_coefficients,
)
from .config import Settings
from .errors import (
    DimensionMismatch,
    MultiplicityMismatch,
    NewtonDivergence,
    OrbitHitsInfinity,
    PreconditionError,
    ZeroDenominator,
)

logger = logging.getLogger(__name__)

# Above this modulus maps are evaluated in the chart w = 1/z
HOMOGENEOUS_SWITCH = 1e8
TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class RatMap:
    """Rational map num/den of degree >= 2"""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.is_zero:
            raise ZeroDenominator("rational map with zero denominator")
        if self.degree < 2:
            raise PreconditionError(f"degree {self.degree} map, need degree >= 2")

    @classmethod
    def reduced(cls, num: Poly, den: Poly, tol: Optional[float] = None) -> RatMap:
        """Build from a possibly non-coprime pair"""
        return cls(*ratfn_reduce(num, den, tol))

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> RatMap:
        return cls(Poly(tuple(coeffs)), Poly.constant(1))

    @classmethod
    def from_vector(cls, x: np.ndarray, d: int) -> RatMap:
        """Inverse of coefficient_vector"""
        return cls(Poly(tuple(x[:d + 1])), Poly(tuple(x[d + 1:])))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def coefficient_vector(self) -> np.ndarray:
        """(num_0..num_d, den_0..den_d)"""
        d = self.degree
        return np.concatenate([self.num.padded(d + 1), self.den.padded(d + 1)])

    def normalized(self) -> RatMap:
        return RatMap(*normalize_pair(self.num, self.den))

    def __call__(self, z):
        if is_infinite(z):
            if self.num.degree > self.den.degree:
                return INFINITY
            if self.num.degree < self.den.degree:
                return 0j
            return self.num.coeffs[-1] / self.den.coeffs[-1]
        z = complex(z)
        if abs(z) > HOMOGENEOUS_SWITCH:
            d = self.degree
            w = 1.0 / z
            top = P.polyval(w, self.num.padded(d + 1)[::-1])
            bottom = P.polyval(w, self.den.padded(d + 1)[::-1])
        else:
            top = P.polyval(z, self.num.array)
            bottom = P.polyval(z, self.den.array)
        if bottom == 0:
            return INFINITY
        return complex(top / bottom)

    def derivative(self, z: complex) -> complex:
        """f'(z) at a finite point; INFINITY at poles"""
        if is_infinite(z):
            raise OrbitHitsInfinity("derivative requested at infinity")
        q = complex(P.polyval(z, self.den.array))
        if q == 0:
            return INFINITY
        p = complex(P.polyval(z, self.num.array))
        dp = complex(P.polyval(z, poly_derivative(self.num).array)) if self.num.degree >= 1 else 0j
        dq = complex(P.polyval(z, poly_derivative(self.den).array)) if self.den.degree >= 1 else 0j
        return (dp * q - p * dq) / (q * q)

    def taylor(self, z0: complex, order: int) -> np.ndarray:
        """Taylor coefficients f^(k)(z0)/k!, k = 0..order"""
        num = taylor_coefficients(self.num, z0, order)
        den = taylor_coefficients(self.den, z0, order)
        if den[0] == 0:
            raise OrbitHitsInfinity(f"Taylor expansion requested at a pole {z0}")
        return series_divide(num, den)

    def velocity_jet(self, z0: complex, order: int) -> np.ndarray:
        """
        Taylor coefficients at z0 of the velocity of every unit coefficient perturbation

        Row j holds the j-th Taylor coefficient; column k is the coefficient
        slot of the vector layout (num_0..num_d, den_0..den_d). A direction
        dx moves the map with velocity (dP Q - P dQ) / Q^2.
        """
        d = self.degree
        n = order + 1
        den = taylor_coefficients(self.den, z0, order)
        if den[0] == 0:
            raise OrbitHitsInfinity(f"velocity requested at a pole {z0}")
        unit = np.zeros(n, dtype=complex)
        unit[0] = 1
        inv_q = series_divide(unit, den)
        inv_q2 = np.convolve(inv_q, inv_q)[:n]
        p_ser = taylor_coefficients(self.num, z0, order)

        jet = np.zeros((n, 2 * d + 2), dtype=complex)
        for k in range(d + 1):
            mono = taylor_coefficients(Poly.monomial(k), z0, order)
            jet[:, k] = np.convolve(mono, inv_q)[:n]
            jet[:, d + 1 + k] = -np.convolve(np.convolve(mono, p_ser)[:n], inv_q2)[:n]
        return jet

    def velocity(self, z0: complex, direction: np.ndarray) -> complex:
        """Value at z0 of the perturbation (dP Q - P dQ)/Q^2"""
        return complex(self.velocity_jet(z0, 0)[0] @ direction)

    def raw_conjugate(self, s: Moebius) -> Tuple[RatMap, np.ndarray]:
        """Unnormalized conjugate s o f o s^-1 and the coefficient map that produced it"""
        L = conjugation_matrix(s, self.degree)
        return RatMap.from_vector(L @ self.coefficient_vector(), self.degree), L

    def conjugate(self, s: Moebius, tol: Optional[float] = None) -> RatMap:
        g, _ = self.raw_conjugate(s)
        return RatMap.reduced(g.num, g.den, tol)

    def to_json(self) -> dict:
        return {
            'numerator': self.num.to_json(),
            'denominator': self.den.to_json(),
            'degree': self.degree,
        }


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    multiplicity: int
    radius: float = 0.0

    @property
    def at_infinity(self) -> bool:
        return is_infinite(self.location)


@dataclass(frozen=True)
class CriticalSet:
    """Distinct critical points c_1..c_nu with multiplicities"""

    points: Tuple[CriticalPoint, ...]
    tol: float = 1e-6

    @property
    def nu(self) -> int:
        return len(self.points)

    @property
    def locations(self) -> List[complex]:
        return [p.location for p in self.points]

    @property
    def multiplicities(self) -> List[int]:
        return [p.multiplicity for p in self.points]

    @property
    def total(self) -> int:
        return sum(self.multiplicities)

    @property
    def borderline(self) -> List[int]:
        """Indices (1-based) of clusters whose spread exceeds the tolerance"""
        return [
            idx + 1 for idx, p in enumerate(self.points)
            if not p.at_infinity and p.radius > self.tol * max(1.0, abs(p.location))
        ]

    def finite(self) -> CriticalSet:
        """The finite critical points, labels kept in order"""
        return CriticalSet(tuple(p for p in self.points if not p.at_infinity), self.tol)

    def transport(self, s: Moebius) -> CriticalSet:
        """Images under a Möbius map, same labels"""
        return CriticalSet(
            tuple(CriticalPoint(complex(s(p.location)), p.multiplicity, p.radius) for p in self.points),
            self.tol,
        )

    def to_json(self) -> List[dict]:
        out = []
        for p in self.points:
            loc = 'inf' if p.at_infinity else [p.location.real, p.location.imag]
            out.append({'location': loc, 'multiplicity': p.multiplicity})
        return out


def wronskian(f: RatMap, trim: float = 1e-12) -> Poly:
    """num' den - num den', with negligible leading coefficients dropped"""
    w = poly_derivative(f.num) * f.den - f.num * poly_derivative(f.den)
    coeffs = list(w.coeffs)
    if not coeffs:
        return Poly()
    scale = max(abs(c) for c in coeffs)
    while coeffs and abs(coeffs[-1]) <= trim * scale:
        coeffs.pop()
    return Poly(tuple(coeffs))


def critical_set(f: RatMap, tol: Optional[float] = None) -> CriticalSet:
    """
    Critical points of f with multiplicities

    Finite critical points are the root clusters of the Wronskian; the
    multiplicity at infinity is the degree deficit 2d - 2 - deg W.

    Args:
        f: Rational map
        tol: Clustering tolerance (Settings.ROOT_TOL)
    """
    tol = Settings.ROOT_TOL if tol is None else tol
    d = f.degree
    w = wronskian(f)
    if w.is_zero:
        raise MultiplicityMismatch("Wronskian vanishes identically")

    clusters: List[RootCluster] = poly_roots(w, tol) if w.degree >= 1 else []
    points = [CriticalPoint(cl.center, cl.multiplicity, cl.radius) for cl in clusters]
    at_infinity = 2 * d - 2 - w.degree
    if at_infinity < 0:
        raise MultiplicityMismatch(f"Wronskian degree {w.degree} exceeds 2d-2 = {2 * d - 2}")
    if at_infinity:
        points.append(CriticalPoint(INFINITY, at_infinity, 0.0))

    total = sum(p.multiplicity for p in points)
    if total != 2 * d - 2:
        raise MultiplicityMismatch(f"multiplicities sum to {total}, expected {2 * d - 2}")

    crit = CriticalSet(tuple(points), tol)
    if crit.borderline:
        logger.info(f"borderline critical clusters at tol={tol:g}: {crit.borderline}")
    return crit


@dataclass(frozen=True)
class OrbitScan:
    """Orbit points with the first steps that left the range of binary64"""

    points: List[complex]
    # step that reached infinity from beyond HOMOGENEOUS_SWITCH rather than from a pole
    overflow: Optional[int] = None
    # step whose modulus became subnormal
    underflow: Optional[int] = None

    @property
    def flagged(self) -> bool:
        return self.overflow is not None or self.underflow is not None


def scan_orbit(f: RatMap, z0, H: int) -> OrbitScan:
    """Orbit of z0 up to f^H(z0), flagging overflow and underflow"""
    if H < 0:
        raise PreconditionError("orbit length must be nonnegative")
    points = [complex(z0)]
    overflow = underflow = None
    for k in range(1, H + 1):
        prev = points[-1]
        z = complex(f(prev))
        if cmath.isnan(z):
            z = INFINITY
        if overflow is None and is_infinite(z) and not is_infinite(prev) and abs(prev) > HOMOGENEOUS_SWITCH:
            overflow = k
        if underflow is None and 0 < abs(z) < TINY:
            underflow = k
        points.append(z)
    return OrbitScan(points, overflow, underflow)


def orbit(f: RatMap, z0, H: int) -> List[complex]:
    """[z0, f(z0), ..., f^H(z0)]"""
    scan = scan_orbit(f, z0, H)
    if scan.flagged:
        logger.debug(f"orbit of {complex(z0):.6g}: overflow at step {scan.overflow}, underflow at step {scan.underflow}")
    return scan.points


def iterate_derivative(f: RatMap, z: complex, k: int) -> complex:
    """Chain rule derivative (f^k)'(z)"""
    result = 1 + 0j
    point = complex(z)
    for _ in range(k):
        if is_infinite(point):
            raise OrbitHitsInfinity(f"orbit of {z} reaches infinity")
        df = f.derivative(point)
        if is_infinite(df):
            raise OrbitHitsInfinity(f"orbit of {z} passes through a pole")
        result *= df
        point = f(point)
    return result


def cycle_multiplier(f: RatMap, cycle: Sequence[complex], seed: Optional[int] = None) -> complex:
    """(f^p)' along a cycle of period p; cycles through infinity are moved to a finite chart first"""
    if not cycle:
        raise PreconditionError("empty cycle")
    if any(is_infinite(p) for p in cycle):
        s = choose_conjugator(list(cycle), seed)
        f = f.conjugate(s)
        cycle = [s(p) for p in cycle]
    return iterate_derivative(f, cycle[0], len(cycle))


def continue_critical_point(g: RatMap, seed: complex, mu: int, tol: Optional[float] = None,
                            max_iter: Optional[int] = None) -> complex:
    """
    Follow a critical point of multiplicity mu to a nearby map by Newton on g^(mu) = 0

    Args:
        g: Perturbed map
        seed: Critical point of the unperturbed map
        mu: Multiplicity
    """
    tol = Settings.NEWTON_TOL if tol is None else tol
    max_iter = Settings.NEWTON_MAX_ITER if max_iter is None else max_iter
    zeta = complex(seed)
    for _ in range(max_iter):
        t = g.taylor(zeta, mu + 1)
        if t[mu + 1] == 0:
            raise NewtonDivergence(f"degenerate Newton step at {zeta}")
        step = t[mu] / ((mu + 1) * t[mu + 1])
        zeta -= step
        if abs(zeta - seed) > 0.1 * (1.0 + abs(seed)):
            raise NewtonDivergence(f"critical point continuation left the seed {seed}")
        if abs(step) <= tol * (1.0 + abs(zeta)):
            return zeta
    raise NewtonDivergence(f"critical point continuation from {seed} did not converge")


def critical_value_jet(g: RatMap, zeta: complex, mu: int) -> np.ndarray:
    """The coordinates zeta^0 = g(zeta), zeta^j = g^(j)(zeta) for j < mu"""
    values = np.empty(mu, dtype=complex)
    values[0] = g(zeta)
    if mu > 1:
        t = g.taylor(zeta, mu - 1)
        for j in range(1, mu):
            values[j] = factorial(j) * t[j]
    return values


@dataclass(frozen=True)
class Chart:
    """Coordinate slice of coefficient space given by unit or explicit directions"""

    name: str
    directions: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.directions.shape[0])


def _unit_rows(size: int, slots: Sequence[int]) -> np.ndarray:
    rows = np.zeros((len(slots), size), dtype=complex)
    for r, k in enumerate(slots):
        rows[r, k] = 1
    return rows


def rat_chart(f: RatMap) -> Chart:
    """Affine chart pinning the largest-modulus coefficient"""
    x = f.coefficient_vector()
    pin = int(np.argmax(np.abs(x)))
    return Chart('rat', _unit_rows(len(x), [k for k in range(len(x)) if k != pin]))


def poly_chart(f: RatMap) -> Chart:
    d = f.degree
    return Chart('poly', _unit_rows(2 * d + 2, range(d + 1)))


def monic_chart(f: RatMap) -> Chart:
    """z^d + a_(d-2) z^(d-2) + ... + a_0"""
    d = f.degree
    return Chart('monic', _unit_rows(2 * d + 2, range(d - 1)))


def family_chart(f: RatMap, spec: str) -> Chart:
    """
    Slice spanned by named coefficients, e.g. "num0" or "num0,den1"

    Args:
        f: Base map
        spec: Comma separated list of numK / denK slots
    """
    d = f.degree
    slots = []
    for token in spec.split(','):
        token = token.strip()
        for prefix, offset in (('num', 0), ('den', d + 1)):
            if token.startswith(prefix) and token[len(prefix):].isdigit():
                k = int(token[len(prefix):])
                if k > d:
                    raise PreconditionError(f"coefficient {token} exceeds degree {d}")
                slots.append(offset + k)
                break
        else:
            raise PreconditionError(f"unknown family coefficient: {token!r}")
    return Chart(f'family:{spec}', _unit_rows(2 * d + 2, slots))


def resolve_chart(f: RatMap, name: str = 'rat') -> Chart:
    """Chart by name: rat, poly, monic, family:<slots> or auto"""
    if name == 'auto':
        name = 'poly' if f.is_polynomial else 'rat'
    if name == 'rat':
        return rat_chart(f)
    if name in ('poly', 'monic'):
        if not f.is_polynomial:
            raise PreconditionError(f"chart {name!r} needs a polynomial map")
        return poly_chart(f) if name == 'poly' else monic_chart(f)
    if name.startswith('family:'):
        return family_chart(f, name[len('family:'):])
    raise PreconditionError(f"unsupported chart: {name}")


def project_to_chart(f: RatMap, vectors: np.ndarray) -> np.ndarray:
    """Remove the scaling component so the pinned coefficient is unchanged"""
    x = f.coefficient_vector()
    pin = int(np.argmax(np.abs(x)))
    vectors = np.atleast_2d(vectors)
    return vectors - np.outer(vectors[:, pin] / x[pin], x)


def moebius_directions(f: RatMap) -> np.ndarray:
    """
    Coefficient velocities of conjugation by the flows of 1, z and z^2

    Rows are in the (num, den) layout of f.coefficient_vector().
    """
    d = f.degree
    p = f.num.padded(d + 1)
    q = f.den.padded(d + 1)
    k = np.arange(d + 1)
    dp = np.zeros(d + 1, dtype=complex)
    dq = np.zeros(d + 1, dtype=complex)
    dp[:-1] = p[1:] * k[1:]
    dq[:-1] = q[1:] * k[1:]

    # v = 1: f(z - t) + t
    translate = np.concatenate([q - dp, -dq])
    # v = z: e^t f(e^-t z)
    scale = np.concatenate([(1 - k) * p, -k * q])
    # v = z^2: the degree d+1 terms vanish identically
    bend_p = np.zeros(d + 1, dtype=complex)
    bend_q = np.zeros(d + 1, dtype=complex)
    bend_p[1:] = ((d - k) * p)[:-1]
    bend_q[1:] = ((d - k) * q)[:-1]
    bend = np.concatenate([bend_p, bend_q - p])
    return np.vstack([translate, scale, bend])


def affine_directions(f: RatMap) -> np.ndarray:
    """Translation and scaling conjugation directions (polynomial charts)"""
    return moebius_directions(f)[:2]


def choose_conjugator(points: Sequence[complex], seed: Optional[int] = None,
                      attempts: int = 64) -> Moebius:
    """
    Möbius map z0 z / (z0 - z) with z0 on a large circle, away from the given points

    Args:
        points: Orbit points that must stay finite after conjugation
        seed: Seed for the angle of z0
    """
    seed = Settings.SEED if seed is None else seed
    finite = [abs(p) for p in points if not is_infinite(p)]
    radius = 4.0 * (1.0 + max(finite, default=0.0))
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        z0 = radius * np.exp(1j * rng.uniform(0, 2 * np.pi))
        if not points or np.min(chordal_distance(z0, np.array(points, dtype=complex))) > 1e-3:
            logger.debug(f"conjugating with pole z0 = {z0:.6g}")
            return Moebius.from_pole(complex(z0))
    raise PreconditionError("could not place the conjugating pole away from the orbit")


@dataclass(frozen=True)
class TangentBasis:
    """Directions spanning the tangent space of Rat^mu at f, in f's coefficient layout"""

    chart: Chart
    directions: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.directions.shape[0])

    def contains(self, vectors: np.ndarray) -> float:
        """Relative distance of the given vectors from the span"""
        vectors = np.atleast_2d(vectors)
        coeffs, *_ = linalg.lstsq(self.directions.T, vectors.T)
        residual = vectors.T - self.directions.T @ coeffs
        norms = np.maximum(np.linalg.norm(vectors, axis=1), np.finfo(float).tiny)
        return float(np.max(np.linalg.norm(residual, axis=0) / norms))


def multiplicity_constraints(g: RatMap, crit: CriticalSet) -> np.ndarray:
    """Rows (g-dot)^(j)(c_i), 1 <= j < mu_i, keeping the multiplicities of the critical points"""
    rows = []
    for p in crit.points:
        if p.multiplicity < 2:
            continue
        jet = g.velocity_jet(p.location, p.multiplicity - 1)
        for j in range(1, p.multiplicity):
            rows.append(factorial(j) * jet[j])
    d = g.degree
    return np.array(rows, dtype=complex).reshape(-1, 2 * d + 2)


def _kernel_in_chart(constraints: np.ndarray, chart: Chart) -> np.ndarray:
    if constraints.shape[0] == 0:
        return chart.directions.copy()
    restricted = constraints @ chart.directions.T
    row_norms = np.linalg.norm(restricted, axis=1, keepdims=True)
    restricted = restricted / np.where(row_norms > 0, row_norms, 1.0)
    _, s, vh = linalg.svd(restricted)
    rank, _ = certified_rank(s, shape=restricted.shape)
    return vh[rank:].conj() @ chart.directions


def _needs_conjugation(f: RatMap, crit: CriticalSet, multiple_only: bool = False) -> bool:
    for p in crit.points:
        if multiple_only and p.multiplicity < 2:
            continue
        if p.at_infinity or is_infinite(f(p.location)):
            return True
    return False


def tangent_basis_ratmu(f: RatMap, crit: Optional[CriticalSet] = None,
                        seed: Optional[int] = None) -> TangentBasis:
    """
    Basis of the tangent space of Rat^mu at f inside the pinned affine chart

    Raises:
        DimensionMismatch: when the kernel dimension is not nu + 3
    """
    crit = critical_set(f) if crit is None else crit
    chart = rat_chart(f)

    if _needs_conjugation(f, crit, multiple_only=True):
        s = choose_conjugator(crit.locations, seed)
        g, L = f.raw_conjugate(s)
        g_crit = crit.transport(s)
        kernel = _kernel_in_chart(multiplicity_constraints(g, g_crit), rat_chart(g))
        directions = project_to_chart(f, linalg.solve(L, kernel.T).T)
    else:
        directions = _kernel_in_chart(multiplicity_constraints(f, crit), chart)

    if directions.shape[0] != crit.nu + 3:
        raise DimensionMismatch(
            f"tangent space has dimension {directions.shape[0]}, expected nu + 3 = {crit.nu + 3}")
    return TangentBasis(chart, directions)


def tangent_basis_pol(f: RatMap, chart_name: str = 'poly', crit: Optional[CriticalSet] = None) -> TangentBasis:
    """
    Tangent space of the polynomials with the multiplicities of f

    The poly chart has dimension nu_fin + 2, the monic chart nu_fin.
    """
    if not f.is_polynomial:
        raise PreconditionError("polynomial chart needs a polynomial map")
    crit = (critical_set(f) if crit is None else crit).finite()
    chart = resolve_chart(f, chart_name)
    directions = _kernel_in_chart(multiplicity_constraints(f, crit), chart)
    expected = crit.nu + (2 if chart_name == 'poly' else 0)
    if directions.shape[0] != expected:
        raise DimensionMismatch(
            f"{chart_name} tangent space has dimension {directions.shape[0]}, expected {expected}")
    return TangentBasis(chart, directions)


def g_map_jacobian(f: RatMap, chart: str = 'rat', method: str = 'difference',
                   crit: Optional[CriticalSet] = None, step: Optional[float] = None,
                   seed: Optional[int] = None) -> np.ndarray:
    """
    Jacobian of g -> (zeta_i^j(g)), 1 <= i <= nu, 0 <= j < mu_i, along chart directions

    Args:
        f: Map in Rat^mu
        chart: Chart name (see resolve_chart)
        method: 'difference' (Newton continuation and central differences)
            or 'closed' (derivatives of the coefficient velocity)
        crit: Critical set of f, computed when omitted
        step: Relative finite difference step (Settings.FD_STEP)
        seed: Seed for the conjugating pole

    Returns:
        (2d-2) x (chart dimension) complex matrix
    """
    crit = critical_set(f) if crit is None else crit
    directions = resolve_chart(f, chart).directions
    d = f.degree
    x = f.coefficient_vector()

    if _needs_conjugation(f, crit):
        s = choose_conjugator(crit.locations + [f(c) for c in crit.locations], seed)
        g, L = f.raw_conjugate(s)
        g_crit = crit.transport(s)
    else:
        g, L, g_crit = f, np.eye(2 * d + 2, dtype=complex), crit

    if method == 'closed':
        rows = []
        for p in g_crit.points:
            jet = g.velocity_jet(p.location, p.multiplicity - 1)
            for j in range(p.multiplicity):
                rows.append(factorial(j) * jet[j])
        return np.array(rows) @ L @ directions.T
    if method != 'difference':
        raise PreconditionError(f"unknown differentiation method: {method}")

    h = (Settings.FD_STEP if step is None else step) * float(np.max(np.abs(x)))

    def values(vector: np.ndarray) -> np.ndarray:
        moved = RatMap.from_vector(L @ vector, d)
        out = []
        for p in g_crit.points:
            zeta = continue_critical_point(moved, p.location, p.multiplicity)
            out.extend(critical_value_jet(moved, zeta, p.multiplicity))
        return np.array(out)

    def central(direction: np.ndarray, t: float) -> np.ndarray:
        return (values(x + t * direction) - values(x - t * direction)) / (2 * t)

    columns = []
    for direction in directions:
        coarse = central(direction, h)
        fine = central(direction, h / 2)
        columns.append((4 * fine - coarse) / 3)
    return np.column_stack(columns)
