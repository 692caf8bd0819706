"""
Quadratic Differential Module
Simple-pole quadratic differentials, relation differentials and the push-forward operator
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .algebra import (
    INFINITY,
    Moebius,
    Poly,
    chordal_distance,
    is_infinite,
    poly_roots,
)
from .config import Settings
from .errors import (
    CriticalValue,
    NearPole,
    OrbitHitsInfinity,
    PreconditionError,
    PreimageAtPoleOfQ,
    RelationNotRealized,
)
from .ratmap import CriticalSet, RatMap, critical_set, iterate_derivative, orbit
from .relations import CriticalRelation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadDiff:
    """q(z) dz^2 with q(z) = sum of residue / (z - pole)"""

    poles: Tuple[complex, ...] = ()
    residues: Tuple[complex, ...] = ()
    relations: Tuple[CriticalRelation, ...] = field(default=(), compare=False)

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[complex, complex]],
                   relations: Sequence[CriticalRelation] = (),
                   merge_tol: float = 1e-9, drop: float = 1e-12) -> QuadDiff:
        """
        Build from (pole, residue) pairs

        Residues at coincident poles are summed; residues that cancel down
        to round-off are dropped.
        """
        terms = [(complex(p), complex(a)) for p, a in terms]
        scale = max((abs(a) for _, a in terms), default=0.0)
        poles: List[complex] = []
        residues: List[complex] = []
        for p, a in terms:
            for idx, q in enumerate(poles):
                if abs(p - q) <= merge_tol * max(1.0, abs(q)):
                    residues[idx] += a
                    break
            else:
                poles.append(p)
                residues.append(a)
        kept = [(p, a) for p, a in zip(poles, residues) if abs(a) > drop * scale]
        return cls(tuple(p for p, _ in kept), tuple(a for _, a in kept), tuple(relations))

    @property
    def terms(self) -> List[Tuple[complex, complex]]:
        return list(zip(self.poles, self.residues))

    @property
    def is_zero(self) -> bool:
        return not self.poles

    def __call__(self, z: complex) -> complex:
        return qd_eval(self, z)

    def __add__(self, other: QuadDiff) -> QuadDiff:
        return QuadDiff.from_terms(self.terms + other.terms, self.relations + other.relations)

    def scaled(self, factor: complex) -> QuadDiff:
        return QuadDiff.from_terms([(p, factor * a) for p, a in self.terms], self.relations)

    def normalized(self) -> QuadDiff:
        """Scaled so the largest residue has modulus one"""
        if self.is_zero:
            return self
        pivot = max(self.residues, key=abs)
        return self.scaled(1 / pivot)

    def transport(self, s: Moebius) -> QuadDiff:
        """Push forward by an affine map s(z) = alpha z + beta"""
        if not s.fixes_infinity:
            raise PreconditionError("only affine maps transport simple-pole differentials")
        alpha = s.a / s.d
        return QuadDiff.from_terms([(s(p), a / alpha) for p, a in self.terms], self.relations)

    def to_json(self) -> dict:
        return {
            'terms': [[[p.real, p.imag], [a.real, a.imag]] for p, a in self.terms],
            'relations': [r.to_json() for r in self.relations],
        }


def qd_eval(q: QuadDiff, z: complex, tol: float = 1e-9) -> complex:
    """Sum of residue / (z - pole)"""
    z = complex(z)
    total = 0j
    for p, a in q.terms:
        if abs(z - p) <= tol * max(1.0, abs(p)):
            raise NearPole(f"{z} is within {tol:g} of the pole {p}")
        total += a / (z - p)
    return total


def _orbit_terms(f: RatMap, c: complex, m: int, sign: int) -> List[Tuple[complex, complex]]:
    points = orbit(f, c, m)
    terms = []
    for r in range(1, m + 1):
        if is_infinite(points[r]):
            raise OrbitHitsInfinity(f"f^{r} of the critical point {c} is infinite")
        terms.append((points[r], sign * iterate_derivative(f, points[r], m - r)))
    return terms


def q_relation(f: RatMap, rel: CriticalRelation, crit: Optional[CriticalSet] = None) -> QuadDiff:
    """
    The relation differential: poles f^r(c_i), r = 1..m, with residues
    Df^(m-r)(f^r(c_i)), minus the same sum for (j, n)
    """
    crit = critical_set(f) if crit is None else crit
    if max(rel.i, rel.j) > crit.nu:
        raise PreconditionError(f"{rel} refers to a critical point beyond nu = {crit.nu}")
    c_i, c_j = crit.locations[rel.i - 1], crit.locations[rel.j - 1]
    terms = _orbit_terms(f, c_i, rel.m, +1) + _orbit_terms(f, c_j, rel.n, -1)
    return QuadDiff.from_terms(terms, (rel,))


def q_relation_reduced(f: RatMap, rel: CriticalRelation, crit: Optional[CriticalSet] = None,
                       tol: float = 1e-8) -> QuadDiff:
    """Relation differential of a realized relation with the last terms of both sums cancelled"""
    if rel.m < 1 or rel.n < 1:
        raise PreconditionError(f"reduced form needs m, n >= 1: {rel}")
    crit = critical_set(f) if crit is None else crit
    c_i, c_j = crit.locations[rel.i - 1], crit.locations[rel.j - 1]
    end_i = orbit(f, c_i, rel.m)[-1]
    end_j = orbit(f, c_j, rel.n)[-1]
    if chordal_distance(end_i, end_j) > tol:
        raise RelationNotRealized(f"{rel} is not realized: {end_i} != {end_j}")
    terms = _orbit_terms(f, c_i, rel.m, +1)[:-1] + _orbit_terms(f, c_j, rel.n, -1)[:-1]
    return QuadDiff.from_terms(terms, (rel,))


def preimages(f: RatMap, z: complex, tol: Optional[float] = None) -> List[complex]:
    """
    The d preimages of z, INFINITY counted for the degree deficit of num - z den

    Raises:
        CriticalValue: when a preimage is multiple
    """
    d = f.degree
    equation = Poly(tuple(f.num.padded(d + 1) - complex(z) * f.den.padded(d + 1)))
    points: List[complex] = []
    if equation.degree >= 1:
        for cl in poly_roots(equation, tol):
            if cl.multiplicity > 1:
                raise CriticalValue(f"{z} is a critical value (multiple preimage {cl.center})")
            points.append(cl.center)
    points.extend([INFINITY] * (d - len(points)))
    return points


QLike = Union[QuadDiff, Callable[[complex], complex]]


def pushforward_eval(f: RatMap, q: QLike, z: complex, tol: float = 1e-8) -> complex:
    """
    Thurston push-forward: sum over preimages w of q(w) / f'(w)^2

    Preimages at infinity are not evaluated in the 1/z chart. The
    differentials built here have simple poles, so q dz^2 has a pole at
    infinity unless its three moments vanish, and PreimageAtPoleOfQ is raised.

    Args:
        f: Rational map
        q: QuadDiff or any callable returning the coefficient of dz^2
        z: Regular value of f
        tol: Lower bound on |f'(w)|
    """
    total = 0j
    for w in preimages(f, z):
        if is_infinite(w):
            raise PreimageAtPoleOfQ(f"{z} = f(infinity); infinity is a pole of q dz^2")
        df = f.derivative(w)
        if is_infinite(df) or abs(df) < tol:
            raise CriticalValue(f"|f'({w})| = {abs(df):.2e} at a preimage of {z}")
        try:
            value = qd_eval(q, w) if isinstance(q, QuadDiff) else complex(q(w))
        except NearPole as e:
            raise PreimageAtPoleOfQ(str(e))
        total += value / (df * df)
    return total


def invariance_residual(f: RatMap, q: QLike, samples: Sequence[complex]) -> float:
    """max |f_* q - q| over samples, divided by max |q| (absolute when q vanishes)"""
    pushed = np.array([pushforward_eval(f, q, z) for z in samples])
    values = np.array([qd_eval(q, z) if isinstance(q, QuadDiff) else complex(q(z)) for z in samples])
    scale = float(np.max(np.abs(values))) if len(values) else 0.0
    mismatch = float(np.max(np.abs(pushed - values))) if len(values) else 0.0
    return mismatch / scale if scale > 0 else mismatch


def infinity_moments(q: QuadDiff) -> Tuple[complex, complex, complex]:
    """(sum a, sum a p, sum a p^2); q is O(1/z^4) at infinity iff all vanish"""
    poles = np.array(q.poles, dtype=complex)
    residues = np.array(q.residues, dtype=complex)
    return tuple(complex(np.sum(residues * poles ** k)) for k in range(3))


def integrable_at_infinity(q: QuadDiff, tol: float = 1e-6) -> bool:
    """Moments small relative to the residue scale"""
    if q.is_zero:
        return True
    moments = infinity_moments(q)
    weights = [sum(abs(a) * max(1.0, abs(p)) ** k for p, a in q.terms) for k in range(3)]
    return all(abs(m) <= tol * w for m, w in zip(moments, weights))


def postcritical_barycenter(points: Iterable[complex]) -> complex:
    finite = [complex(p) for p in points if not is_infinite(p)]
    return complex(np.mean(finite)) if finite else 0j


def sample_points(center: complex = 0j, count: Optional[int] = None,
                  radii: Optional[Sequence[float]] = None, seed: Optional[int] = None,
                  avoid: Sequence[complex] = (), clearance: float = 1e-2) -> List[complex]:
    """
    Deterministically jittered points on circles around a center

    Points closer than clearance (relative) to any avoided point are redrawn.
    """
    count = Settings.SAMPLES if count is None else count
    radii = Settings.SAMPLE_RADII if radii is None else radii
    seed = Settings.SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    avoid = [complex(p) for p in avoid if not is_infinite(p)]

    per_circle = [count // len(radii) + (1 if k < count % len(radii) else 0) for k in range(len(radii))]
    samples = []
    for radius, n in zip(radii, per_circle):
        for k in range(n):
            for _ in range(32):
                angle = 2 * np.pi * (k + 0.5 + rng.uniform(-0.3, 0.3)) / max(n, 1)
                z = complex(center + radius * (1 + 0.05 * rng.uniform(-1, 1)) * np.exp(1j * angle))
                if all(abs(z - p) > clearance * max(1.0, abs(p)) for p in avoid):
                    break
            samples.append(z)
    return samples


def regular_samples(f: RatMap, q: QuadDiff, crit: CriticalSet, count: Optional[int] = None,
                    seed: Optional[int] = None, center: Optional[complex] = None) -> List[complex]:
    """Samples around the postcritical barycenter avoiding poles of q and critical values of f"""
    values = [f(c) for c in crit.locations]
    if center is None:
        center = postcritical_barycenter(list(q.poles) + values)
    avoid = list(q.poles) + values + [f(INFINITY)]
    return sample_points(center, count, seed=seed, avoid=avoid, clearance=5e-2)
