"""
Algebra Module
Complex polynomials, rational function pairs, root clusters and Möbius maps
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field
from math import factorial
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .config import Settings
from .errors import (
    DegenerateMoebius,
    NonConvergence,
    UncertifiableRank,
    ZeroDenominator,
    ZeroPolynomial,
)

logger = logging.getLogger(__name__)

# The point at infinity of the Riemann sphere
INFINITY = complex('inf')

EPS = np.finfo(float).eps


def is_infinite(z) -> bool:
    """True for the point at infinity"""
    return cmath.isinf(complex(z))


def chordal_distance(z, w):
    """
    Chordal distance on the sphere, |z-w| / (sqrt(1+|z|^2) sqrt(1+|w|^2))

    Works elementwise on arrays; infinity is a regular point.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z_inf = np.isinf(z)
    w_inf = np.isinf(w)
    zf = np.where(z_inf, 0, z)
    wf = np.where(w_inf, 0, w)
    rho_z = np.hypot(1.0, np.abs(zf))
    rho_w = np.hypot(1.0, np.abs(wf))
    with np.errstate(over='ignore', invalid='ignore'):
        finite = (np.abs(zf - wf) / rho_z) / rho_w
    d = np.where(
        z_inf & w_inf, 0.0,
        np.where(z_inf, 1.0 / rho_w, np.where(w_inf, 1.0 / rho_z, finite)),
    )
    return float(d) if d.ndim == 0 else d


def _sort_key(z: complex) -> Tuple[float, float]:
    # Real part descending, then imaginary part descending
    return (-round(z.real, 9), -round(z.imag, 9))


@dataclass(frozen=True)
class Poly:
    """Polynomial with ascending complex coefficients, trailing zeros stripped"""

    coeffs: Tuple[complex, ...] = ()

    def __post_init__(self):
        values = [complex(c) for c in self.coeffs]
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, 'coeffs', tuple(values))

    @classmethod
    def constant(cls, value: complex) -> Poly:
        return cls((value,))

    @classmethod
    def monomial(cls, k: int, value: complex = 1) -> Poly:
        return cls((0,) * k + (value,))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: complex = 1) -> Poly:
        return cls(tuple(leading * P.polyfromroots(list(roots)))) if roots else cls((leading,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def padded(self, length: int) -> np.ndarray:
        """Coefficient array padded with zeros to the given length"""
        out = np.zeros(length, dtype=complex)
        out[:len(self.coeffs)] = self.coeffs
        return out

    def scale(self) -> float:
        """Largest coefficient modulus"""
        return float(np.max(np.abs(self.array))) if self.coeffs else 0.0

    def __add__(self, other: Poly) -> Poly:
        return Poly(tuple(P.polyadd(self.array if self.coeffs else [0], other.array if other.coeffs else [0])))

    def __sub__(self, other: Poly) -> Poly:
        return Poly(tuple(P.polysub(self.array if self.coeffs else [0], other.array if other.coeffs else [0])))

    def __mul__(self, other) -> Poly:
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly()
            return Poly(tuple(P.polymul(self.array, other.array)))
        return Poly(tuple(complex(other) * self.array))

    __rmul__ = __mul__

    def __call__(self, z):
        return poly_eval(self, z)

    def to_json(self) -> List[List[float]]:
        return [[c.real, c.imag] for c in self.coeffs]


@dataclass(frozen=True)
class RootCluster:
    """A root of a polynomial together with its multiplicity"""

    center: complex
    multiplicity: int
    radius: float = 0.0


RationalFnPair = Tuple[Poly, Poly]


def poly_eval(p: Poly, z):
    """
    Evaluate a polynomial on the extended plane

    Args:
        p: Polynomial
        z: Complex number or INFINITY

    Returns:
        p(z); INFINITY at infinity when deg p >= 1
    """
    if p.is_zero:
        return 0j
    if is_infinite(z):
        return INFINITY if p.degree >= 1 else p.coeffs[0]
    return complex(P.polyval(complex(z), p.array))


def poly_derivative(p: Poly) -> Poly:
    if p.degree < 1:
        return Poly()
    return Poly(tuple(P.polyder(p.array)))


def taylor_coefficients(p: Poly, z0: complex, order: int) -> np.ndarray:
    """Taylor coefficients p^(k)(z0)/k! for k = 0..order"""
    out = np.zeros(order + 1, dtype=complex)
    coeffs = p.array
    for k in range(order + 1):
        if len(coeffs) == 0 or k > p.degree:
            break
        out[k] = P.polyval(z0, coeffs) / factorial(k)
        coeffs = P.polyder(coeffs)
    return out


def series_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Coefficients of the power series num/den, truncated to len(num)"""
    if den[0] == 0:
        raise ZeroDenominator("series denominator vanishes at the expansion point")
    out = np.zeros(len(num), dtype=complex)
    for k in range(len(num)):
        acc = num[k]
        for l in range(1, min(k, len(den) - 1) + 1):
            acc -= den[l] * out[k - l]
        out[k] = acc / den[0]
    return out


def _aberth(coeffs: np.ndarray, max_iter: int) -> Tuple[np.ndarray, np.ndarray]:
    """Simultaneous Aberth-Ehrlich iteration on a monic ascending polynomial"""
    n = len(coeffs) - 1
    radius = 1.0 + float(np.max(np.abs(coeffs[:-1])))
    # Start on the Cauchy circle with an offset so no start sits on the real axis
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    dcoeffs = P.polyder(coeffs)
    abs_coeffs = np.abs(coeffs)

    for _ in range(max_iter):
        pz = P.polyval(z, coeffs)
        scale = P.polyval(np.abs(z), abs_coeffs)
        if np.all(np.abs(pz) <= 4 * n * EPS * scale):
            break
        dpz = P.polyval(z, dcoeffs)
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(dpz != 0, pz / dpz, pz)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            delta = ratio / (1.0 - ratio * inv.sum(axis=1))
        delta = np.where(np.isfinite(delta), delta, ratio)
        z = z - delta
        if np.all(np.abs(delta) <= 2 * EPS * (1.0 + np.abs(z))):
            break

    residuals = np.abs(P.polyval(z, coeffs)) / P.polyval(np.abs(z), abs_coeffs)
    return z, residuals


def _newton_polish(z: complex, coeffs: np.ndarray, steps: int = 3) -> complex:
    dcoeffs = P.polyder(coeffs)
    best, best_res = z, abs(P.polyval(z, coeffs))
    for _ in range(steps):
        d = P.polyval(best, dcoeffs)
        if d == 0:
            break
        candidate = best - P.polyval(best, coeffs) / d
        res = abs(P.polyval(candidate, coeffs))
        if res >= best_res:
            break
        best, best_res = candidate, res
    return complex(best)


def _is_multiple_root(coeffs: np.ndarray, center: complex, k: int) -> bool:
    # All Taylor coefficients below order k vanish relative to the coefficient scale
    scale = P.polyval(max(1.0, abs(center)), np.abs(coeffs))
    taylor = taylor_coefficients(Poly(tuple(coeffs)), center, k - 1)
    return bool(np.all(np.abs(taylor) <= 1e-9 * scale))


def _greedy_clusters(points: List[complex], tol: float) -> List[List[complex]]:
    groups: List[List[complex]] = []
    centers: List[complex] = []
    for z in sorted(points, key=_sort_key):
        for idx, c in enumerate(centers):
            if abs(z - c) <= tol * max(1.0, abs(c)):
                groups[idx].append(z)
                centers[idx] = complex(np.mean(groups[idx]))
                break
        else:
            groups.append([z])
            centers.append(z)
    return groups


def _components(points: np.ndarray, radius: float) -> List[List[int]]:
    # Single-linkage components at a relative radius
    n = len(points)
    labels = list(range(n))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(points[i]), abs(points[j]))
            if abs(points[i] - points[j]) <= radius * scale:
                labels[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def poly_roots(p: Poly, tol: Optional[float] = None, max_iter: Optional[int] = None) -> List[RootCluster]:
    """
    Roots of a polynomial grouped into clusters with multiplicities

    Args:
        p: Polynomial of degree >= 1
        tol: Relative clustering tolerance (Settings.ROOT_TOL)
        max_iter: Aberth iteration budget (Settings.ROOT_MAX_ITER)

    Returns:
        Clusters sorted by real part then imaginary part, descending
    """
    tol = Settings.ROOT_TOL if tol is None else tol
    max_iter = Settings.ROOT_MAX_ITER if max_iter is None else max_iter
    if p.is_zero:
        raise ZeroPolynomial("cannot take roots of the zero polynomial")
    if p.degree < 1:
        raise ZeroPolynomial(f"constant polynomial {p.coeffs[0]} has no roots")

    coeffs = p.array
    # Exact zero roots are deflated first
    zeros = 0
    while coeffs[zeros] == 0:
        zeros += 1
    reduced = coeffs[zeros:] / coeffs[-1]

    clusters: List[RootCluster] = []
    if zeros:
        clusters.append(RootCluster(0j, zeros, 0.0))
    if len(reduced) > 1:
        if len(reduced) == 2:
            roots, residuals = np.array([-reduced[0]]), np.zeros(1)
        else:
            roots, residuals = _aberth(reduced, max_iter)
        if np.any(residuals > 1e-8) or not np.all(np.isfinite(roots)):
            raise NonConvergence(
                f"Aberth iteration did not converge for degree {p.degree}", residuals)

        for members in _components(roots, 1e-3):
            pts = roots[members]
            if len(pts) == 1:
                z = _newton_polish(complex(pts[0]), reduced)
                clusters.append(RootCluster(z, 1, 0.0))
                continue
            center = complex(np.mean(pts))
            if _is_multiple_root(reduced, center, len(pts)):
                radius = float(np.max(np.abs(pts - center)))
                if radius > tol * max(1.0, abs(center)):
                    logger.debug(f"multiple root {center:.6g} accepted with spread {radius:.2e}")
                clusters.append(RootCluster(center, len(pts), radius))
                continue
            for group in _greedy_clusters(list(pts), tol):
                c = complex(np.mean(group))
                if len(group) == 1:
                    c = _newton_polish(c, reduced)
                radius = float(max(abs(g - c) for g in group))
                clusters.append(RootCluster(c, len(group), radius))

    clusters.sort(key=lambda cl: _sort_key(cl.center))
    return clusters


@dataclass(frozen=True)
class Moebius:
    """Möbius transformation z -> (az + b) / (cz + d)"""

    a: complex
    b: complex
    c: complex
    d: complex
    tol: float = field(default=1e-12, compare=False, repr=False)

    def __post_init__(self):
        for name in ('a', 'b', 'c', 'd'):
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(self.det) <= self.tol * scale * scale:
            raise DegenerateMoebius(f"ad - bc = {self.det} is degenerate")

    @classmethod
    def identity(cls) -> Moebius:
        return cls(1, 0, 0, 1)

    @classmethod
    def translation(cls, shift: complex) -> Moebius:
        return cls(1, shift, 0, 1)

    @classmethod
    def inversion(cls) -> Moebius:
        return cls(0, 1, 1, 0)

    @classmethod
    def from_pole(cls, z0: complex) -> Moebius:
        """The map z -> z0 z / (z0 - z), which sends z0 to infinity"""
        return cls(z0, 0, -1, z0)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def fixes_infinity(self) -> bool:
        return self.c == 0

    def __call__(self, z):
        if is_infinite(z):
            return INFINITY if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        if den == 0:
            return INFINITY
        return (self.a * z + self.b) / den

    def inverse(self) -> Moebius:
        return Moebius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: Moebius) -> Moebius:
        """self after other"""
        return Moebius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def derivative(self, z: complex) -> complex:
        return self.det / (self.c * z + self.d) ** 2

    def to_json(self) -> List[List[float]]:
        return [[v.real, v.imag] for v in (self.a, self.b, self.c, self.d)]


def _binomial_form(d: int, k: int, s_inv: Moebius) -> np.ndarray:
    # (d z - b)^k (-c z + a)^(d-k) for the inverse map written as (d z - b)/(-c z + a)
    top = np.array([s_inv.b, s_inv.a], dtype=complex)
    bottom = np.array([s_inv.d, s_inv.c], dtype=complex)
    form = P.polymul(P.polypow(top, k), P.polypow(bottom, d - k))
    out = np.zeros(d + 1, dtype=complex)
    out[:len(form)] = form
    return out


def conjugation_matrix(s: Moebius, d: int) -> np.ndarray:
    """
    Linear map on raw coefficient vectors taking (P, Q) to the
    coefficients of s o (P/Q) o s^-1, both padded to length d+1

    The vector layout is (num_0..num_d, den_0..den_d).
    """
    s_inv = s.inverse()
    forms = np.column_stack([_binomial_form(d, k, s_inv) for k in range(d + 1)])
    top = np.hstack([s.a * forms, s.b * forms])
    bottom = np.hstack([s.c * forms, s.d * forms])
    return np.vstack([top, bottom])


def normalize_pair(num: Poly, den: Poly) -> RationalFnPair:
    """Scale so the largest-modulus coefficient equals 1"""
    values = np.concatenate([num.array, den.array])
    pivot = values[np.argmax(np.abs(values))]
    return Poly(tuple(num.array / pivot)), Poly(tuple(den.array / pivot))


def ratfn_reduce(num: Poly, den: Poly, tol: Optional[float] = None) -> RationalFnPair:
    """
    Cancel common roots of a numerator and denominator and normalize

    Args:
        num: Numerator
        den: Denominator, not identically zero
        tol: Relative pairing distance for common roots

    Returns:
        Coprime pair with largest-modulus coefficient 1
    """
    tol = Settings.ROOT_TOL if tol is None else tol
    if den.is_zero:
        raise ZeroDenominator("denominator is identically zero")
    if num.is_zero:
        return Poly(), Poly.constant(1)

    if num.degree >= 1 and den.degree >= 1:
        den_clusters = poly_roots(den, tol)
        num_array, den_array = num.array, den.array
        for cl in poly_roots(num, tol):
            for other in den_clusters:
                if abs(cl.center - other.center) <= tol * max(1.0, abs(cl.center)):
                    root = (cl.center + other.center) / 2
                    k = min(cl.multiplicity, other.multiplicity)
                    factor = P.polypow(np.array([-root, 1], dtype=complex), k)
                    num_array = P.polydiv(num_array, factor)[0]
                    den_array = P.polydiv(den_array, factor)[0]
                    logger.debug(f"cancelled common root {root:.6g} of multiplicity {k}")
                    break
        num, den = Poly(tuple(num_array)), Poly(tuple(den_array))

    return normalize_pair(num, den)


def moebius_conjugate(f: RationalFnPair, s: Moebius, tol: Optional[float] = None) -> RationalFnPair:
    """
    Coefficients of s o f o s^-1 in reduced form

    Args:
        f: (numerator, denominator) pair
        s: Invertible Möbius map
        tol: Tolerance passed to ratfn_reduce
    """
    num, den = f
    d = max(num.degree, den.degree)
    x = np.concatenate([num.padded(d + 1), den.padded(d + 1)])
    y = conjugation_matrix(s, d) @ x
    return ratfn_reduce(Poly(tuple(y[:d + 1])), Poly(tuple(y[d + 1:])), tol)


@dataclass(frozen=True)
class RankDecision:
    """Certified rank with the rule that decided it"""

    rank: int
    gap: float
    # 'gap': a ratio s_k / s_k+1 reached the threshold
    # 'cutoff': full rank, every value above cutoff * s_max, nothing left to separate
    # 'zero': empty or zero matrix
    path: str


def rank_decision(singular_values: Sequence[float], gap_threshold: Optional[float] = None,
                  cutoff: Optional[float] = None, shape: Optional[Tuple[int, int]] = None) -> RankDecision:
    """
    Numerical rank read from a decisive singular value gap

    Args:
        singular_values: Descending singular values
        gap_threshold: Minimum ratio s_k / s_k+1 accepted as a gap
        cutoff: Relative size above which every value counts (full rank fallback)
        shape: Matrix shape, used for the round-off floor

    Raises:
        UncertifiableRank: no gap and some value below the cutoff
    """
    gap_threshold = Settings.GAP_THRESHOLD if gap_threshold is None else gap_threshold
    cutoff = Settings.RANK_CUTOFF if cutoff is None else cutoff
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0:
        return RankDecision(0, float('inf'), 'zero')

    # Values at round-off level count as exact zeros
    floor = s[0] * EPS * (max(shape) if shape else s.size)
    s = np.where(s <= floor, 0.0, s)
    nonzero = int(np.count_nonzero(s))
    with np.errstate(divide='ignore'):
        ratios = s[:nonzero] / s[1:nonzero + 1] if nonzero < s.size else s[:-1] / s[1:]
    if ratios.size and np.max(ratios) >= gap_threshold:
        k = int(np.argmax(ratios))
        return RankDecision(k + 1, float(ratios[k]), 'gap')
    if np.all(s > cutoff * s[0]):
        return RankDecision(int(s.size), float('inf'), 'cutoff')
    raise UncertifiableRank(
        f"no singular value gap of {gap_threshold:g} found", singular_values)


def certified_rank(singular_values: Sequence[float], gap_threshold: Optional[float] = None,
                   cutoff: Optional[float] = None, shape: Optional[Tuple[int, int]] = None) -> Tuple[int, float]:
    """(rank, gap) of rank_decision; gap is inf when no value was dropped"""
    decision = rank_decision(singular_values, gap_threshold, cutoff, shape)
    return decision.rank, decision.gap
