"""
Bound-state condensates on band systems of iℝ⁺.

With w = iy the squared radical is D(y) = Π(e² − y²) over the band
endpoints e, and the monic polynomial P reduces to a real polynomial
p(y) = P(iy)/i^deg. Every gap condition ∫ P dw/R = 0 becomes
∫ p(y)/√|D(y)| dy = 0 over the gap, which is linear in the free
coefficients of P.
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import mpmath
import numpy as np
from mpmath import mp
from scipy.optimize import brentq

from config import Config
from geometry import HalfLineInterval, Segment, SupportSpec

ODD_BANDS = 'odd'
EVEN_BANDS = 'even'

# points per band used for the post hoc positivity check
_POSITIVITY_SAMPLES = 64
# roots with a smaller relative imaginary part count as real
_ROOT_IMAG_TOL = 1e-8


@dataclass(frozen=True)
class BandSystem:
    kind: str
    endpoints: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in (ODD_BANDS, EVEN_BANDS):
            raise ValueError(f"band system kind must be 'odd' or 'even', got '{self.kind}'")
        ends = tuple(float(e) for e in self.endpoints)
        object.__setattr__(self, 'endpoints', ends)
        if self.kind == ODD_BANDS and len(ends) % 2 != 1:
            raise ValueError(f"odd band system needs 2N+1 endpoints (b0, a1, b1, ...), got {len(ends)}")
        if self.kind == EVEN_BANDS and (len(ends) % 2 != 0 or not ends):
            raise ValueError(f"even band system needs 2N >= 2 endpoints (a1, b1, ...), got {len(ends)}")
        if ends[0] <= 0 or any(b <= a for a, b in zip(ends, ends[1:])):
            raise ValueError(f"invalid band ordering: endpoints must satisfy 0 < e1 < e2 < ..., got {list(ends)}")

    @property
    def N(self) -> int:
        return len(self.endpoints) // 2

    @property
    def degree(self) -> int:
        return 2 * self.N + 1 if self.kind == ODD_BANDS else 2 * self.N

    def bands(self) -> List[Tuple[float, float]]:
        """Bands as intervals of y (z = iy), bottom to top"""
        e = self.endpoints
        if self.kind == ODD_BANDS:
            return [(0.0, e[0])] + [(e[k], e[k + 1]) for k in range(1, len(e), 2)]
        return [(e[k], e[k + 1]) for k in range(0, len(e), 2)]

    def gaps(self) -> List[Tuple[float, float]]:
        """
        Gap intervals carrying the N conditions

        For even systems the first entry is the upper half (0, a1) of the
        central gap, which is symmetric about 0.
        """
        bands = self.bands()
        gaps = [(lo[1], hi[0]) for lo, hi in zip(bands, bands[1:])]
        if self.kind == EVEN_BANDS:
            gaps.insert(0, (0.0, bands[0][0]))
        return gaps

    def free_powers(self) -> List[int]:
        """Powers of z carrying the free coefficients of P"""
        if self.kind == ODD_BANDS:
            return [2 * k - 1 for k in range(1, self.N + 1)]
        return [2 * k for k in range(self.N)]

    def radical_squared(self, y):
        """D(y) = R(iy)² = Π(e² − y²); works for floats, arrays and mpf"""
        value = 1
        for e in self.endpoints:
            value = value * (e - y) * (e + y)
        return value


def _reduced_sign(degree: int, power: int) -> int:
    """(iy)^power / i^degree = sign · y^power for same-parity degree and power"""
    return -1 if ((degree - power) // 2) % 2 else 1


@dataclass(frozen=True)
class BandPolynomial:
    bands: BandSystem
    coefficients: Tuple[float, ...]

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if len(coefficients) != self.bands.N:
            raise ValueError(f"band polynomial needs {self.bands.N} free coefficients, got {len(coefficients)}")
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def degree(self) -> int:
        return self.bands.degree

    @property
    def leading(self) -> float:
        """P is monic by construction"""
        return 1.0

    def reduced_coefficients(self) -> List[Tuple[int, float]]:
        """(power, coefficient) pairs of p(y), leading term included"""
        deg = self.degree
        terms = [(k, _reduced_sign(deg, k) * c) for k, c in zip(self.bands.free_powers(), self.coefficients)]
        terms.append((deg, self.leading))
        return terms

    def p_real(self, y):
        """p(y) = P(iy)/i^deg; accepts floats, numpy arrays and mpf"""
        total = 0
        for power, c in self.reduced_coefficients():
            total = total + c * y ** power
        return total

    def P(self, z):
        z = np.asarray(z, dtype=complex)
        total = z ** self.degree
        for power, c in zip(self.bands.free_powers(), self.coefficients):
            total = total + c * z ** power
        return total if total.ndim else complex(total)

    def to_dict(self) -> dict:
        return {
            'kind': self.bands.kind,
            'endpoints': list(self.bands.endpoints),
            'degree': self.degree,
            'powers': self.bands.free_powers(),
            'coefficients': list(self.coefficients),
        }


def _monomial_gap_integral(bands: BandSystem, power: int, gap: Tuple[float, float]):
    lo, hi = mp.mpf(gap[0]), mp.mpf(gap[1])
    value, error = mpmath.quad(lambda y: y ** power / mpmath.sqrt(abs(bands.radical_squared(y))),
                               [lo, hi], method='tanh-sinh', error=True)
    if error > Config.GAP_TOL and Config.VERBOSE:
        print(f"⚠️ Warning: gap integral on ({gap[0]}, {gap[1]}) has error estimate {float(error):.2e}")
    return value


def gap_integral(p: BandPolynomial, j: int) -> float:
    """
    Reduced gap condition ∫ p(y)/√|D(y)| dy over gap j (1-based)

    Args:
        p: band polynomial
        j: gap index, 1 <= j <= N (for even systems gap 1 is the central half-gap)

    Returns:
        Value of the integral; zero when the j-th condition holds
    """
    gaps = p.bands.gaps()
    if not 1 <= j <= len(gaps):
        raise ValueError(f"gap index {j} out of range 1..{len(gaps)}")
    with mp.workdps(Config.MP_DPS):
        total = sum(c * _monomial_gap_integral(p.bands, power, gaps[j - 1])
                    for power, c in p.reduced_coefficients())
        return float(total)


def moment_system(bands: BandSystem):
    """Gap moments M[j, k] = ∫_gap_j y^power_k/√|D| and the leading-term right-hand side"""
    gaps = bands.gaps()
    powers = bands.free_powers()
    with mp.workdps(Config.MP_DPS):
        M = mp.matrix(len(gaps), len(powers))
        rhs = mp.matrix(len(gaps), 1)
        for j, gap in enumerate(gaps):
            for k, power in enumerate(powers):
                M[j, k] = _monomial_gap_integral(bands, power, gap)
            rhs[j] = -_monomial_gap_integral(bands, bands.degree, gap)
    return M, rhs


def solve_band_polynomial(bands: BandSystem) -> BandPolynomial:
    """
    Monic P satisfying every gap condition

    Raises:
        ValueError: "degenerate band system" when the gap moments are singular,
            "branch/sign inconsistency" when p does not have exactly one
            zero per gap or the resulting density is not positive on the bands
    """
    if bands.N == 0:
        poly = BandPolynomial(bands, ())
        check_zero_locations(poly)
        return poly

    M, rhs = moment_system(bands)
    with mp.workdps(Config.MP_DPS):
        try:
            reduced = mpmath.lu_solve(M, rhs)
        except ZeroDivisionError as e:
            raise ValueError(f"degenerate band system: {e}") from e
        if not all(mpmath.isfinite(x) for x in reduced):
            raise ValueError("degenerate band system: non-finite coefficients")
    deg = bands.degree
    coefficients = tuple(_reduced_sign(deg, power) * float(reduced[k])
                         for k, power in enumerate(bands.free_powers()))
    poly = BandPolynomial(bands, coefficients)
    check_zero_locations(poly)
    return poly


def gap_root_counts(poly: BandPolynomial) -> List[int]:
    """Number of real zeros of p strictly inside each gap, from the companion-matrix roots"""
    coefficients = np.zeros(poly.degree + 1)
    for power, c in poly.reduced_coefficients():
        coefficients[poly.degree - power] = c
    roots = np.roots(coefficients)
    real = roots[np.abs(roots.imag) <= _ROOT_IMAG_TOL * np.maximum(1.0, np.abs(roots))].real
    return [int(np.sum((real > lo) & (real < hi))) for lo, hi in poly.bands.gaps()]


def check_zero_locations(poly: BandPolynomial):
    """Exactly one zero of p per gap and u > 0 on every band"""
    for (lo, hi), count in zip(poly.bands.gaps(), gap_root_counts(poly)):
        if count != 1:
            raise ValueError(f"branch/sign inconsistency: p has {count} zeros in gap ({lo}, {hi}), expected 1")
    for m, (lo, hi) in enumerate(poly.bands.bands()):
        t = (np.arange(_POSITIVITY_SAMPLES) + 0.5) / _POSITIVITY_SAMPLES
        y = lo + t * (hi - lo)
        u = _band_sign(poly, m) * poly.p_real(y)
        if np.any(u <= 0):
            raise ValueError(f"branch/sign inconsistency: density not positive on band ({lo}, {hi})")


def _band_sign(poly: BandPolynomial, band_index: int) -> int:
    """Sign of R alternates from band to band; fixed by u > 0 on the top band"""
    top = len(poly.bands.bands()) - 1
    return -1 if (top - band_index) % 2 else 1


def _band_index(bands: BandSystem, y: float) -> int:
    for m, (lo, hi) in enumerate(bands.bands()):
        if lo < y < hi or (m == 0 and bands.kind == ODD_BANDS and y == 0.0):
            return m
    return -1


def bound_state_density(p: BandPolynomial, z: complex) -> float:
    """
    u = iP(z)/(πR(z)) at a point z = iy of a band

    Raises ValueError in a gap, at a band endpoint or off iℝ⁺.
    """
    z = complex(z)
    if abs(z.real) > 1e-12 or z.imag < 0:
        raise ValueError(f"point {z} is not on the positive imaginary axis")
    y = z.imag
    m = _band_index(p.bands, y)
    if m < 0:
        raise ValueError(f"point {z} is in a gap or at a band endpoint")
    if y == 0.0:
        return 0.0
    u = _band_sign(p, m) * p.p_real(y) / (math.pi * math.sqrt(abs(p.bands.radical_squared(y))))
    if u <= 0:
        raise ValueError(f"branch/sign inconsistency at {z}")
    return float(u)


def bound_state_density_values(p: BandPolynomial, y: np.ndarray) -> np.ndarray:
    """Vectorized density over heights y; NaN outside the open bands"""
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, np.nan)
    for m, (lo, hi) in enumerate(p.bands.bands()):
        inside = (y > lo) & (y < hi)
        if m == 0 and p.bands.kind == ODD_BANDS:
            inside |= y == 0.0
        if not inside.any():
            continue
        yy = y[inside]
        out[inside] = _band_sign(p, m) * p.p_real(yy) / (math.pi * np.sqrt(np.abs(p.bands.radical_squared(yy))))
    return out


def gap_zeros(p: BandPolynomial) -> List[float]:
    """Zero y* of p in every gap (for even systems the central entry is the upper zero of the pair ±y*)"""
    return [float(brentq(p.p_real, lo, hi, xtol=1e-15)) for lo, hi in p.bands.gaps()]


def band_green_potential(p: BandPolynomial, z: complex) -> float:
    """
    Gμ(z) = (1/π)∫_Γ⁺ log|(z + iy)/(z − iy)| πu(iy) dy of the analytic density,
    taken in the solver normalization so that Gμ = Im z on the bands

    The log singularity at y = Im z (z on a band) is split out as a
    quadrature breakpoint.
    """
    z = complex(z)
    if z.imag <= 0:
        return 0.0
    bands = p.bands
    with mp.workdps(Config.MP_DPS):
        zz = mp.mpc(z.real, z.imag)

        def integrand(y, sign):
            w = mp.mpc(0, y)
            kernel = mpmath.log(abs(zz + w) / abs(zz - w))
            density = sign * p.p_real(y) / mpmath.sqrt(abs(bands.radical_squared(y)))
            return kernel * density

        total = mp.mpf(0)
        for m, (lo, hi) in enumerate(bands.bands()):
            sign = _band_sign(p, m)
            points = [mp.mpf(lo), mp.mpf(hi)]
            if abs(z.real) < 1e-14 and lo < z.imag < hi:
                points.insert(1, mp.mpf(z.imag))
            total += mpmath.quad(lambda y: integrand(y, sign), points, method='tanh-sinh')
        return float(total / mp.pi)


def band_support(bands: BandSystem, half_line: bool = False) -> SupportSpec:
    """Γ⁺ of a band system: segments of iℝ⁺, or half-line intervals for the KdV picture"""
    intervals = bands.bands()
    labels = tuple(f"band{m}" for m in range(len(intervals)))
    if half_line:
        return SupportSpec(tuple(HalfLineInterval(lo, hi) for lo, hi in intervals), labels)
    return SupportSpec(tuple(Segment(complex(0.0, lo), complex(0.0, hi)) for lo, hi in intervals), labels)
