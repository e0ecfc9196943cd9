import math
from typing import Callable

import numpy as np

from geometry import CircularArc, HalfLineInterval, Segment, SupportSpec

_ON_CURVE_TOL = 1e-10

# Closed forms are densities of states (dp = −iπu dz); the solver density of the
# 1/π-normalized NDR is π times larger.
NDR_SCALE = math.pi


def semicircle_condensate(rho: float, z: complex):
    """
    Circular condensate on the upper semicircle |z| = ρ

    Args:
        rho: radius
        z: point of the semicircle

    Returns:
        (u, v) = (Im z/(πρ), −4 Im(z²)/(πρ))
    """
    z = complex(z)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if abs(abs(z) - rho) > _ON_CURVE_TOL or z.imag < -_ON_CURVE_TOL:
        raise ValueError(f"point {z} is not on the upper semicircle of radius {rho}")
    u = z.imag / (math.pi * rho)
    v = -4.0 * (z * z).imag / (math.pi * rho)
    return u, v


def box_condensate(q: float, z: complex) -> float:
    """
    Box condensate on [0, iq]: u = y/(π√(q² − y²)) at z = iy (v ≡ 0)

    Raises ValueError at or beyond the singular endpoint iq.
    """
    z = complex(z)
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if abs(z.real) > _ON_CURVE_TOL or z.imag < 0:
        raise ValueError(f"point {z} is not on the segment [0, {q}i]")
    y = z.imag
    if y >= q:
        raise ValueError(f"endpoint singularity: y = {y} >= q = {q}")
    return y / (math.pi * math.sqrt(q * q - y * y))


def kdv_from_nls(u_nls: Callable[[complex], float]) -> Callable[[float], float]:
    """u_KdV(ζ) = ½ u_fNLS(iζ)"""
    def u_kdv(zeta: float) -> float:
        return 0.5 * u_nls(1j * float(np.real(zeta)))
    return u_kdv


def nls_from_kdv(u_kdv: Callable[[float], float]) -> Callable[[complex], float]:
    """Inverse substitution: u_fNLS(iζ) = 2 u_KdV(ζ)"""
    def u_nls(z: complex) -> float:
        return 2.0 * u_kdv(complex(z).imag)
    return u_nls


def semicircle_support(rho: float) -> SupportSpec:
    return SupportSpec((CircularArc(0j, float(rho), 0.0, math.pi),), ('semicircle',))


def box_support(q: float, eps: float) -> SupportSpec:
    """[iεq, iq(1 − ε)]"""
    return SupportSpec((Segment(1j * eps * q, 1j * q * (1.0 - eps)),), ('box',))


def kdv_box_support(q: float, eps: float) -> SupportSpec:
    return SupportSpec((HalfLineInterval(eps * q, q * (1.0 - eps)),), ('kdv-box',))


def oracle_for(oracle: dict) -> Callable[[np.ndarray], np.ndarray]:
    """
    Vectorized reference density for a problem config's oracle block, in the
    normalization of the solver (closed form times NDR_SCALE)

    Supported types: semicircle {rho}, box {q}, bound_state {bands, kind},
    kdv_box {q}, kdv_bound_state {bands, kind}.
    """
    from analytic.band_logic import BandSystem, bound_state_density_values, solve_band_polynomial

    kind = oracle.get('type')
    if kind == 'semicircle':
        rho = float(oracle.get('rho', 1.0))
        return lambda z: np.asarray(z).imag / rho
    if kind == 'box':
        q = float(oracle.get('q', 1.0))
        return lambda z: NDR_SCALE * _box_values(q, np.asarray(z).imag)
    if kind == 'kdv_box':
        q = float(oracle.get('q', 1.0))
        return lambda z: 0.5 * NDR_SCALE * _box_values(q, np.real(z))
    if kind in ('bound_state', 'kdv_bound_state'):
        if not oracle.get('bands'):
            raise ValueError(f"{kind} oracle needs 'bands'")
        bands = BandSystem(oracle.get('kind', 'odd'), tuple(oracle['bands']))
        poly = solve_band_polynomial(bands)
        if kind == 'bound_state':
            return lambda z: NDR_SCALE * bound_state_density_values(poly, np.asarray(z).imag)
        return lambda z: 0.5 * NDR_SCALE * bound_state_density_values(poly, np.real(z))
    raise LookupError(f"no analytic oracle for '{kind}'")


def _box_values(q: float, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(y < q, y / (math.pi * np.sqrt(np.maximum(q * q - y * y, 0.0))), np.nan)
