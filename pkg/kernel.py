"""
Green / breather / KdV kernels, NDR right-hand sides and the discretized
energy J_σ(u) = uᵀAu − 2bᵀu + uᵀdiag(S)u.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, linalg

from config import Config
from geometry import Quadrature

_INV_PI = 1.0 / math.pi
_ROW_BLOCK = 256

KERNEL_TAGS = {
    'nls_soliton': 'NLS_SOL',
    'nls_breather': 'NLS_BRE',
    'kdv': 'KDV',
}


@dataclass(frozen=True)
class KernelKind:
    name: str
    delta0: float = 0.0

    def __post_init__(self):
        if self.name not in KERNEL_TAGS:
            raise ValueError(f"unknown kernel kind '{self.name}'")
        if self.name == 'nls_breather' and not self.delta0 > 0:
            raise ValueError(f"breather kernel needs delta0 > 0, got {self.delta0}")

    @classmethod
    def nls_soliton(cls) -> 'KernelKind':
        return cls('nls_soliton')

    @classmethod
    def nls_breather(cls, delta0: float) -> 'KernelKind':
        return cls('nls_breather', float(delta0))

    @classmethod
    def kdv(cls) -> 'KernelKind':
        return cls('kdv')

    @property
    def tag(self) -> str:
        return KERNEL_TAGS[self.name]

    @property
    def on_half_line(self) -> bool:
        return self.name == 'kdv'


RHS_KINDS = (
    'nls_density', 'nls_temporal', 'breather_density', 'breather_temporal',
    'kdv_density', 'kdv_temporal', 'constant', 'tabulated',
)


@dataclass(frozen=True)
class RhsKind:
    name: str
    delta0: float = 0.0
    value: float = 0.0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.name not in RHS_KINDS:
            raise ValueError(f"unknown right-hand side kind '{self.name}'")
        if self.name.startswith('breather') and not self.delta0 > 0:
            raise ValueError(f"breather right-hand side needs delta0 > 0, got {self.delta0}")
        if self.name == 'tabulated' and self.values is None:
            raise ValueError("tabulated right-hand side needs values")

    @classmethod
    def constant(cls, value: float) -> 'RhsKind':
        return cls('constant', value=float(value))

    @classmethod
    def tabulated(cls, values: Sequence[float]) -> 'RhsKind':
        return cls('tabulated', values=tuple(float(v) for v in values))


@dataclass(frozen=True)
class SigmaSpec:
    name: str = 'zero'
    value: float = 0.0
    values: Optional[tuple] = None
    center: complex = 0j
    exponent: float = 0.0
    scale: float = 1.0
    factor: object = 1.0
    radius: float = 0.0
    slope: float = 0.0

    @classmethod
    def zero(cls) -> 'SigmaSpec':
        return cls('zero')

    @classmethod
    def constant(cls, value: float) -> 'SigmaSpec':
        return cls('constant', value=float(value))

    @classmethod
    def tabulated(cls, values: Sequence[float]) -> 'SigmaSpec':
        return cls('tabulated', values=tuple(float(v) for v in values))

    def is_zero(self) -> bool:
        if self.name == 'zero':
            return True
        if self.name == 'constant':
            return self.value == 0
        if self.name == 'tabulated':
            return not any(self.values)
        return False


@dataclass(frozen=True)
class QuadraticForm:
    A: np.ndarray
    S: np.ndarray
    b: np.ndarray
    quadrature: Quadrature
    kernel: KernelKind
    rhs: RhsKind
    sigma: SigmaSpec
    min_eigenvalue: Optional[float] = None
    psd_warning: bool = False

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def hessian(self) -> np.ndarray:
        """A + diag(S)"""
        return self.A + np.diag(self.S)

    @property
    def phi(self) -> np.ndarray:
        return self.b / self.quadrature.weights

    @property
    def sigma_values(self) -> np.ndarray:
        return self.S / self.quadrature.weights

    def with_rhs(self, rhs: 'RhsKind') -> 'QuadraticForm':
        """Same energy with another right-hand side"""
        b = rhs_values(rhs, self.quadrature.nodes) * self.quadrature.weights
        return QuadraticForm(self.A, self.S, b, self.quadrature, self.kernel, rhs, self.sigma,
                             self.min_eigenvalue, self.psd_warning)


def r0(z, delta0: float):
    """R₀(z) = √(z² + δ₀²) on the branch with R₀(z) ~ z at infinity"""
    z = np.asarray(z, dtype=complex)
    safe = np.where(z == 0, 1.0, z)
    value = safe * np.sqrt(1.0 + (delta0 * delta0) / (safe * safe))
    value = np.where(z == 0, complex(delta0), value)
    return value if value.ndim else complex(value)


def _breather_term(z, w, delta0: float):
    rz, rw = r0(z, delta0), r0(w, delta0)
    rzc = np.conj(rz)
    d2 = delta0 * delta0
    top = np.abs(rz * rw + z * w + d2)
    bottom = np.abs(rzc * rw + np.conj(z) * w + d2)
    return _INV_PI * np.log(top / bottom)


def _half_line(z) -> np.ndarray:
    return np.real(np.asarray(z, dtype=complex))


def kernel_matrix(kind: KernelKind, z, w) -> np.ndarray:
    """
    Kernel values for broadcast arrays z, w (no diagonal handling)

    Coincident points give +inf; callers overwrite those entries.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide='ignore'):
        if kind.name == 'kdv':
            zeta, omega = _half_line(z), _half_line(w)
            return _INV_PI * np.log(np.abs(omega + zeta) / np.abs(omega - zeta))
        value = _INV_PI * np.log(np.abs(w - np.conj(z)) / np.abs(w - z))
        if kind.name == 'nls_breather':
            value = value + _breather_term(z, w, kind.delta0)
    return value


def _check_domain(kind: KernelKind, z: complex):
    if kind.name == 'kdv':
        if not _half_line(z) > 0:
            raise ValueError(f"KdV kernel needs points on the positive half-line, got {z}")
    elif complex(z).imag < 0:
        raise ValueError(f"point {z} is below the real axis")


def kernel_value(kind: KernelKind, z: complex, w: complex) -> float:
    """
    Evaluate the NDR kernel at a pair of spectral points

    Args:
        kind: soliton, breather or KdV kernel
        z, w: distinct points of ℂ⁺ (KdV: positive reals)

    Returns:
        Kernel value, 1/π included
    """
    _check_domain(kind, z)
    _check_domain(kind, w)
    if complex(z) == complex(w):
        raise ValueError("kernel singular on diagonal")
    return float(kernel_matrix(kind, z, w))


def smooth_diagonal(kind: KernelKind, z) -> np.ndarray:
    """Regular part of the kernel at coincidence (image term plus breather correction)"""
    z = np.asarray(z, dtype=complex)
    if kind.name == 'kdv':
        return _INV_PI * np.log(2.0 * _half_line(z))
    value = _INV_PI * np.log(2.0 * z.imag)
    if kind.name == 'nls_breather':
        value = value + _breather_term(z, z, kind.delta0)
    return value


def rhs_values(kind: RhsKind, z) -> np.ndarray:
    """Vectorized right-hand side φ at the given points"""
    z = np.asarray(z, dtype=complex)
    name = kind.name
    if name == 'nls_density':
        return z.imag.copy()
    if name == 'nls_temporal':
        return -4.0 * z.imag * z.real
    if name == 'breather_density':
        return np.imag(r0(z, kind.delta0))
    if name == 'breather_temporal':
        return -2.0 * np.imag(z * r0(z, kind.delta0))
    if name == 'kdv_density':
        return _half_line(z) / 2.0
    if name == 'kdv_temporal':
        return -2.0 * _half_line(z) ** 3
    if name == 'constant':
        return np.full(z.shape, kind.value)
    values = np.asarray(kind.values, dtype=float)
    if values.shape != z.shape:
        raise ValueError(f"tabulated right-hand side has {values.size} values for {z.size} nodes")
    return values.copy()


def rhs_value(kind: RhsKind, z: complex) -> float:
    """φ(z) for one point; tabulated kinds have no pointwise value"""
    if kind.name == 'tabulated':
        raise ValueError("tabulated right-hand side is only defined at quadrature nodes")
    return float(rhs_values(kind, np.array([z]))[0])


def is_superharmonic(kind: RhsKind) -> bool:
    """Declared superharmonicity (and positivity) of φ in ℂ⁺"""
    if kind.name == 'constant':
        return kind.value > 0
    return kind.name in ('nls_density', 'kdv_density', 'breather_density')


def temporal_counterpart(kind: RhsKind) -> Optional[RhsKind]:
    """Second-NDR right-hand side paired with a density right-hand side"""
    pairs = {
        'nls_density': RhsKind('nls_temporal'),
        'kdv_density': RhsKind('kdv_temporal'),
        'breather_density': RhsKind('breather_temporal', delta0=kind.delta0),
    }
    return pairs.get(kind.name)


def sigma_values(sigma: SigmaSpec, q: Quadrature) -> np.ndarray:
    """σ at the quadrature nodes; raises on negative values"""
    z = q.nodes
    name = sigma.name
    if name == 'zero':
        values = np.zeros(q.n)
    elif name == 'constant':
        values = np.full(q.n, sigma.value)
    elif name == 'tabulated':
        values = np.asarray(sigma.values, dtype=float)
        if values.shape != (q.n,):
            raise ValueError(f"tabulated sigma has {values.size} values for {q.n} nodes")
    elif name == 'power_distance':
        factor = np.broadcast_to(np.asarray(sigma.factor, dtype=float), (q.n,))
        values = factor * (np.abs(z - sigma.center) / sigma.scale) ** sigma.exponent
    elif name == 'radial_gap':
        values = sigma.slope * np.maximum(sigma.radius - np.abs(z - sigma.center), 0.0)
    else:
        raise ValueError(f"unknown sigma kind '{name}'")
    if not np.all(np.isfinite(values)):
        raise ValueError("sigma must be finite at every node")
    if np.any(values < 0):
        bad = int(np.argmin(values))
        raise ValueError(f"sigma must be nonnegative; node {bad} has sigma = {values[bad]}")
    return values


@lru_cache(maxsize=1)
def unit_square_log_constant() -> float:
    """c₀ = −E[log|X − Y|] for X, Y independent uniform on the unit square"""
    # difference vector density on [0,1]² after folding: 4(1−x)(1−y)
    value, _ = integrate.dblquad(
        lambda y, x: 4.0 * (1.0 - x) * (1.0 - y) * 0.5 * math.log(x * x + y * y) if (x or y) else 0.0,
        0.0, 1.0, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12,
    )
    return -value


def self_energy(q: Quadrature, kind: KernelKind) -> np.ndarray:
    """
    Diagonal of A: smooth part at coincidence plus the exact cell self-interaction

    Every entry scales with the squared cell measure w². A curve panel of
    length w gives (w²/π)(3/2 − log w). A square cell of area w = h² gives
    (w²/π)(log(1/√w) + c₀) = (w²/π)(c₀ − log h), with c₀ the mean of
    −log|X − Y| over the unit square.
    """
    w = q.weights
    smooth = w * w * smooth_diagonal(kind, q.nodes)
    curve = _INV_PI * w * w * (1.5 - np.log(w))
    cell = _INV_PI * w * w * (np.log(1.0 / np.sqrt(w)) + unit_square_log_constant())
    return smooth + np.where(q.node_dimension == 1, curve, cell)


def _check_nodes(q: Quadrature, kind: KernelKind):
    if kind.on_half_line != q.on_half_line:
        where = 'the positive half-line' if kind.on_half_line else 'the upper half-plane'
        raise ValueError(f"{kind.name} kernel needs a quadrature on {where}")
    if kind.on_half_line:
        if np.any(q.nodes.real <= 0):
            raise ValueError("KdV nodes must be positive")
    elif np.any(q.nodes.imag <= 0):
        raise ValueError("quadrature nodes must lie strictly above the real axis")


def assemble_form(q: Quadrature, kernel: KernelKind, rhs: RhsKind, sigma: SigmaSpec,
                  threads: Optional[int] = None, check_psd: bool = False) -> QuadraticForm:
    """
    Assemble the discretized J_σ on a quadrature

    Args:
        q: quadrature of Γ⁺
        kernel: kernel kind
        rhs: right-hand side φ
        sigma: σ ≥ 0
        threads: worker cap for row blocks (defaults to NDR_THREADS)
        check_psd: compute the minimum eigenvalue of A + diag(S)

    Returns:
        QuadraticForm with A_ij = wᵢwⱼK(zᵢ,zⱼ) and self-energy diagonal
    """
    _check_nodes(q, kernel)
    sig = sigma_values(sigma, q)
    z, w = q.nodes, q.weights
    n = q.n
    A = np.empty((n, n))

    def fill(start: int):
        stop = min(start + _ROW_BLOCK, n)
        block = kernel_matrix(kernel, z[start:stop, None], z[None, :])
        A[start:stop] = w[start:stop, None] * block * w[None, :]

    starts = range(0, n, _ROW_BLOCK)
    workers = max(1, threads if threads is not None else Config.THREADS)
    if workers > 1 and n > _ROW_BLOCK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)

    np.fill_diagonal(A, self_energy(q, kernel))
    A = 0.5 * (A + A.T)

    S = sig * w
    b = rhs_values(rhs, z) * w
    min_eig = None
    warning = False
    if check_psd:
        min_eig = min_eigenvalue(A + np.diag(S))
        if min_eig < -1e-10 * np.abs(A).max():
            warning = True
            if Config.VERBOSE:
                print(f"⚠️ Warning: {kernel.name} form is not positive semidefinite (min eigenvalue {min_eig:.3e})")
    return QuadraticForm(A, S, b, q, kernel, rhs, sigma, min_eig, warning)


def min_eigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a dense symmetric matrix"""
    return float(linalg.eigh(matrix, eigvals_only=True, subset_by_index=[0, 0])[0])


def functional_value(form: QuadraticForm, u: np.ndarray) -> float:
    """J(u) = uᵀ(A + diag(S))u − 2bᵀu"""
    u = np.asarray(u, dtype=float)
    return float(u @ form.A @ u + np.sum(form.S * u * u) - 2.0 * form.b @ u)


def gradient(form: QuadraticForm, u: np.ndarray) -> np.ndarray:
    """Analytic gradient 2((A + diag(S))u − b)"""
    u = np.asarray(u, dtype=float)
    return 2.0 * (form.A @ u + form.S * u - form.b)


def direct_functional(q: Quadrature, kernel: KernelKind, rhs: RhsKind, sigma: SigmaSpec, u: np.ndarray) -> float:
    """Definition-level double sum of J_σ on the discrete measure Σ uᵢwᵢδ_{zᵢ}"""
    z, w = q.nodes, q.weights
    phi = rhs_values(rhs, z)
    sig = sigma_values(sigma, q)
    diag = self_energy(q, kernel)
    energy = 0.0
    for i in range(q.n):
        for j in range(q.n):
            if i != j:
                energy += u[i] * w[i] * kernel_value(kernel, z[i], z[j]) * u[j] * w[j]
        energy += diag[i] * u[i] * u[i]
        energy += sig[i] * u[i] * u[i] * w[i]
        energy -= 2.0 * phi[i] * u[i] * w[i]
    return float(energy)


class PotentialSample(NamedTuple):
    value: float
    at_node: bool


def green_potential_at(measure, kernel: KernelKind, z: complex) -> PotentialSample:
    """
    Gμ(z) = Σᵢ K(z, zᵢ)uᵢwᵢ for μ = Σ uᵢwᵢδ_{zᵢ}

    At a quadrature node the self-energy-corrected nodal value is returned
    and flagged.
    """
    q = measure.quadrature
    u = np.asarray(measure.u, dtype=float)
    z = complex(z)
    if not kernel.on_half_line and z.imag <= 0:
        return PotentialSample(0.0, False)

    gaps = np.abs(q.nodes - z)
    hit = np.flatnonzero(gaps <= 1e-14 * max(1.0, abs(z)))
    if hit.size:
        i = int(hit[0])
        others = np.ones(q.n, dtype=bool)
        others[i] = False
        values = kernel_matrix(kernel, z, q.nodes[others])
        diag = self_energy(q, kernel)[i] / q.weights[i]
        total = float(np.sum(values * u[others] * q.weights[others]) + diag * u[i])
        return PotentialSample(total, True)
    values = kernel_matrix(kernel, z, q.nodes)
    return PotentialSample(float(np.sum(values * u * q.weights)), False)


def position_shift(kind: KernelKind, z_m: complex, z_j: complex) -> float:
    """
    Position shift of the z_m component after a collision with z_j

    The log kernel divided by Im z_m (Im R₀(z_m) for breathers).
    """
    if kind.name == 'kdv':
        raise ValueError("position shift is defined here for fNLS kernels only")
    log_kernel = math.pi * kernel_value(kind, z_m, z_j)
    scale = complex(z_m).imag if kind.name == 'nls_soliton' else float(np.imag(r0(z_m, kind.delta0)))
    return log_kernel / scale
