"""
Spectral supports Γ⁺ and their quadratures.

A support is an ordered list of primitives in the closed upper half-plane:
segments and circular arcs (1D, reference measure = arclength), rectangles
and half-disks (2D, reference measure = area), or intervals of the positive
half-line carrying the KdV spectral variable. Curves and regions may share
one support; the curves then carry the mass of the region cells next to them.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config import Config

_ON_PARAM_TOL = 1e-12
_FLOOD_GRID_MAX = 600


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    dimension = 1

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def points(self, t: np.ndarray) -> np.ndarray:
        return self.start + t * (self.end - self.start)

    def endpoints(self) -> List[complex]:
        return [complex(self.start), complex(self.end)]

    def distance(self, z: np.ndarray) -> np.ndarray:
        d = self.end - self.start
        t = np.clip(np.real((np.asarray(z) - self.start) * np.conj(d)) / abs(d) ** 2, 0.0, 1.0)
        return np.abs(z - self.points(t))

    def is_closed(self) -> bool:
        return False

    def check_upper_half_plane(self):
        if min(self.start.imag, self.end.imag) < -_ON_PARAM_TOL:
            raise ValueError(f"not in closed upper half-plane: segment {self.start} -> {self.end}")
        if abs(self.start.imag) <= _ON_PARAM_TOL and abs(self.end.imag) <= _ON_PARAM_TOL:
            raise ValueError(f"tangential real-axis contact: segment {self.start} -> {self.end} lies on the real axis")


@dataclass(frozen=True)
class CircularArc:
    center: complex
    radius: float
    angle_start: float
    angle_end: float

    dimension = 1

    @property
    def span(self) -> float:
        return self.angle_end - self.angle_start

    @property
    def length(self) -> float:
        return self.radius * abs(self.span)

    def points(self, t: np.ndarray) -> np.ndarray:
        theta = self.angle_start + t * self.span
        return self.center + self.radius * np.exp(1j * theta)

    def is_closed(self) -> bool:
        return abs(self.span) >= 2 * math.pi - 1e-12

    def endpoints(self) -> List[complex]:
        if self.is_closed():
            return []
        return [complex(p) for p in self.points(np.array([0.0, 1.0]))]

    def distance(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        offset = z - self.center
        lo, hi = sorted((self.angle_start, self.angle_end))
        angle = lo + np.mod(np.angle(offset) - lo, 2 * math.pi)
        to_circle = np.abs(np.abs(offset) - self.radius)
        if self.is_closed():
            return to_circle
        ends = np.min([np.abs(z - p) for p in self.endpoints()], axis=0)
        return np.where(angle <= hi, to_circle, ends)

    def _lowest_point(self) -> Tuple[float, float]:
        """Lowest imaginary part over the arc and the angle where it occurs"""
        lo, hi = sorted((self.angle_start, self.angle_end))
        candidates = [lo, hi]
        k = math.ceil((lo - 1.5 * math.pi) / (2 * math.pi))
        bottom = 1.5 * math.pi + 2 * math.pi * k
        if bottom <= hi:
            candidates.append(bottom)
        ims = [self.center.imag + self.radius * math.sin(a) for a in candidates]
        idx = int(np.argmin(ims))
        return ims[idx], candidates[idx]

    def check_upper_half_plane(self):
        if self.radius <= 0:
            raise ValueError(f"arc radius must be positive, got {self.radius}")
        lowest, angle = self._lowest_point()
        if lowest < -_ON_PARAM_TOL:
            raise ValueError(f"not in closed upper half-plane: arc centered at {self.center}")
        if abs(lowest) <= _ON_PARAM_TOL:
            lo, hi = sorted((self.angle_start, self.angle_end))
            at_end = abs(angle - lo) < 1e-12 or abs(angle - hi) < 1e-12
            if not at_end or abs(math.cos(angle)) < 1e-12:
                raise ValueError(f"tangential real-axis contact: arc centered at {self.center}")


@dataclass(frozen=True)
class HalfLineInterval:
    """Interval [start, end] of the positive half-line (KdV spectral variable)."""
    start: float
    end: float

    dimension = 1

    @property
    def length(self) -> float:
        return self.end - self.start

    def points(self, t: np.ndarray) -> np.ndarray:
        return (self.start + t * (self.end - self.start)) + 0j

    def endpoints(self) -> List[complex]:
        return [complex(self.start), complex(self.end)]

    def is_closed(self) -> bool:
        return False

    def check_upper_half_plane(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"half-line interval must satisfy 0 <= start < end, got [{self.start}, {self.end}]")


@dataclass(frozen=True)
class Rectangle:
    lower_left: complex
    upper_right: complex

    dimension = 2

    @property
    def area(self) -> float:
        d = self.upper_right - self.lower_left
        return d.real * d.imag

    @property
    def floor(self) -> float:
        return self.lower_left.imag

    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.lower_left.real, self.upper_right.real, self.lower_left.imag, self.upper_right.imag)

    def contains(self, z: np.ndarray) -> np.ndarray:
        x0, x1, y0, y1 = self.bounds()
        z = np.asarray(z)
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)

    def corners(self) -> List[complex]:
        x0, x1, y0, y1 = self.bounds()
        return [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]

    @property
    def diameter(self) -> float:
        return abs(self.upper_right - self.lower_left)

    def check_upper_half_plane(self):
        x0, x1, y0, y1 = self.bounds()
        if x1 <= x0 or y1 <= y0:
            raise ValueError("rectangle corners must be ordered lower_left < upper_right")
        if y0 < 0:
            raise ValueError(f"not in closed upper half-plane: rectangle with lower edge at {y0}")


@dataclass(frozen=True)
class HalfDisk:
    """{|z - center| <= radius, Im z >= min_im}"""
    center: complex
    radius: float
    min_im: float = 0.0

    dimension = 2

    @property
    def floor(self) -> float:
        return self.min_im

    def bounds(self) -> Tuple[float, float, float, float]:
        c, r = self.center, self.radius
        return (c.real - r, c.real + r, self.min_im, c.imag + r)

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        return (np.abs(z - self.center) <= self.radius) & (z.imag >= self.min_im)

    def corners(self) -> List[complex]:
        h = self.min_im - self.center.imag
        half_chord = math.sqrt(max(self.radius ** 2 - h ** 2, 0.0))
        return [complex(self.center.real - half_chord, self.min_im),
                complex(self.center.real + half_chord, self.min_im)]

    @property
    def area(self) -> float:
        r = self.radius
        h = self.min_im - self.center.imag
        # circular segment above the chord at height h
        return r * r * math.acos(h / r) - h * math.sqrt(r * r - h * h)

    @property
    def diameter(self) -> float:
        return 2 * self.radius

    def check_upper_half_plane(self):
        if self.radius <= 0:
            raise ValueError(f"half-disk radius must be positive, got {self.radius}")
        if self.min_im < 0:
            raise ValueError(f"not in closed upper half-plane: half-disk floor at {self.min_im}")
        if self.min_im < self.center.imag or self.min_im >= self.center.imag + self.radius:
            raise ValueError("half-disk floor must lie between the center and the top of the disk")


@dataclass(frozen=True)
class SupportSpec:
    primitives: Tuple
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'primitives', tuple(self.primitives))
        labels = tuple(self.labels) or tuple(f"p{k}" for k in range(len(self.primitives)))
        if len(labels) != len(self.primitives):
            raise ValueError("one label per primitive is required")
        object.__setattr__(self, 'labels', labels)

    def is_empty(self) -> bool:
        return len(self.primitives) == 0

    def is_one_dimensional(self) -> bool:
        return all(p.dimension == 1 for p in self.primitives)

    def is_two_dimensional(self) -> bool:
        return all(p.dimension == 2 for p in self.primitives)

    def is_mixed(self) -> bool:
        """Curves and regions in one support, e.g. a region together with its boundary arc"""
        return not self.is_one_dimensional() and not self.is_two_dimensional()

    def is_half_line(self) -> bool:
        return any(isinstance(p, HalfLineInterval) for p in self.primitives)

    def validate(self):
        """Check emptiness, half-plane membership and primitive mixing"""
        if self.is_empty():
            raise ValueError("empty support")
        for prim in self.primitives:
            prim.check_upper_half_plane()
        if self.is_half_line() and not all(isinstance(p, HalfLineInterval) for p in self.primitives):
            raise ValueError("half-line intervals cannot be mixed with plane primitives")
        return True

    def singular_points(self) -> List[complex]:
        """Arc endpoints, junctions and region corners (deduplicated)"""
        points: List[complex] = []
        for prim in self.primitives:
            candidates = prim.corners() if prim.dimension == 2 else prim.endpoints()
            for p in candidates:
                if all(abs(p - q) > 1e-12 for q in points):
                    points.append(p)
        return points

    def sample(self, count: int = 256) -> np.ndarray:
        chunks = []
        t = np.linspace(0.0, 1.0, count)
        for prim in self.primitives:
            if prim.dimension == 1:
                chunks.append(prim.points(t))
            else:
                x0, x1, y0, y1 = prim.bounds()
                chunks.append(np.array([complex(x0, y0), complex(x1, y1), complex(x0, y1), complex(x1, y0)]))
        return np.concatenate(chunks)

    @property
    def diameter(self) -> float:
        pts = self.sample()
        return float(math.hypot(np.ptp(pts.real), np.ptp(pts.imag)))

    def total_measure(self) -> float:
        return float(sum(p.length if p.dimension == 1 else p.area for p in self.primitives))

    def contains(self, z: np.ndarray) -> np.ndarray:
        """Inside test for 2D supports"""
        inside = np.zeros(np.shape(z), dtype=bool)
        for prim in self.primitives:
            if prim.dimension == 2:
                inside |= prim.contains(z)
        return inside


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray
    panel_of: np.ndarray
    cell_size: np.ndarray
    endpoint_flags: np.ndarray
    real_axis_distance: np.ndarray
    dimension: int
    diameter: float
    singular_points: Tuple[complex, ...] = field(default_factory=tuple)
    on_half_line: bool = False
    node_dimension: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.node_dimension is None:
            object.__setattr__(self, 'node_dimension', np.full(len(self.nodes), self.dimension, dtype=np.int8))
        object.__setattr__(self, 'node_dimension', _readonly(self.node_dimension))
        for name in ('nodes', 'weights', 'panel_of', 'cell_size', 'endpoint_flags', 'real_axis_distance'):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def csv_rows(self) -> List[dict]:
        """Rows for the quadrature CSV dump (re,im,weight,panel,endpoint_flag)"""
        return [
            {
                're': float(z.real),
                'im': float(z.imag),
                'weight': float(w),
                'panel': int(p),
                'endpoint_flag': int(bool(f)),
            }
            for z, w, p, f in zip(self.nodes, self.weights, self.panel_of, self.endpoint_flags)
        ]


def _contour_pieces(indexed, nodes_per_unit_length: float):
    nodes, weights, panels, flags = [], [], [], []
    for k, prim in indexed:
        count = max(1, int(round(prim.length * nodes_per_unit_length)))
        t = (np.arange(count) + 0.5) / count
        nodes.append(prim.points(t))
        weights.append(np.full(count, prim.length / count))
        panels.append(np.full(count, k))
        f = np.zeros(count, dtype=bool)
        if not prim.is_closed():
            f[0] = True
            f[-1] = True
        flags.append(f)
    return nodes, weights, panels, flags


def _region_pieces(indexed, h: float, curves=()):
    nodes, panels = [], []
    for k, prim in indexed:
        if h >= prim.diameter:
            raise ValueError(f"cell too coarse: cell_size {h} >= region diameter {prim.diameter}")
        x0, x1, y0, y1 = prim.bounds()
        nx = int(math.ceil((x1 - x0) / h - 1e-9))
        ny = int(math.ceil((y1 - y0) / h - 1e-9))
        cx = x0 + (np.arange(nx) + 0.5) * h
        cy = y0 + (np.arange(ny) + 0.5) * h
        gx, gy = np.meshgrid(cx, cy)
        centers = (gx + 1j * gy).ravel()
        keep = prim.contains(centers)
        # cells within one cell of a curve of the support give their mass to the curve
        for curve in curves:
            keep &= curve.distance(centers) >= h
        centers = centers[keep]
        nodes.append(centers)
        panels.append(np.full(len(centers), k))
    return nodes, panels


def discretize_contour(spec: SupportSpec, nodes_per_unit_length: float) -> Quadrature:
    """
    Composite midpoint rule on every 1D primitive

    Args:
        spec: support made of segments, arcs or half-line intervals
        nodes_per_unit_length: node density per unit arclength

    Returns:
        Quadrature with one node per equal-parameter panel
    """
    spec.validate()
    if not spec.is_one_dimensional():
        raise ValueError("discretize_contour requires 1D primitives; use discretize_region for 2D supports")
    if not nodes_per_unit_length > 0:
        raise ValueError(f"nodes_per_unit_length must be positive, got {nodes_per_unit_length}")

    nodes, weights, panels, flags = _contour_pieces(enumerate(spec.primitives), nodes_per_unit_length)
    z = np.concatenate(nodes).astype(complex)
    w = np.concatenate(weights)
    on_half_line = spec.is_half_line()
    distance = z.real.copy() if on_half_line else z.imag.copy()
    return Quadrature(
        nodes=z,
        weights=w,
        panel_of=np.concatenate(panels),
        cell_size=w.copy(),
        endpoint_flags=np.concatenate(flags),
        real_axis_distance=distance,
        dimension=1,
        diameter=spec.diameter,
        singular_points=tuple(spec.singular_points()),
        on_half_line=on_half_line,
    )


def discretize_region(spec: SupportSpec, cell_size: float) -> Quadrature:
    """
    Uniform square-cell grid clipped by the inside-test of every 2D primitive

    Args:
        spec: support made of rectangles and half-disks
        cell_size: side length of the square cells

    Returns:
        Quadrature with cell-center nodes and cell-area weights
    """
    spec.validate()
    if not spec.is_two_dimensional():
        raise ValueError("discretize_region requires 2D primitives; use discretize_contour for arcs")
    if not cell_size > 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")

    h = float(cell_size)
    corners = spec.singular_points()
    nodes, panels = _region_pieces(enumerate(spec.primitives), h)
    z = np.concatenate(nodes)
    flags = np.zeros(len(z), dtype=bool)
    for p in corners:
        flags |= np.abs(z - p) < h * math.sqrt(2)
    return Quadrature(
        nodes=z,
        weights=np.full(len(z), h * h),
        panel_of=np.concatenate(panels),
        cell_size=np.full(len(z), h),
        endpoint_flags=flags,
        real_axis_distance=z.imag.copy(),
        dimension=2,
        diameter=spec.diameter,
        singular_points=tuple(corners),
    )


def discretize_mixed(spec: SupportSpec, nodes_per_unit_length: float, cell_size: float) -> Quadrature:
    """
    Curves by the midpoint rule and regions by square cells, in one quadrature

    Region cells whose center lies within one cell of a curve are dropped,
    so a region bordered by an arc carries its boundary layer on the arc nodes.

    Args:
        spec: support mixing curves with rectangles or half-disks
        nodes_per_unit_length: node density on the curves
        cell_size: side length of the region cells

    Returns:
        Quadrature with node_dimension telling curve nodes (1) from cells (2)
    """
    spec.validate()
    if not spec.is_mixed():
        raise ValueError("discretize_mixed needs both curves and regions; use discretize")
    if not nodes_per_unit_length > 0:
        raise ValueError(f"nodes_per_unit_length must be positive, got {nodes_per_unit_length}")
    if not cell_size > 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")

    h = float(cell_size)
    curves = [(k, p) for k, p in enumerate(spec.primitives) if p.dimension == 1]
    regions = [(k, p) for k, p in enumerate(spec.primitives) if p.dimension == 2]
    nodes, weights, panels, flags = _contour_pieces(curves, nodes_per_unit_length)
    cells, cell_panels = _region_pieces(regions, h, [p for _, p in curves])

    curve_z = np.concatenate(nodes).astype(complex)
    cell_z = np.concatenate(cells)
    corners = spec.singular_points()
    cell_flags = np.zeros(len(cell_z), dtype=bool)
    for p in corners:
        cell_flags |= np.abs(cell_z - p) < h * math.sqrt(2)

    curve_w = np.concatenate(weights)
    z = np.concatenate([curve_z, cell_z])
    return Quadrature(
        nodes=z,
        weights=np.concatenate([curve_w, np.full(len(cell_z), h * h)]),
        panel_of=np.concatenate(panels + cell_panels),
        cell_size=np.concatenate([curve_w, np.full(len(cell_z), h)]),
        endpoint_flags=np.concatenate(flags + [cell_flags]),
        real_axis_distance=z.imag.copy(),
        dimension=2,
        diameter=spec.diameter,
        singular_points=tuple(corners),
        node_dimension=np.concatenate([np.ones(len(curve_z), dtype=np.int8),
                                       np.full(len(cell_z), 2, dtype=np.int8)]),
    )


def discretize(spec: SupportSpec, nodes_per_unit: Optional[float] = None, cell_size: Optional[float] = None) -> Quadrature:
    """Pick the contour, region or mixed rule from the support's dimension"""
    spec.validate()
    if spec.is_one_dimensional():
        if nodes_per_unit is None:
            raise ValueError("1D support needs discretization.nodes_per_unit")
        return discretize_contour(spec, nodes_per_unit)
    if spec.is_two_dimensional():
        if cell_size is None:
            raise ValueError("2D support needs discretization.cell_size")
        return discretize_region(spec, cell_size)
    if nodes_per_unit is None or cell_size is None:
        raise ValueError("mixed support needs discretization.nodes_per_unit and discretization.cell_size")
    return discretize_mixed(spec, nodes_per_unit, cell_size)

def refine_quadrature(q: Quadrature, spec: SupportSpec, factor: int = 2) -> Tuple[Quadrature, np.ndarray]:
    """
    Split every panel of q into factor sub-panels and every cell into factor² sub-cells

    No refined node coincides with a node of q for even factors.

    Returns:
        (refined quadrature, index of the parent node of every refined node)
    """
    if factor < 1:
        raise ValueError(f"refinement factor must be at least 1, got {factor}")
    nodes, weights, panels, parents, dims = [], [], [], [], []
    for k, prim in enumerate(spec.primitives):
        run = np.flatnonzero(q.panel_of == k)
        if run.size == 0:
            continue
        if prim.dimension == 1:
            count = factor * run.size
            t = (np.arange(count) + 0.5) / count
            nodes.append(prim.points(t))
            weights.append(np.full(count, prim.length / count))
            parents.append(np.repeat(run, factor))
        else:
            h = q.cell_size[run]
            offsets = (np.arange(factor) + 0.5) / factor - 0.5
            ox, oy = np.meshgrid(offsets, offsets)
            shift = (ox + 1j * oy).ravel()
            nodes.append((q.nodes[run, None] + h[:, None] * shift[None, :]).ravel())
            weights.append(np.repeat(q.weights[run] / factor ** 2, factor ** 2))
            parents.append(np.repeat(run, factor ** 2))
        panels.append(np.full(len(nodes[-1]), k))
        dims.append(np.full(len(nodes[-1]), prim.dimension, dtype=np.int8))

    z = np.concatenate(nodes).astype(complex)
    parent = np.concatenate(parents)
    w = np.concatenate(weights)
    node_dimension = np.concatenate(dims)
    refined = Quadrature(
        nodes=z,
        weights=w,
        panel_of=np.concatenate(panels),
        cell_size=np.where(node_dimension == 1, w, q.cell_size[parent] / factor),
        endpoint_flags=np.zeros(len(z), dtype=bool),
        real_axis_distance=z.real.copy() if q.on_half_line else z.imag.copy(),
        dimension=q.dimension,
        diameter=q.diameter,
        singular_points=q.singular_points,
        on_half_line=q.on_half_line,
        node_dimension=node_dimension,
    )
    return refined, parent


def transfer_values(q: Quadrature, spec: SupportSpec, refined: Quadrature, parent: np.ndarray,
                    values: np.ndarray) -> np.ndarray:
    """
    Carry nodal values of q to a refined quadrature

    Linear in the curve parameter on 1D primitives (constant beyond the end
    nodes, periodic on closed arcs); constant over each parent cell on regions.
    """
    values = np.asarray(values, dtype=float)
    out = values[parent].copy()
    for k, prim in enumerate(spec.primitives):
        if prim.dimension != 1:
            continue
        coarse = np.flatnonzero(q.panel_of == k)
        fine = np.flatnonzero(refined.panel_of == k)
        if coarse.size == 0:
            continue
        t_coarse = (np.arange(coarse.size) + 0.5) / coarse.size
        t_fine = (np.arange(fine.size) + 0.5) / fine.size
        period = 1.0 if prim.is_closed() else None
        out[fine] = np.interp(t_fine, t_coarse, values[coarse], period=period)
    return out


def nodes_for_count(spec: SupportSpec, n: int) -> float:
    """Node density that gives about n nodes on a 1D support"""
    return n / spec.total_measure()


def exclusion_mask(q: Quadrature, exclusion_cells: Optional[float] = None,
                   real_axis_fraction: Optional[float] = None) -> np.ndarray:
    """
    Nodes excluded from error norms: near endpoints/non-smooth points or near ℝ

    Args:
        q: quadrature
        exclusion_cells: radius around singular points, in cells
        real_axis_fraction: ε_ℝ as a fraction of diam Γ⁺

    Returns:
        Boolean mask, True where the node is excluded
    """
    cells = Config.EXCLUSION_CELLS if exclusion_cells is None else exclusion_cells
    fraction = Config.REAL_AXIS_FRACTION if real_axis_fraction is None else real_axis_fraction

    excluded = q.real_axis_distance < fraction * q.diameter
    for p in q.singular_points:
        excluded |= np.abs(q.nodes - p) < cells * q.cell_size
    return excluded


def endpoint_weights(q: Quadrature, collar: Optional[float] = None) -> np.ndarray:
    """
    Weights of the endpoint-weighted max norm

    ω(z) = min(1, d(z)/δ)² with d the distance to the nearest endpoint, junction
    or corner and δ = collar · diam Γ⁺. Inverse square-root endpoint profiles
    times ω stay bounded and vanish at the endpoint.

    Args:
        q: quadrature
        collar: δ as a fraction of diam Γ⁺ (defaults to NDR_ENDPOINT_COLLAR)

    Returns:
        Weights in [0, 1], one per node
    """
    fraction = Config.ENDPOINT_COLLAR if collar is None else collar
    if not q.singular_points:
        return np.ones(q.n)
    delta = fraction * q.diameter
    distance = np.min([np.abs(q.nodes - p) for p in q.singular_points], axis=0)
    return np.minimum(1.0, distance / delta) ** 2


def interior_nodes(q: Quadrature, spec: SupportSpec) -> np.ndarray:
    """Region cells more than one cell away from every region boundary"""
    if q.dimension != 2:
        return np.zeros(q.n, dtype=bool)
    inside = q.node_dimension == 2
    for angle in np.arange(8) * math.pi / 4:
        neighbour = q.nodes + q.cell_size * np.exp(1j * angle)
        inside &= spec.contains(neighbour)
    return inside


def _flood_from_border(blocked: np.ndarray, bottom_open: bool) -> np.ndarray:
    """4-connected flood fill of unblocked cells reachable from the top/left/right border"""
    ny, nx = blocked.shape
    reached = np.zeros_like(blocked)
    stack = []
    seeds = [(ny - 1, i) for i in range(nx)] + [(j, 0) for j in range(ny)] + [(j, nx - 1) for j in range(ny)]
    if bottom_open:
        seeds += [(0, i) for i in range(nx)]
    for j, i in seeds:
        if not blocked[j, i] and not reached[j, i]:
            reached[j, i] = True
            stack.append((j, i))
    while stack:
        j, i = stack.pop()
        for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            jj, ii = j + dj, i + di
            if 0 <= jj < ny and 0 <= ii < nx and not blocked[jj, ii] and not reached[jj, ii]:
                reached[jj, ii] = True
                stack.append((jj, ii))
    return reached


def _floor(prim) -> float:
    if prim.dimension == 2:
        return prim.floor
    return float(prim.points(np.linspace(0.0, 1.0, 257)).imag.min())


def outer_boundary_nodes(q: Quadrature, spec: SupportSpec) -> np.ndarray:
    """
    Mark nodes whose cell touches the boundary of the unbounded component Ω of ℂ⁺∖Γ⁺

    Ω is computed by flood fill on a background grid whose bottom edge is the
    real axis; the region between ℝ and a 2D support that does not touch ℝ
    belongs to Ω.

    Returns:
        Boolean mask over the quadrature nodes
    """
    if q.on_half_line:
        return np.ones(q.n, dtype=bool)

    z = q.nodes
    if q.dimension == 1:
        g = max(float(np.median(q.cell_size)), q.diameter / _FLOOD_GRID_MAX)
        reach = 2
    else:
        g = float(np.min(q.cell_size))
        reach = 1
    margin = (reach + 2) * g
    x_min = float(z.real.min()) - margin
    x_max = float(z.real.max()) + margin
    y_max = float(z.imag.max()) + margin
    nx = int(math.ceil((x_max - x_min) / g))
    ny = int(math.ceil(y_max / g))

    col = np.clip(((z.real - x_min) / g).astype(int), 0, nx - 1)
    row = np.clip((z.imag / g).astype(int), 0, ny - 1)

    blocked = np.zeros((ny, nx), dtype=bool)
    if q.dimension == 1:
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                blocked[np.clip(row + dj, 0, ny - 1), np.clip(col + di, 0, nx - 1)] = True
        bottom_open = False
    else:
        cx = x_min + (np.arange(nx) + 0.5) * g
        cy = (np.arange(ny) + 0.5) * g
        gx, gy = np.meshgrid(cx, cy)
        blocked |= spec.contains(gx + 1j * gy)
        blocked[row, col] = True
        bottom_open = all(_floor(p) > 0 for p in spec.primitives)

    omega = _flood_from_border(blocked, bottom_open)
    if bottom_open:
        # the strip between ℝ and the support floor is part of Ω
        omega = np.vstack([np.ones((1, nx), dtype=bool), omega])
        row = row + 1
        ny += 1

    marked = np.zeros(q.n, dtype=bool)
    for dj in range(-reach, reach + 1):
        for di in range(-reach, reach + 1):
            jj = np.clip(row + dj, 0, ny - 1)
            ii = np.clip(col + di, 0, nx - 1)
            marked |= omega[jj, ii]
    return marked


def primitive_runs(q: Quadrature) -> List[np.ndarray]:
    """Node index arrays of each 1D primitive, in parameter order"""
    return [np.flatnonzero(q.panel_of == k) for k in np.unique(q.panel_of)]
