"""
JSON problem configurations: support, kernel, right-hand sides, σ,
discretization, solver settings, oracle and outputs.
"""

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

from config import Config
from geometry import CircularArc, HalfDisk, HalfLineInterval, Rectangle, Segment, SupportSpec
from kernel import KernelKind, RhsKind, SigmaSpec

CHECK_TOLERANCES = ('equation_of_state', 'vacancy', 'psd_relative', 'potential')


class ConfigError(ValueError):
    """Invalid problem configuration; `where` names the JSON field or line/column"""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class SolverSettings:
    tol: float
    max_iter: Optional[int]
    support_threshold: float


@dataclass(frozen=True)
class ProblemConfig:
    support: SupportSpec
    kernel: KernelKind
    rhs: RhsKind
    sigma: SigmaSpec
    solver: SolverSettings
    temporal_rhs: Optional[RhsKind] = None
    nodes_per_unit: Optional[float] = None
    cell_size: Optional[float] = None
    oracle: Optional[dict] = None
    checks: dict = field(default_factory=dict)
    output_dir: str = 'out'
    name: str = 'problem'
    path: Optional[str] = None


def _point(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(where, f"expected a point [re, im], got {value!r}")


def _number(section: dict, key: str, where: str, default=None, positive: bool = False) -> Optional[float]:
    value = section.get(key, default)
    if value is None:
        if default is None and key not in section:
            raise ConfigError(f"{where}.{key}", "missing value")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{where}.{key}", f"must be positive, got {value}")
    return float(value)


def _tagged(section, where: str) -> str:
    if not isinstance(section, dict) or 'type' not in section:
        raise ConfigError(where, "expected an object with a 'type' tag")
    return section['type']


def parse_primitive(entry: dict, where: str):
    kind = _tagged(entry, where)
    if kind == 'segment':
        return Segment(_point(entry.get('from'), f"{where}.from"), _point(entry.get('to'), f"{where}.to"))
    if kind == 'arc':
        angles = entry.get('angles')
        if not isinstance(angles, (list, tuple)) or len(angles) != 2:
            raise ConfigError(f"{where}.angles", "expected [start, end]")
        return CircularArc(_point(entry.get('center', [0, 0]), f"{where}.center"),
                           _number(entry, 'radius', where, positive=True), float(angles[0]), float(angles[1]))
    if kind == 'rectangle':
        return Rectangle(_point(entry.get('lower_left'), f"{where}.lower_left"),
                         _point(entry.get('upper_right'), f"{where}.upper_right"))
    if kind == 'half_disk':
        return HalfDisk(_point(entry.get('center', [0, 0]), f"{where}.center"),
                        _number(entry, 'radius', where, positive=True), _number(entry, 'min_im', where, default=0.0))
    if kind == 'half_line':
        return HalfLineInterval(_number(entry, 'from', where), _number(entry, 'to', where))
    raise ConfigError(f"{where}.type", f"unknown support primitive '{kind}'")


def parse_support(entries, where: str = 'support') -> SupportSpec:
    if not isinstance(entries, list):
        raise ConfigError(where, "expected a list of primitives")
    primitives = [parse_primitive(entry, f"{where}[{k}]") for k, entry in enumerate(entries)]
    labels = tuple(entry.get('label', f"p{k}") for k, entry in enumerate(entries))
    spec = SupportSpec(tuple(primitives), labels)
    try:
        spec.validate()
    except ValueError as e:
        raise ConfigError(where, str(e)) from e
    return spec


def parse_kernel(section: dict, where: str = 'kernel') -> KernelKind:
    kind = _tagged(section, where)
    try:
        if kind == 'nls_breather':
            return KernelKind.nls_breather(_number(section, 'delta0', where, positive=True))
        return KernelKind(kind)
    except ValueError as e:
        raise ConfigError(where, str(e)) from e


def parse_rhs(section: dict, where: str) -> RhsKind:
    kind = _tagged(section, where)
    try:
        if kind == 'constant':
            return RhsKind.constant(_number(section, 'value', where))
        if kind == 'tabulated':
            return RhsKind.tabulated(section.get('values') or [])
        if kind.startswith('breather'):
            return RhsKind(kind, delta0=_number(section, 'delta0', where, positive=True))
        return RhsKind(kind)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(where, str(e)) from e


def parse_sigma(section: Optional[dict], where: str = 'sigma') -> SigmaSpec:
    if section is None:
        return SigmaSpec.zero()
    kind = _tagged(section, where)
    if kind == 'zero':
        return SigmaSpec.zero()
    if kind == 'constant':
        value = _number(section, 'value', where)
        if value < 0:
            raise ConfigError(f"{where}.value", f"sigma must be nonnegative, got {value}")
        return SigmaSpec.constant(value)
    if kind == 'tabulated':
        values = section.get('values')
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{where}.values", "expected a nonempty list")
        for k, v in enumerate(values):
            if not isinstance(v, (int, float)) or v < 0:
                raise ConfigError(f"{where}.values[{k}]", f"sigma must be nonnegative, got {v!r}")
        return SigmaSpec.tabulated(values)
    if kind == 'power_distance':
        factor = _number(section, 'factor', where, default=1.0)
        if factor < 0:
            raise ConfigError(f"{where}.factor", f"sigma must be nonnegative, got factor {factor}")
        return SigmaSpec('power_distance', center=_point(section.get('center', [0, 0]), f"{where}.center"),
                         exponent=_number(section, 'exponent', where), factor=factor,
                         scale=_number(section, 'scale', where, default=1.0, positive=True))
    if kind == 'radial_gap':
        slope = _number(section, 'slope', where)
        if slope < 0:
            raise ConfigError(f"{where}.slope", f"sigma must be nonnegative, got slope {slope}")
        return SigmaSpec('radial_gap', center=_point(section.get('center', [0, 0]), f"{where}.center"),
                         radius=_number(section, 'radius', where, positive=True), slope=slope)
    raise ConfigError(f"{where}.type", f"unknown sigma kind '{kind}'")


def parse_problem(document: dict, path: Optional[str] = None) -> ProblemConfig:
    """
    Build a ProblemConfig from a decoded JSON document

    Args:
        document: decoded JSON object
        path: source file, used for the default output directory name

    Returns:
        ProblemConfig
    """
    if not isinstance(document, dict):
        raise ConfigError('document', "expected a JSON object")

    support = parse_support(document.get('support'))
    kernel = parse_kernel(document.get('kernel', {'type': 'nls_soliton'}))
    rhs = parse_rhs(document.get('rhs'), 'rhs')
    temporal = document.get('temporal_rhs')
    temporal_rhs = parse_rhs(temporal, 'temporal_rhs') if temporal is not None else None
    sigma = parse_sigma(document.get('sigma'))

    disc = document.get('discretization') or {}
    if not isinstance(disc, dict):
        raise ConfigError('discretization', "expected an object")
    nodes_per_unit = _number(disc, 'nodes_per_unit', 'discretization', default=None, positive=True) \
        if 'nodes_per_unit' in disc else None
    cell_size = _number(disc, 'cell_size', 'discretization', default=None, positive=True) \
        if 'cell_size' in disc else None
    if not support.is_two_dimensional() and nodes_per_unit is None:
        raise ConfigError('discretization.nodes_per_unit', "required for supports with curves")
    if not support.is_one_dimensional() and cell_size is None:
        raise ConfigError('discretization.cell_size', "required for supports with regions")

    solver_section = document.get('solver') or {}
    tol = _number(solver_section, 'tol', 'solver', default=Config.TOL, positive=True)
    max_iter = solver_section.get('max_iter')
    if max_iter is not None and (isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter <= 0):
        raise ConfigError('solver.max_iter', f"expected a positive integer, got {max_iter!r}")
    threshold = _number(solver_section, 'support_threshold', 'solver',
                        default=Config.SUPPORT_THRESHOLD, positive=True)

    oracle = document.get('oracle')
    if oracle is not None and not isinstance(oracle, dict):
        raise ConfigError('oracle', "expected an object")
    if oracle and 'min_order' in oracle:
        _number(oracle, 'min_order', 'oracle', positive=True)
    checks = document.get('checks') or {}
    if not isinstance(checks, dict):
        raise ConfigError('checks', "expected an object")
    for key, value in (checks.get('tolerances') or {}).items():
        if key not in CHECK_TOLERANCES:
            raise ConfigError(f"checks.tolerances.{key}", f"unknown tolerance; expected one of {', '.join(CHECK_TOLERANCES)}")
        _number(checks['tolerances'], key, 'checks.tolerances', positive=True)
    outputs = document.get('outputs') or {}
    name = os.path.splitext(os.path.basename(path))[0] if path else 'problem'
    output_dir = outputs.get('dir') or os.path.join(Config.OUTPUT_DIR, name)

    return ProblemConfig(
        support=support,
        kernel=kernel,
        rhs=rhs,
        sigma=sigma,
        solver=SolverSettings(tol, max_iter, threshold),
        temporal_rhs=temporal_rhs,
        nodes_per_unit=nodes_per_unit,
        cell_size=cell_size,
        oracle=oracle,
        checks=checks,
        output_dir=output_dir,
        name=name,
        path=path,
    )


def load_problem_config(path: str) -> ProblemConfig:
    """Read and validate a problem config file; errors carry line/column or field path"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(path, f"cannot read config: {e.strerror}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}", e.msg) from e
    return parse_problem(document, path)
