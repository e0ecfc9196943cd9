import csv
import json
import os
import struct
from contextlib import contextmanager
from typing import Dict, List, Optional

import numpy as np

from config import Config
from geometry import Quadrature
from kernel import KERNEL_TAGS, QuadraticForm

STATE_COLUMNS = ['re', 'im', 'weight', 'u', 'v', 's', 'residual_u', 'residual_v', 'in_support', 'excluded']
QUADRATURE_COLUMNS = ['re', 'im', 'weight', 'panel', 'endpoint_flag']
CONVERGENCE_COLUMNS = ['n', 'error', 'observed_order']

# little-endian int64 n followed by an 8-byte ASCII kind tag
KERNEL_HEADER = struct.Struct('<q8s')


def fmt(value) -> str:
    """17 significant digits, empty for missing values"""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return '1' if value else '0'
    return '%.17g' % float(value)


def _parse(value: str) -> Optional[float]:
    return None if value == '' else float(value)


class StatesStore:
    def __init__(self, out_dir: str):
        """
        Artifact directory of one problem

        Args:
            out_dir: directory for states.csv, report.json and the other artifacts
        """
        self.out_dir = out_dir

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    @contextmanager
    def open(self, name: str, mode: str = 'r'):
        """Context manager for artifact files; creates the directory for writes"""
        if 'w' in mode or 'a' in mode:
            os.makedirs(self.out_dir, exist_ok=True)
        binary = 'b' in mode
        f = open(self.path(name), mode) if binary else open(self.path(name), mode, newline='', encoding='utf-8')
        try:
            yield f
        finally:
            f.close()

    def _written(self, name: str):
        if Config.VERBOSE:
            print(f"💾 Wrote {self.path(name)}")

    def save_states(self, q: Quadrature, u: np.ndarray, residual_u: np.ndarray, in_support: np.ndarray,
                    excluded: np.ndarray, v: Optional[np.ndarray] = None, s: Optional[np.ndarray] = None,
                    residual_v: Optional[np.ndarray] = None, name: str = 'states.csv'):
        """Write one row per node; v, s and residual_v are left empty without a temporal solve"""
        with self.open(name, 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(STATE_COLUMNS)
            for i in range(q.n):
                z = q.nodes[i]
                writer.writerow([
                    fmt(z.real), fmt(z.imag), fmt(q.weights[i]), fmt(u[i]),
                    fmt(None if v is None else v[i]),
                    fmt(None if s is None or not in_support[i] else s[i]),
                    fmt(residual_u[i]),
                    fmt(None if residual_v is None else residual_v[i]),
                    fmt(bool(in_support[i])), fmt(bool(excluded[i])),
                ])
        self._written(name)

    def load_states(self, name: str = 'states.csv') -> Dict[str, np.ndarray]:
        """
        Read states.csv back into columns

        Returns:
            Dict of arrays: nodes (complex), weight, u, and v when present
        """
        with self.open(name, 'r') as f:
            reader = csv.DictReader(f)
            missing = [c for c in STATE_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise ValueError(f"{self.path(name)}: missing columns {', '.join(missing)}")
            rows = list(reader)
        nodes = np.array([complex(float(r['re']), float(r['im'])) for r in rows])
        columns = {
            'nodes': nodes,
            'weight': np.array([float(r['weight']) for r in rows]),
            'u': np.array([float(r['u']) for r in rows]),
        }
        v = [_parse(r['v']) for r in rows]
        if rows and all(x is not None for x in v):
            columns['v'] = np.array(v)
        return columns

    def save_quadrature(self, q: Quadrature, name: str = 'quadrature.csv'):
        with self.open(name, 'w') as f:
            writer = csv.DictWriter(f, fieldnames=QUADRATURE_COLUMNS, lineterminator='\n')
            writer.writeheader()
            for row in q.csv_rows():
                writer.writerow({k: fmt(v) if k in ('re', 'im', 'weight') else v for k, v in row.items()})
        self._written(name)

    def save_report(self, payload: dict, name: str = 'report.json'):
        with self.open(name, 'w') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write('\n')
        self._written(name)

    def load_report(self, name: str = 'report.json') -> Optional[dict]:
        if not os.path.exists(self.path(name)):
            return None
        with self.open(name, 'r') as f:
            return json.load(f)

    def save_convergence(self, rows: List[dict], name: str = 'convergence.csv'):
        with self.open(name, 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(CONVERGENCE_COLUMNS)
            for row in rows:
                writer.writerow([row['n'], fmt(row['error']), fmt(row['observed_order'])])
        self._written(name)

    def save_table(self, name: str, columns: List[str], rows: List[list]):
        """Plain numeric table (analytic densities)"""
        with self.open(name, 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([fmt(x) for x in row])
        self._written(name)

    def save_kernel(self, form: QuadraticForm, name: str = 'kernel.bin'):
        with self.open(name, 'wb') as f:
            f.write(kernel_dump(form))
        self._written(name)


def kernel_dump(form: QuadraticForm) -> bytes:
    """16-byte header (n, kind tag) followed by row-major float64 A"""
    header = KERNEL_HEADER.pack(form.n, form.kernel.tag.encode('ascii'))
    return header + np.ascontiguousarray(form.A, dtype='<f8').tobytes(order='C')


def read_kernel_dump(data: bytes):
    """
    Parse a kernel dump

    Returns:
        (kernel kind name, A)
    """
    if len(data) < KERNEL_HEADER.size:
        raise ValueError("kernel dump shorter than its header")
    n, raw_tag = KERNEL_HEADER.unpack_from(data)
    tag = raw_tag.rstrip(b'\0').decode('ascii')
    names = {v: k for k, v in KERNEL_TAGS.items()}
    if tag not in names:
        raise ValueError(f"unknown kernel tag '{tag}'")
    expected = KERNEL_HEADER.size + 8 * n * n
    if len(data) != expected:
        raise ValueError(f"kernel dump has {len(data)} bytes, expected {expected} for n = {n}")
    A = np.frombuffer(data, dtype='<f8', offset=KERNEL_HEADER.size).reshape(n, n)
    return names[tag], A.copy()
