import math
import os

import numpy as np

from analytic.band_logic import (BandSystem, bound_state_density_values, gap_zeros,
                                 solve_band_polynomial)
from analytic.condensate_logic import box_condensate, kdv_from_nls, semicircle_condensate
from commands.command_utils import EXIT_PASS, guarded, parse_float_list
from config import Config
from states_store import StatesStore


def _store(args) -> StatesStore:
    return StatesStore(args.out or os.path.join(Config.OUTPUT_DIR, 'analytic'))


def _positive(value: float, name: str):
    if not value > 0:
        raise ValueError(f"--{name} must be positive, got {value}")


def _count(n: int):
    if n <= 0:
        raise ValueError(f"--n must be positive, got {n}")


def semicircle_rows(rho: float, n: int):
    """Midpoints of n equal arcs of the upper semicircle"""
    theta = (np.arange(n) + 0.5) * math.pi / n
    rows = []
    for t in theta:
        z = rho * complex(math.cos(t), math.sin(t))
        u, v = semicircle_condensate(rho, z)
        rows.append([z.real, z.imag, u, v])
    return rows


def box_rows(q: float, n: int):
    """Nodes y = kq/n, k = 0..n−1 (the singular endpoint iq is left out)"""
    return [[0.0, k * q / n, box_condensate(q, 1j * k * q / n)] for k in range(n)]


def band_rows(bands: BandSystem, n: int):
    """About n midpoints spread over the bands in proportion to their lengths"""
    intervals = bands.bands()
    total = sum(hi - lo for lo, hi in intervals)
    heights = []
    for lo, hi in intervals:
        count = max(1, int(round(n * (hi - lo) / total)))
        heights.append(lo + (np.arange(count) + 0.5) * (hi - lo) / count)
    return np.concatenate(heights)


@guarded('evaluating the semicircle condensate')
def cmd_semicircle(args) -> int:
    _positive(args.rho, 'rho')
    _count(args.n)
    _store(args).save_table('semicircle.csv', ['re', 'im', 'u', 'v'], semicircle_rows(args.rho, args.n))
    return EXIT_PASS


@guarded('evaluating the box condensate')
def cmd_box(args) -> int:
    _positive(args.q, 'q')
    _count(args.n)
    _store(args).save_table('box.csv', ['re', 'im', 'u'], box_rows(args.q, args.n))
    return EXIT_PASS


@guarded('solving the band system')
def cmd_bound_state(args) -> int:
    _count(args.n)
    bands = BandSystem(args.kind, tuple(parse_float_list(args.bands)))
    poly = solve_band_polynomial(bands)
    zeros = gap_zeros(poly)
    y = band_rows(bands, args.n)
    u = bound_state_density_values(poly, y)
    store = _store(args)
    store.save_table('bound_state.csv', ['re', 'im', 'u'], [[0.0, yy, uu] for yy, uu in zip(y, u)])
    payload = poly.to_dict()
    payload['gap_zeros'] = zeros
    store.save_report(payload, 'bound_state.json')
    for power, c in zip(poly.bands.free_powers(), poly.coefficients):
        print(f"📊 coefficient of z^{power}: {c:.15g}")
    for zero in zeros:
        print(f"📊 gap zero at y = {zero:.15g}")
    return EXIT_PASS


@guarded('mapping to the KdV picture')
def cmd_kdv_map(args) -> int:
    _count(args.n)
    if args.bands:
        bands = BandSystem(args.kind, tuple(parse_float_list(args.bands)))
        poly = solve_band_polynomial(bands)
        zeta = band_rows(bands, args.n)

        def u_nls(z):
            return float(bound_state_density_values(poly, np.array([complex(z).imag]))[0])
    else:
        _positive(args.q, 'q')
        zeta = np.arange(args.n) * args.q / args.n

        def u_nls(z):
            return box_condensate(args.q, z)
    u_kdv = kdv_from_nls(u_nls)
    rows = [[zz, u_kdv(zz), u_nls(1j * zz)] for zz in zeta]
    _store(args).save_table('kdv_map.csv', ['zeta', 'u_kdv', 'u_nls'], rows)
    return EXIT_PASS


def register(subparsers):
    analytic = subparsers.add_parser('analytic', help='Closed-form condensate densities')
    kinds = analytic.add_subparsers(dest='kind', required=True)

    semicircle = kinds.add_parser('semicircle', help='Circular condensate on |z| = rho')
    semicircle.add_argument('--rho', type=float, default=1.0)
    semicircle.add_argument('--n', type=int, default=100)
    semicircle.add_argument('--out', help='Output directory')
    semicircle.set_defaults(handler=cmd_semicircle)

    box = kinds.add_parser('box', help='Box condensate on [0, iq]')
    box.add_argument('--q', type=float, default=1.0)
    box.add_argument('--n', type=int, default=100)
    box.add_argument('--out', help='Output directory')
    box.set_defaults(handler=cmd_box)

    bound = kinds.add_parser('bound-state', help='Bound-state condensate of a band system')
    bound.add_argument('--bands', required=True, help='Comma-separated endpoints, e.g. 1,1.5,2')
    bound.add_argument('--kind', choices=['odd', 'even'], default='odd')
    bound.add_argument('--n', type=int, default=200)
    bound.add_argument('--out', help='Output directory')
    bound.set_defaults(handler=cmd_bound_state)

    kdv = kinds.add_parser('kdv-map', help='KdV density from the fNLS bound-state density')
    kdv.add_argument('--q', type=float, default=1.0, help='Box height when --bands is not given')
    kdv.add_argument('--bands', help='Comma-separated band endpoints')
    kdv.add_argument('--kind', choices=['odd', 'even'], default='odd')
    kdv.add_argument('--n', type=int, default=100)
    kdv.add_argument('--out', help='Output directory')
    kdv.set_defaults(handler=cmd_kdv_map)
