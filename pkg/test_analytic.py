#!/usr/bin/env python3
"""
Test script for the closed-form condensates and bound-state band systems
"""

import cmath
import math
import os
import sys

import numpy as np
import pytest
from scipy import integrate

# Add the current directory to Python path to import our modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from analytic.band_logic import (BandPolynomial, BandSystem, band_green_potential, band_support,
                                 bound_state_density, bound_state_density_values, check_zero_locations,
                                 gap_integral, gap_root_counts, gap_zeros, solve_band_polynomial)
from analytic.condensate_logic import (NDR_SCALE, box_condensate, kdv_box_support, kdv_from_nls, nls_from_kdv,
                                       oracle_for, semicircle_condensate)
from geometry import HalfLineInterval


def gap_moment(power, lo, hi, weight):
    """∫ y^power/√|D| over (lo, hi) with the square-root endpoint factors handed to QUADPACK"""
    value, _ = integrate.quad(lambda y: y ** power * weight(y), lo, hi, weight='alg', wvar=(-0.5, -0.5))
    return value


def test_semicircle_condensate():
    print("🧪 Testing semicircle condensate...")
    u, v = semicircle_condensate(1.0, cmath.exp(1j * math.pi / 3))
    assert u == pytest.approx(0.2756644, rel=1e-6)
    assert v == pytest.approx(-1.1026578, rel=1e-6)
    u, v = semicircle_condensate(1.0, 1j)
    assert u == pytest.approx(1 / math.pi, rel=1e-15)
    assert v == 0.0
    with pytest.raises(ValueError):
        semicircle_condensate(1.0, 0.5j)
    print("✅ Semicircle condensate working")


def test_box_condensate():
    print("🧪 Testing box condensate...")
    assert box_condensate(1.0, 0.6j) == pytest.approx(0.2387324, rel=1e-6)
    assert box_condensate(1.0, 0j) == 0.0
    with pytest.raises(ValueError, match='endpoint singularity'):
        box_condensate(1.0, 1j)
    near_top = 1.0 - 1e-8
    assert box_condensate(1.0, 1j * near_top) * math.sqrt(1.0 - near_top) < 1.0
    print("✅ Box condensate working")


def test_kdv_mapping():
    def box(z):
        return box_condensate(1.0, z)

    u_kdv = kdv_from_nls(box)
    assert u_kdv(0.6) == pytest.approx(0.1193662, rel=1e-6)
    assert nls_from_kdv(u_kdv)(0.6j) == box(0.6j)
    assert kdv_from_nls(lambda z: 0.0)(0.3) == 0.0


def test_oracle_uses_solver_normalization():
    z = np.array([0.6j, 0.3j])
    np.testing.assert_allclose(oracle_for({'type': 'box', 'q': 1.0})(z),
                               [NDR_SCALE * box_condensate(1.0, x) for x in z])
    np.testing.assert_allclose(oracle_for({'type': 'semicircle', 'rho': 2.0})(np.array([2j])), [1.0])
    np.testing.assert_allclose(oracle_for({'type': 'kdv_box', 'q': 1.0})(np.array([0.6])),
                               [0.5 * NDR_SCALE * 0.2387324], rtol=1e-6)
    with pytest.raises(LookupError):
        oracle_for({'type': 'lens'})


def test_genus_two_band_polynomial():
    print("🧪 Testing genus-2 band polynomial...")
    bands = BandSystem('odd', (1.0, 1.5, 2.0))
    poly = solve_band_polynomial(bands)
    c1 = poly.coefficients[0]

    def weight(y):
        return 1.0 / math.sqrt((y + 1.0) * (1.5 + y) * (4.0 - y * y))

    expected = gap_moment(3, 1.0, 1.5, weight) / gap_moment(1, 1.0, 1.5, weight)
    assert c1 == pytest.approx(expected, rel=1e-8)
    assert 1.0 < math.sqrt(c1) < 1.5
    assert abs(gap_integral(poly, 1)) <= 1e-10

    below = gap_integral(BandPolynomial(bands, (c1 - 0.1,)), 1)
    above = gap_integral(BandPolynomial(bands, (c1 + 0.1,)), 1)
    assert below * above < 0

    zeros = gap_zeros(poly)
    assert zeros == [pytest.approx(math.sqrt(c1), rel=1e-12)]
    print(f"✅ c1 = {c1:.12f}, gap zero at {zeros[0]:.12f}")


def test_band_density():
    bands = BandSystem('odd', (1.0, 1.5, 2.0))
    poly = solve_band_polynomial(bands)
    for y in (0.1, 0.5, 0.9, 1.6, 1.9):
        assert bound_state_density(poly, 1j * y) > 0
    assert bound_state_density(poly, 0j) == 0.0
    with pytest.raises(ValueError):
        bound_state_density(poly, 1.2j)
    with pytest.raises(ValueError):
        bound_state_density(poly, 1j)
    values = bound_state_density_values(poly, np.array([0.5, 1.2, 1.8]))
    assert np.isnan(values[1])
    assert values[0] > 0 and values[2] > 0


def test_single_band_is_the_box():
    poly = solve_band_polynomial(BandSystem('odd', (1.0,)))
    assert poly.coefficients == ()
    assert bound_state_density(poly, 0.6j) == pytest.approx(box_condensate(1.0, 0.6j), rel=1e-14)


def test_even_band_system():
    print("🧪 Testing even band system...")
    bands = BandSystem('even', (1.0, 2.0))
    poly = solve_band_polynomial(bands)
    c0 = poly.coefficients[0]

    def weight(y):
        return 1.0 / math.sqrt((1.0 + y) * (4.0 - y * y))

    value, _ = integrate.quad(lambda y: weight(y), 0.0, 1.0, weight='alg', wvar=(0.0, -0.5))
    second, _ = integrate.quad(lambda y: y * y * weight(y), 0.0, 1.0, weight='alg', wvar=(0.0, -0.5))
    assert c0 == pytest.approx(second / value, rel=1e-8)
    zero = gap_zeros(poly)[0]
    assert 0.0 < zero < 1.0
    assert bound_state_density(poly, 1.5j) > 0
    print("✅ Even band system working")


def test_gap_root_counts():
    print("🧪 Testing zero count per gap...")
    assert gap_root_counts(solve_band_polynomial(BandSystem('odd', (1.0, 1.5, 2.0)))) == [1]

    bands = BandSystem('odd', (1.0, 1.5, 2.0, 3.0, 4.0))
    # p(y) = y(y² − 1.44)(y² − 6.25): one zero in each gap
    good = BandPolynomial(bands, (9.0, 7.69))
    assert gap_root_counts(good) == [1, 1]

    # p(y) = y(y² − 1.21)(y² − 1.69): both zeros in the first gap
    crowded = BandPolynomial(bands, (2.0449, 2.9))
    assert gap_root_counts(crowded) == [2, 0]
    with pytest.raises(ValueError, match='2 zeros in gap'):
        check_zero_locations(crowded)
    print("✅ Zeros counted per gap")


@pytest.mark.parametrize('kind, endpoints', [
    ('odd', (1.0, 0.5, 2.0)),
    ('odd', (1.0, 1.5)),
    ('even', (1.0,)),
    ('odd', (0.0, 1.5, 2.0)),
])
def test_invalid_band_systems(kind, endpoints):
    with pytest.raises(ValueError):
        BandSystem(kind, endpoints)


def test_support_helpers():
    box = kdv_box_support(1.0, 1e-3).primitives[0]
    assert isinstance(box, HalfLineInterval)
    assert (box.start, box.end) == (pytest.approx(1e-3), pytest.approx(0.999))

    bands = BandSystem('odd', (1.0, 1.5, 2.0))
    spec = band_support(bands)
    assert [(p.start, p.end) for p in spec.primitives] == [(0j, 1j), (1.5j, 2j)]
    assert spec.labels == ('band0', 'band1')
    kdv = band_support(bands, half_line=True)
    assert all(isinstance(p, HalfLineInterval) for p in kdv.primitives)


def test_band_green_potential():
    """Gμ = Im z on the bands and Gμ ≥ Im z in the gap"""
    print("🧪 Testing Green potential of the band density...")
    box = solve_band_polynomial(BandSystem('odd', (1.0,)))
    assert band_green_potential(box, 0.5j) == pytest.approx(0.5, abs=1e-8)

    poly = solve_band_polynomial(BandSystem('odd', (1.0, 1.5, 2.0)))
    for y in (0.5, 1.75):
        assert band_green_potential(poly, 1j * y) == pytest.approx(y, abs=1e-6)
    assert band_green_potential(poly, 1.25j) >= 1.25 - 1e-2
    assert band_green_potential(poly, 2.0) == 0.0
    print("✅ Band potential reproduces Im z")


def main():
    """Run all analytic tests"""
    print("🚀 Starting Analytic Condensate Tests...")
    print("=" * 50)

    try:
        test_semicircle_condensate()
        test_box_condensate()
        test_kdv_mapping()
        test_oracle_uses_solver_normalization()
        test_genus_two_band_polynomial()
        test_band_density()
        test_single_band_is_the_box()
        test_even_band_system()
        test_gap_root_counts()
        test_support_helpers()
        test_band_green_potential()

        print("\n" + "=" * 50)
        print("✅ All analytic tests completed!")
        print("=" * 50)

    except Exception as e:
        print(f"\n❌ Test failed with error: {e}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
