#!/usr/bin/env python3
"""
Test script for the NDR kernels, right-hand sides and the assembled energy
"""

import math
import os
import sys

import numpy as np
import pytest
from scipy import integrate

# Add the current directory to Python path to import our modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from analytic.condensate_logic import box_condensate, box_support
from geometry import HalfLineInterval, Quadrature, Segment, SupportSpec, discretize_contour
from kernel import (KernelKind, RhsKind, SigmaSpec, assemble_form, direct_functional,
                    functional_value, gradient, green_potential_at, is_superharmonic, kernel_value,
                    min_eigenvalue, position_shift, rhs_value, temporal_counterpart, unit_square_log_constant)
from solver import DiscreteMeasure

LOG3_OVER_PI = math.log(3) / math.pi


def point_quadrature(nodes, weights):
    """Hand-built 1D quadrature on arbitrary points of ℂ⁺"""
    nodes = np.asarray(nodes, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    n = len(nodes)
    return Quadrature(nodes=nodes, weights=weights, panel_of=np.arange(n), cell_size=weights.copy(),
                      endpoint_flags=np.zeros(n, dtype=bool), real_axis_distance=nodes.imag.copy(),
                      dimension=1, diameter=1.0)


def segment_quadrature(start, end, density):
    return discretize_contour(SupportSpec((Segment(start, end),)), density)


def test_kernel_values():
    print("🧪 Testing kernel values...")
    soliton = KernelKind.nls_soliton()
    assert kernel_value(soliton, 1j, 2j) == pytest.approx(0.3496683, rel=1e-6)
    assert kernel_value(soliton, 1j, 2j) == pytest.approx(LOG3_OVER_PI, rel=1e-14)
    z, w = 0.3 + 0.7j, -0.4 + 1.9j
    assert kernel_value(soliton, z, w) == pytest.approx(kernel_value(soliton, w, z), rel=1e-14)
    assert kernel_value(soliton, z, w) > 0

    breather = KernelKind.nls_breather(1e-6)
    assert abs(kernel_value(breather, 1j, 2j) - LOG3_OVER_PI) <= 1e-4
    assert kernel_value(KernelKind.kdv(), 1.0, 2.0) == pytest.approx(LOG3_OVER_PI, rel=1e-14)
    print("✅ Kernel values match (1/π)log 3")


def test_kernel_domain_errors():
    with pytest.raises(ValueError, match='kernel singular on diagonal'):
        kernel_value(KernelKind.nls_soliton(), 1j, 1j)
    with pytest.raises(ValueError, match='below the real axis'):
        kernel_value(KernelKind.nls_soliton(), -1j, 1j)
    with pytest.raises(ValueError):
        KernelKind.nls_breather(0.0)


def test_rhs_values():
    print("🧪 Testing right-hand sides...")
    assert rhs_value(RhsKind('nls_density'), 2 + 3j) == pytest.approx(3.0)
    assert rhs_value(RhsKind('nls_temporal'), 2 + 3j) == pytest.approx(-24.0)
    assert rhs_value(RhsKind('breather_density', delta0=0.6), 1j) == pytest.approx(0.8, rel=1e-12)
    assert rhs_value(RhsKind('kdv_density'), 2.0) == pytest.approx(1.0)
    assert rhs_value(RhsKind('kdv_temporal'), 2.0) == pytest.approx(-16.0)
    assert rhs_value(RhsKind.constant(5.0), 1j) == 5.0
    with pytest.raises(ValueError):
        rhs_value(RhsKind.tabulated([1.0]), 1j)
    print("✅ Right-hand sides working")


def test_single_node_self_energy():
    q = point_quadrature([1j], [0.1])
    form = assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.zero())
    expected = 0.01 / math.pi * (math.log(2) + 1.5 - math.log(0.1))
    assert form.A.shape == (1, 1)
    assert form.A[0, 0] == pytest.approx(expected, rel=1e-12)
    assert form.A[0, 0] == pytest.approx(0.0143103, rel=1e-5)
    assert form.b[0] == pytest.approx(0.1)


def test_mixed_self_energy():
    """Curve nodes and region cells of one quadrature keep their own self-interaction"""
    nodes = np.array([1j, 0.5 + 2j])
    h = 0.1
    weights = np.array([0.1, h * h])
    q = Quadrature(nodes=nodes, weights=weights, panel_of=np.arange(2), cell_size=np.array([0.1, h]),
                   endpoint_flags=np.zeros(2, dtype=bool), real_axis_distance=nodes.imag.copy(),
                   dimension=2, diameter=1.0, node_dimension=np.array([1, 2], dtype=np.int8))
    form = assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.zero())
    curve = 0.01 / math.pi * (math.log(2.0) + 1.5 - math.log(0.1))
    cell = 1e-4 / math.pi * (math.log(4.0) + unit_square_log_constant() - math.log(h))
    assert form.A[0, 0] == pytest.approx(curve, rel=1e-12)
    assert form.A[1, 1] == pytest.approx(cell, rel=1e-12)


def test_two_node_form():
    print("🧪 Testing two-node assembly...")
    q = point_quadrature([1j, 2j], [0.1, 0.1])
    form = assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.constant(0.5))
    assert form.A[0, 1] == pytest.approx(0.00349668, rel=1e-5)
    assert form.A[0, 1] == form.A[1, 0]
    np.testing.assert_allclose(form.S, 0.05)
    np.testing.assert_allclose(form.b, [0.1, 0.2])
    print("✅ Two-node assembly working")


def test_negative_sigma_is_rejected():
    q = point_quadrature([1j, 2j], [0.1, 0.1])
    with pytest.raises(ValueError, match='nonnegative'):
        assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.tabulated([0.1, -0.2]))


def test_kdv_matches_soliton_on_imaginary_axis():
    print("🧪 Testing KdV/fNLS consistency...")
    kdv_q = discretize_contour(SupportSpec((HalfLineInterval(0.5, 1.5),)), 20)
    nls_q = segment_quadrature(0.5j, 1.5j, 20)
    kdv = assemble_form(kdv_q, KernelKind.kdv(), RhsKind('kdv_density'), SigmaSpec.zero())
    nls = assemble_form(nls_q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.zero())
    np.testing.assert_allclose(kdv.A, nls.A, rtol=0, atol=1e-12 * np.abs(nls.A).max())
    np.testing.assert_allclose(kdv.b, 0.5 * nls.b, rtol=1e-12)
    print("✅ KdV and fNLS matrices agree")


def test_direct_functional_agrees_with_matrix_form():
    rng = np.random.default_rng(7)
    q = segment_quadrature(0.2 + 0.5j, 1.0 + 1.3j, 10)
    sigma = SigmaSpec.tabulated(rng.uniform(0.0, 1.0, q.n))
    form = assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), sigma)
    u = rng.uniform(0.0, 2.0, q.n)
    direct = direct_functional(q, form.kernel, form.rhs, sigma, u)
    assert functional_value(form, u) == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_gradient_matches_finite_differences():
    print("🧪 Testing analytic gradient...")
    rng = np.random.default_rng(11)
    q = segment_quadrature(0.1 + 0.4j, 0.9 + 1.2j, 7)
    form = assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.constant(0.3))
    h = 1e-5
    for _ in range(50):
        u = rng.uniform(-1.0, 2.0, q.n)
        numeric = np.empty(q.n)
        for i in range(q.n):
            step = np.zeros(q.n)
            step[i] = h
            numeric[i] = (functional_value(form, u + step) - functional_value(form, u - step)) / (2 * h)
        analytic = gradient(form, u)
        assert np.abs(numeric - analytic).max() <= 1e-6 * max(1.0, np.abs(analytic).max())
    print("✅ Gradient matches central differences")


def test_breather_kernel_converges_to_soliton():
    """A(δ₀) − A(0) = O(δ₀²)"""
    q = segment_quadrature(0.5 + 0.5j, 1.0 + 1.5j, 30)
    rhs = RhsKind('nls_density')
    base = assemble_form(q, KernelKind.nls_soliton(), rhs, SigmaSpec.zero()).A
    coarse = np.abs(assemble_form(q, KernelKind.nls_breather(1e-3), rhs, SigmaSpec.zero()).A - base).max()
    fine = np.abs(assemble_form(q, KernelKind.nls_breather(1e-6), rhs, SigmaSpec.zero()).A - base).max()
    order = math.log(coarse / fine) / math.log(1e3)
    assert 1.95 <= order <= 2.05


@pytest.mark.parametrize('seed', range(20))
def test_assembled_matrix_is_positive_semidefinite(seed):
    rng = np.random.default_rng(seed)
    x0, x1 = rng.uniform(-1.0, 1.0, 2)
    y0, y1 = rng.uniform(0.3, 2.0, 2)
    q = segment_quadrature(complex(x0, y0), complex(x1, y1 + 0.5), 60 / math.hypot(x1 - x0, y1 + 0.5 - y0))
    form = assemble_form(q, KernelKind.nls_soliton(), RhsKind('nls_density'), SigmaSpec.zero())
    assert min_eigenvalue(form.A) >= -1e-10 * np.abs(form.A).max()

    a = rng.uniform(0.2, 1.0)
    kdv_q = discretize_contour(SupportSpec((HalfLineInterval(a, a + rng.uniform(0.5, 2.0)),)), 40)
    kdv = assemble_form(kdv_q, KernelKind.kdv(), RhsKind('kdv_density'), SigmaSpec.zero())
    assert min_eigenvalue(kdv.A) >= -1e-10 * np.abs(kdv.A).max()


def test_green_potential_of_point_mass():
    print("🧪 Testing Green potential...")
    m = DiscreteMeasure(point_quadrature([1j], [1.0]), np.array([1.0]))
    sample = green_potential_at(m, KernelKind.nls_soliton(), 2j)
    assert sample.value == pytest.approx(0.3496683, rel=1e-6)
    assert not sample.at_node
    assert green_potential_at(m, KernelKind.nls_soliton(), 3.0).value == 0.0
    assert green_potential_at(m, KernelKind.nls_soliton(), 1j).at_node
    print("✅ Green potential of a point mass working")


def test_green_potential_of_box_condensate():
    """Discrete potential of the truncated box density against adaptive quadrature"""
    q = discretize_contour(box_support(1.0, 1e-3), 400 / 0.998)
    u = np.array([math.pi * box_condensate(1.0, z) for z in q.nodes])
    m = DiscreteMeasure(q, u)

    def integrand(y):
        return math.log((0.5 + y) / abs(0.5 - y)) * y / (math.pi * math.sqrt(1.0 - y * y))

    reference, _ = integrate.quad(integrand, 0.001, 0.999, points=[0.5], limit=200)
    assert green_potential_at(m, KernelKind.nls_soliton(), 0.5j).value == pytest.approx(reference, abs=1e-2)


def test_unit_square_log_constant():
    # log of the geometric mean distance of the unit square with itself is −0.80508
    assert unit_square_log_constant() == pytest.approx(0.80508, abs=1e-4)


def test_threaded_assembly_matches_sequential():
    q = segment_quadrature(0.1 + 0.2j, 0.9 + 1.4j, 600 / math.hypot(0.8, 1.2))
    rhs = RhsKind('nls_density')
    sequential = assemble_form(q, KernelKind.nls_soliton(), rhs, SigmaSpec.zero(), threads=1)
    threaded = assemble_form(q, KernelKind.nls_soliton(), rhs, SigmaSpec.zero(), threads=4)
    assert q.n > 256
    np.testing.assert_array_equal(threaded.A, sequential.A)


def test_position_shift():
    assert position_shift(KernelKind.nls_soliton(), 1j, 2j) == pytest.approx(math.log(3), rel=1e-14)
    assert position_shift(KernelKind.nls_soliton(), 2j, 1j) == pytest.approx(math.log(3) / 2, rel=1e-14)
    with pytest.raises(ValueError):
        position_shift(KernelKind.kdv(), 1.0, 2.0)


def test_superharmonic_flags():
    assert is_superharmonic(RhsKind('nls_density'))
    assert is_superharmonic(RhsKind.constant(1.0))
    assert not is_superharmonic(RhsKind('nls_temporal'))
    assert not is_superharmonic(RhsKind.tabulated([1.0]))
    assert temporal_counterpart(RhsKind('kdv_density')).name == 'kdv_temporal'
    assert temporal_counterpart(RhsKind('nls_temporal')) is None


def main():
    """Run all kernel tests"""
    print("🚀 Starting Kernel Tests...")
    print("=" * 50)

    try:
        test_kernel_values()
        test_kernel_domain_errors()
        test_rhs_values()
        test_single_node_self_energy()
        test_mixed_self_energy()
        test_two_node_form()
        test_negative_sigma_is_rejected()
        test_kdv_matches_soliton_on_imaginary_axis()
        test_direct_functional_agrees_with_matrix_form()
        test_gradient_matches_finite_differences()
        test_breather_kernel_converges_to_soliton()
        for seed in range(20):
            test_assembled_matrix_is_positive_semidefinite(seed)
        test_green_potential_of_point_mass()
        test_green_potential_of_box_condensate()
        test_unit_square_log_constant()
        test_threaded_assembly_matches_sequential()
        test_position_shift()
        test_superharmonic_flags()

        print("\n" + "=" * 50)
        print("✅ All kernel tests completed!")
        print("=" * 50)

    except Exception as e:
        print(f"\n❌ Test failed with error: {e}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
