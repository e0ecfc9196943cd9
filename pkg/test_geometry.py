#!/usr/bin/env python3
"""
Test script for spectral supports and their quadratures
"""

import math
import os
import sys

import numpy as np
import pytest

# Add the current directory to Python path to import our modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from geometry import (CircularArc, HalfDisk, Rectangle, Segment, SupportSpec, discretize,
                      discretize_contour, discretize_mixed, discretize_region, endpoint_weights, exclusion_mask,
                      interior_nodes, outer_boundary_nodes, refine_quadrature, transfer_values)


def semicircle(radius=1.0):
    return SupportSpec((CircularArc(0j, radius, 0.0, math.pi),))


def test_segment_midpoints():
    """Midpoint nodes and equal weights on a vertical segment"""
    print("🧪 Testing segment midpoint rule...")
    q = discretize_contour(SupportSpec((Segment(1j, 2j),)), 10)
    assert q.n == 10
    expected = 1j * (1 + (np.arange(10) + 0.5) / 10)
    np.testing.assert_allclose(q.nodes, expected, rtol=0, atol=1e-14)
    np.testing.assert_allclose(q.weights, 0.1, rtol=1e-14)
    assert q.endpoint_flags[0] and q.endpoint_flags[-1]
    assert not q.endpoint_flags[1:-1].any()
    print("✅ Segment midpoint rule working")


def test_semicircle_weights_sum_to_arclength():
    print("🧪 Testing semicircle arclength...")
    q = discretize_contour(semicircle(), 100)
    assert abs(q.weights.sum() - math.pi) <= 1e-12
    np.testing.assert_allclose(np.abs(q.nodes), 1.0, rtol=0, atol=1e-14)
    assert np.all(q.nodes.imag > 0)
    print("✅ Semicircle arclength is π")


def test_segment_touching_real_axis_is_accepted():
    print("🧪 Testing transversal contact with ℝ...")
    q = discretize_contour(SupportSpec((Segment(0j, 1j),)), 100)
    assert q.endpoint_flags[0]
    np.testing.assert_allclose(q.real_axis_distance, q.nodes.imag)
    assert q.real_axis_distance.min() > 0
    print("✅ Segment from 0 to i accepted")


@pytest.mark.parametrize('spec, message', [
    (SupportSpec(()), 'empty support'),
    (SupportSpec((Segment(-1j, 1j),)), 'not in closed upper half-plane'),
    (SupportSpec((Segment(-1 + 0j, 1 + 0j),)), 'tangential real-axis contact'),
    (SupportSpec((CircularArc(1j, 1.0, 0.0, 2 * math.pi),)), 'tangential real-axis contact'),
])
def test_invalid_contours(spec, message):
    with pytest.raises(ValueError, match=message):
        discretize_contour(spec, 10)


def test_rectangle_grid():
    print("🧪 Testing rectangle grid...")
    q = discretize_region(SupportSpec((Rectangle(-1 + 1j, 1 + 2j),)), 0.1)
    assert q.n == 200
    np.testing.assert_allclose(q.weights, 0.01, rtol=1e-12)
    assert abs(q.weights.sum() - 2.0) <= 1e-10
    assert q.endpoint_flags.any()
    print("✅ Rectangle grid has 200 cells")


def test_half_disk_area():
    print("🧪 Testing half-disk area...")
    q = discretize_region(SupportSpec((HalfDisk(0j, 1.0, 0.01),)), 0.05)
    area = q.weights.sum()
    assert abs(area - math.pi / 2) <= 0.03 * math.pi / 2
    print(f"✅ Half-disk area {area:.4f} vs π/2")


def test_invalid_regions():
    with pytest.raises(ValueError, match='not in closed upper half-plane'):
        discretize_region(SupportSpec((Rectangle(-1 - 1j, 1 + 1j),)), 0.1)
    with pytest.raises(ValueError, match='cell too coarse'):
        discretize_region(SupportSpec((Rectangle(0 + 1j, 1 + 2j),)), 2.0)
    with pytest.raises(ValueError, match='nodes_per_unit'):
        discretize(semicircle())


def test_exclusion_mask_near_endpoints():
    q = discretize_contour(SupportSpec((Segment(0j, 1j),)), 100)
    excluded = exclusion_mask(q, exclusion_cells=3, real_axis_fraction=1e-3)
    assert int(excluded.sum()) == 6
    assert excluded[:3].all() and excluded[-3:].all()


def test_outer_boundary_of_semicircle():
    print("🧪 Testing outer boundary marks on an arc...")
    spec = semicircle()
    q = discretize_contour(spec, 50)
    assert outer_boundary_nodes(q, spec).all()
    print("✅ Every arc node is on the outer boundary")


def test_outer_boundary_of_nested_circles():
    """The inner circle is enclosed by the outer one"""
    spec = SupportSpec((CircularArc(2j, 1.0, 0.0, 2 * math.pi), CircularArc(2j, 0.5, 0.0, 2 * math.pi)))
    q = discretize_contour(spec, 40)
    marked = outer_boundary_nodes(q, spec)
    outer = q.panel_of == 0
    assert marked[outer].all()
    assert not marked[~outer].any()


def test_outer_boundary_of_half_disk():
    print("🧪 Testing outer boundary marks on a half-disk...")
    spec = SupportSpec((HalfDisk(0j, 1.0, 0.1),))
    q = discretize_region(spec, 0.05)
    marked = outer_boundary_nodes(q, spec)
    near_edge = (np.abs(q.nodes) > 1 - 3 * 0.05) | (q.nodes.imag < 0.1 + 3 * 0.05)
    assert marked.any()
    assert not (marked & ~near_edge).any()
    assert (marked & (q.nodes.imag < 0.2)).any()

    deep = interior_nodes(q, spec) & (np.abs(q.nodes - 0.5j) < 0.2)
    assert deep.any()
    assert not marked[deep].any()
    print("✅ Only edge cells are marked")


def test_curve_distance():
    segment = Segment(0j, 1j)
    np.testing.assert_allclose(segment.distance(np.array([0.5 + 0.5j, 2j, -1 + 0j])), [0.5, 1.0, 1.0])
    arc = CircularArc(0j, 1.0, 0.0, math.pi)
    np.testing.assert_allclose(arc.distance(np.array([0.5j, 2j, 0.5 - 0.5j])), [0.5, 1.0, math.sqrt(0.5)])


def half_disk_with_rim():
    return SupportSpec((HalfDisk(0j, 1.0, 0.0), CircularArc(0j, 1.0, 0.0, math.pi)))


def test_mixed_discretization():
    print("🧪 Testing half-disk with its rim...")
    spec = half_disk_with_rim()
    assert spec.is_mixed()
    q = discretize_mixed(spec, 100, 0.05)
    arc_nodes = int(round(math.pi * 100))
    assert q.dimension == 2
    assert (q.node_dimension[:arc_nodes] == 1).all()
    assert (q.node_dimension[arc_nodes:] == 2).all()
    assert (q.panel_of[:arc_nodes] == 1).all()
    assert (q.panel_of[arc_nodes:] == 0).all()

    cells = q.nodes[arc_nodes:]
    assert (1.0 - np.abs(cells) >= 0.05).all()
    assert abs(q.weights[:arc_nodes].sum() - math.pi) <= 1e-12

    assert discretize(spec, nodes_per_unit=100, cell_size=0.05).n == q.n
    with pytest.raises(ValueError, match='nodes_per_unit'):
        discretize(spec, cell_size=0.05)
    with pytest.raises(ValueError, match='both curves and regions'):
        discretize_mixed(semicircle(), 100, 0.05)
    print(f"✅ {arc_nodes} rim nodes and {q.n - arc_nodes} cells")


def test_interior_nodes_skip_curve_nodes():
    spec = half_disk_with_rim()
    q = discretize_mixed(spec, 40, 0.05)
    inner = interior_nodes(q, spec)
    assert inner.any()
    assert not inner[q.node_dimension == 1].any()


def test_endpoint_weights():
    q = discretize_contour(SupportSpec((Segment(0.5j, 1.5j),)), 100)
    weights = endpoint_weights(q, collar=0.1)
    assert weights[0] == pytest.approx((0.005 / 0.1) ** 2)
    assert weights[-1] == pytest.approx(weights[0])
    assert weights[50] == 1.0
    assert ((weights > 0) & (weights <= 1)).all()

    closed = discretize_contour(SupportSpec((CircularArc(2j, 1.0, 0.0, 2 * math.pi),)), 20)
    assert (endpoint_weights(closed) == 1.0).all()


def test_refine_and_transfer_on_arc():
    spec = semicircle()
    q = discretize_contour(spec, 50 / math.pi)
    refined, parent = refine_quadrature(q, spec, 2)
    assert refined.n == 2 * q.n
    np.testing.assert_array_equal(parent, np.repeat(np.arange(q.n), 2))
    assert abs(refined.weights.sum() - q.weights.sum()) <= 1e-12
    assert np.abs(refined.nodes[:, None] - q.nodes[None, :]).min() > 0

    values = transfer_values(q, spec, refined, parent, np.arange(q.n, dtype=float))
    t = (np.arange(refined.n) + 0.5) / refined.n
    np.testing.assert_allclose(values[1:-1], q.n * t[1:-1] - 0.5, atol=1e-12)
    assert values[0] == 0.0
    assert values[-1] == q.n - 1


def test_refine_and_transfer_on_rectangle():
    spec = SupportSpec((Rectangle(-1 + 1j, 1 + 2j),))
    q = discretize_region(spec, 0.1)
    refined, parent = refine_quadrature(q, spec, 2)
    assert refined.n == 4 * q.n
    np.testing.assert_allclose(refined.cell_size, 0.05)
    assert abs(refined.weights.sum() - 2.0) <= 1e-10
    assert (np.abs(refined.nodes - q.nodes[parent]) < 0.05).all()
    values = transfer_values(q, spec, refined, parent, q.nodes.real)
    np.testing.assert_array_equal(values, q.nodes.real[parent])


def main():
    """Run all geometry tests"""
    print("🚀 Starting Geometry Tests...")
    print("=" * 50)

    try:
        test_segment_midpoints()
        test_semicircle_weights_sum_to_arclength()
        test_segment_touching_real_axis_is_accepted()
        test_rectangle_grid()
        test_half_disk_area()
        test_invalid_regions()
        test_exclusion_mask_near_endpoints()
        test_outer_boundary_of_semicircle()
        test_outer_boundary_of_nested_circles()
        test_outer_boundary_of_half_disk()
        test_curve_distance()
        test_mixed_discretization()
        test_interior_nodes_skip_curve_nodes()
        test_endpoint_weights()
        test_refine_and_transfer_on_arc()
        test_refine_and_transfer_on_rectangle()

        print("\n" + "=" * 50)
        print("✅ All geometry tests completed!")
        print("=" * 50)

    except Exception as e:
        print(f"\n❌ Test failed with error: {e}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
