import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringharm import geometry as geo
from ringharm.domains import AffineMap

finite = st.floats(-5, 5, allow_nan=False)


def test_merge_intervals_overlaps():
    assert geo.merge_intervals([(3, 4), (0, 1), (0.5, 2)]) == [(0, 2), (3, 4)]


def test_disk_membership_and_distance():
    d = geo.Ellipse.disk(1 + 1j, 2.0)
    z = np.array([1 + 1j, 4 + 1j, 1 + 3j])
    np.testing.assert_array_equal(d.contains(z), [True, False, True])
    assert d.distance(np.array([5 + 1j]))[0] == pytest.approx(2.0)


def test_disk_line_intervals_exact():
    d = geo.Ellipse.disk(0, 1.0)
    (a, b), = d.line_intervals(-2 + 0.6j, 1 + 0j, -10, 10, 0.1)
    assert a == pytest.approx(2 - 0.8) and b == pytest.approx(2 + 0.8)


def test_exterior_is_complement():
    ext = geo.EllipseExterior.of_disk(0, 2.0)
    iv = ext.line_intervals(0j, 1 + 0j, -10, 10, 0.1)
    assert iv[0][1] == pytest.approx(-2.0) and iv[-1][0] == pytest.approx(2.0)
    assert np.isinf(iv[0][0]) and np.isinf(iv[-1][1])


def test_segment_is_hit_by_crossing_line_only():
    s = geo.Segment(-1, 0)
    (a, b), = s.line_intervals(-0.5 - 1j, 1j, -10, 10, 0.1)
    assert a == pytest.approx(1.0) and b == pytest.approx(1.0)
    assert s.line_intervals(2 - 1j, 1j, -10, 10, 0.1) == []


def test_ray_contains_far_points():
    r = geo.Ray(3.0, 1.0)
    assert r.contains(np.array([1e6 + 0j]))[0]
    assert r.distance(np.array([0j]))[0] == pytest.approx(3.0)


@given(finite, finite)
def test_polygon_contains_unit_square(x, y):
    # the polygon is closed, so only points clear of the boundary are decided
    v = np.array([0, 1, 1 + 1j, 1j])
    inside = geo.polygon_contains(v, np.array([complex(x, y)]))[0]
    strict = 0 < x < 1 and 0 < y < 1
    outside = x < -1e-9 or x > 1 + 1e-9 or y < -1e-9 or y > 1 + 1e-9
    if strict:
        assert inside
    elif outside:
        assert not inside


@given(finite, finite, st.floats(0.3, 3), st.floats(-0.7, 0.7), st.floats(-0.7, 0.7))
@settings(max_examples=50)
def test_affine_transformed_ellipse_membership(x, y, a, br, bi):
    phi = AffineMap(a, complex(br, bi) * a)
    e = geo.Ellipse.disk(0.3, 1.0)
    img = e.transformed(phi)
    z = complex(x, y)
    pre = phi.inverse()(z)
    if abs(abs(pre - 0.3) - 1.0) > 1e-6:
        assert bool(img.contains(np.array([z]))[0]) == (abs(pre - 0.3) < 1.0)


def test_half_plane_distance():
    h = geo.HalfPlane(1j, 1j)
    assert h.distance(np.array([0j]))[0] == pytest.approx(1.0)
    assert h.contains(np.array([2j]))[0]


def test_components_distance_takes_minimum():
    sets = [geo.Segment(-1, 0), geo.Ray(3, 1)]
    assert geo.components_distance(sets, np.array([2 + 0j]))[0] == pytest.approx(1.0)
