import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringharm.domains import (AffineImage, AffineMap, Annulus, ExtendedModulus, FtImageRing, Grotzsch,
                              HalfPlaneRegion, PlaneMinusCompact, PolygonalRing, PuncturedDomain, RealSlitRing,
                              SlitStrip, Teichmuller, apply_affine, complement_areas, convex_width, domain_from_dict,
                              domain_to_dict, ft_forward, ft_inverse, is_simple_polygon, width_and_separation)

SQUARE = [(-2, -2), (2, -2), (2, 2), (-2, 2)]
SMALL = [(-1, -1), (1, -1), (1, 1), (-1, 1)]

small = st.floats(-0.8, 0.8)


def test_affine_compose_and_inverse():
    phi = AffineMap(2 + 1j, 0.5 - 0.2j, 1 - 1j)
    psi = AffineMap(1, 0.3j, 2)
    z = np.array([0.3 + 0.4j, -1 + 2j])
    np.testing.assert_allclose(phi.compose(psi)(z), phi(psi(z)))
    np.testing.assert_allclose(phi.inverse()(phi(z)), z, atol=1e-14)


def test_affine_singular_map_rejected():
    with pytest.raises(ValueError):
        AffineMap(1, 1)


@given(small, small)
def test_shear_parameter_roundtrip(kr, ki):
    k = complex(kr, ki)
    if abs(k) >= 0.99:
        return
    assert AffineMap.shear(k).shear_parameter() == pytest.approx(k, abs=1e-12)


def test_extended_modulus_validation():
    with pytest.raises(ValueError):
        ExtendedModulus(-1.0, "closed-form")
    with pytest.raises(ValueError):
        ExtendedModulus(1.0, "grid-solver")
    assert ExtendedModulus(math.inf, "closed-form").is_infinite


@pytest.mark.parametrize("bad", [lambda: Annulus(2, 1), lambda: Grotzsch(0.5), lambda: Teichmuller(0),
                                 lambda: SlitStrip(-1)])
def test_constructor_validation(bad):
    with pytest.raises(ValueError):
        bad()


def test_polygonal_ring_rejects_crossing():
    with pytest.raises(ValueError):
        PolygonalRing(SMALL, SQUARE)
    assert not is_simple_polygon([0, 1, 1j, 1 + 1j])


def test_real_slit_ring_rejects_overlap():
    with pytest.raises(ValueError):
        RealSlitRing((0.0, 2.0), (1.0, 3.0))


def test_puncture_must_be_inside():
    with pytest.raises(ValueError):
        PuncturedDomain(tuple(SMALL), 5 + 0j)
    with pytest.raises(ValueError):
        PuncturedDomain(HalfPlaneRegion(), -1j)


def test_flags():
    assert PlaneMinusCompact(tuple(SMALL)).complement_bounded
    assert PuncturedDomain(tuple(SMALL)).degenerate
    assert not Annulus(1, 2).degenerate


def test_apply_affine_keeps_annulus_for_similarity():
    d = apply_affine(AffineMap(2j, 0, 1), Annulus(1, 3))
    assert isinstance(d, Annulus) and d.r == pytest.approx(2) and d.R == pytest.approx(6)
    assert isinstance(apply_affine(AffineMap(1, 0.2), Annulus(1, 3)), AffineImage)


def test_apply_affine_teichmuller_gives_slit_ring():
    assert isinstance(apply_affine(AffineMap(1, 0.4j), Teichmuller(1.0)), RealSlitRing)


def test_complement_areas():
    a_in, a_dom = complement_areas(PolygonalRing(SQUARE, SMALL))
    assert (a_in, a_dom) == (pytest.approx(4.0), pytest.approx(12.0))
    a_in, a_dom = complement_areas(AffineImage(Annulus(1, 2), AffineMap(2, 0)))
    assert a_in == pytest.approx(4 * math.pi)


def test_convex_width_of_rectangle():
    assert convex_width([0, 3, 3 + 1j, 1j]) == pytest.approx(1.0)
    assert convex_width([0, 1, 2]) == 0.0


def test_width_and_separation():
    ws = width_and_separation(PolygonalRing(SQUARE, SMALL))
    assert ws.width == pytest.approx(2.0) and ws.dsep == pytest.approx(1.0)
    assert not width_and_separation(Teichmuller(1.0)).applicable


@given(st.floats(0.05, 5), st.floats(0.1, 10), st.floats(-math.pi, math.pi))
def test_ft_roundtrip(t, r, theta):
    z = r * complex(math.cos(theta), math.sin(theta))
    assert abs(ft_inverse(ft_forward(z, t), t) - z) <= 1e-12 * max(1.0, r + t)


def test_ft_maps_onto_exterior_of_disk():
    z = np.array([1e-6, 1e-6j, -1e-6])
    assert np.all(np.abs(ft_forward(z, 0.5)) > 0.5)
    with pytest.raises(ValueError):
        ft_inverse(0.4, 0.5)


ROUNDTRIP = [
    Annulus(1, 2, 1 + 1j), Teichmuller(2.0), Grotzsch(3.0), SlitStrip(0.5),
    RealSlitRing((2.0, 3.0), (4.0, 1.0)), PolygonalRing(SQUARE, SMALL),
    PuncturedDomain(tuple(SMALL), 0.1j), PuncturedDomain(HalfPlaneRegion(), 1j),
    PlaneMinusCompact(tuple(SMALL)), AffineImage(Annulus(1, 2), AffineMap(1, 0.3)),
]


@pytest.mark.parametrize("d", ROUNDTRIP, ids=lambda d: d.kind)
def test_json_roundtrip(d):
    assert domain_from_dict(domain_to_dict(d)) == d


def test_json_unknown_type():
    with pytest.raises(ValueError):
        domain_from_dict({"type": "torus"})


def test_ft_image_contains_small_disk_in_complement():
    d = FtImageRing(PuncturedDomain(tuple(SMALL)), 0.2)
    inner, outer = d.complement_sets()
    assert inner[0].contains(np.array([0.1 + 0j]))[0]
