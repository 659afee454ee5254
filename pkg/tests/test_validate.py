import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringharm.construct import power_shear_for_alpha, sc_shear_map
from ringharm.domains import Annulus, Teichmuller
from ringharm.validate import (CircleMap, NotHomeomorphism, boundary_hausdorff, check_harmonic, check_injective,
                               circle_degree, degree_check, dilatation_check, fourier_coefficients, injectivity,
                               sample_domain, shapiro_sum, validate_map, validate_spec, weitsman_test,
                               winding_number)

A12 = Annulus(1, 2)


def automorphism(a):
    return CircleMap.from_disk_map(lambda z: (z - a) / (1 - np.conj(a) * z))


def identity(z):
    return z


def test_samples_avoid_boundary(rng):
    z, dist = sample_domain(A12, 300, rng)
    assert len(z) == 300
    assert np.all((np.abs(z) > 1) & (np.abs(z) < 2))
    assert np.all(dist > 0)


def test_harmonic_identity_and_holomorphic():
    assert check_harmonic(identity, A12) < 1e-6
    assert check_harmonic(lambda z: z ** 2 + 1 / z, A12) < 1e-4


def test_harmonic_anti_and_mixed():
    # z + conj(z)^2 / 10 is harmonic (holomorphic plus antiholomorphic)
    assert check_harmonic(lambda z: z + np.conj(z) ** 2 / 10, A12) < 1e-4


def test_non_harmonic_flagged():
    assert check_harmonic(lambda z: z * np.abs(z) ** 2, A12) > 0.1


def test_injective_identity():
    assert check_injective(identity, A12) == 0


def test_square_map_not_injective():
    res = injectivity(lambda z: z ** 2, A12, samples=500)
    assert res.collisions > 0


def test_orientation_flip_detected():
    # folds the annulus along the real axis
    res = injectivity(lambda z: z.real + 1j * np.abs(z.imag), A12, samples=500)
    assert res.count > 0


def test_boundary_hausdorff_identity_and_scaling():
    assert boundary_hausdorff(identity, A12, A12) < 1e-12
    assert boundary_hausdorff(lambda z: 1.1 * z, A12, A12) == pytest.approx(0.2, rel=1e-6)


def test_winding_number():
    theta = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    circle = np.exp(1j * theta)
    assert winding_number(circle, 0) == pytest.approx(1)
    assert winding_number(circle ** 2, 0) == pytest.approx(2)
    assert winding_number(circle, 3) == pytest.approx(0, abs=1e-12)


def test_degree_of_identity_and_conjugate():
    assert degree_check(identity, A12, A12) == pytest.approx(1)
    assert degree_check(np.conj, A12, A12) == pytest.approx(-1)


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
@settings(max_examples=25, deadline=None)
def test_automorphism_fourier_series(ar, ai):
    a = complex(ar, ai)
    if abs(a) > 0.9:
        return
    res = fourier_coefficients(automorphism(a), 64)
    # (z - a)/(1 - conj(a) z) = -a + (1 - |a|^2) sum conj(a)^{n-1} z^n
    assert res.c(0) == pytest.approx(-a, abs=1e-12)
    assert res.c(1) == pytest.approx(1 - abs(a) ** 2, abs=1e-12)
    assert res.c(3) == pytest.approx((1 - abs(a) ** 2) * np.conj(a) ** 2, abs=1e-12)
    assert abs(res.c(-2)) < 1e-12


def test_fourier_rejects_off_circle():
    with pytest.raises(ValueError):
        fourier_coefficients(CircleMap(lambda th: 2 * np.exp(1j * th)), 8)


def test_circle_degree():
    assert circle_degree(CircleMap(lambda th: np.exp(3j * th))) == (3, True)
    assert circle_degree(CircleMap(lambda th: np.exp(-1j * th)))[0] == -1


def test_weitsman_identity_and_rotation():
    r = weitsman_test(CircleMap(lambda th: np.exp(1j * th)))
    assert r.sum01 == pytest.approx(1.0) and r.passed
    r = weitsman_test(CircleMap(lambda th: np.exp(1j * (th + 0.7))))
    assert r.sum01 == pytest.approx(1.0)


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_weitsman_automorphism_sum(a):
    r = weitsman_test(automorphism(a))
    assert r.sum01 == pytest.approx(1 + a - a * a, abs=1e-10)
    assert r.passed


def test_weitsman_nonlinear_homeomorphism():
    # theta + 0.9 sin(theta) has positive derivative, so it is a homeomorphism
    r = weitsman_test(CircleMap(lambda th: np.exp(1j * (th + 0.9 * np.sin(th)))))
    assert r.sum01 >= 2 / math.pi and r.passed


def test_weitsman_rejects_degree_two():
    with pytest.raises(NotHomeomorphism) as info:
        weitsman_test(CircleMap(lambda th: np.exp(2j * th)))
    assert info.value.degree == 2
    # all of the mass sits on c_2
    assert info.value.shapiro_sum == pytest.approx(1.0, abs=1e-12)


def test_weitsman_rejects_reversal():
    with pytest.raises(ValueError):
        weitsman_test(CircleMap(lambda th: np.exp(-1j * th)))


def test_shapiro_sum_identity():
    assert shapiro_sum(CircleMap(lambda th: np.exp(1j * th)), 1) == pytest.approx(1.0)


def test_dilatation_of_affine_map_is_constant():
    # after normalization an affine map has H_zbar = 0 everywhere
    margin = dilatation_check(lambda z: z + 0.3 * np.conj(z), math.e)
    assert margin == pytest.approx(math.tanh(math.pi ** 2 / 4), abs=1e-6)


def test_dilatation_of_small_perturbation():
    assert dilatation_check(lambda z: z + 0.05 * np.conj(z) ** 2 / 2, math.e) > 0


def test_dilatation_rejects_interior_basepoint():
    with pytest.raises(ValueError):
        dilatation_check(identity, 2.0, a=0.5)


def test_validate_identity_passes():
    rep = validate_map(identity, A12, A12)
    assert rep.passed and rep.injectivity_violations == 0 and rep.degree == pytest.approx(1)
    assert rep.dilatation_bound_margin is not None and rep.dilatation_bound_margin > 0
    assert set(rep.to_dict()) >= {"harmonicity_max", "boundary_hausdorff", "notes"}


def test_validate_rejects_square_map():
    assert not validate_map(lambda z: z ** 2, A12).passed


def test_validate_sc_shear():
    rep = validate_spec(sc_shear_map(1.0, 2.0), samples=150)
    assert rep.passed, rep
    assert rep.boundary_hausdorff < 1e-9


def test_validate_power_shear():
    rep = validate_spec(power_shear_for_alpha(2.0, 1.3), samples=150)
    assert rep.harmonicity_max < 1e-4 and rep.injectivity_violations == 0
    assert rep.degree == pytest.approx(-1)
    assert rep.passed
