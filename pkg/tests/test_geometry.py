import math

import mpmath
import numpy as np
import pytest

from neutral_inclusions.geometry import (EllipsoidalPoint, EllipsoidSpec, Region,
                                         cartesian_from_ellipsoidal, classify_point,
                                         ellipsoidal_from_cartesian, g, inside_ellipsoid,
                                         rho_from_cartesian, semi_axes, volume_fraction)

from conftest import random_spec


def test_spec_rejects_bad_shells():
    with pytest.raises(ValueError):
        EllipsoidSpec(1, 2, 3, 2.0, 1.0)
    with pytest.raises(ValueError):
        EllipsoidSpec(1, 2, 3, 0.0, 1.0)
    with pytest.raises(ValueError):
        EllipsoidSpec(-1, 2, 3, 0.5, 1.0)


def test_points_on_axes():
    spec = EllipsoidSpec(1, 2, 3, 1, 4)
    # on the x1 axis rho = x1^2 - c1^2
    assert rho_from_cartesian([2.0, 0, 0], spec) == pytest.approx(3.0, rel=1e-15)
    assert rho_from_cartesian([0, 0, math.sqrt(13.0)], spec) == pytest.approx(4.0, rel=1e-14)


def test_sphere_path():
    spec = EllipsoidSpec.from_sphere_radii(0.5, 1.0)
    assert spec.is_sphere
    x = np.array([0.3, -0.4, 0.5])
    r = rho_from_cartesian(x, spec)
    assert r == pytest.approx(x @ x - spec.a[0], rel=1e-15)
    np.testing.assert_allclose(spec.core_axes, 0.5, rtol=1e-15)
    np.testing.assert_allclose(spec.exterior_axes, 1.0, rtol=1e-15)


def test_origin_limit():
    spec = EllipsoidSpec(1, 2, 3, 1, 4)
    assert rho_from_cartesian([0.0, 0.0, 0.0], spec) == -1.0


def test_quadric_residual_many_points(rng):
    for _ in range(10):
        spec = random_spec(rng, 100.0)
        x = rng.normal(size=(3, 100)) * spec.exterior_axes[:, None] * rng.uniform(0.1, 3, 100)
        rho = rho_from_cartesian(x, spec)
        res = np.sum(x**2 / (spec.a[:, None] + rho), axis=0) - 1.0
        assert np.max(np.abs(res)) < 1e-12
        assert np.all(rho > -spec.a.min())


def test_rho_against_extended_precision(rng):
    spec = EllipsoidSpec(0.3, 1.7, 9.0, 0.5, 2.0)
    mpmath.mp.dps = 40
    for _ in range(20):
        x = rng.normal(size=3) * 3
        r = rho_from_cartesian(x, spec)
        F = lambda t: sum(mpmath.mpf(xi) ** 2 / (mpmath.mpf(ai) + t) for xi, ai in zip(x, spec.a)) - 1
        ref = mpmath.findroot(F, r)
        assert abs(r - float(ref)) <= 1e-13 * max(1.0, abs(float(ref)))


def test_round_trip_chart(rng):
    spec = EllipsoidSpec(1.0, 2.0, 3.0, 1.0, 4.0)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-5, 5, 3)
        pt = ellipsoidal_from_cartesian(x, spec)
        pt.check(spec)
        back = cartesian_from_ellipsoidal(pt, spec)
        worst = max(worst, np.max(np.abs(back - x)) / max(1.0, np.max(np.abs(x))))
    assert worst < 1e-10


def test_coordinate_surfaces_orthogonal(rng):
    spec = EllipsoidSpec(1.0, 2.0, 3.0, 1.0, 4.0)
    a = spec.a
    for _ in range(50):
        x = rng.uniform(0.2, 4, 3)
        pt = ellipsoidal_from_cartesian(x, spec)
        n = [x / (a + t) for t in (pt.rho, pt.mu, pt.nu)]
        for i in range(3):
            for k in range(i + 1, 3):
                c = n[i] @ n[k] / (np.linalg.norm(n[i]) * np.linalg.norm(n[k]))
                assert abs(c) < 1e-9


def test_chart_checks():
    spec = EllipsoidSpec(1.0, 2.0, 3.0, 1.0, 4.0)
    with pytest.raises(ValueError):
        EllipsoidalPoint(0.0, -5.0, -2.0).check(spec)
    with pytest.raises(ValueError):
        ellipsoidal_from_cartesian([1, 1, 1], EllipsoidSpec(1, 1, 3, 1, 2))


def test_g_monotone_and_volume_fraction(triaxial):
    t = np.linspace(-0.99, 20, 200)
    vals = g(t, triaxial)
    assert np.all(np.diff(vals) > 0)
    theta = volume_fraction(triaxial)
    assert theta == pytest.approx(g(1.0, triaxial) / g(4.0, triaxial), rel=1e-14)
    with pytest.raises(ValueError):
        g(-2.0, triaxial)


def test_from_volume_fraction_round_trip(rng):
    for _ in range(50):
        le = rng.uniform(0.5, 5, 3)
        th = rng.uniform(0.01, 0.99)
        spec = EllipsoidSpec.from_volume_fraction(le, th)
        np.testing.assert_allclose(spec.exterior_axes, le, rtol=1e-12)
        assert volume_fraction(spec) == pytest.approx(th, rel=1e-11)


def test_scaled_family(triaxial):
    s = triaxial.scaled(0.37)
    np.testing.assert_allclose(s.exterior_axes, 0.37 * triaxial.exterior_axes, rtol=1e-15)
    np.testing.assert_allclose(semi_axes(s.rho_c, s), 0.37 * triaxial.core_axes, rtol=1e-15)


def test_classify(triaxial):
    lc, le = triaxial.core_axes, triaxial.exterior_axes
    assert classify_point([0, 0, 0], triaxial) is Region.CORE
    assert classify_point([lc[0], 0, 0], triaxial) is Region.CORE_INTERFACE
    assert classify_point([0.5 * (lc[0] + le[0]), 0, 0], triaxial) is Region.COATING
    assert classify_point([0, le[1], 0], triaxial) is Region.EXTERIOR_INTERFACE
    assert classify_point([10, 0, 0], triaxial) is Region.EXTERIOR


def test_inside_matches_rho(rng, triaxial):
    x = rng.uniform(-4, 4, (3, 2000))
    rho = rho_from_cartesian(x, triaxial)
    np.testing.assert_array_equal(inside_ellipsoid(x, triaxial.exterior_axes),
                                  rho < triaxial.rho_e)
