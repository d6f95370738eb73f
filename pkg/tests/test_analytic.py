import math

import numpy as np
import pytest
from scipy.integrate import quad

import oseenlab as ol
from oseenlab.analytic import (
    Blob,
    BlobSpec,
    blob_swirl_velocity_xy,
    blob_vorticity_xy,
    harmonic_velocity_xy,
    heat_spread,
    oseen_streamfunction_radial,
    oseen_velocity_xy,
    oseen_vorticity_xy,
)
from oseenlab.fields import cartesian_gradient


# --------------------------------------------------------------------- #
# Lamb-Oseen velocity
# --------------------------------------------------------------------- #

def test_oseen_velocity_reference_point():
    u1, u2 = oseen_velocity_xy(1.0, 1.0, 2.0, 0.0)
    want = -(1.0 - math.exp(-1.0)) / (4.0 * math.pi)
    assert u1 == pytest.approx(0.0, abs=1e-15)
    assert u2 == pytest.approx(want, rel=1e-12)


def test_oseen_velocity_center_and_zero_amplitude():
    assert oseen_velocity_xy(1.0, 0.3, 0.0, 0.0) == (0.0, 0.0)
    u1, u2 = oseen_velocity_xy(0.0, 1.0, 1.2, -0.7)
    assert u1 == 0.0 and u2 == 0.0


def test_oseen_core_series_branch_is_smooth():
    # straddle the series switch; profile must stay within 1e-12 of the
    # analytic continuation
    t = 1.0
    for rho in (1e-4, 2e-3, 3e-3, 0.01):
        u1, u2 = oseen_velocity_xy(1.0, t, rho, 0.0)
        exact = rho / (8.0 * math.pi * t) * (1.0 - rho * rho / (8.0 * t))
        assert u2 == pytest.approx(-exact, rel=1e-9)


def test_oseen_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        oseen_velocity_xy(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        oseen_vorticity_xy(1.0, -1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ol.OseenParams(1.0, -2.0)


def test_oseen_self_similarity_pointwise():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-5.0, 5.0, size=(50, 2))
    for lam in (0.5, 2.0, 3.7):
        for t in (0.3, 1.0, 4.0):
            a1, a2 = oseen_velocity_xy(1.0, t, pts[:, 0], pts[:, 1])
            b1, b2 = oseen_velocity_xy(1.0, lam**2 * t, lam * pts[:, 0], lam * pts[:, 1])
            assert np.max(np.abs(lam * b1 - a1)) < 1e-12
            assert np.max(np.abs(lam * b2 - a2)) < 1e-12


def test_grid_level_samplers_match_pointwise_forms(small_grid):
    params = ol.OseenParams(alpha=0.7, t=1.3)
    x, y = small_grid.cartesian()
    vel = ol.oseen_velocity(params, small_grid)
    want1, want2 = oseen_velocity_xy(0.7, 1.3, x, y)
    assert np.array_equal(vel.u1, want1) and np.array_equal(vel.u2, want2)
    vort = ol.oseen_vorticity(params, small_grid)
    assert np.array_equal(vort.values, oseen_vorticity_xy(0.7, 1.3, x, y))


# --------------------------------------------------------------------- #
# Lamb-Oseen vorticity
# --------------------------------------------------------------------- #

def test_oseen_vorticity_center_value():
    w = oseen_vorticity_xy(1.0, 1.0, 0.0, 0.0)
    assert w == pytest.approx(-1.0 / (4.0 * math.pi), rel=1e-14)


def test_oseen_vorticity_total_integral():
    # analytic oracle: integral of exp(-r^2/4t) over the plane is 4 pi t
    for alpha, t in [(1.0, 1.0), (-0.5, 3.0), (2.0, 0.2)]:
        r = np.linspace(0.0, 40.0 * math.sqrt(t), 200_001)
        w = oseen_vorticity_xy(alpha, t, r, np.zeros_like(r))
        total = np.trapezoid(w * 2.0 * math.pi * r, r)
        assert total == pytest.approx(-alpha, rel=1e-8)
    assert oseen_vorticity_xy(0.0, 1.0, 2.0, 1.0) == 0.0


def test_oseen_streamfunction_matches_quadrature():
    for t in (0.5, 2.0):
        for r_val in (1.5, 8.0, 50.0):
            got = oseen_streamfunction_radial(1.0, t, r_val, 1.0)
            want = -quad(lambda rho: (1.0 - math.exp(-rho**2 / (4.0 * t))) / rho,
                         1.0, r_val)[0] / (2.0 * math.pi)
            assert got == pytest.approx(want, abs=1e-12)


# --------------------------------------------------------------------- #
# harmonic swirl
# --------------------------------------------------------------------- #

def test_harmonic_velocity_reference_point():
    u1, u2 = harmonic_velocity_xy(1.0, 0.0)
    assert u1 == pytest.approx(0.0, abs=1e-16)
    assert u2 == pytest.approx(-1.0 / (2.0 * math.pi), rel=1e-14)


def test_harmonic_velocity_rejects_interior_points():
    with pytest.raises(ValueError):
        harmonic_velocity_xy(0.3, 0.0, r_wall=1.0)


# --------------------------------------------------------------------- #
# blobs
# --------------------------------------------------------------------- #

def test_blob_peak_value():
    spec = BlobSpec((Blob((4.0, 1.0), 0.7, 2.5),))
    peak = blob_vorticity_xy(spec, 4.0, 1.0)
    assert peak == pytest.approx(2.5 / (2.0 * math.pi * 0.49), rel=1e-14)


def test_opposite_blob_pair_has_zero_total_vorticity(medium_grid):
    spec = BlobSpec((Blob((6.0, 0.0), 1.0, 1.5), Blob((-6.0, 0.0), 1.0, -1.5)))
    w = ol.blob_vorticity(spec, medium_grid)
    total = float((medium_grid.quad_weights * w.values).sum())
    assert abs(total) < 1e-10


def test_zero_mass_blob_is_zero_field(medium_grid):
    spec = BlobSpec((Blob((5.0, 2.0), 1.0, 0.0),))
    w = ol.blob_vorticity(spec, medium_grid)
    assert np.all(w.values == 0.0)


def test_blob_validation_errors(medium_grid):
    with pytest.raises(ValueError):
        ol.blob_vorticity(BlobSpec((Blob((2.0, 0.0), 1.0, 1.0),)), medium_grid)
    with pytest.raises(ValueError):
        ol.blob_vorticity(BlobSpec((Blob((63.0, 0.0), 1.0, 1.0),)), medium_grid)
    with pytest.raises(ValueError):
        Blob((4.0, 0.0), -1.0, 1.0)


def test_heat_spread_widths_and_swirl_consistency():
    spec = BlobSpec((Blob((5.0, 0.0), 1.0, 2.0),))
    spread = heat_spread(spec, 3.0)
    assert spread.blobs[0].width == pytest.approx(math.sqrt(7.0), rel=1e-15)
    assert spread.blobs[0].mass == 2.0
    # swirl velocity circulation around a big circle equals -total mass
    theta = np.linspace(0.0, 2.0 * math.pi, 2001)[:-1]
    big_r = 3000.0
    u1, u2 = blob_swirl_velocity_xy(spec, 5.0 + big_r * np.cos(theta),
                                    big_r * np.sin(theta))
    tangential = -u1 * np.sin(theta) + u2 * np.cos(theta)
    circ = tangential.mean() * 2.0 * math.pi * big_r
    assert circ == pytest.approx(-2.0, rel=1e-5)


# --------------------------------------------------------------------- #
# time-shift distance
# --------------------------------------------------------------------- #

def test_time_shift_zero_shift_is_zero():
    for t in (0.5, 3.0, 100.0):
        for p in (3.0, 4.0, 8.0):
            assert ol.oseen_time_shift_distance(t, 0.0, p) == 0.0


def test_time_shift_decreases_in_time():
    early = ol.oseen_time_shift_distance(10.0, 1.0, 4.0)
    late = ol.oseen_time_shift_distance(100.0, 1.0, 4.0)
    # independent oracle for the early value: adaptive quadrature
    def profile(r):
        gap = math.exp(-r * r / 36.0) - math.exp(-r * r / 40.0)
        return (abs(gap) / (2.0 * math.pi * r)) ** 4 * 2.0 * math.pi * r

    oracle = 9.0 ** 0.25 * quad(profile, 0.0, 100.0, limit=400,
                                epsabs=1e-16, epsrel=1e-12)[0] ** 0.25
    assert early == pytest.approx(oracle, rel=1e-6)
    assert late < early


def test_time_shift_depends_only_on_time_ratio():
    a = ol.oseen_time_shift_distance(11.0, 1.0, 4.0)
    b = ol.oseen_time_shift_distance(22.0, 2.0, 4.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_time_shift_domain_validation():
    with pytest.raises(ValueError):
        ol.oseen_time_shift_distance(1.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        ol.oseen_time_shift_distance(3.0, 1.0, 2.0)


# --------------------------------------------------------------------- #
# structure of the nonlinear term
# --------------------------------------------------------------------- #

def _curl_of_divergence_of_oseen_tensor(n):
    grid = ol.build_grid(1.0, math.log(64.0), n, n)
    x, y = grid.cartesian()
    u1, u2 = oseen_velocity_xy(1.0, 1.0, x, y)
    d1 = (cartesian_gradient(grid, u1 * u1)[0]
          + cartesian_gradient(grid, u1 * u2)[1])
    d2 = (cartesian_gradient(grid, u2 * u1)[0]
          + cartesian_gradient(grid, u2 * u2)[1])
    div = ol.VectorField(grid, d1, d2)
    residual = ol.curl(div)
    div_mag = np.hypot(d1, d2)
    return (np.max(np.abs(residual.values[1:-1])), float(div_mag.max()))


def test_divergence_of_oseen_tensor_is_curl_free():
    # the self-interaction of an axisymmetric swirl is a discrete gradient
    # EXACTLY for these difference operators, so the residual sits at
    # rounding level instead of the generic O(h^2)
    e1, scale1 = _curl_of_divergence_of_oseen_tensor(64)
    e2, scale2 = _curl_of_divergence_of_oseen_tensor(128)
    assert e1 <= 1e-12 * scale1
    assert e2 <= 1e-12 * scale2
