"""Property suites for the diagnostics library (hypothesis-driven)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metloop.data.fields import GriddedField
from metloop.diag import (
    coriolis_parameter,
    ivt,
    potential_temperature,
    relative_vorticity,
    vorticity_advection,
)
from metloop.diag.constants import EARTH_RADIUS
from metloop.diag.kernels import derivative
from tests.test_diag_ops import oracle_derivative


def smooth_field(rng, lat, lon, amp=1.0, n_modes=4):
    """Band-limited sum of low-order harmonic modes on the patch."""
    phi = np.radians(lat)[:, None]
    lam = np.radians(lon)[None, :]
    out = np.zeros((lat.size, lon.size))
    for _ in range(n_modes):
        k1, k2 = rng.integers(1, 5, size=2)
        p1, p2 = rng.uniform(0, 2 * np.pi, size=2)
        out += rng.uniform(0.2, 1.0) * amp * np.sin(k1 * phi * 4 + p1) * np.cos(
            k2 * lam * 2 + p2
        )
    return out


def random_patch(rng):
    lat0 = rng.uniform(-55.0, 35.0)
    lon0 = rng.uniform(-150.0, 110.0)
    n = int(rng.integers(12, 28))
    lat = np.linspace(lat0, lat0 + 20.0, n)
    lon = np.linspace(lon0, lon0 + 25.0, n + 3)
    return lat, lon


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_kernel_matches_pointwise_oracle(seed):
    rng = np.random.default_rng(seed)
    lat, lon = random_patch(rng)
    vals = smooth_field(rng, lat, lon, amp=rng.uniform(0.5, 50.0))
    for axis, coord in ((0, np.radians(lat)), (1, np.radians(lon))):
        mine = derivative(vals, coord, axis)
        ref = oracle_derivative(vals, coord, axis)
        scale = np.abs(ref).max() + 1e-30
        assert np.abs(mine - ref).max() / scale < 1e-10


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_vorticity_matches_composed_oracle(seed):
    # same stencil, independently composed formula
    rng = np.random.default_rng(seed)
    lat, lon = random_patch(rng)
    u_vals = smooth_field(rng, lat, lon, amp=20.0)
    v_vals = smooth_field(rng, lat, lon, amp=20.0)
    dims = ("lat", "lon")
    coords = {"lat": lat, "lon": lon}
    u = GriddedField("u", "m s-1", dims, dict(coords), u_vals)
    v = GriddedField("v", "m s-1", dims, dict(coords), v_vals)
    zeta = relative_vorticity(u, v).values

    phi = np.radians(lat)
    lam = np.radians(lon)
    cosphi = np.cos(phi)[:, None]
    ref = (
        oracle_derivative(v_vals, lam, 1)
        - oracle_derivative(u_vals * cosphi, phi, 0)
    ) / (EARTH_RADIUS * cosphi)
    scale = np.abs(ref).max() + 1e-30
    assert np.abs(zeta - ref).max() / scale < 1e-10


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_advection_matches_composed_oracle(seed):
    rng = np.random.default_rng(seed)
    lat, lon = random_patch(rng)
    dims = ("lat", "lon")
    coords = {"lat": lat, "lon": lon}
    u = GriddedField("u", "m s-1", dims, dict(coords),
                     smooth_field(rng, lat, lon, amp=15.0))
    v = GriddedField("v", "m s-1", dims, dict(coords),
                     smooth_field(rng, lat, lon, amp=15.0))
    eta = GriddedField("eta", "s-1", dims, dict(coords),
                       smooth_field(rng, lat, lon, amp=5e-5))
    adv = vorticity_advection(u, v, eta).values

    phi = np.radians(lat)
    lam = np.radians(lon)
    cosphi = np.cos(phi)[:, None]
    ref = -(
        u.values * oracle_derivative(eta.values, lam, 1) / (EARTH_RADIUS * cosphi)
        + v.values * oracle_derivative(eta.values, phi, 0) / EARTH_RADIUS
    )
    scale = np.abs(ref).max() + 1e-30
    assert np.abs(adv - ref).max() / scale < 1e-10


@settings(max_examples=300, deadline=None)
@given(lat=st.floats(min_value=0.0, max_value=90.0, allow_nan=False))
def test_coriolis_odd_symmetry_exact(lat):
    assert coriolis_parameter(-lat) == -coriolis_parameter(lat)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**9),
       alpha=st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False))
def test_ivt_rotation_equivariance(seed, alpha):
    rng = np.random.default_rng(seed)
    levels = np.array([1000.0, 850.0, 700.0, 500.0, 300.0])
    lat = np.linspace(30.0, 40.0, 6)
    lon = np.linspace(0.0, 10.0, 6)
    dims = ("level", "lat", "lon")
    coords = {"level": levels, "lat": lat, "lon": lon}
    shape = (5, 6, 6)
    q_vals = rng.uniform(0.0, 0.02, shape)
    u_vals = rng.uniform(-30.0, 30.0, shape)
    v_vals = rng.uniform(-30.0, 30.0, shape)

    def transport(uv, vv):
        q = GriddedField("q", "kg kg-1", dims, dict(coords), q_vals)
        u = GriddedField("u", "m s-1", dims, dict(coords), uv)
        v = GriddedField("v", "m s-1", dims, dict(coords), vv)
        iu, iv, mag = ivt(q, u, v)
        return iu.values, iv.values, mag.values

    iu, iv, mag = transport(u_vals, v_vals)
    ca, sa = np.cos(alpha), np.sin(alpha)
    iu_rot, iv_rot, mag_rot = transport(u_vals * ca - v_vals * sa,
                                        u_vals * sa + v_vals * ca)
    scale = mag.max() + 1e-30
    assert np.abs(iu_rot - (iu * ca - iv * sa)).max() / scale < 1e-12
    assert np.abs(iv_rot - (iu * sa + iv * ca)).max() / scale < 1e-12
    assert np.abs(mag_rot - mag).max() / scale < 1e-12


@settings(max_examples=100, deadline=None)
@given(t=st.floats(min_value=180.0, max_value=330.0),
       p_hi=st.floats(min_value=150.0, max_value=990.0))
def test_theta_strictly_decreasing_in_pressure(t, p_hi):
    # higher pressure -> smaller theta at fixed temperature
    assert potential_temperature(t, p_hi) > potential_temperature(t, p_hi + 10.0)


def test_backends_agree_when_both_available():
    try:
        from metloop.diag import _stencils as compiled
    except ImportError:
        pytest.skip("compiled stencils not built")
    from metloop.diag import _stencils_py as fallback

    rng = np.random.default_rng(7)
    a = rng.normal(size=(40, 30))
    x = np.sort(rng.uniform(0.0, 1.0, 30))
    out_c = np.empty_like(a)
    out_p = np.empty_like(a)
    compiled.diff_last(a, x, out_c)
    fallback.diff_last(a, x, out_p)
    assert np.array_equal(out_c, out_p)

    a3 = np.ascontiguousarray(rng.normal(size=(8, 20, 9)))
    x3 = np.sort(rng.uniform(0.0, 1.0, 20))
    out_c3 = np.empty_like(a3)
    out_p3 = np.empty_like(a3)
    compiled.diff_mid(a3, x3, out_c3)
    fallback.diff_mid(a3, x3, out_p3)
    assert np.array_equal(out_c3, out_p3)

    int_c = np.empty((8, 9))
    int_p = np.empty((8, 9))
    compiled.trapz_mid(a3, x3, int_c)
    fallback.trapz_mid(a3, x3, int_p)
    assert np.allclose(int_c, int_p, rtol=1e-13, atol=1e-16)
