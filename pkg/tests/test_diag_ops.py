"""Diagnostic operations against closed-form and brute-force oracles.

Frozen expected values were computed independently with mpmath at 40 digits
before the kernels were written; the finite-difference oracle below is a
plain pointwise-loop implementation of the same stencil.
"""

import numpy as np
import pytest

from metloop.data.fields import ClimatologyField, GriddedField
from metloop.diag import (
    DiagError,
    UnitError,
    anomaly,
    coriolis_parameter,
    ivt,
    potential_temperature,
    potential_vorticity,
    relative_vorticity,
    vorticity_advection,
)
from metloop.diag.constants import EARTH_RADIUS

# mpmath oracles (2*Omega*sin(lat), theta, layer integral, -g*f*dtheta/dp)
F_45 = 1.0312609204176488e-4
F_90 = 1.45842318e-4
THETA_280_850 = 293.3091140415258
IVT_UNIFORM = 509.8581064889641
PV_RESTING_45N = 5.056607452606868e-7


def oracle_derivative(a, x, axis):
    """Pointwise-loop stencil: centered interior, one-sided boundaries."""
    a = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(a)
    n = a.shape[0]
    for i in range(n):
        if i == 0:
            out[i] = (a[1] - a[0]) / (x[1] - x[0])
        elif i == n - 1:
            out[i] = (a[n - 1] - a[n - 2]) / (x[n - 1] - x[n - 2])
        else:
            out[i] = (a[i + 1] - a[i - 1]) / (x[i + 1] - x[i - 1])
    return np.moveaxis(out, 0, axis)


def wind_pair(lat, lon, u_vals, v_vals, extra_dims=()):
    dims = extra_dims + ("lat", "lon")
    coords = {"lat": np.asarray(lat, float), "lon": np.asarray(lon, float)}
    u = GriddedField("u", "m s-1", dims, dict(coords), u_vals)
    v = GriddedField("v", "m s-1", dims, dict(coords), v_vals)
    return u, v


class TestCoriolis:
    def test_equator_is_zero(self):
        assert coriolis_parameter(0.0) == 0.0

    def test_pole_matches_two_omega(self):
        assert coriolis_parameter(90.0) == pytest.approx(F_90, abs=1e-12)

    def test_midlatitude_oracle(self):
        assert coriolis_parameter(45.0) == pytest.approx(F_45, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(DiagError):
            coriolis_parameter(90.5)

    def test_array_input(self):
        lats = np.array([-90.0, 0.0, 45.0])
        f = coriolis_parameter(lats)
        assert f.shape == (3,)
        assert f[0] == -F_90


class TestPotentialTemperature:
    def test_reference_pressure_identity(self):
        assert potential_temperature(300.0, 1000.0) == pytest.approx(300.0, abs=1e-12)

    def test_oracle_value(self):
        assert potential_temperature(280.0, 850.0) == pytest.approx(
            THETA_280_850, abs=1e-9
        )

    def test_nonpositive_pressure_rejected(self):
        with pytest.raises(DiagError):
            potential_temperature(280.0, 0.0)

    def test_field_input_broadcasts_over_levels(self):
        levels = np.array([1000.0, 850.0])
        f = GriddedField(
            "t", "K", ("level", "lat", "lon"),
            {"level": levels, "lat": np.array([10.0, 20.0, 30.0]),
             "lon": np.array([0.0, 1.0, 2.0])},
            np.full((2, 3, 3), 280.0),
        )
        theta = potential_temperature(f)
        assert theta.units == "K"
        assert theta.values[0, 0, 0] == pytest.approx(280.0, abs=1e-12)
        assert theta.values[1, 0, 0] == pytest.approx(THETA_280_850, abs=1e-9)

    def test_unit_mismatch_rejected(self):
        f = GriddedField(
            "t", "degC", ("lat", "lon"),
            {"lat": np.array([1.0, 2.0]), "lon": np.array([3.0, 4.0])},
            np.full((2, 2), 15.0),
        )
        with pytest.raises(UnitError):
            potential_temperature(f)


class TestRelativeVorticity:
    def test_uniform_zonal_wind_matches_analytic(self):
        # zeta = u * tan(lat) / a for u const, v = 0; exactly 0 at the equator
        lat = np.linspace(-20.0, 20.0, 81)
        lon = np.linspace(-10.0, 10.0, 41)
        u, v = wind_pair(lat, lon, np.full((81, 41), 10.0), np.zeros((81, 41)))
        zeta = relative_vorticity(u, v)
        analytic = 10.0 * np.tan(np.radians(lat)) / EARTH_RADIUS
        interior = zeta.values[1:-1, 20]
        # O(dlat^2) truncation error against the continuous curl
        scale = np.abs(analytic[1:-1]).max()
        assert np.abs(interior - analytic[1:-1]).max() / scale < 5e-5
        eq = np.nonzero(lat == 0.0)[0][0]
        assert zeta.values[eq, 20] == pytest.approx(0.0, abs=1e-16)

    def test_solid_body_rotation_gives_two_omega(self):
        # local u = -w*y', v = +w*x' around 45N -> curl = 2w at the center
        w = 1e-5
        lat0, lon0 = 45.0, 0.0
        lat = lat0 + np.linspace(-2.0, 2.0, 41)
        lon = lon0 + np.linspace(-2.0, 2.0, 41)
        phi = np.radians(lat)[:, None]
        lam = np.radians(lon)[None, :]
        yp = EARTH_RADIUS * (phi - np.radians(lat0))
        xp = EARTH_RADIUS * np.cos(np.radians(lat0)) * (lam - np.radians(lon0))
        u, v = wind_pair(lat, lon, np.broadcast_to(-w * yp, (41, 41)).copy(),
                         np.broadcast_to(w * xp, (41, 41)).copy())
        zeta = relative_vorticity(u, v)
        center = zeta.values[20, 20]
        assert center == pytest.approx(2.0 * w, rel=2e-3)

    def test_dim_mismatch_rejected(self):
        lat = np.array([10.0, 20.0, 30.0])
        lon = np.array([0.0, 1.0, 2.0])
        u = GriddedField("u", "m s-1", ("time", "lat", "lon"),
                         {"time": np.array(["2022-01-01"], dtype="datetime64[s]"),
                          "lat": lat, "lon": lon},
                         np.zeros((1, 3, 3)))
        v = GriddedField("v", "m s-1", ("lat", "lon"),
                         {"lat": lat, "lon": lon}, np.zeros((3, 3)))
        with pytest.raises(DiagError):
            relative_vorticity(u, v)

    def test_grid_too_small_rejected(self):
        u, v = wind_pair(np.array([10.0, 20.0]), np.array([0.0, 1.0]),
                         np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(DiagError):
            relative_vorticity(u, v)

    def test_poles_masked(self):
        lat = np.linspace(86.0, 90.0, 9)
        lon = np.linspace(0.0, 8.0, 9)
        u, v = wind_pair(lat, lon, np.ones((9, 9)), np.ones((9, 9)))
        zeta = relative_vorticity(u, v)
        assert np.isnan(zeta.values[lat >= 89.5]).all()
        assert np.isfinite(zeta.values[lat < 89.5]).all()


class TestVorticityAdvection:
    def grids(self):
        lat = np.linspace(30.0, 50.0, 41)
        lon = np.linspace(-20.0, 20.0, 81)
        return lat, lon

    def test_uniform_eta_gives_zero(self):
        lat, lon = self.grids()
        u, v = wind_pair(lat, lon, np.full((41, 81), 12.0), np.zeros((41, 81)))
        eta = u.with_values(np.full((41, 81), 3e-5), name="eta", units="s-1")
        adv = vorticity_advection(u, v, eta)
        assert np.abs(adv.values[~np.isnan(adv.values)]).max() == 0.0

    def test_linear_eta_in_longitude(self):
        # eta with constant slope c per meter of zonal distance, u = U, v = 0
        # -> advection = -U*c in the interior
        lat, lon = self.grids()
        U, c = 15.0, 2e-11
        phi = np.radians(lat)[:, None]
        lam = np.radians(lon)[None, :]
        x_meters = EARTH_RADIUS * np.cos(phi) * lam
        eta_vals = c * np.broadcast_to(x_meters, (41, 81)).copy()
        u, v = wind_pair(lat, lon, np.full((41, 81), U), np.zeros((41, 81)))
        eta = u.with_values(eta_vals, name="eta", units="s-1")
        adv = vorticity_advection(u, v, eta)
        interior = adv.values[1:-1, 1:-1]
        assert np.allclose(interior, -U * c, rtol=5e-4)

    def test_mismatched_grids_rejected(self):
        lat, lon = self.grids()
        u, v = wind_pair(lat, lon, np.zeros((41, 81)), np.zeros((41, 81)))
        eta = GriddedField("eta", "s-1", ("lat", "lon"),
                           {"lat": lat[:-1], "lon": lon},
                           np.zeros((40, 81)))
        with pytest.raises(DiagError):
            vorticity_advection(u, v, eta)


class TestIvt:
    def column(self, levels, q_val, u_val, v_val=0.0):
        lat = np.array([40.0, 41.0, 42.0])
        lon = np.array([0.0, 1.0, 2.0])
        dims = ("level", "lat", "lon")
        coords = {"level": np.asarray(levels, float), "lat": lat, "lon": lon}
        shape = (len(levels), 3, 3)
        q = GriddedField("q", "kg kg-1", dims, dict(coords), np.full(shape, q_val))
        u = GriddedField("u", "m s-1", dims, dict(coords), np.full(shape, u_val))
        v = GriddedField("v", "m s-1", dims, dict(coords), np.full(shape, v_val))
        return q, u, v

    def test_zero_humidity_gives_zero(self):
        q, u, v = self.column([1000.0, 700.0, 500.0], 0.0, 25.0)
        for comp in ivt(q, u, v):
            assert np.all(comp.values == 0.0)

    def test_uniform_layer_oracle(self):
        q, u, v = self.column([1000.0, 500.0], 0.01, 10.0)
        iu, _, mag = ivt(q, u, v)
        assert iu.values[1, 1] == pytest.approx(IVT_UNIFORM, abs=1e-9)
        assert mag.values[1, 1] == pytest.approx(IVT_UNIFORM, abs=1e-9)

    def test_level_orientation_does_not_matter(self):
        q1, u1, v1 = self.column([1000.0, 850.0, 500.0], 0.01, 10.0, 3.0)
        q2, u2, v2 = self.column([500.0, 850.0, 1000.0], 0.01, 10.0, 3.0)
        a = ivt(q1, u1, v1)[2].values
        b = ivt(q2, u2, v2)[2].values
        assert np.array_equal(a, b)

    def test_dense_level_convergence_to_analytic(self):
        # q(p) = q0*(p/p0)^2, uniform wind: integral is q0*U*(pb^3-pt^3)/(3*p0^2*g)
        lat = np.array([40.0, 41.0])
        lon = np.array([0.0, 1.0])
        p_top, p_bot, p0, q0, U = 500e2, 1000e2, 1000e2, 0.01, 10.0
        analytic = q0 * U * (p_bot**3 - p_top**3) / (3.0 * p0**2 * 9.80665)
        errs = []
        for n in (6, 200):
            levels = np.linspace(1000.0, 500.0, n)
            dims = ("level", "lat", "lon")
            coords = {"level": levels, "lat": lat, "lon": lon}
            prof = q0 * (levels * 100.0 / p0) ** 2
            qv = np.broadcast_to(prof[:, None, None], (n, 2, 2)).copy()
            q = GriddedField("q", "kg kg-1", dims, dict(coords), qv)
            u = GriddedField("u", "m s-1", dims, dict(coords), np.full((n, 2, 2), U))
            v = GriddedField("v", "m s-1", dims, dict(coords), np.zeros((n, 2, 2)))
            errs.append(abs(ivt(q, u, v)[0].values[0, 0] - analytic))
        assert errs[1] < errs[0] / 100.0
        assert errs[1] / analytic < 1e-4

    def test_single_level_rejected(self):
        q, u, v = self.column([850.0], 0.01, 10.0)
        with pytest.raises(DiagError):
            ivt(q, u, v)

    def test_wrong_units_rejected(self):
        q, u, v = self.column([1000.0, 500.0], 0.01, 10.0)
        bad_q = q.with_values(q.values, units="g kg-1")
        with pytest.raises(UnitError):
            ivt(bad_q, u, v)


class TestPotentialVorticity:
    def resting_column(self, dtheta_dp=-5e-4):
        levels = np.array([1000.0, 850.0, 700.0, 500.0])
        lat = np.linspace(43.0, 47.0, 9)
        lon = np.linspace(-2.0, 2.0, 9)
        dims = ("level", "lat", "lon")
        coords = {"level": levels, "lat": lat, "lon": lon}
        p_pa = levels * 100.0
        theta = 300.0 + dtheta_dp * (p_pa - 1000e2)
        kappa = 287.05 / 1004.6
        t_prof = theta * (levels / 1000.0) ** kappa
        shape = (4, 9, 9)
        t = GriddedField("t", "K", dims, dict(coords),
                         np.broadcast_to(t_prof[:, None, None], shape).copy())
        zero = np.zeros(shape)
        u = GriddedField("u", "m s-1", dims, dict(coords), zero.copy())
        v = GriddedField("v", "m s-1", dims, dict(coords), zero.copy())
        return u, v, t

    def test_resting_column_oracle(self):
        u, v, t = self.resting_column()
        pv = potential_vorticity(u, v, t)
        # center row is 45N; stencils are exact on a theta linear in p
        assert pv.values[1, 4, 4] == pytest.approx(PV_RESTING_45N, rel=1e-9)
        assert pv.units == "K m2 kg-1 s-1"
        assert "PVU" in pv.attrs["pvu"]

    def test_stable_nh_column_is_positive(self):
        u, v, t = self.resting_column()
        pv = potential_vorticity(u, v, t)
        finite = pv.values[np.isfinite(pv.values)]
        assert np.all(finite > 0.0)

    def test_constant_theta_gives_zero(self):
        # theta reconstructed from T carries ~1 ulp noise; zero to rounding
        u, v, t = self.resting_column(dtheta_dp=0.0)
        pv = potential_vorticity(u, v, t)
        assert np.abs(pv.values[np.isfinite(pv.values)]).max() < 1e-18

    def test_stability_only_matches_three_term_at_rest(self):
        u, v, t = self.resting_column()
        full = potential_vorticity(u, v, t, three_term=True)
        approx = potential_vorticity(u, v, t, three_term=False)
        assert np.allclose(full.values, approx.values, equal_nan=True)

    def test_single_level_rejected(self):
        u, v, t = self.resting_column()
        one = {"level": np.array([850.0]), "lat": u.coords["lat"],
               "lon": u.coords["lon"]}
        sub = GriddedField("u", "m s-1", u.dims, one, u.values[:1])
        with pytest.raises(DiagError):
            potential_vorticity(sub, sub, sub.with_values(sub.values + 280.0,
                                                          name="t", units="K"))


class TestAnomaly:
    def pair(self, offset=0.0):
        times = np.array(["2022-07-10", "2022-07-11"], dtype="datetime64[s]")
        lat = np.array([40.0, 41.0])
        lon = np.array([0.0, 1.0])
        base = np.arange(8.0).reshape(2, 2, 2) + 280.0
        f = GriddedField("t2m", "K", ("time", "lat", "lon"),
                         {"time": times, "lat": lat, "lon": lon}, base + offset)
        clim = ClimatologyField(
            "t2m", "K", ("day_of_year", "lat", "lon"),
            {"day_of_year": np.array([191, 192]), "lat": lat, "lon": lon},
            base.copy(), 1, (1991, 2020),
        )
        return f, clim

    def test_field_equal_to_climatology_gives_zero(self):
        f, clim = self.pair()
        a = anomaly(f, clim)
        assert np.all(a.values == 0.0)
        assert a.units == "K"
        assert a.attrs["climatology_base_period"] == "1991-2020"

    def test_uniform_offset_recovered(self):
        f, clim = self.pair(offset=2.5)
        assert np.all(anomaly(f, clim).values == 2.5)

    def test_grid_mismatch_rejected(self):
        f, clim = self.pair()
        coarse = ClimatologyField(
            "t2m", "K", ("day_of_year", "lat", "lon"),
            {"day_of_year": np.array([191, 192]), "lat": np.array([40.0]),
             "lon": f.coords["lon"]},
            clim.values[:, :1, :], 1, (1991, 2020),
        )
        with pytest.raises(DiagError):
            anomaly(f, coarse)

    def test_uncovered_day_rejected(self):
        f, clim = self.pair()
        short = ClimatologyField(
            "t2m", "K", ("day_of_year", "lat", "lon"),
            {"day_of_year": np.array([191]), "lat": f.coords["lat"],
             "lon": f.coords["lon"]},
            clim.values[:1], 1, (1991, 2020),
        )
        with pytest.raises(Exception):
            anomaly(f, short)
