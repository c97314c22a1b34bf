"""Two-resolution convergence checks for the differential kernels.

Errors against analytic derivatives on smooth fields must shrink at observed
order >= 1.9 when the grid spacing halves (interior points only; boundary
stencils are first order by design).
"""

import numpy as np

from metloop.data.fields import GriddedField
from metloop.diag import relative_vorticity, vorticity_advection
from metloop.diag.constants import EARTH_RADIUS


def make_grid(n):
    lat = np.linspace(20.0, 60.0, n)
    lon = np.linspace(-40.0, 40.0, 2 * n)
    return lat, lon


def wind_fields(lat, lon, u_vals, v_vals):
    dims = ("lat", "lon")
    coords = {"lat": lat, "lon": lon}
    u = GriddedField("u", "m s-1", dims, dict(coords), u_vals)
    v = GriddedField("v", "m s-1", dims, dict(coords), v_vals)
    return u, v


def observed_order(errors):
    return np.log2(errors[0] / errors[1])


def test_vorticity_converges_at_second_order():
    # solid-body rotation u = W*a*cos(phi): zeta = 2*W*sin(phi) exactly
    W = 1e-5
    errors = []
    for n in (81, 161):
        lat, lon = make_grid(n)
        phi = np.radians(lat)[:, None]
        u_vals = np.broadcast_to(W * EARTH_RADIUS * np.cos(phi),
                                 (n, 2 * n)).copy()
        u, v = wind_fields(lat, lon, u_vals, np.zeros((n, 2 * n)))
        zeta = relative_vorticity(u, v).values
        analytic = np.broadcast_to(2.0 * W * np.sin(phi), (n, 2 * n))
        err = np.abs(zeta - analytic)[2:-2, 2:-2].max()
        errors.append(err)
    assert observed_order(errors) >= 1.9


def test_advection_converges_at_second_order():
    # eta = E0*sin(lam)*cos(phi), u = U const, v = 0:
    # advection = -U/(a*cos(phi)) * d(eta)/d(lam) = -U*E0*cos(lam)/a
    U, E0 = 12.0, 4e-5
    errors = []
    for n in (81, 161):
        lat, lon = make_grid(n)
        phi = np.radians(lat)[:, None]
        lam = np.radians(lon)[None, :]
        eta_vals = E0 * np.sin(lam) * np.cos(phi)
        u, v = wind_fields(lat, lon, np.full((n, 2 * n), U),
                           np.zeros((n, 2 * n)))
        eta = u.with_values(eta_vals, name="eta", units="s-1")
        adv = vorticity_advection(u, v, eta).values
        analytic = -U * E0 * np.cos(lam) / EARTH_RADIUS
        err = np.abs(adv - np.broadcast_to(analytic, (n, 2 * n)))[2:-2, 2:-2].max()
        errors.append(err)
    assert observed_order(errors) >= 1.9


def test_meridional_advection_converges_at_second_order():
    # eta = E0*sin(phi), u = 0, v = V: advection = -V*E0*cos(phi)/a
    V, E0 = 8.0, 4e-5
    errors = []
    for n in (81, 161):
        lat, lon = make_grid(n)
        phi = np.radians(lat)[:, None]
        eta_vals = np.broadcast_to(E0 * np.sin(phi), (n, 2 * n)).copy()
        u, v = wind_fields(lat, lon, np.zeros((n, 2 * n)),
                           np.full((n, 2 * n), V))
        eta = u.with_values(eta_vals, name="eta", units="s-1")
        adv = vorticity_advection(u, v, eta).values
        analytic = np.broadcast_to(-V * E0 * np.cos(phi) / EARTH_RADIUS,
                                   (n, 2 * n))
        err = np.abs(adv - analytic)[2:-2, 2:-2].max()
        errors.append(err)
    assert observed_order(errors) >= 1.9
