"""Meteorological diagnostics on spherical lat-lon grids.

Canonical diagnostics with explicit unit checking: Coriolis parameter,
potential temperature, relative vorticity, vorticity advection, integrated
vapor transport, Ertel potential vorticity on pressure surfaces, and
climatological anomalies. Horizontal derivatives use the stencil kernels
(second-order centered interior, first-order one-sided boundaries); rows
poleward of |lat| >= 89.5 are masked as undefined for curl/gradient-type
operators. Missing data (NaN) propagate; nothing is infilled.
"""

from __future__ import annotations

import numpy as np

from metloop.data.fields import ClimatologyField, FieldError, GriddedField
from metloop.diag import constants as c
from metloop.diag.kernels import derivative, integrate_trapezoid
from metloop.diag.units import UnitError, require


class DiagError(ValueError):
    """Inputs violate a diagnostic operation's preconditions."""


def coriolis_parameter(lat):
    """Coriolis parameter f = 2*Omega*sin(lat) for latitude in degrees.

    Computed as sign(lat) * 2*Omega*sin(|lat|) so f(-lat) == -f(lat) holds
    bit-exactly regardless of the libm in use.
    """
    arr = np.asarray(lat, dtype=np.float64)
    if np.any(np.abs(arr) > 90.0):
        raise DiagError("latitude out of range [-90, 90]")
    f = np.copysign(2.0 * c.OMEGA * np.sin(np.radians(np.fabs(arr))), arr)
    return float(f) if np.isscalar(lat) or arr.ndim == 0 else f


def potential_temperature(t, p=None):
    """Potential temperature theta = T * (p0/p)**kappa, in K.

    `t` may be a GriddedField with a level coordinate in hPa (p is then taken
    from the coordinate) or a plain scalar/array with `p` given in hPa.
    """
    if isinstance(t, GriddedField):
        require(t.units, "K", "potential_temperature temperature")
        if p is not None:
            raise DiagError("p is taken from the field's level coordinate")
        lev_ax = t.axis("level")
        p_hpa = t.coords["level"].astype(np.float64)
        if np.any(p_hpa <= 0) or np.any(t.values <= 0):
            raise DiagError("pressure and temperature must be positive")
        shape = [1] * t.values.ndim
        shape[lev_ax] = p_hpa.size
        theta = t.values * (c.P0_HPA / p_hpa.reshape(shape)) ** c.KAPPA
        return t.with_values(theta, name="theta", units="K",
                             attrs=dict(t.attrs))
    if p is None:
        raise DiagError("p (hPa) is required when t is not a gridded field")
    t_arr = np.asarray(t, dtype=np.float64)
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any(p_arr <= 0) or np.any(t_arr <= 0):
        raise DiagError("pressure and temperature must be positive")
    theta = t_arr * (c.P0_HPA / p_arr) ** c.KAPPA
    return float(theta) if theta.ndim == 0 else theta


def _require_same_grid(what: str, *fields_: GriddedField) -> None:
    first = fields_[0]
    for other in fields_[1:]:
        if other.dims != first.dims or not first.same_grid(other):
            raise DiagError(
                f"{what}: fields '{first.name}' and '{other.name}' are not on "
                f"the same grid (dims {first.dims} vs {other.dims})"
            )


def _horizontal_setup(f: GriddedField):
    """Common geometry for horizontal derivative operators."""
    for d in ("lat", "lon"):
        if d not in f.dims:
            raise DiagError(f"'{f.name}' needs a '{d}' dimension")
        if f.coords[d].size < 3:
            raise DiagError(f"'{f.name}' needs >= 3 points along '{d}'")
    ax_lat, ax_lon = f.axis("lat"), f.axis("lon")
    phi = np.radians(f.coords["lat"].astype(np.float64))
    lam = np.radians(f.coords["lon"].astype(np.float64))
    shape = [1] * f.values.ndim
    shape[ax_lat] = phi.size
    cosphi = np.cos(phi).reshape(shape)
    return ax_lat, ax_lon, phi, lam, cosphi


def _mask_poles(values: np.ndarray, field: GriddedField) -> np.ndarray:
    lat = field.coords["lat"].astype(np.float64)
    polar = np.abs(lat) >= c.POLE_MASK_LAT
    if polar.any():
        idx = [slice(None)] * values.ndim
        idx[field.axis("lat")] = polar
        values[tuple(idx)] = np.nan
    return values


def relative_vorticity(u: GriddedField, v: GriddedField) -> GriddedField:
    """Vertical component of the curl of the horizontal wind on the sphere.

    zeta = (dv/dlam - d(u*cos(phi))/dphi) / (a*cos(phi)); s-1.
    """
    require(u.units, "m s-1", "relative_vorticity u")
    require(v.units, "m s-1", "relative_vorticity v")
    _require_same_grid("relative_vorticity", u, v)
    ax_lat, ax_lon, phi, lam, cosphi = _horizontal_setup(u)
    dv_dlam = derivative(v.values, lam, ax_lon)
    ducos_dphi = derivative(u.values * cosphi, phi, ax_lat)
    zeta = (dv_dlam - ducos_dphi) / (c.EARTH_RADIUS * cosphi)
    zeta = _mask_poles(zeta, u)
    return u.with_values(zeta, name="vorticity", units="s-1",
                         attrs={"long_name": "relative vorticity"})


def vorticity_advection(u: GriddedField, v: GriddedField,
                        eta: GriddedField) -> GriddedField:
    """Horizontal advection of a vorticity-like scalar: -(u*deta/dx + v*deta/dy).

    eta is typically absolute vorticity (zeta + f); result in s-2.
    """
    require(u.units, "m s-1", "vorticity_advection u")
    require(v.units, "m s-1", "vorticity_advection v")
    require(eta.units, "s-1", "vorticity_advection eta")
    _require_same_grid("vorticity_advection", u, v, eta)
    ax_lat, ax_lon, phi, lam, cosphi = _horizontal_setup(u)
    deta_dx = derivative(eta.values, lam, ax_lon) / (c.EARTH_RADIUS * cosphi)
    deta_dy = derivative(eta.values, phi, ax_lat) / c.EARTH_RADIUS
    adv = -(u.values * deta_dx + v.values * deta_dy)
    adv = _mask_poles(adv, u)
    return u.with_values(adv, name="vorticity_advection", units="s-2",
                         attrs={"long_name": "advection of vorticity"})


def _pressure_coordinate(f: GriddedField):
    """Level axis plus the coordinate in Pa, and a slicer to ascending order."""
    if "level" not in f.dims:
        raise DiagError(f"'{f.name}' needs a 'level' dimension")
    lev_ax = f.axis("level")
    p_pa = f.coords["level"].astype(np.float64) * 100.0
    if p_pa.size < 2:
        raise DiagError("at least 2 pressure levels are required")
    d = np.diff(p_pa)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise DiagError("level coordinate must be strictly monotone")
    flip = d[0] < 0
    return lev_ax, p_pa, flip


def _ascending(values: np.ndarray, axis: int, flip: bool) -> np.ndarray:
    return np.flip(values, axis=axis) if flip else values


def ivt(q: GriddedField, u: GriddedField, v: GriddedField):
    """Integrated vapor transport: (1/g) * integral of q*wind over pressure.

    Returns (ivt_u, ivt_v, magnitude), each in kg m-1 s-1 with the level
    dimension integrated out. Pressure is converted to Pa and oriented so
    dp > 0 downward before the trapezoidal integration.
    """
    require(q.units, "kg kg-1", "ivt q")
    require(u.units, "m s-1", "ivt u")
    require(v.units, "m s-1", "ivt v")
    _require_same_grid("ivt", q, u, v)
    lev_ax, p_pa, flip = _pressure_coordinate(q)
    p_asc = p_pa[::-1] if flip else p_pa
    qu = _ascending(q.values * u.values, lev_ax, flip)
    qv = _ascending(q.values * v.values, lev_ax, flip)
    ivt_u = integrate_trapezoid(qu, p_asc, lev_ax) / c.G
    ivt_v = integrate_trapezoid(qv, p_asc, lev_ax) / c.G
    mag = np.hypot(ivt_u, ivt_v)
    dims = tuple(d for d in q.dims if d != "level")
    coords = {d: q.coords[d] for d in dims}
    units = "kg m-1 s-1"

    def out(name, vals, long_name):
        return GriddedField(name, units, dims, dict(coords), vals,
                            {"long_name": long_name})

    return (
        out("ivt_u", ivt_u, "zonal integrated vapor transport"),
        out("ivt_v", ivt_v, "meridional integrated vapor transport"),
        out("ivt", mag, "integrated vapor transport magnitude"),
    )


def potential_vorticity(u: GriddedField, v: GriddedField, t: GriddedField,
                        three_term: bool = True) -> GriddedField:
    """Ertel potential vorticity on pressure surfaces, K m2 kg-1 s-1.

    PV = -g * [(zeta + f) * dtheta/dp - dv/dp * dtheta/dx + du/dp * dtheta/dy].
    With three_term=False only the stability term -g*(zeta+f)*dtheta/dp is
    kept (the classic first-guess approximation).
    """
    require(u.units, "m s-1", "potential_vorticity u")
    require(v.units, "m s-1", "potential_vorticity v")
    require(t.units, "K", "potential_vorticity t")
    _require_same_grid("potential_vorticity", u, v, t)
    lev_ax, p_pa, _ = _pressure_coordinate(u)
    ax_lat, ax_lon, phi, lam, cosphi = _horizontal_setup(u)

    theta = potential_temperature(t).values
    dtheta_dp = derivative(theta, p_pa, lev_ax)
    zeta = relative_vorticity(u, v).values
    lat = u.coords["lat"].astype(np.float64)
    shape = [1] * u.values.ndim
    shape[ax_lat] = lat.size
    f = np.asarray(coriolis_parameter(lat)).reshape(shape)

    pv = (zeta + f) * dtheta_dp
    if three_term:
        dv_dp = derivative(v.values, p_pa, lev_ax)
        du_dp = derivative(u.values, p_pa, lev_ax)
        dtheta_dx = derivative(theta, lam, ax_lon) / (c.EARTH_RADIUS * cosphi)
        dtheta_dy = derivative(theta, phi, ax_lat) / c.EARTH_RADIUS
        pv = pv - dv_dp * dtheta_dx + du_dp * dtheta_dy
    pv = _mask_poles(-c.G * pv, u)
    attrs = {
        "long_name": "Ertel potential vorticity (isobaric)",
        "pvu": "1 PVU = 1e-6 K m2 kg-1 s-1",
        "terms": "three" if three_term else "stability-only",
    }
    return u.with_values(pv, name="pv", units="K m2 kg-1 s-1", attrs=attrs)


def anomaly(field: GriddedField, clim: ClimatologyField) -> GriddedField:
    """Departure of a field from its climatology, matched by calendar day."""
    if "time" not in field.dims:
        raise DiagError("anomaly needs a field with a time dimension")
    if field.units != clim.units:
        raise UnitError(
            f"anomaly: units mismatch ('{field.units}' vs '{clim.units}')"
        )
    spatial = tuple(d for d in field.dims if d != "time")
    if clim.dims != ("day_of_year",) + spatial:
        raise DiagError(
            f"anomaly: climatology dims {clim.dims} do not match field "
            f"spatial dims {spatial}"
        )
    for d in spatial:
        if not np.array_equal(field.coords[d], clim.coords[d]):
            raise DiagError(f"anomaly: grid mismatch on '{d}'")
    out = np.empty_like(field.values, dtype=np.float64)
    t_ax = field.axis("time")
    for i, day in enumerate(field.day_indices()):
        idx = [slice(None)] * field.values.ndim
        idx[t_ax] = i
        out[tuple(idx)] = np.take(field.values, i, axis=t_ax) - clim.day_slice(int(day))
    attrs = dict(field.attrs)
    attrs["climatology_base_period"] = f"{clim.base_period[0]}-{clim.base_period[1]}"
    attrs["climatology_window_days"] = str(clim.window_days)
    return field.with_values(out, name=f"{field.name}_anomaly", attrs=attrs)
