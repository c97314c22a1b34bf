"""Self-describing NetCDF packaging for gridded fields.

One file per variable, NetCDF-3 classic via scipy, CF-style attribute names
(units, long_name, source). Values are float64 so the package -> reload
round trip is bit-exact; time is stored as seconds since the Unix epoch.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import netcdf_file

from metloop.data.fields import ClimatologyField, FieldError, GriddedField

TIME_UNITS = "seconds since 1970-01-01T00:00:00Z"

_COORD_UNITS = {
    "lat": "degrees_north",
    "lon": "degrees_east",
    "level": "hPa",
    "time": TIME_UNITS,
    "day_of_year": "1",
}


def _encode_coord(dim: str, coord: np.ndarray) -> np.ndarray:
    if dim == "time":
        return coord.astype("datetime64[s]").astype(np.int64).astype(np.float64)
    if dim == "day_of_year":
        return coord.astype(np.int32)
    return coord.astype(np.float64)


def _decode_coord(dim: str, raw: np.ndarray) -> np.ndarray:
    if dim == "time":
        return raw.astype(np.int64).astype("datetime64[s]")
    if dim == "day_of_year":
        return raw.astype(np.int64)
    return np.array(raw, dtype=np.float64)


def write_field(f, path) -> Path:
    """Write a GriddedField or ClimatologyField to a NetCDF file."""
    path = Path(path)
    with netcdf_file(str(path), "w") as nc:
        for dim in f.dims:
            coord = _encode_coord(dim, f.coords[dim])
            nc.createDimension(dim, coord.size)
            var = nc.createVariable(
                dim, "i" if dim == "day_of_year" else "d", (dim,)
            )
            var[:] = coord
            var.units = _COORD_UNITS[dim]
        main = nc.createVariable(f.name, "d", f.dims)
        main[:] = np.asarray(f.values, dtype=np.float64)
        main.units = f.units
        for key, value in sorted(f.attrs.items()):
            setattr(main, key, str(value))
        if isinstance(f, ClimatologyField):
            main.window_days = str(f.window_days)
            main.base_period = f"{f.base_period[0]}-{f.base_period[1]}"
    return path


def _attr_str(value) -> str:
    return value.decode("utf-8") if isinstance(value, bytes) else str(value)


def read_field(path):
    """Load a field written by write_field; returns the matching type."""
    path = Path(path)
    if not path.is_file():
        raise FieldError(f"no such data file: {path}")
    with netcdf_file(str(path), "r", mmap=False) as nc:
        dim_names = [d for d in nc.dimensions]
        data_names = [n for n in nc.variables if n not in dim_names]
        if len(data_names) != 1:
            raise FieldError(
                f"{path}: expected exactly one data variable, found {data_names}"
            )
        name = data_names[0]
        var = nc.variables[name]
        dims = tuple(var.dimensions)
        coords = {d: _decode_coord(d, np.array(nc.variables[d].data)) for d in dims}
        values = np.array(var.data, dtype=np.float64)
        attrs = {
            k: _attr_str(v)
            for k, v in sorted(var._attributes.items())
            if k not in ("units", "window_days", "base_period")
        }
        units = _attr_str(var.units)
        if "day_of_year" in dims:
            window = int(_attr_str(var.window_days))
            y0, y1 = _attr_str(var.base_period).split("-")
            return ClimatologyField(
                name, units, dims, coords, values, window, (int(y0), int(y1)), attrs
            )
        return GriddedField(name, units, dims, coords, values, attrs)
