"""Data sources: the source-agnostic adapter layer plus two built-ins.

SyntheticSource evaluates deterministic analytic fields (seeded harmonic
modes) pointwise on the requested grid, so any subset equals the pointwise
restriction of the whole domain by construction. LocalDirectorySource reads
back datasets packaged by this repo's own NetCDF writer, which is how
user-provided reanalysis subsets are mounted.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from metloop.data.fields import GriddedField
from metloop.data.netcdf import read_field
from metloop.registry import Registry


class SourceError(ValueError):
    """A data source cannot satisfy the request."""


@dataclass(frozen=True)
class VariableSpec:
    name: str
    units: str
    long_name: str
    on_levels: bool


# Minimal set needed by the six event-type guidelines.
DEFAULT_CATALOG = {
    "z": VariableSpec("z", "m2 s-2", "geopotential", True),
    "t": VariableSpec("t", "K", "temperature", True),
    "u": VariableSpec("u", "m s-1", "zonal wind", True),
    "v": VariableSpec("v", "m s-1", "meridional wind", True),
    "q": VariableSpec("q", "kg kg-1", "specific humidity", True),
    "w": VariableSpec("w", "Pa s-1", "vertical velocity", True),
    "t2m": VariableSpec("t2m", "K", "2 m temperature", False),
    "u10": VariableSpec("u10", "m s-1", "10 m zonal wind", False),
    "v10": VariableSpec("v10", "m s-1", "10 m meridional wind", False),
    "msl": VariableSpec("msl", "Pa", "mean sea level pressure", False),
    "tp": VariableSpec("tp", "m", "total daily precipitation", False),
}

DEFAULT_LEVELS = (1000.0, 925.0, 850.0, 700.0, 500.0, 300.0, 200.0)

sources = Registry("data source")


def register_source(name: str, adapter) -> None:
    sources.register(name, adapter)


def get_source(name: str):
    return sources.get(name)


def daily_times(start, end) -> np.ndarray:
    """All 00Z daily timestamps t with start <= t <= end (UTC datetimes)."""
    first = np.datetime64(start.strftime("%Y-%m-%d"))
    if np.datetime64(start.strftime("%Y-%m-%dT%H:%M:%S")) > first.astype("datetime64[s]"):
        first = first + np.timedelta64(1, "D")
    last = np.datetime64(end.strftime("%Y-%m-%d"))
    if first > last:
        return np.array([], dtype="datetime64[s]")
    days = np.arange(first, last + np.timedelta64(1, "D"), dtype="datetime64[D]")
    return days.astype("datetime64[s]")


def _mode_table(seed: int, var: str, n_modes: int = 4) -> np.ndarray:
    """Fixed harmonic-mode coefficients per (seed, variable)."""
    digest = hashlib.sha256(f"{seed}:{var}".encode()).digest()
    rng = np.random.default_rng(np.frombuffer(digest[:16], dtype=np.uint64))
    # columns: amplitude scale, k_lat, k_lon, k_time, k_level, phase
    table = np.empty((n_modes, 6))
    table[:, 0] = rng.uniform(0.3, 1.0, n_modes)
    table[:, 1] = rng.uniform(0.02, 0.12, n_modes)
    table[:, 2] = rng.uniform(0.02, 0.12, n_modes)
    table[:, 3] = rng.uniform(0.05, 0.8, n_modes)
    table[:, 4] = rng.uniform(0.0, 0.004, n_modes)
    table[:, 5] = rng.uniform(0.0, 2.0 * np.pi, n_modes)
    return table


# (base offset, mode amplitude) per variable for the smooth recipe
_SMOOTH_AMPLITUDE = {
    "z": 400.0, "t": 6.0, "u": 8.0, "v": 8.0, "q": 0.001, "w": 0.05,
    "t2m": 6.0, "u10": 4.0, "v10": 4.0, "msl": 400.0, "tp": 0.0008,
}


class SyntheticSource:
    """Analytic global fields on a regular grid, seeded and deterministic."""

    def __init__(self, seed: int = 0, recipe: str = "smooth",
                 resolution: float = 1.0, years=(1979, 2025),
                 levels=DEFAULT_LEVELS, constant: float = 280.0):
        if recipe not in ("smooth", "constant", "year_index"):
            raise SourceError(f"unknown synthetic recipe '{recipe}'")
        self.name = "synthetic"
        self.seed = int(seed)
        self.recipe = recipe
        self.resolution = float(resolution)
        self.years = (int(years[0]), int(years[1]))
        self.levels = tuple(float(l) for l in levels)
        self.constant = float(constant)
        n_lat = int(round(180.0 / self.resolution)) + 1
        n_lon = int(round(360.0 / self.resolution))
        self._lats = np.linspace(-90.0, 90.0, n_lat)
        self._lons = np.linspace(-180.0, 180.0 - self.resolution, n_lon)
        self._modes = {}

    @property
    def catalog(self):
        return DEFAULT_CATALOG

    def level_set(self, var: str):
        return list(self.levels) if DEFAULT_CATALOG[var].on_levels else []

    def grid_subset(self, bbox):
        lat_min, lat_max, lon_min, lon_max = bbox
        lats = self._lats[(self._lats >= lat_min) & (self._lats <= lat_max)]
        lons = self._lons[(self._lons >= lon_min) & (self._lons <= lon_max)]
        return lats, lons

    def time_available(self, start, end) -> np.ndarray:
        times = daily_times(start, end)
        if times.size == 0:
            return times
        years = times.astype("datetime64[Y]").astype(int) + 1970
        return times[(years >= self.years[0]) & (years <= self.years[1])]

    def _base(self, var, phi, lam, tau, lev):
        """Large-scale structure per variable (phi/lam in radians, lev in hPa)."""
        seasonal = np.sin(2.0 * np.pi * (tau - 172.0) / 365.25)
        if var in ("t2m", "t"):
            prof = (lev / 1000.0) ** 0.28 if var == "t" else 1.0
            return (288.0 - 34.0 * np.sin(phi) ** 2 + 6.0 * seasonal * np.sign(phi + 1e-12)) * prof + (
                0.0 if var == "t2m" else 2.0
            )
        if var == "z":
            scale = 9.80665 * 7000.0 * np.log(1000.0 / lev)
            return scale + 9.80665 * (-280.0 * np.sin(phi) ** 2 + 25.0 * seasonal)
        if var in ("u", "u10"):
            prof = (1000.0 / lev) ** 0.4 if var == "u" else 1.0
            return (3.0 + 12.0 * np.sin(2.0 * phi) ** 2) * prof
        if var in ("v", "v10", "w"):
            return np.zeros_like(phi + lam)
        if var == "q":
            prof = (lev / 1000.0) ** 1.6 if var == "q" else 1.0
            return (0.009 * np.cos(phi) ** 2 + 0.0015) * prof
        if var == "msl":
            return 101325.0 + 600.0 * np.cos(2.0 * phi)
        if var == "tp":
            return 0.004 * np.cos(phi) ** 2 + 0.001
        raise SourceError(f"no synthetic recipe for variable '{var}'")

    def values(self, var, times, levels, lats, lons) -> np.ndarray:
        """Evaluate the recipe pointwise on the requested coordinate grid."""
        tau = (times.astype("datetime64[s]").astype(np.int64) / 86400.0)
        tau = tau - (np.datetime64("1979-01-01").astype("datetime64[s]").astype(np.int64) / 86400.0)
        has_levels = bool(levels)
        lev = np.asarray(levels if has_levels else [0.0], dtype=np.float64)
        # broadcastable axes: (time, level, lat, lon)
        T = tau[:, None, None, None]
        L = lev[None, :, None, None]
        PHI = np.radians(np.asarray(lats, dtype=np.float64))[None, None, :, None]
        LAM = np.radians(np.asarray(lons, dtype=np.float64))[None, None, None, :]
        shape = (tau.size, lev.size, np.size(lats), np.size(lons))
        if self.recipe == "constant":
            out = np.full(shape, self.constant)
        elif self.recipe == "year_index":
            years = times.astype("datetime64[Y]").astype(np.int64) + 1970
            idx = (years - self.years[0]).astype(np.float64)
            out = np.broadcast_to(idx[:, None, None, None], shape).copy()
        else:
            latdeg = np.degrees(PHI)
            londeg = np.degrees(LAM)
            out = np.broadcast_to(
                self._base(var, PHI, LAM, T, L if has_levels else 1000.0),
                shape,
            ).copy()
            if var not in self._modes:
                self._modes[var] = _mode_table(self.seed, var)
            amp = _SMOOTH_AMPLITUDE[var]
            for row in self._modes[var]:
                out += amp * row[0] * np.sin(
                    row[1] * latdeg + row[2] * londeg + row[3] * T
                    + row[4] * (L if has_levels else 0.0) + row[5]
                )
            if var in ("q", "tp"):
                np.maximum(out, 0.0, out=out)
        return out if has_levels else out[:, 0, :, :]

    def read(self, var, times, bbox, levels) -> GriddedField:
        spec = self.catalog[var]
        lats, lons = self.grid_subset(bbox)
        if lats.size == 0 or lons.size == 0:
            raise SourceError("bbox does not intersect the source grid")
        use_levels = list(levels) if spec.on_levels else []
        values = self.values(var, times, use_levels, lats, lons)
        dims = ("time", "level", "lat", "lon") if spec.on_levels else ("time", "lat", "lon")
        coords = {"time": times, "lat": lats, "lon": lons}
        if spec.on_levels:
            coords["level"] = np.asarray(use_levels, dtype=np.float64)
        attrs = {
            "long_name": spec.long_name,
            "source": f"synthetic(seed={self.seed}, recipe={self.recipe})",
        }
        return GriddedField(var, spec.units, dims, coords, values, attrs)


class LocalDirectorySource:
    """Read-only store of NetCDF files packaged by this repo's writer."""

    def __init__(self, root):
        self.name = "local"
        self.root = Path(root)
        if not self.root.is_dir():
            raise SourceError(f"local store directory not found: {self.root}")
        self._fields = {}
        for path in sorted(self.root.glob("*.nc")):
            f = read_field(path)
            if isinstance(f, GriddedField):
                self._fields[f.name] = f
        if not self._fields:
            raise SourceError(f"no gridded files under {self.root}")

    @property
    def catalog(self):
        return {
            name: VariableSpec(
                name, f.units, f.attrs.get("long_name", name), "level" in f.dims
            )
            for name, f in self._fields.items()
        }

    def level_set(self, var: str):
        f = self._fields[var]
        return f.coords["level"].astype(float).tolist() if "level" in f.dims else []

    def grid_subset(self, bbox):
        any_field = next(iter(self._fields.values()))
        lat_min, lat_max, lon_min, lon_max = bbox
        lats = any_field.coords["lat"]
        lons = any_field.coords["lon"]
        return (
            lats[(lats >= lat_min) & (lats <= lat_max)],
            lons[(lons >= lon_min) & (lons <= lon_max)],
        )

    def time_available(self, start, end) -> np.ndarray:
        any_field = next(iter(self._fields.values()))
        stored = any_field.coords["time"].astype("datetime64[s]")
        wanted = daily_times(start, end)
        return stored[np.isin(stored, wanted)]

    def read(self, var, times, bbox, levels) -> GriddedField:
        f = self._fields[var]
        lat_min, lat_max, lon_min, lon_max = bbox
        t_idx = np.isin(f.coords["time"].astype("datetime64[s]"), times)
        lat_idx = (f.coords["lat"] >= lat_min) & (f.coords["lat"] <= lat_max)
        lon_idx = (f.coords["lon"] >= lon_min) & (f.coords["lon"] <= lon_max)
        if not t_idx.any() or not lat_idx.any() or not lon_idx.any():
            raise SourceError("requested subset is empty in the local store")
        values = f.values
        coords = {}
        take = {"time": t_idx, "lat": lat_idx, "lon": lon_idx}
        if "level" in f.dims:
            stored = f.coords["level"].astype(float)
            missing = [l for l in levels if float(l) not in stored]
            if missing:
                raise SourceError(
                    f"levels {missing} not stored for '{var}' "
                    f"(available: {stored.tolist()})"
                )
            take["level"] = np.isin(stored, np.asarray(levels, dtype=float))
        for ax, dim in reversed(list(enumerate(f.dims))):
            values = np.compress(take[dim], values, axis=ax)
            coords[dim] = f.coords[dim][take[dim]]
        return GriddedField(var, f.units, f.dims, coords, values, dict(f.attrs))
