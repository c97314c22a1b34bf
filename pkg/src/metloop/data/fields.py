"""Gridded field containers with full coordinate metadata.

A GriddedField is a named, unit-carrying dense array over an ordered subset
of (time, level, lat, lon). Coordinates travel with the values so that every
downstream consumer (diagnostics, packaging, the judge prompts) sees the
same metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone

import numpy as np

DIM_ORDER = ("time", "level", "lat", "lon")

_CUMDAYS = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334)


class FieldError(ValueError):
    """A gridded field violates its structural invariants."""


def calendar_day_index(month: int, day: int) -> int:
    """Day-of-year index on a fixed 366-slot calendar.

    Months map to their non-leap-year positions (Mar 1 is always 60);
    Feb 29 gets the dedicated slot 366, so leap days never shift the rest
    of the year and are averaged only over leap years in climatologies.
    """
    if month == 2 and day == 29:
        return 366
    return _CUMDAYS[month - 1] + day


def _check_coord(name: str, coord: np.ndarray, errors: list) -> None:
    if coord.ndim != 1 or coord.size == 0:
        errors.append(f"coordinate '{name}' must be a non-empty 1-D array")
        return
    if name in ("lat", "lon", "level") and coord.size > 1:
        d = np.diff(coord.astype(np.float64))
        if not (np.all(d > 0) or np.all(d < 0)):
            errors.append(f"coordinate '{name}' must be strictly monotone")


@dataclass
class GriddedField:
    """Dense numeric array plus coordinates, units, and source attributes."""

    name: str
    units: str
    dims: tuple
    coords: dict
    values: np.ndarray
    attrs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(self.dims)
        self.values = np.asarray(self.values)
        errors = []
        if not self.name:
            errors.append("name must be non-empty")
        if not self.units:
            errors.append("units must be non-empty")
        unknown = [d for d in self.dims if d not in DIM_ORDER]
        if unknown:
            errors.append(f"unknown dims {unknown}; allowed: {DIM_ORDER}")
        elif tuple(d for d in DIM_ORDER if d in self.dims) != self.dims:
            errors.append(f"dims {self.dims} must follow the order {DIM_ORDER}")
        if set(self.coords) != set(self.dims):
            errors.append("coords keys must match dims exactly")
        else:
            for d in self.dims:
                self.coords[d] = np.asarray(self.coords[d])
                _check_coord(d, self.coords[d], errors)
            shape = tuple(self.coords[d].size for d in self.dims)
            if self.values.shape != shape:
                errors.append(
                    f"values shape {self.values.shape} does not match "
                    f"coordinate lengths {shape}"
                )
        if errors:
            raise FieldError(f"invalid field '{self.name}': " + "; ".join(errors))

    def axis(self, dim: str) -> int:
        if dim not in self.dims:
            raise FieldError(f"field '{self.name}' has no '{dim}' dimension")
        return self.dims.index(dim)

    def same_grid(self, other: "GriddedField") -> bool:
        """True when dims and all coordinate arrays match exactly."""
        if self.dims != other.dims:
            return False
        return all(
            self.coords[d].shape == other.coords[d].shape
            and np.array_equal(self.coords[d], other.coords[d])
            for d in self.dims
        )

    def with_values(self, values: np.ndarray, *, name: str = None,
                    units: str = None, attrs: dict = None) -> "GriddedField":
        """Copy of this field with new values (and optionally new identity)."""
        return replace(
            self,
            name=self.name if name is None else name,
            units=self.units if units is None else units,
            coords=dict(self.coords),
            values=values,
            attrs=dict(self.attrs) if attrs is None else attrs,
        )

    def sel_level(self, level_hpa: float) -> "GriddedField":
        """Extract a single pressure level (must be present exactly)."""
        ax = self.axis("level")
        levels = self.coords["level"].astype(np.float64)
        hits = np.nonzero(levels == float(level_hpa))[0]
        if hits.size == 0:
            raise FieldError(
                f"level {level_hpa} hPa not in field '{self.name}' "
                f"(available: {levels.tolist()})"
            )
        values = np.take(self.values, hits[0], axis=ax)
        dims = tuple(d for d in self.dims if d != "level")
        coords = {d: self.coords[d] for d in dims}
        attrs = dict(self.attrs)
        attrs["level_hpa"] = repr(float(level_hpa))
        return GriddedField(self.name, self.units, dims, coords, values, attrs)

    def day_indices(self) -> np.ndarray:
        """Calendar-day index (1..366) for every entry of the time coordinate."""
        times = self.coords[
            "time"
        ].astype("datetime64[s]").astype(datetime)
        return np.array(
            [calendar_day_index(t.month, t.day) for t in np.atleast_1d(times)],
            dtype=np.int64,
        )


@dataclass
class ClimatologyField:
    """Per-calendar-day mean field over a multi-year base period."""

    name: str
    units: str
    dims: tuple
    coords: dict
    values: np.ndarray
    window_days: int
    base_period: tuple
    attrs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(self.dims)
        self.base_period = (int(self.base_period[0]), int(self.base_period[1]))
        self.values = np.asarray(self.values)
        errors = []
        if self.dims[0] != "day_of_year":
            errors.append("first dim must be day_of_year")
        if set(self.coords) != set(self.dims):
            errors.append("coords keys must match dims exactly")
        else:
            for d in self.dims:
                self.coords[d] = np.asarray(self.coords[d])
            days = self.coords["day_of_year"]
            if days.size and (days.min() < 1 or days.max() > 366):
                errors.append("day_of_year indices must lie in 1..366")
            shape = tuple(self.coords[d].size for d in self.dims)
            if self.values.shape != shape:
                errors.append("values shape does not match coordinate lengths")
        if self.window_days < 1 or self.window_days % 2 == 0:
            errors.append("window_days must be a positive odd integer")
        if errors:
            raise FieldError(
                f"invalid climatology '{self.name}': " + "; ".join(errors)
            )

    def day_slice(self, day_index: int) -> np.ndarray:
        days = self.coords["day_of_year"]
        hits = np.nonzero(days == day_index)[0]
        if hits.size == 0:
            raise FieldError(
                f"climatology '{self.name}' does not cover day {day_index}"
            )
        return np.take(self.values, hits[0], axis=0)


@dataclass
class DataQuery:
    """Request for variables over a UTC time range, region, and levels."""

    variables: list
    time_range: tuple
    bbox: tuple
    levels: list = None

    def __post_init__(self):
        errors = []
        if not self.variables:
            errors.append("variables must be non-empty")
        start, end = self.time_range
        if isinstance(start, date) and not isinstance(start, datetime):
            start = datetime(start.year, start.month, start.day, tzinfo=timezone.utc)
        if isinstance(end, date) and not isinstance(end, datetime):
            end = datetime(end.year, end.month, end.day, tzinfo=timezone.utc)
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        if end.tzinfo is None:
            end = end.replace(tzinfo=timezone.utc)
        if start > end:
            errors.append("time_range start must be <= end")
        self.time_range = (start, end)
        lat_min, lat_max, lon_min, lon_max = self.bbox
        if not (-90 <= lat_min < lat_max <= 90):
            errors.append("bbox latitudes must satisfy -90 <= lat_min < lat_max <= 90")
        if not (-180 <= lon_min < lon_max < 180.0001):
            errors.append("bbox longitudes must satisfy -180 <= lon_min < lon_max < 180")
        if self.levels is not None:
            self.levels = [float(l) for l in self.levels]
            if not self.levels:
                errors.append("levels, when given, must be non-empty")
        if errors:
            raise FieldError("invalid data query: " + "; ".join(errors))


def fields_equal(a: GriddedField, b: GriddedField) -> bool:
    """Structural equality: identity, grid, values, and attrs all match."""
    return (
        a.name == b.name
        and a.units == b.units
        and a.same_grid(b)
        and np.array_equal(a.values, b.values, equal_nan=True)
        and a.attrs == b.attrs
    )
