"""Data acquisition: fetch packaged event datasets and extract climatologies."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from metloop.data.fields import (
    ClimatologyField,
    DataQuery,
    GriddedField,
    calendar_day_index,
)
from metloop.data.netcdf import write_field
from metloop.data.sources import SourceError

DEFAULT_BASE_PERIOD = (1991, 2020)

_CUMDAYS = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334)


class UnknownVariableError(SourceError):
    """Requested variable is not in the source catalog."""


class EmptyIntersectionError(SourceError):
    """Query does not overlap the source's spatial or temporal domain."""


@dataclass
class FetchResult:
    dataset_dir: Path
    manifest_path: Path
    fields: dict


def _check_variables(variables, source):
    unknown = [v for v in variables if v not in source.catalog]
    if unknown:
        raise UnknownVariableError(
            f"unknown variable(s) {unknown}; catalog: {sorted(source.catalog)}"
        )


def fetch(query: DataQuery, source, out_dir) -> FetchResult:
    """Retrieve every queried variable and package it with a manifest.

    Writes one self-describing NetCDF file per variable under out_dir plus
    manifest.json (variables, dims, units, level sets, time span) — the
    manifest is what the code auditor validates generated code against.
    """
    _check_variables(query.variables, source)
    start, end = query.time_range
    times = source.time_available(start, end)
    if times.size == 0:
        raise EmptyIntersectionError(
            f"no timestamps in the source for {start.isoformat()}..{end.isoformat()}"
        )
    lats, lons = source.grid_subset(query.bbox)
    if lats.size == 0 or lons.size == 0:
        raise EmptyIntersectionError(
            f"bbox {query.bbox} does not intersect the source grid"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_vars = {}
    fields = {}
    for var in query.variables:
        spec = source.catalog[var]
        levels = []
        if spec.on_levels:
            available = source.level_set(var)
            levels = [float(l) for l in (query.levels or available)]
            missing = [l for l in levels if l not in available]
            if missing:
                raise EmptyIntersectionError(
                    f"levels {missing} not available for '{var}' "
                    f"(available: {available})"
                )
        field = source.read(var, times, query.bbox, levels)
        path = out_dir / f"{var}.nc"
        write_field(field, path)
        fields[var] = field
        manifest_vars[var] = {
            "file": path.name,
            "units": field.units,
            "dims": list(field.dims),
            "shape": list(field.values.shape),
            "levels": levels,
            "time_start": str(times[0].astype("datetime64[s]")),
            "time_end": str(times[-1].astype("datetime64[s]")),
        }
    manifest = {
        "source": source.name,
        "bbox": list(query.bbox),
        "variables": manifest_vars,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return FetchResult(out_dir, manifest_path, fields)


def _date_for_day_index(year: int, day_index: int) -> date:
    """Inverse of calendar_day_index for a given year; None when impossible."""
    if day_index == 366:
        try:
            return date(year, 2, 29)
        except ValueError:
            return None
    month = max(m for m in range(1, 13) if _CUMDAYS[m - 1] < day_index)
    return date(year, month, day_index - _CUMDAYS[month - 1])


def _window_day_indices(day_index: int, window_days: int):
    """Ring of calendar-day indices centered on day_index (366 stands alone)."""
    if window_days == 1 or day_index == 366:
        return [day_index]
    half = (window_days - 1) // 2
    return [((day_index - 1 + off) % 365) + 1 for off in range(-half, half + 1)]


def climatology(variable: str, bbox, days, source,
                base_period=DEFAULT_BASE_PERIOD, window_days: int = 1,
                levels=None, allow_nonstandard_period: bool = False) -> ClimatologyField:
    """Per-calendar-day mean over the base period for the requested days.

    The mean uses a Welford running update so a time-invariant source yields
    the source values exactly. Day 366 (Feb 29) averages over leap years
    only. The base period must span exactly 30 years unless explicitly
    overridden.
    """
    _check_variables([variable], source)
    y0, y1 = int(base_period[0]), int(base_period[1])
    span = y1 - y0 + 1
    if span != 30 and not allow_nonstandard_period:
        raise SourceError(
            f"base period {y0}-{y1} spans {span} years; the default contract "
            "is exactly 30 (pass allow_nonstandard_period=True to override)"
        )
    sy0, sy1 = source.years if hasattr(source, "years") else (None, None)
    if sy0 is not None and (y0 < sy0 or y1 > sy1):
        raise SourceError(
            f"base period {y0}-{y1} not fully available (source covers {sy0}-{sy1})"
        )
    spec = source.catalog[variable]
    lats, lons = source.grid_subset(bbox)
    if lats.size == 0 or lons.size == 0:
        raise EmptyIntersectionError(
            f"bbox {bbox} does not intersect the source grid"
        )
    use_levels = []
    if spec.on_levels:
        available = source.level_set(variable)
        use_levels = [float(l) for l in (levels or available)]

    days = [int(d) for d in days]
    if not days:
        raise SourceError("days must be non-empty")
    per_day = []
    for day_index in days:
        mean = None
        count = 0
        for year in range(y0, y1 + 1):
            for ring_day in _window_day_indices(day_index, window_days):
                sample_date = _date_for_day_index(year, ring_day)
                if sample_date is None:
                    continue
                stamp = np.array(
                    [np.datetime64(sample_date.isoformat())], dtype="datetime64[s]"
                )
                sample = source.values(variable, stamp, use_levels, lats, lons)[0]
                count += 1
                if mean is None:
                    mean = np.array(sample, dtype=np.float64)
                else:
                    mean += (sample - mean) / count
        if count == 0:
            raise SourceError(
                f"no samples for day_of_year {day_index} in {y0}-{y1}"
            )
        per_day.append(mean)

    dims = ("day_of_year", "level", "lat", "lon") if spec.on_levels else (
        "day_of_year", "lat", "lon")
    coords = {
        "day_of_year": np.asarray(days, dtype=np.int64),
        "lat": lats,
        "lon": lons,
    }
    if spec.on_levels:
        coords["level"] = np.asarray(use_levels, dtype=np.float64)
    attrs = {
        "long_name": f"{spec.long_name} climatology",
        "source": getattr(source, "name", "unknown"),
    }
    return ClimatologyField(
        variable, spec.units, dims, coords, np.stack(per_day),
        window_days, (y0, y1), attrs
    )


def event_day_indices(start: date, end: date):
    """Calendar-day indices covered by an inclusive local-date range."""
    out = []
    d = start
    while d <= end:
        idx = calendar_day_index(d.month, d.day)
        if idx not in out:
            out.append(idx)
        d += timedelta(days=1)
    return out
