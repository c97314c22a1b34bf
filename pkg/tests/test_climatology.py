"""Climatology extraction: exactness contracts and brute-force oracles."""

import numpy as np
import pytest

from metloop.data import (
    SourceError,
    SyntheticSource,
    calendar_day_index,
    climatology,
)

BBOX = (30.0, 50.0, -10.0, 10.0)


def test_constant_field_climatology_is_exact():
    source = SyntheticSource(seed=0, recipe="constant", resolution=2.0,
                             constant=280.0)
    clim = climatology("t2m", BBOX, [191, 192], source, base_period=(1991, 2020))
    assert np.all(clim.values == 280.0)
    assert clim.base_period == (1991, 2020)
    assert clim.window_days == 1


def test_time_invariant_field_recovered_exactly():
    # year_index with a single-year-equivalent trick is not time-invariant;
    # constant recipe with an awkward mantissa exercises the Welford path
    source = SyntheticSource(seed=0, recipe="constant", resolution=2.0,
                             constant=280.13)
    clim = climatology("t2m", BBOX, [1, 60, 365], source,
                       base_period=(1991, 2020))
    assert np.all(clim.values == 280.13)


def test_year_index_mean_matches_brute_force():
    # values are the year offsets 0..29; oracle: sum(range(30))/30 = 14.5
    source = SyntheticSource(seed=0, recipe="year_index", resolution=2.0,
                             years=(1991, 2020))
    clim = climatology("t2m", BBOX, [200], source, base_period=(1991, 2020))
    oracle = sum(range(30)) / 30.0
    assert np.allclose(clim.values, oracle, rtol=1e-12)


def test_nonstandard_base_period_requires_override():
    source = SyntheticSource(seed=0, recipe="constant", resolution=2.0)
    with pytest.raises(SourceError):
        climatology("t2m", BBOX, [10], source, base_period=(2010, 2020))
    clim = climatology("t2m", BBOX, [10], source, base_period=(2010, 2020),
                       allow_nonstandard_period=True)
    assert clim.base_period == (2010, 2020)


def test_base_period_outside_source_years_rejected():
    source = SyntheticSource(seed=0, recipe="constant", resolution=2.0,
                             years=(2000, 2020))
    with pytest.raises(SourceError):
        climatology("t2m", BBOX, [10], source, base_period=(1991, 2020))


def test_feb29_counts_leap_years_only():
    # day 366 must average year_index values of leap years alone:
    # 1992..2020 step 4 -> offsets 1,5,...,29, mean = 15.0
    source = SyntheticSource(seed=0, recipe="year_index", resolution=2.0,
                             years=(1991, 2020))
    clim = climatology("t2m", BBOX, [366], source, base_period=(1991, 2020))
    leap_offsets = [y - 1991 for y in range(1991, 2021)
                    if (y % 4 == 0 and y % 100 != 0) or y % 400 == 0]
    oracle = sum(leap_offsets) / len(leap_offsets)
    assert np.allclose(clim.values, oracle, rtol=1e-12)


def test_window_mean_matches_brute_force():
    # 3-day window over year_index values is still the per-year value, so
    # use the smooth recipe and check one grid point against a direct loop
    source = SyntheticSource(seed=11, recipe="smooth", resolution=2.0)
    day = 100
    clim = climatology("t2m", BBOX, [day], source, base_period=(1991, 2020),
                       window_days=3)
    lats, lons = source.grid_subset(BBOX)
    from metloop.data.acquisition import _date_for_day_index
    samples = []
    for year in range(1991, 2021):
        for ring in (99, 100, 101):
            d = _date_for_day_index(year, ring)
            stamp = np.array([np.datetime64(d.isoformat())], dtype="datetime64[s]")
            samples.append(source.values("t2m", stamp, [], lats, lons)[0, 0, 0])
    oracle = np.mean(samples)
    assert clim.values[0, 0, 0] == pytest.approx(oracle, rel=1e-12)


def test_calendar_day_index_mapping():
    assert calendar_day_index(1, 1) == 1
    assert calendar_day_index(3, 1) == 60   # leap-independent
    assert calendar_day_index(2, 29) == 366
    assert calendar_day_index(12, 31) == 365
