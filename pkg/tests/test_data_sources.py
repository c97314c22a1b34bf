"""Data acquisition: sources, fetch packaging, and the NetCDF round trip."""

import json
from datetime import datetime, timezone

import numpy as np
import pytest

from metloop.data import (
    DataQuery,
    EmptyIntersectionError,
    GriddedField,
    LocalDirectorySource,
    SourceError,
    SyntheticSource,
    UnknownVariableError,
    fetch,
    fields_equal,
    read_field,
    write_field,
)
from metloop.registry import Registry, RegistryError


def utc(s):
    return datetime.fromisoformat(s).replace(tzinfo=timezone.utc)


def test_fetch_grid_arithmetic_quarter_degree(tmp_path):
    # (55-35)/0.25+1 = 81 lat points, (20-(-10))/0.25+1 = 121 lon points
    source = SyntheticSource(seed=1, resolution=0.25)
    query = DataQuery(["t2m"], (utc("2022-07-10"), utc("2022-07-11")),
                      (35.0, 55.0, -10.0, 20.0))
    result = fetch(query, source, tmp_path / "d")
    f = result.fields["t2m"]
    assert f.dims == ("time", "lat", "lon")
    assert f.values.shape == (2, 81, 121)
    manifest = json.loads(result.manifest_path.read_text())
    assert manifest["variables"]["t2m"]["shape"] == [2, 81, 121]
    assert manifest["variables"]["t2m"]["units"] == "K"


def test_fetch_level_variable_records_level_set(tmp_path):
    source = SyntheticSource(seed=1, resolution=2.0)
    query = DataQuery(["z", "u"], (utc("2022-07-10"), utc("2022-07-12")),
                      (30.0, 50.0, -10.0, 10.0), levels=[850.0, 500.0])
    result = fetch(query, source, tmp_path / "d")
    manifest = json.loads(result.manifest_path.read_text())
    assert manifest["variables"]["z"]["levels"] == [850.0, 500.0]
    assert result.fields["z"].dims == ("time", "level", "lat", "lon")


def test_fetch_unknown_variable_rejected(tmp_path):
    source = SyntheticSource(seed=1, resolution=2.0)
    query = DataQuery(["zz"], (utc("2022-07-10"), utc("2022-07-11")),
                      (30.0, 50.0, -10.0, 10.0))
    with pytest.raises(UnknownVariableError):
        fetch(query, source, tmp_path / "d")


def test_fetch_empty_intersection_rejected(tmp_path):
    source = SyntheticSource(seed=1, resolution=2.0)
    # time range before the synthetic archive begins
    query = DataQuery(["t2m"], (utc("1950-01-01"), utc("1950-01-02")),
                      (30.0, 50.0, -10.0, 10.0))
    with pytest.raises(EmptyIntersectionError):
        fetch(query, source, tmp_path / "d")


def test_subsetting_equals_pointwise_restriction(tmp_path):
    # fetch(bbox) must equal the restriction of a wider fetch on the overlap
    source = SyntheticSource(seed=3, resolution=2.0)
    times = (utc("2022-07-10"), utc("2022-07-12"))
    wide = fetch(DataQuery(["t2m"], times, (20.0, 60.0, -40.0, 40.0)),
                 source, tmp_path / "wide").fields["t2m"]
    narrow = fetch(DataQuery(["t2m"], times, (30.0, 50.0, -10.0, 10.0)),
                   source, tmp_path / "narrow").fields["t2m"]
    lat_sel = (wide.coords["lat"] >= 30.0) & (wide.coords["lat"] <= 50.0)
    lon_sel = (wide.coords["lon"] >= -10.0) & (wide.coords["lon"] <= 10.0)
    restricted = wide.values[:, lat_sel, :][:, :, lon_sel]
    assert np.array_equal(restricted, narrow.values)


def test_netcdf_round_trip_is_bit_exact(tmp_path):
    source = SyntheticSource(seed=5, resolution=2.0)
    query = DataQuery(["q"], (utc("2022-07-10"), utc("2022-07-12")),
                      (30.0, 50.0, -10.0, 10.0), levels=[850.0, 700.0])
    f = fetch(query, source, tmp_path / "d").fields["q"]
    back = read_field(tmp_path / "d" / "q.nc")
    assert fields_equal(f, back)
    assert back.attrs["source"].startswith("synthetic")


def test_local_directory_source_round_trip(tmp_path):
    source = SyntheticSource(seed=5, resolution=2.0)
    times = (utc("2022-07-10"), utc("2022-07-13"))
    store_dir = tmp_path / "store"
    fetch(DataQuery(["t2m", "u"], times, (20.0, 60.0, -40.0, 40.0)),
          source, store_dir)
    local = LocalDirectorySource(store_dir)
    assert set(local.catalog) == {"t2m", "u"}
    sub = local.read(
        "t2m",
        local.time_available(utc("2022-07-11"), utc("2022-07-12")),
        (30.0, 50.0, -10.0, 10.0),
        [],
    )
    direct = source.read(
        "t2m",
        source.time_available(utc("2022-07-11"), utc("2022-07-12")),
        (30.0, 50.0, -10.0, 10.0),
        [],
    )
    assert np.array_equal(sub.values, direct.values)


def test_local_source_missing_level_rejected(tmp_path):
    source = SyntheticSource(seed=5, resolution=2.0)
    times = (utc("2022-07-10"), utc("2022-07-11"))
    store = tmp_path / "store"
    fetch(DataQuery(["t"], times, (20.0, 60.0, -20.0, 20.0),
                    levels=[1000.0, 700.0, 500.0]), source, store)
    local = LocalDirectorySource(store)
    with pytest.raises(SourceError):
        local.read("t", local.time_available(*times), (30.0, 50.0, -10.0, 10.0),
                   [850.0])


def test_registry_contract():
    reg = Registry("data source")
    src = SyntheticSource(seed=0, resolution=2.0)
    reg.register("synthetic", src)
    assert reg.get("synthetic") is src
    with pytest.raises(RegistryError):
        reg.register("synthetic", src)
    with pytest.raises(RegistryError):
        reg.get("missing")


def test_unknown_recipe_rejected():
    with pytest.raises(SourceError):
        SyntheticSource(recipe="noise")


def test_query_validation():
    from metloop.data.fields import FieldError
    with pytest.raises(FieldError):
        DataQuery([], (utc("2022-07-10"), utc("2022-07-11")),
                  (30.0, 50.0, -10.0, 10.0))
    with pytest.raises(FieldError):
        DataQuery(["t2m"], (utc("2022-07-11"), utc("2022-07-10")),
                  (30.0, 50.0, -10.0, 10.0))
    with pytest.raises(FieldError):
        DataQuery(["t2m"], (utc("2022-07-10"), utc("2022-07-11")),
                  (50.0, 30.0, -10.0, 10.0))


def test_gridded_field_invariants():
    from metloop.data.fields import FieldError
    lat = np.array([10.0, 20.0])
    lon = np.array([0.0, 1.0])
    with pytest.raises(FieldError):
        GriddedField("x", "", ("lat", "lon"), {"lat": lat, "lon": lon},
                     np.zeros((2, 2)))
    with pytest.raises(FieldError):
        GriddedField("x", "K", ("lon", "lat"), {"lat": lat, "lon": lon},
                     np.zeros((2, 2)))
    with pytest.raises(FieldError):
        GriddedField("x", "K", ("lat", "lon"),
                     {"lat": np.array([10.0, 10.0]), "lon": lon},
                     np.zeros((2, 2)))
    with pytest.raises(FieldError):
        GriddedField("x", "K", ("lat", "lon"), {"lat": lat, "lon": lon},
                     np.zeros((3, 2)))
