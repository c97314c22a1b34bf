"""Gridded data acquisition: fields, sources, packaging, climatology."""

from metloop.data.acquisition import (
    EmptyIntersectionError,
    FetchResult,
    UnknownVariableError,
    climatology,
    event_day_indices,
    fetch,
)
from metloop.data.fields import (
    ClimatologyField,
    DataQuery,
    FieldError,
    GriddedField,
    calendar_day_index,
    fields_equal,
)
from metloop.data.netcdf import read_field, write_field
from metloop.data.sources import (
    DEFAULT_LEVELS,
    LocalDirectorySource,
    SourceError,
    SyntheticSource,
    get_source,
    register_source,
    sources,
)

__all__ = [
    "ClimatologyField",
    "DataQuery",
    "DEFAULT_LEVELS",
    "EmptyIntersectionError",
    "FetchResult",
    "FieldError",
    "GriddedField",
    "LocalDirectorySource",
    "SourceError",
    "SyntheticSource",
    "UnknownVariableError",
    "calendar_day_index",
    "climatology",
    "event_day_indices",
    "fetch",
    "fields_equal",
    "get_source",
    "read_field",
    "register_source",
    "sources",
    "write_field",
]
