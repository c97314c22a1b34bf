"""Physics-checked diagnostics library: the pre-verified analysis toolkit."""

from metloop.diag.catalog import CATALOG, catalog_json, catalog_summary
from metloop.diag.kernels import BACKEND, derivative, integrate_trapezoid
from metloop.diag.ops import (
    DiagError,
    anomaly,
    coriolis_parameter,
    ivt,
    potential_temperature,
    potential_vorticity,
    relative_vorticity,
    vorticity_advection,
)
from metloop.diag.units import UnitError

__all__ = [
    "BACKEND",
    "CATALOG",
    "DiagError",
    "UnitError",
    "anomaly",
    "catalog_json",
    "catalog_summary",
    "coriolis_parameter",
    "derivative",
    "integrate_trapezoid",
    "ivt",
    "potential_temperature",
    "potential_vorticity",
    "relative_vorticity",
    "vorticity_advection",
]
