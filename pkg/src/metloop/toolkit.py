"""The analysis surface exposed to sandboxed code.

Generated code imports this module (``from metloop import toolkit``) to load
fetched variables and run the pre-verified diagnostics. The functions here
are the exact same objects the diagnostics test suite exercises; the
machine-readable catalog the code auditor validates against is in
metloop.diag.catalog.

When a run disables the analysis toolkit, the sandbox sets METLOOP_TOOLS=0
and importing this module fails, so ablated runs genuinely cannot use it.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

if os.environ.get("METLOOP_TOOLS") == "0":
    raise ImportError("the analysis toolkit is disabled for this run")

from metloop.data.netcdf import read_field
from metloop.diag import catalog_json  # noqa: F401  (re-exported)
from metloop.diag.ops import (  # noqa: F401  (the catalog surface)
    anomaly,
    coriolis_parameter,
    ivt,
    potential_temperature,
    potential_vorticity,
    relative_vorticity,
    vorticity_advection,
)


def _data_dir() -> Path:
    return Path(os.environ.get("METLOOP_DATA_DIR", "data"))


def list_fields() -> dict:
    """The fetch manifest: variables, dims, units, and level sets."""
    manifest = _data_dir() / "manifest.json"
    if not manifest.is_file():
        raise FileNotFoundError("no data manifest; run a fetch action first")
    return json.loads(manifest.read_text(encoding="utf-8"))


def load_field(name: str, level=None):
    """Load a fetched variable; optionally select one pressure level (hPa)."""
    field = read_field(_data_dir() / f"{name}.nc")
    if level is not None:
        field = field.sel_level(float(level))
    return field


def load_climatology(name: str):
    """Load the packaged climatology for a variable fetched with one."""
    return read_field(_data_dir() / f"clim_{name}.nc")
