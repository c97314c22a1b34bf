"""Machine-readable catalog of the toolkit functions exposed to the sandbox.

The code auditor validates generated code against this catalog (function
names, parameter names, required arguments), so entries must track the real
signatures in metloop.toolkit exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class ToolParam:
    name: str
    required: bool = True


@dataclass(frozen=True)
class ToolSpec:
    name: str
    params: tuple
    result_units: str
    summary: str


_SPECS = (
    ToolSpec("list_fields", (), "",
             "names, dims, units, and level sets of the fetched variables"),
    ToolSpec("load_field", (ToolParam("name"), ToolParam("level", False)),
             "per catalog", "load a fetched variable as a gridded field; "
             "level (hPa) must be listed in the data manifest"),
    ToolSpec("load_climatology", (ToolParam("name"),), "per catalog",
             "load the packaged per-calendar-day climatology of a variable"),
    ToolSpec("coriolis_parameter", (ToolParam("lat"),), "s-1",
             "planetary vorticity 2*Omega*sin(lat) for latitude in degrees"),
    ToolSpec("potential_temperature",
             (ToolParam("t"), ToolParam("p", False)), "K",
             "T*(1000/p)**kappa; p from the level coordinate when t is a field"),
    ToolSpec("relative_vorticity", (ToolParam("u"), ToolParam("v")), "s-1",
             "vertical curl of the horizontal wind on the sphere"),
    ToolSpec("vorticity_advection",
             (ToolParam("u"), ToolParam("v"), ToolParam("eta")), "s-2",
             "-(u*d(eta)/dx + v*d(eta)/dy) for a vorticity-like scalar"),
    ToolSpec("ivt", (ToolParam("q"), ToolParam("u"), ToolParam("v")),
             "kg m-1 s-1",
             "column-integrated vapor transport (zonal, meridional, magnitude)"),
    ToolSpec("potential_vorticity",
             (ToolParam("u"), ToolParam("v"), ToolParam("t"),
              ToolParam("three_term", False)), "K m2 kg-1 s-1",
             "isobaric Ertel potential vorticity"),
    ToolSpec("anomaly", (ToolParam("field"), ToolParam("clim")), "as input",
             "departure from climatology matched by calendar day"),
)

CATALOG = {spec.name: spec for spec in _SPECS}


def catalog_json() -> str:
    """Canonical JSON rendering (stable across runs)."""
    payload = {
        name: {
            "params": [
                {"name": p.name, "required": p.required} for p in spec.params
            ],
            "result_units": spec.result_units,
            "summary": spec.summary,
        }
        for name, spec in CATALOG.items()
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def catalog_summary() -> str:
    """One line per tool, for inclusion in prompts."""
    lines = []
    for spec in _SPECS:
        args = ", ".join(
            p.name if p.required else f"{p.name}=?" for p in spec.params
        )
        lines.append(f"- toolkit.{spec.name}({args}): {spec.summary}")
    return "\n".join(lines)
