"""Unit validation for diagnostic operations.

Spelling variants of the same unit are normalized; genuinely different units
are rejected — there is no silent coercion anywhere in the toolkit.
"""

from __future__ import annotations


class UnitError(ValueError):
    """A field carries units incompatible with the requested operation."""


_ALIASES = {
    "m/s": "m s-1",
    "m s**-1": "m s-1",
    "meters per second": "m s-1",
    "kg/kg": "kg kg-1",
    "kg kg**-1": "kg kg-1",
    "1": "kg kg-1",  # ERA5 ships specific humidity as dimensionless "1"
    "kelvin": "K",
    "k": "K",
    "degrees_north": "degrees",
    "degrees_east": "degrees",
    "pa": "Pa",
    "hpa": "hPa",
    "millibar": "hPa",
    "mb": "hPa",
    "m**2 s**-2": "m2 s-2",
    "m2/s2": "m2 s-2",
}


def canonical(units: str) -> str:
    """Return the canonical spelling of a unit string."""
    u = units.strip()
    return _ALIASES.get(u.lower(), _ALIASES.get(u, u))


def require(units: str, expected: str, what: str) -> None:
    """Raise UnitError unless `units` canonicalizes to `expected`."""
    if canonical(units) != expected:
        raise UnitError(
            f"{what}: expected units '{expected}', got '{units}'"
        )
