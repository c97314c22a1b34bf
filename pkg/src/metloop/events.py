"""Event records: schema, validation, and the dataset file format.

An event is a region/time-window pair with one of six types. Dates are
calendar dates in the event's local timezone (analyses follow the natural
day); conversion to UTC happens only when data queries are built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum
from pathlib import Path
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError


class EventType(str, Enum):
    HEATWAVE = "heatwave"
    COLD_WAVE = "cold_wave"
    EXTREME_PRECIPITATION = "extreme_precipitation"
    DROUGHT = "drought"
    TROPICAL_CYCLONE = "tropical_cyclone"
    EXTRATROPICAL_CYCLONE = "extratropical_cyclone"


class EventValidationError(ValueError):
    """One or more fields of an event mapping are invalid.

    `violations` names every offending field, not just the first.
    """

    def __init__(self, event_id, violations):
        self.event_id = event_id
        self.violations = list(violations)
        lines = "; ".join(self.violations)
        super().__init__(f"invalid event '{event_id}': {lines}")


@dataclass(frozen=True)
class EventRecord:
    id: str
    event_type: EventType
    start_date: date
    end_date: date
    location_name: str
    bbox: tuple
    timezone: str
    impact_note: str = ""

    def local_zone(self) -> ZoneInfo:
        return ZoneInfo(self.timezone)

    def utc_range(self):
        """UTC instants spanning the event's local natural days (inclusive)."""
        tz = self.local_zone()
        start = datetime.combine(self.start_date, time.min, tzinfo=tz)
        end = datetime.combine(self.end_date + timedelta(days=1), time.min,
                               tzinfo=tz) - timedelta(seconds=1)
        return start.astimezone(timezone.utc), end.astimezone(timezone.utc)


def _parse_date(raw, field, violations):
    if isinstance(raw, date) and not isinstance(raw, datetime):
        return raw
    try:
        return date.fromisoformat(str(raw))
    except (TypeError, ValueError):
        violations.append(f"{field}: not a calendar date: {raw!r}")
        return None


def canonical_longitude(lon: float) -> float:
    """Map [0, 360) style longitudes onto the canonical [-180, 180)."""
    return lon - 360.0 if lon >= 180.0 else lon


def validate_event(record) -> EventRecord:
    """Validate a raw mapping into an EventRecord.

    Collects every violated field into one EventValidationError. Longitudes
    given in [0, 360) are canonicalized to [-180, 180); dateline-crossing
    boxes are rejected as malformed.
    """
    violations = []
    event_id = str(record.get("id", "")) or "<missing id>"
    if not record.get("id"):
        violations.append("id: must be a non-empty string")

    raw_type = record.get("event_type")
    event_type = None
    try:
        event_type = EventType(raw_type)
    except ValueError:
        allowed = ", ".join(t.value for t in EventType)
        violations.append(f"event_type: unknown type {raw_type!r} (one of: {allowed})")

    start = _parse_date(record.get("start_date"), "start_date", violations)
    end = _parse_date(record.get("end_date"), "end_date", violations)
    if start and end and start > end:
        violations.append(f"start_date: {start} is after end_date {end}")

    location = str(record.get("location_name", "")).strip()
    if not location:
        violations.append("location_name: must be non-empty")

    bbox = record.get("bbox")
    bbox_out = None
    if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
        violations.append("bbox: must be (lat_min, lat_max, lon_min, lon_max)")
    else:
        try:
            lat_min, lat_max, lon_min, lon_max = (float(x) for x in bbox)
        except (TypeError, ValueError):
            violations.append("bbox: entries must be numeric")
        else:
            if not (-90.0 <= lat_min <= 90.0 and -90.0 <= lat_max <= 90.0):
                violations.append("bbox: latitudes must lie in [-90, 90]")
            if not lat_min < lat_max:
                violations.append("bbox: lat_min must be < lat_max")
            lon_min = canonical_longitude(lon_min)
            lon_max = canonical_longitude(lon_max)
            if not (-180.0 <= lon_min < 180.0 and -180.0 <= lon_max < 180.0):
                violations.append("bbox: longitudes must lie in [-180, 360)")
            elif not lon_min < lon_max:
                violations.append(
                    "bbox: lon_min must be < lon_max after canonicalization "
                    "(dateline-crossing boxes are not supported)"
                )
            bbox_out = (lat_min, lat_max, lon_min, lon_max)

    tz_name = str(record.get("timezone", ""))
    try:
        ZoneInfo(tz_name)
    except (ZoneInfoNotFoundError, ValueError):
        violations.append(f"timezone: unknown IANA identifier {tz_name!r}")

    if violations:
        raise EventValidationError(event_id, violations)
    return EventRecord(
        id=event_id,
        event_type=event_type,
        start_date=start,
        end_date=end,
        location_name=location,
        bbox=bbox_out,
        timezone=tz_name,
        impact_note=str(record.get("impact_note", "") or ""),
    )


def event_to_mapping(event: EventRecord) -> dict:
    return {
        "id": event.id,
        "event_type": event.event_type.value,
        "start_date": event.start_date.isoformat(),
        "end_date": event.end_date.isoformat(),
        "location_name": event.location_name,
        "bbox": list(event.bbox),
        "timezone": event.timezone,
        "impact_note": event.impact_note,
    }


def load_event_dataset(path) -> list:
    """Load and validate a dataset file (a JSON list of event mappings).

    The whole file is validated before anything is returned; the raised
    error lists every violation across every event.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise EventValidationError(str(path), [f"file: {exc}"]) from exc
    if not isinstance(raw, list) or not raw:
        raise EventValidationError(str(path), ["file: expected a non-empty list"])
    events, all_violations = [], []
    for i, mapping in enumerate(raw):
        try:
            events.append(validate_event(mapping))
        except EventValidationError as exc:
            all_violations.extend(
                f"[{i}] {exc.event_id}: {v}" for v in exc.violations
            )
    if all_violations:
        raise EventValidationError(str(path), all_violations)
    ids = [e.id for e in events]
    if len(set(ids)) != len(ids):
        raise EventValidationError(str(path), ["file: duplicate event ids"])
    return events
