"""Knowledge-enhanced planning from per-event-type expert guidelines.

Guidelines are editable YAML assets (one per event type) whose stages each
cite at least one physical principle. Planning prompts the model — with the
guideline injected when chain-of-thought guidance is enabled — for a fenced,
line-structured subtask list, and parses exactly that grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from metloop.bench.taxonomy import STAGES
from metloop.events import EventRecord, EventType
from metloop.gateway import text_message

GUIDELINE_DIR = Path(__file__).parent / "assets" / "guidelines"


class GuidelineError(ValueError):
    """A guideline asset is missing or violates its invariants."""


class PlanParseError(RuntimeError):
    """The model failed to produce a parseable plan after a reprompt."""


@dataclass
class GuidelineStage:
    stage: str
    objective: str
    principles: list
    diagnostics: list = field(default_factory=list)


@dataclass
class Guideline:
    event_type: EventType
    stages: list

    def stage_labels(self):
        return [s.stage for s in self.stages]

    def render(self) -> str:
        lines = [f"Expert guideline for {self.event_type.value} analysis:"]
        for i, s in enumerate(self.stages, 1):
            lines.append(f"{i}. [{s.stage}] {s.objective}")
            lines.append("   principles: " + "; ".join(s.principles))
            if s.diagnostics:
                lines.append("   suggested diagnostics: " + ", ".join(s.diagnostics))
        return "\n".join(lines)


def load_guideline(event_type, assets_dir=GUIDELINE_DIR) -> Guideline:
    """Load and invariant-check the guideline asset for an event type."""
    event_type = EventType(event_type)
    path = Path(assets_dir) / f"{event_type.value}.yaml"
    if not path.is_file():
        raise GuidelineError(f"no guideline asset for '{event_type.value}' "
                             f"at {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    problems = []
    if raw.get("event_type") != event_type.value:
        problems.append("event_type does not match the file name")
    stages = []
    for i, s in enumerate(raw.get("stages") or []):
        label = s.get("stage", "")
        if label not in STAGES:
            problems.append(f"stage[{i}]: unknown label '{label}'")
        if not s.get("objective"):
            problems.append(f"stage[{i}]: objective missing")
        principles = s.get("principles") or []
        if not principles:
            problems.append(f"stage[{i}] ({label}): cites no physical principle")
        stages.append(GuidelineStage(label, s.get("objective", ""),
                                     list(principles),
                                     list(s.get("diagnostics") or [])))
    if not stages:
        problems.append("guideline has no stages")
    if problems:
        raise GuidelineError(f"invalid guideline {path.name}: " +
                             "; ".join(problems))
    return Guideline(event_type, stages)


@dataclass
class Subtask:
    subtask_id: str
    stage: str
    goal: str
    success_criterion: str
    status: str = "pending"  # pending | active | done | failed

    def to_dict(self):
        return {
            "subtask_id": self.subtask_id,
            "stage": self.stage,
            "goal": self.goal,
            "success_criterion": self.success_criterion,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["subtask_id"], d["stage"], d["goal"],
                   d["success_criterion"], d["status"])


@dataclass
class Plan:
    event_id: str
    subtasks: list

    def active(self):
        live = [s for s in self.subtasks if s.status == "active"]
        return live[0] if live else None

    def activate_next(self):
        """Promote the first pending subtask; returns it or None when done."""
        assert self.active() is None
        for s in self.subtasks:
            if s.status == "pending":
                s.status = "active"
                return s
        return None

    def complete(self) -> bool:
        return all(s.status in ("done", "failed") for s in self.subtasks)

    def stage_for(self, subtask_id: str):
        for s in self.subtasks:
            if s.subtask_id == subtask_id:
                return s.stage
        return None

    def to_dict(self):
        return {"event_id": self.event_id,
                "subtasks": [s.to_dict() for s in self.subtasks]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["event_id"], [Subtask.from_dict(s) for s in d["subtasks"]])


_PLAN_LINE = re.compile(r"^\s*(\S+)\s*\|\s*(\S+)\s*\|\s*(.+?)\s*\|\s*(.+?)\s*$")
_FENCE = re.compile(r"```plan\s*\n(.*?)```", re.DOTALL)


def plan_prompt(event: EventRecord, guideline, with_guideline: bool) -> str:
    head = (
        "== PLAN REQUEST ==\n"
        f"Event: {event.event_type.value} '{event.id}' over "
        f"{event.location_name}, {event.start_date} to {event.end_date} "
        f"(bbox {event.bbox}, timezone {event.timezone}).\n"
    )
    if with_guideline:
        head += guideline.render() + "\n"
        head += (
            "Decompose the diagnostic analysis into one subtask per guideline "
            "stage, in order.\n"
        )
    else:
        head += "Decompose the diagnostic analysis into ordered subtasks.\n"
    head += (
        "Respond with a fenced block of exactly this line grammar:\n"
        "```plan\n"
        "<subtask_id> | <stage_label> | <goal> | <success criterion (one sentence)>\n"
        "```\n"
        f"stage_label must be one of: {', '.join(STAGES)}."
    )
    return head


def parse_plan(text: str, event_id: str) -> Plan:
    m = _FENCE.search(text)
    if not m:
        raise PlanParseError("no ```plan fenced block in the response")
    subtasks = []
    for line in m.group(1).strip().splitlines():
        if not line.strip():
            continue
        lm = _PLAN_LINE.match(line)
        if not lm:
            raise PlanParseError(f"unparseable plan line: {line!r}")
        sid, stage, goal, criterion = lm.groups()
        if stage not in STAGES:
            raise PlanParseError(f"unknown stage label '{stage}' in plan")
        subtasks.append(Subtask(sid, stage, goal, criterion))
    if not subtasks:
        raise PlanParseError("plan block contains no subtasks")
    ids = [s.subtask_id for s in subtasks]
    if len(set(ids)) != len(ids):
        raise PlanParseError("duplicate subtask ids in plan")
    return Plan(event_id, subtasks)


def make_plan(event: EventRecord, guideline, gateway_fn, cfg) -> Plan:
    """Produce a plan covering the guideline stages (when CoT is enabled).

    One reprompt is allowed on a parse failure; a second failure raises
    PlanParseError and the run aborts.
    """
    prompt = plan_prompt(event, guideline, cfg.enable_cot)
    attempts = 0
    last_error = None
    while attempts < 2:
        suffix = ""
        if attempts:
            suffix = (
                "\nYour previous response was not parseable "
                f"({last_error}). Reply with only the fenced plan block."
            )
        response = gateway_fn([text_message("user", prompt + suffix)])
        attempts += 1
        try:
            plan = parse_plan(response, event.id)
        except PlanParseError as exc:
            last_error = exc
            continue
        if cfg.enable_cot:
            have = [s.stage for s in plan.subtasks]
            missing = [s for s in guideline.stage_labels() if s not in have]
            if missing:
                last_error = PlanParseError(
                    f"plan does not cover guideline stages {missing}"
                )
                continue
        return plan
    raise PlanParseError(f"unparseable plan after reprompt: {last_error}")
