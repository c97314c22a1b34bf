"""Prompt assembly and response grammar for the reasoning loop.

Every request carries a stable sentinel header; responses follow a fenced
grammar parsed by exactly one regex each. Keeping the wire format in one
module means replay hashes shift only when rendered content truly changes.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass

from metloop.trajectory import Action

FEEDBACK_HEADER = "FEEDBACK FROM PREVIOUS ATTEMPT"
FEEDBACK_CHAR_LIMIT = 2000

_ACTION_FENCE = re.compile(r"```(python|tool|report)\s*\n(.*?)```", re.DOTALL)


class ActionParseError(RuntimeError):
    """The model response does not follow the THOUGHT/ACTION grammar."""


def event_line(event) -> str:
    return (
        f"Event: {event.event_type.value} '{event.id}' over "
        f"{event.location_name}, {event.start_date} to {event.end_date} "
        f"(bbox {event.bbox}, timezone {event.timezone})."
    )


def step_prompt(event, subtask, memory_text: str, catalog_text: str,
                manifest_summary: str, feedback: list) -> str:
    lines = [
        "== STEP REQUEST ==",
        event_line(event),
        f"Active subtask: {subtask.subtask_id} [{subtask.stage}] "
        f"goal: {subtask.goal}",
        f"Success criterion: {subtask.success_criterion}",
    ]
    if memory_text:
        lines += ["", memory_text]
    if catalog_text:
        lines += ["", "Analysis toolkit available in the sandbox:",
                  catalog_text]
    else:
        lines += ["", "No analysis toolkit is available; use plain numpy/"
                      "matplotlib and read NetCDF files directly."]
    if manifest_summary:
        lines += ["", "Fetched data:", manifest_summary]
    if feedback:
        lines += ["", FEEDBACK_HEADER + ":"]
        lines += [f"- {f[:FEEDBACK_CHAR_LIMIT]}" for f in feedback]
    lines += [
        "",
        "Respond as:",
        "THOUGHT: <your reasoning>",
        "ACTION:",
        "```python|tool|report",
        "<python code, one tool call, or the final report text>",
        "```",
        "Tool calls: fetch(variables=[...], levels=[...], climatology=[...]).",
        "Figures must be written under artifacts/.",
    ]
    return "\n".join(lines)


@dataclass
class ParsedResponse:
    thought: str
    action: Action
    report_text: str = ""
    intent: str = ""


def _parse_tool_call(body: str):
    try:
        expr = ast.parse(body.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ActionParseError(f"tool call is not parseable: {exc.msg}")
    if not isinstance(expr, ast.Call) or not isinstance(expr.func, ast.Name):
        raise ActionParseError("tool block must contain a single name(...) call")
    if expr.args:
        raise ActionParseError("tool calls take named arguments only")
    args = {}
    for kw in expr.keywords:
        if kw.arg is None:
            raise ActionParseError("tool calls cannot use **kwargs")
        try:
            args[kw.arg] = ast.literal_eval(kw.value)
        except ValueError:
            raise ActionParseError(
                f"tool argument {kw.arg} must be a literal")
    return expr.func.id, args


def parse_step_response(text: str) -> ParsedResponse:
    """Extract THOUGHT and the fenced ACTION block from a model response."""
    m = _ACTION_FENCE.search(text)
    if not m:
        raise ActionParseError("no fenced python/tool/report action block")
    kind, body = m.group(1), m.group(2)
    head = text[: m.start()]
    thought = ""
    tm = re.search(r"THOUGHT:\s*(.*?)(?:\nACTION:|\Z)", head, re.DOTALL)
    if tm:
        thought = tm.group(1).strip()
    if kind == "python":
        if not body.strip():
            raise ActionParseError("empty code block")
        return ParsedResponse(thought, Action("code", code=body),
                              intent=thought)
    if kind == "tool":
        tool, args = _parse_tool_call(body)
        return ParsedResponse(thought, Action("tool", tool=tool, args=args),
                              intent=thought)
    report = body.strip()
    if not report:
        raise ActionParseError("empty report block")
    return ParsedResponse(
        thought,
        Action("tool", tool="write_report", args={"text": report}),
        report_text=report,
        intent=thought,
    )


def interpretation_prompt(event, subtask, stdout: str, artifacts: list) -> str:
    return "\n".join([
        "== INTERPRETATION REQUEST ==",
        event_line(event),
        f"Subtask {subtask.subtask_id} [{subtask.stage}]: {subtask.goal}",
        f"Execution output:\n{stdout[-2000:] if stdout else '(none)'}",
        "Artifacts: " + (", ".join(artifacts) if artifacts else "(none)"),
        "Interpret the result for the diagnosis: what does it show, and "
        "what physical mechanism does it support? Reply with plain text.",
    ])


def goal_check_prompt(subtask, stdout: str, artifacts: list,
                      interpretation: str) -> str:
    return "\n".join([
        "== GOAL CHECK ==",
        f"Success criterion: {subtask.success_criterion}",
        "Evidence:",
        f"stdout: {stdout[-800:] if stdout else '(none)'}",
        "artifacts: " + (", ".join(artifacts) if artifacts else "(none)"),
        f"interpretation: {interpretation or '(none)'}",
        "Does the evidence satisfy the success criterion? Answer YES or NO.",
    ])


def parse_yes_no(text: str) -> bool:
    return text.strip().upper().startswith("YES")
