"""Trajectories: the ordered (thought, action, observation, interpretation) record.

Persistence is line-delimited: one JSON record per step plus a manifest, with
artifact paths relative to the directory so a run is relocatable. Round trips
are lossless.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from metloop.audit import AuditVerdict
from metloop.planning import Plan

FORMAT_VERSION = 1

TERMINAL_STATUSES = ("completed", "step_limit_exceeded", "aborted")
EXIT_STATUSES = ("success", "exception", "timeout")


class TrajectoryError(ValueError):
    """A trajectory violates its invariants or cannot be (de)serialized."""


@dataclass
class Action:
    kind: str  # "code" (sandbox block) | "tool" (named invocation)
    code: str = ""
    tool: str = ""
    args: dict = field(default_factory=dict)

    def to_dict(self):
        if self.kind == "code":
            return {"kind": "code", "code": self.code}
        return {"kind": "tool", "tool": self.tool, "args": self.args}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "code":
            return cls("code", code=d["code"])
        return cls("tool", tool=d["tool"], args=dict(d["args"]))


@dataclass
class Observation:
    exit_status: str
    stdout: str = ""
    stderr: str = ""
    artifacts: list = field(default_factory=list)

    def to_dict(self):
        return {"exit_status": self.exit_status, "stdout": self.stdout,
                "stderr": self.stderr, "artifacts": list(self.artifacts)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["exit_status"], d["stdout"], d["stderr"],
                   list(d["artifacts"]))


@dataclass
class TrajectoryStep:
    index: int
    thought: str
    action: Action
    observation: Observation
    interpretation: str = ""
    stage_label: str = None
    subtask_id: str = None
    audit_verdicts: list = field(default_factory=list)

    def to_dict(self):
        return {
            "index": self.index,
            "thought": self.thought,
            "action": self.action.to_dict(),
            "observation": self.observation.to_dict(),
            "interpretation": self.interpretation,
            "stage_label": self.stage_label,
            "subtask_id": self.subtask_id,
            "audit_verdicts": [v.to_dict() for v in self.audit_verdicts],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            index=d["index"],
            thought=d["thought"],
            action=Action.from_dict(d["action"]),
            observation=Observation.from_dict(d["observation"]),
            interpretation=d["interpretation"],
            stage_label=d["stage_label"],
            subtask_id=d["subtask_id"],
            audit_verdicts=[AuditVerdict.from_dict(v)
                            for v in d["audit_verdicts"]],
        )


@dataclass
class Trajectory:
    event_id: str
    steps: list
    plan: Plan
    final_report: str = None
    terminal_status: str = "aborted"


def validate_trajectory(traj: Trajectory, max_steps: int, root) -> None:
    """Check every structural invariant; `root` anchors artifact paths."""
    problems = []
    if traj.terminal_status not in TERMINAL_STATUSES:
        problems.append(f"unknown terminal_status {traj.terminal_status!r}")
    if len(traj.steps) > max_steps:
        problems.append(f"{len(traj.steps)} steps exceed max_steps={max_steps}")
    for pos, step in enumerate(traj.steps, start=1):
        if step.index != pos:
            problems.append(
                f"step indices must be consecutive from 1; found {step.index} "
                f"at position {pos}")
        if step.observation.exit_status not in EXIT_STATUSES:
            problems.append(f"step {pos}: bad exit status "
                            f"{step.observation.exit_status!r}")
        for rel in step.observation.artifacts:
            if not (Path(root) / rel).is_file():
                problems.append(f"step {pos}: missing artifact file {rel}")
        if step.interpretation and not (
                step.observation.artifacts or step.observation.stdout):
            problems.append(
                f"step {pos}: interpretation without any artifact or stdout")
    incomplete = not traj.plan.complete()
    at_cap = len(traj.steps) == max_steps
    if (traj.terminal_status == "step_limit_exceeded") != (at_cap and incomplete):
        if traj.terminal_status == "step_limit_exceeded" or (at_cap and incomplete):
            problems.append(
                "terminal_status must be step_limit_exceeded exactly when the "
                "step cap is reached with the plan incomplete")
    if (traj.terminal_status == "completed") != bool(traj.final_report):
        problems.append("final_report must be non-empty iff status is completed")
    if problems:
        raise TrajectoryError("invalid trajectory: " + "; ".join(problems))


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def serialize_trajectory(traj: Trajectory, out_dir, workspace,
                         max_steps: int = None) -> Path:
    """Write manifest + step records + artifact copies; returns the manifest path.

    `workspace` is where the run's artifact files currently live; they are
    copied under out_dir preserving their relative paths.
    """
    if max_steps is None:
        max_steps = max(len(traj.steps), 1)
    validate_trajectory(traj, max_steps, workspace)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for step in traj.steps:
        for rel in step.observation.artifacts:
            src = Path(workspace) / rel
            dst = out_dir / rel
            dst.parent.mkdir(parents=True, exist_ok=True)
            if src.resolve() != dst.resolve():
                shutil.copyfile(src, dst)
    steps_path = out_dir / "steps.jsonl"
    with steps_path.open("w", encoding="utf-8") as fh:
        for step in traj.steps:
            fh.write(_canonical(step.to_dict()) + "\n")
    manifest = {
        "format_version": FORMAT_VERSION,
        "event_id": traj.event_id,
        "terminal_status": traj.terminal_status,
        "final_report": traj.final_report,
        "plan": traj.plan.to_dict(),
        "step_count": len(traj.steps),
        "max_steps": max_steps,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=1)
        + "\n",
        encoding="utf-8",
    )
    return manifest_path


def deserialize_trajectory(traj_dir) -> Trajectory:
    """Load a serialized trajectory, re-checking all invariants."""
    traj_dir = Path(traj_dir)
    manifest_path = traj_dir / "manifest.json"
    steps_path = traj_dir / "steps.jsonl"
    if not manifest_path.is_file() or not steps_path.is_file():
        raise TrajectoryError(f"{traj_dir} is not a trajectory directory "
                              "(manifest.json/steps.jsonl missing)")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        steps = [
            TrajectoryStep.from_dict(json.loads(line))
            for line in steps_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise TrajectoryError(f"corrupt trajectory in {traj_dir}: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise TrajectoryError(
            f"unsupported trajectory format {manifest.get('format_version')!r}")
    if len(steps) != manifest.get("step_count"):
        raise TrajectoryError(
            f"manifest says {manifest.get('step_count')} steps, "
            f"found {len(steps)}")
    traj = Trajectory(
        event_id=manifest["event_id"],
        steps=steps,
        plan=Plan.from_dict(manifest["plan"]),
        final_report=manifest["final_report"],
        terminal_status=manifest["terminal_status"],
    )
    validate_trajectory(traj, manifest.get("max_steps", max(len(steps), 1)),
                        traj_dir)
    return traj
