"""The closed-loop reasoning engine.

Executes the plan step by step: each iteration produces one trajectory step
through thought -> action -> observation -> interpretation, verified by the
checker (sandbox status + audit verdicts + a goal test against the subtask's
success criterion). Execution or audit failures trigger self-debug — the
evidence is injected verbatim (bounded) into the next thought — and after
three consecutive failures a subtask is marked failed and the plan moves on.
A goal test that merely answers "no" keeps the subtask active without
counting as a failure, so an unsatisfiable goal runs into the step cap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from metloop.audit import audit_code, audit_content, make_verdict, static_code_checks
from metloop.config import RunConfig
from metloop.data.acquisition import climatology, event_day_indices, fetch
from metloop.data.fields import DataQuery
from metloop.data.netcdf import write_field
from metloop.data.sources import SyntheticSource
from metloop.diag.catalog import CATALOG, catalog_summary
from metloop.events import EventRecord
from metloop.gateway import (
    BackendConfig,
    GatewayError,
    GatewayLog,
    backends,
    complete,
    text_message,
)
from metloop.memory import MemoryStore, distill, ensure_budget, prune
from metloop.planning import GuidelineError, PlanParseError, load_guideline, make_plan
from metloop.prompts import (
    ActionParseError,
    FEEDBACK_CHAR_LIMIT,
    goal_check_prompt,
    interpretation_prompt,
    parse_step_response,
    parse_yes_no,
    step_prompt,
)
from metloop.sandbox import execute, prepare_workspace
from metloop.trajectory import (
    Action,
    Observation,
    Trajectory,
    TrajectoryStep,
    validate_trajectory,
)

MAX_RETRIES = 3  # consecutive execution/audit failures before a subtask fails

FIGURE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass
class StepOutcome:
    step: TrajectoryStep
    checker_result: str  # advance | retry | abort
    retry_reason: str = None
    counts_as_failure: bool = True


@dataclass
class _RunState:
    event: EventRecord
    cfg: RunConfig
    workspace: Path
    gateway_fn: object
    source: object
    memory: MemoryStore
    plan: object = None
    steps: list = field(default_factory=list)
    feedback: list = field(default_factory=list)
    report_text: str = None
    manifest: dict = field(default_factory=dict)

    def catalog_text(self) -> str:
        return catalog_summary() if self.cfg.enable_tools else ""

    def manifest_summary(self) -> str:
        if not self.manifest:
            return ""
        parts = []
        for name, info in sorted(self.manifest.get("variables", {}).items()):
            levels = info.get("levels") or []
            lev = f" levels={levels}" if levels else ""
            parts.append(f"{name} [{info['units']}] dims={info['dims']}{lev}")
        clims = self.manifest.get("climatologies", [])
        if clims:
            parts.append(f"climatologies: {', '.join(clims)}")
        return "\n".join(parts)


def _run_fetch_tool(state: _RunState, args: dict) -> Observation:
    """Execute the data-acquisition tool in-process."""
    variables = list(args.get("variables") or [])
    levels = args.get("levels")
    clim_vars = list(args.get("climatology") or [])
    unknown = set(args) - {"variables", "levels", "climatology"}
    if unknown:
        return Observation("exception",
                           stderr=f"fetch: unknown argument(s) {sorted(unknown)}")
    start, end = state.event.utc_range()
    try:
        query = DataQuery(variables, (start, end), state.event.bbox,
                          levels=levels)
        result = fetch(query, state.source, state.workspace / "data")
        manifest = json.loads(result.manifest_path.read_text(encoding="utf-8"))
        days = event_day_indices(state.event.start_date, state.event.end_date)
        for var in clim_vars:
            clim = climatology(var, state.event.bbox, days, state.source)
            write_field(clim, state.workspace / "data" / f"clim_{var}.nc")
        if clim_vars:
            manifest["climatologies"] = sorted(clim_vars)
            result.manifest_path.write_text(
                json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                encoding="utf-8")
        state.manifest = manifest
    except Exception as exc:  # noqa: BLE001 - tool failures become observations
        return Observation("exception", stderr=f"fetch failed: {exc}")
    lines = []
    for name, info in sorted(manifest["variables"].items()):
        lines.append(
            f"fetched {name} [{info['units']}] shape={info['shape']} "
            f"dims={info['dims']}" + (
                f" levels={info['levels']}" if info["levels"] else ""))
    for var in sorted(clim_vars):
        lines.append(f"packaged 30-year climatology for {var}")
    return Observation("success", stdout="\n".join(lines) + "\n")


def _run_tool(state: _RunState, action: Action) -> Observation:
    if action.tool == "fetch":
        return _run_fetch_tool(state, action.args)
    if action.tool == "write_report":
        text = str(action.args.get("text", "")).strip()
        if not text:
            return Observation("exception", stderr="write_report: empty text")
        rel = "artifacts/report.md"
        path = state.workspace / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
        state.report_text = text
        return Observation("success", artifacts=[rel])
    return Observation("exception",
                       stderr=f"unknown tool '{action.tool}' "
                              "(available: fetch, write_report)")


def _verdict_text(verdicts) -> str:
    lines = []
    for v in verdicts:
        for f in v.findings:
            if f.severity == "blocker":
                lines.append(f"{v.auditor} audit blocker: {f.description}"
                             + (f" ({f.locus})" if f.locus else ""))
    return "\n".join(lines)


def step(state: _RunState, subtask) -> StepOutcome:
    """One thought -> action -> observation -> interpretation iteration."""
    cfg = state.cfg
    ensure_budget(state.memory, state.gateway_fn)
    prompt = step_prompt(state.event, subtask, state.memory.render(),
                         state.catalog_text(), state.manifest_summary(),
                         state.feedback)
    state.feedback = []
    index = len(state.steps) + 1
    try:
        response = state.gateway_fn([text_message("user", prompt)])
    except GatewayError as exc:
        obs = Observation("exception", stderr=f"gateway failure: {exc}")
        placeholder = TrajectoryStep(index, "", Action("code", code=""), obs,
                                     subtask_id=subtask.subtask_id)
        return StepOutcome(placeholder, "abort", str(exc))

    try:
        parsed = parse_step_response(response)
    except ActionParseError as exc:
        obs = Observation("exception",
                          stderr=f"unparseable action: {exc}")
        state.feedback.append(f"your response was not parseable: {exc}; "
                              "follow the THOUGHT/ACTION grammar exactly")
        bad = TrajectoryStep(index, response[:500], Action("code", code=""),
                             obs, subtask_id=subtask.subtask_id)
        return StepOutcome(bad, "retry", str(exc))

    verdicts = []
    catalog = CATALOG if cfg.enable_tools else {}

    if parsed.action.kind == "code":
        if cfg.enable_auditor:
            pre_findings = static_code_checks(parsed.action.code, catalog,
                                              state.manifest)
            if any(f.severity == "blocker" for f in pre_findings):
                verdict = make_verdict("code", pre_findings)
                verdicts.append(verdict)
                obs = Observation(
                    "exception",
                    stderr="action blocked before execution:\n"
                           + _verdict_text([verdict]))
                step_rec = TrajectoryStep(index, parsed.thought, parsed.action,
                                          obs, subtask_id=subtask.subtask_id,
                                          audit_verdicts=verdicts)
                state.feedback.append(_verdict_text([verdict])
                                      [:FEEDBACK_CHAR_LIMIT])
                return StepOutcome(step_rec, "retry", "static audit blocker")
        result = execute(parsed.action.code, state.workspace,
                         wall_time_s=cfg.sandbox_wall_time_s,
                         memory_mb=cfg.sandbox_memory_mb,
                         tools_enabled=cfg.enable_tools)
        obs = Observation(result.exit_status, result.stdout, result.stderr,
                          result.artifacts)
    else:
        obs = _run_tool(state, parsed.action)

    if obs.exit_status != "success":
        state.feedback.append(
            (obs.stderr or obs.stdout or "action failed")[-FEEDBACK_CHAR_LIMIT:])
        step_rec = TrajectoryStep(index, parsed.thought, parsed.action, obs,
                                  subtask_id=subtask.subtask_id,
                                  audit_verdicts=verdicts)
        return StepOutcome(step_rec, "retry", "execution failure")

    if cfg.enable_auditor and parsed.action.kind == "code":
        verdicts.append(audit_code(parsed.action.code, catalog,
                                   state.manifest, state.gateway_fn))
        for rel in obs.artifacts:
            if rel.lower().endswith(FIGURE_SUFFIXES):
                verdicts.append(audit_content(state.workspace / rel,
                                              parsed.intent,
                                              state.gateway_fn))
    failed = [v for v in verdicts if not v.passed]
    if failed:
        state.feedback.append(_verdict_text(failed)[:FEEDBACK_CHAR_LIMIT])
        step_rec = TrajectoryStep(index, parsed.thought, parsed.action, obs,
                                  subtask_id=subtask.subtask_id,
                                  audit_verdicts=verdicts)
        return StepOutcome(step_rec, "retry", "audit blocker")

    interpretation = ""
    if obs.artifacts or obs.stdout:
        wants_interpretation = (
            any(rel.lower().endswith(FIGURE_SUFFIXES) for rel in obs.artifacts)
            or subtask.stage in ("event_identification", "synoptic_analysis",
                                 "mesoscale_analysis", "thermodynamic_analysis")
        )
        if wants_interpretation and parsed.action.tool != "write_report":
            figures = [state.workspace / rel for rel in obs.artifacts
                       if rel.lower().endswith(FIGURE_SUFFIXES)][:2]
            try:
                interpretation = state.gateway_fn([
                    text_message("user",
                                 interpretation_prompt(state.event, subtask,
                                                       obs.stdout,
                                                       obs.artifacts),
                                 images=figures)
                ]).strip()
            except GatewayError as exc:
                return StepOutcome(
                    TrajectoryStep(index, parsed.thought, parsed.action, obs,
                                   subtask_id=subtask.subtask_id,
                                   audit_verdicts=verdicts),
                    "abort", f"gateway failure during interpretation: {exc}")

    step_rec = TrajectoryStep(index, parsed.thought, parsed.action, obs,
                              interpretation=interpretation,
                              subtask_id=subtask.subtask_id,
                              audit_verdicts=verdicts)
    state.memory.transient_steps.append(
        f"step {index}: {parsed.action.kind} action, exit={obs.exit_status}, "
        f"stdout={obs.stdout[:200]!r}, artifacts={obs.artifacts}")

    try:
        answer = state.gateway_fn([text_message(
            "user", goal_check_prompt(subtask, obs.stdout, obs.artifacts,
                                      interpretation))])
    except GatewayError as exc:
        return StepOutcome(step_rec, "abort",
                           f"gateway failure during goal check: {exc}")
    if parse_yes_no(answer):
        return StepOutcome(step_rec, "advance")
    state.feedback.append(
        f"the success criterion was not met yet: {subtask.success_criterion}")
    return StepOutcome(step_rec, "retry", "goal not met",
                       counts_as_failure=False)


def self_debug(state: _RunState, failed_step: TrajectoryStep, subtask) -> StepOutcome:
    """Retry with the failure evidence already queued as feedback.

    The evidence (stderr, auditor findings, or the missed criterion) was
    appended to state.feedback by the failing step; the next thought phase
    sees it verbatim and proposes a revised action.
    """
    assert state.feedback, "self_debug requires queued failure evidence"
    return step(state, subtask)


def run(event: EventRecord, cfg: RunConfig, *, registry=backends,
        source=None, guideline_dir=None) -> Trajectory:
    """Run the full closed loop for one event; never raises for run failures.

    Returns a Trajectory whose terminal_status distinguishes completion,
    the step cap, and aborts (plan failure, unrecoverable gateway errors,
    or a failed final-report subtask).
    """
    run_dir = Path(cfg.workspace_root)
    workspace = prepare_workspace(run_dir / "workspace")
    log = GatewayLog(run_dir / "gateway.jsonl")
    backend_cfg = BackendConfig(name=cfg.backend_name,
                                temperature=cfg.temperature)

    def gateway_fn(messages):
        return complete(messages, backend_cfg, registry, log)

    if source is None:
        source = SyntheticSource(seed=cfg.seed, resolution=1.0)

    kwargs = {} if guideline_dir is None else {"assets_dir": guideline_dir}
    try:
        guideline = load_guideline(event.event_type, **kwargs)
    except GuidelineError:
        return Trajectory(event.id, [], _empty_plan(event), None, "aborted")
    try:
        plan = make_plan(event, guideline, gateway_fn, cfg)
    except (PlanParseError, GatewayError):
        return Trajectory(event.id, [], _empty_plan(event), None, "aborted")

    memory = MemoryStore(
        guideline_text=guideline.render() if cfg.enable_cot else "",
        token_budget=cfg.memory_token_budget,
    )
    state = _RunState(event=event, cfg=cfg, workspace=workspace,
                      gateway_fn=gateway_fn, source=source, memory=memory,
                      plan=plan)

    aborted = False
    consecutive_failures = 0
    subtask = plan.activate_next()
    while subtask is not None and len(state.steps) < cfg.max_steps:
        outcome = (
            self_debug(state, state.steps[-1], subtask)
            if state.feedback and consecutive_failures
            else step(state, subtask)
        )
        state.steps.append(outcome.step)
        if outcome.checker_result == "abort":
            aborted = True
            break
        if outcome.checker_result == "advance":
            subtask.status = "done"
            own_steps = [s for s in state.steps
                         if s.subtask_id == subtask.subtask_id]
            try:
                distill(memory, subtask, own_steps, gateway_fn)
            except GatewayError:
                pass
            prune(memory)
            state.feedback = []
            consecutive_failures = 0
            subtask = plan.activate_next()
            continue
        if outcome.counts_as_failure:
            consecutive_failures += 1
        if consecutive_failures >= MAX_RETRIES:
            subtask.status = "failed"
            memory.summaries.append(
                f"[{subtask.stage}] subtask failed after {MAX_RETRIES} "
                f"attempts; proceeding with a noted gap")
            prune(memory)
            state.feedback = []
            consecutive_failures = 0
            if subtask.stage == "final_report":
                aborted = True
                break
            subtask = plan.activate_next()

    if aborted:
        terminal = "aborted"
        report = None
    elif plan.complete():
        terminal = "completed"
        report = state.report_text or _synthesize_report(event, memory)
        if not state.report_text:
            (workspace / "artifacts").mkdir(exist_ok=True)
            (workspace / "artifacts" / "report.md").write_text(
                report + "\n", encoding="utf-8")
    else:
        terminal = "step_limit_exceeded"
        report = None

    traj = Trajectory(event.id, state.steps, plan, report, terminal)
    validate_trajectory(traj, cfg.max_steps, workspace)
    return traj


def _empty_plan(event):
    from metloop.planning import Plan

    return Plan(event.id, [])


def _synthesize_report(event, memory: MemoryStore) -> str:
    lines = [f"Diagnostic report for {event.event_type.value} "
             f"'{event.id}' ({event.location_name}).", ""]
    lines += [f"- {s}" for s in memory.summaries] or ["- no findings recorded"]
    return "\n".join(lines)
