"""Dual auditors: procedural code review and perceptual figure review.

The code auditor combines deterministic static checks (toolkit names,
argument arity/keywords against the tool catalog, data references against
the fetch manifest) with a model review pass for logic flaws. The content
auditor critiques figures through a multimodal call primed with a fixed
rubric. A verdict passes iff it carries no blocker-severity finding.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from pathlib import Path

from metloop.gateway import GatewayError, text_message

RUBRIC_PATH = Path(__file__).parent / "assets" / "rubrics" / "figure_critique.txt"


@dataclass
class Finding:
    severity: str  # blocker | warning
    description: str
    locus: str = ""

    def to_dict(self):
        return {"severity": self.severity, "description": self.description,
                "locus": self.locus}

    @classmethod
    def from_dict(cls, d):
        return cls(d["severity"], d["description"], d.get("locus", ""))


@dataclass
class AuditVerdict:
    auditor: str  # code | content
    passed: bool
    findings: list = field(default_factory=list)
    degraded: bool = False

    def to_dict(self):
        return {
            "auditor": self.auditor,
            "passed": self.passed,
            "findings": [f.to_dict() for f in self.findings],
            "degraded": self.degraded,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["auditor"], d["passed"],
                   [Finding.from_dict(f) for f in d["findings"]],
                   d.get("degraded", False))


def make_verdict(auditor: str, findings, degraded: bool = False) -> AuditVerdict:
    findings = list(findings)
    passed = not any(f.severity == "blocker" for f in findings)
    return AuditVerdict(auditor, passed, findings, degraded)


def _toolkit_aliases(tree: ast.AST) -> set:
    """Names the executed code binds to the analysis toolkit module."""
    aliases = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom) and node.module == "metloop":
            for a in node.names:
                if a.name == "toolkit":
                    aliases.add(a.asname or a.name)
        elif isinstance(node, ast.Import):
            for a in node.names:
                if a.name == "metloop.toolkit":
                    aliases.add(a.asname or "metloop.toolkit")
    return aliases


def _call_name(node: ast.Call, aliases: set):
    func = node.func
    if isinstance(func, ast.Attribute) and isinstance(func.value, ast.Name):
        if func.value.id in aliases:
            return func.attr
    if isinstance(func, ast.Attribute) and isinstance(func.value, ast.Attribute):
        # metloop.toolkit.f(...) spelled out in full
        value = func.value
        if (isinstance(value.value, ast.Name) and value.value.id == "metloop"
                and value.attr == "toolkit"):
            return func.attr
    return None


def _manifest_levels(manifest: dict, var: str):
    info = (manifest or {}).get("variables", {}).get(var)
    return None if info is None else info.get("levels", [])


def static_code_checks(code: str, catalog: dict, manifest: dict) -> list:
    """Deterministic pre-execution checks; pure function of its inputs."""
    findings = []
    try:
        tree = ast.parse(code)
    except SyntaxError as exc:
        return [Finding("blocker", f"syntax error: {exc.msg}",
                        f"line {exc.lineno}")]
    aliases = _toolkit_aliases(tree)
    if not aliases:
        return findings
    for node in ast.walk(tree):
        if not isinstance(node, ast.Call):
            continue
        name = _call_name(node, aliases)
        if name is None:
            continue
        locus = f"line {node.lineno}"
        spec = catalog.get(name)
        if spec is None:
            findings.append(Finding(
                "blocker", f"unknown toolkit function '{name}'", locus))
            continue
        param_names = [p.name for p in spec.params]
        required = [p.name for p in spec.params if p.required]
        if len(node.args) > len(param_names):
            findings.append(Finding(
                "blocker",
                f"toolkit.{name} takes at most {len(param_names)} arguments, "
                f"got {len(node.args)}", locus))
        seen = set(param_names[: len(node.args)])
        for kw in node.keywords:
            if kw.arg is None:
                continue  # **kwargs: not statically checkable
            if kw.arg not in param_names:
                findings.append(Finding(
                    "blocker",
                    f"toolkit.{name} has no parameter '{kw.arg}' "
                    f"(parameters: {', '.join(param_names)})", locus))
            seen.add(kw.arg)
        missing = [p for p in required if p not in seen]
        if missing and not any(kw.arg is None for kw in node.keywords):
            findings.append(Finding(
                "blocker",
                f"toolkit.{name} missing required argument(s) "
                f"{', '.join(missing)}", locus))
        if name in ("load_field", "load_climatology") and manifest:
            findings.extend(_check_data_reference(node, name, manifest, locus))
    return findings


def _literal(node):
    return node.value if isinstance(node, ast.Constant) else None


def _check_data_reference(node: ast.Call, name: str, manifest: dict, locus: str):
    findings = []
    var = _literal(node.args[0]) if node.args else None
    for kw in node.keywords:
        if kw.arg == "name":
            var = _literal(kw.value)
    if isinstance(var, str):
        if var not in manifest.get("variables", {}):
            known = ", ".join(sorted(manifest.get("variables", {}))) or "none"
            findings.append(Finding(
                "blocker",
                f"variable '{var}' is not in the data manifest "
                f"(fetched: {known})", locus))
            return findings
        for kw in node.keywords:
            if kw.arg != "level":
                continue
            level = _literal(kw.value)
            if isinstance(level, (int, float)):
                levels = _manifest_levels(manifest, var) or []
                if float(level) not in [float(l) for l in levels]:
                    findings.append(Finding(
                        "blocker",
                        f"level {level} for '{var}' is not in the data "
                        f"manifest (fetched levels: {levels})", locus))
    return findings


_REVIEW_INSTRUCTIONS = """\
== CODE REVIEW REQUEST ==
Review the analysis code below for logic flaws that would corrupt the
science even though the code runs: wrong tool parameters, flawed data
indexing, mismatched units, or plotting the wrong quantity.
Reply with exactly PASS, or one finding per line formatted as
SEVERITY: description @ locus
where SEVERITY is BLOCKER or WARNING.
"""


def _parse_findings(text: str) -> list:
    findings = []
    for line in text.strip().splitlines():
        line = line.strip()
        upper = line.upper()
        if upper.startswith("BLOCKER:") or upper.startswith("WARNING:"):
            severity = "blocker" if upper.startswith("BLOCKER") else "warning"
            body = line.split(":", 1)[1].strip()
            locus = ""
            if " @ " in body:
                body, locus = (s.strip() for s in body.rsplit(" @ ", 1))
            findings.append(Finding(severity, body, locus))
    return findings


def audit_code(code: str, catalog: dict, manifest: dict, gateway_fn=None) -> AuditVerdict:
    """Static checks plus (when a gateway is supplied) a model review pass.

    A gateway failure degrades the verdict to the static findings alone and
    flags it, rather than blocking the run.
    """
    findings = static_code_checks(code, catalog, manifest)
    degraded = False
    if gateway_fn is not None and not findings:
        prompt = (
            f"{_REVIEW_INSTRUCTIONS}\n"
            f"Data manifest:\n{json.dumps(manifest or {}, sort_keys=True)}\n\n"
            f"Code:\n```python\n{code}\n```"
        )
        try:
            response = gateway_fn([text_message("user", prompt)])
            findings.extend(_parse_findings(response))
        except GatewayError:
            degraded = True
            findings.append(Finding(
                "warning", "model review unavailable; static checks only"))
    return make_verdict("code", findings, degraded)


def _figure_readable(path: Path) -> str:
    if not path.is_file() or path.stat().st_size == 0:
        return "missing or zero-byte image file"
    try:
        from PIL import Image

        with Image.open(path) as img:
            img.verify()
    except Exception as exc:  # noqa: BLE001 - any decode failure is a blocker
        return f"unreadable raster image: {exc}"
    return ""


def audit_content(figure_path, caption_intent: str, gateway_fn,
                  rubric: str = None) -> AuditVerdict:
    """Critique a figure against the fixed visualization rubric.

    The figure is never modified. An unreadable image is an immediate
    blocker; a gateway failure yields a degraded, warning-only verdict.
    """
    figure_path = Path(figure_path)
    problem = _figure_readable(figure_path)
    if problem:
        return make_verdict("content",
                            [Finding("blocker", problem, figure_path.name)])
    if rubric is None:
        rubric = RUBRIC_PATH.read_text(encoding="utf-8")
    prompt = (
        f"{rubric}\n"
        f"Figure intent: {caption_intent}\n"
        "Reply with exactly PASS, or one finding per line formatted as "
        "SEVERITY: description @ locus (BLOCKER or WARNING)."
    )
    try:
        response = gateway_fn(
            [text_message("user", prompt, images=[figure_path])]
        )
        return make_verdict("content", _parse_findings(response))
    except GatewayError:
        return make_verdict(
            "content",
            [Finding("warning", "content review unavailable; figure unchecked")],
            degraded=True,
        )
