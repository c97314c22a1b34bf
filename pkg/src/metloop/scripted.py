"""Deterministic rule-based backend for offline runs and fixtures.

A pure function of the rendered prompt (plus attachment digests), so any run
driven by it can be recorded into a replay script and played back
byte-identically. It stands in for a live model in CI, demos, and the
benchmark fixtures: it plans, writes analysis code against the toolkit,
interprets figures, reviews code, critiques figures, generates checklists,
classifies steps, and grades candidates — all by fixed content rules.

Policies tweak single behaviors to exercise failure paths (goals that never
pass, code that always raises, a figure critic that demands a colorbar).
"""

from __future__ import annotations

import re

from metloop.gateway import TextPart

_STAGE_RE = re.compile(r"Active subtask: (\S+) \[(\w+)\]")
_EVENT_RE = re.compile(r"Event: (\w+) '([^']+)'")

POLICIES = (
    "default",
    "never_pass_goals",
    "broken_code",
    "fix_on_retry",
    "missing_colorbar",
    "malformed_plan",
    "offlabel_classifier",
    "flag_indexing_once",
    "bad_checklist_weights",
)

# identification series: variable, aggregation label, numpy arg-extremum
_IDENT = {
    "heatwave": ("t2m", "warmest", "argmax"),
    "cold_wave": ("t2m", "coldest", "argmin"),
    "extreme_precipitation": ("tp", "wettest", "argmax"),
    "drought": ("tp", "driest", "argmin"),
    "tropical_cyclone": ("msl", "deepest", "argmin"),
    "extratropical_cyclone": ("msl", "deepest", "argmin"),
}

_FETCH_ARGS = {
    "heatwave": ("['t2m', 'z', 'u', 'v', 't']", "['t2m']"),
    "cold_wave": ("['t2m', 'z', 'u', 'v', 't']", "['t2m']"),
    "extreme_precipitation": ("['tp', 'z', 'u', 'v', 'q']", "['tp']"),
    "drought": ("['tp', 'z', 'u', 'v', 't']", "['tp']"),
    "tropical_cyclone": ("['msl', 'z', 'u', 'v', 'q']", "['msl']"),
    "extratropical_cyclone": ("['msl', 'z', 'u', 'v', 't']", "['msl']"),
}

_MECHANISM = {
    ("heatwave", "synoptic_analysis"):
        "A pronounced mid-tropospheric ridge dominates the region; the "
        "blocking anticyclone suppresses cloud cover and drives subsidence, "
        "whose adiabatic compression warms the lower troposphere and "
        "sustains the surface heat.",
    ("cold_wave", "synoptic_analysis"):
        "An amplified trough steers a deep northerly flow into the region; "
        "the displaced polar air mass under the trough axis maintains "
        "anomalously cold advection throughout the event.",
    ("extreme_precipitation", "synoptic_analysis"):
        "A slow-moving trough upstream places the region under persistent "
        "southwesterly flow; quasi-stationary forcing for ascent focuses "
        "repeated rainfall over the same catchments.",
    ("drought", "synoptic_analysis"):
        "Persistent ridging and subsidence cap the boundary layer, cutting "
        "off the moisture inflow that convective rainfall would require.",
    ("tropical_cyclone", "synoptic_analysis"):
        "The deep closed low in the height field marks the cyclone core; "
        "tight gradients imply strong gradient-wind circulation feeding "
        "surface convergence.",
    ("extratropical_cyclone", "synoptic_analysis"):
        "A sharp southward-dipping trough with pre-trough southwesterlies "
        "and post-trough northwesterlies marks the baroclinic wave driving "
        "the cyclone's growth.",
}

_THERMO_INTERP = {
    "heatwave": "Surface temperature anomalies relative to the 30-year "
                "climatology are strongly positive across the region, "
                "confirming that the observed heat is exceptional rather "
                "than seasonal; the anomaly pattern matches the subsidence "
                "region under the ridge.",
    "cold_wave": "Negative surface temperature anomalies against the "
                 "30-year climatology quantify the severity of the cold "
                 "outbreak and align with the northerly advection channel.",
    "drought": "Precipitation anomalies are persistently negative relative "
               "to the 30-year climatology, quantifying the accumulated "
               "deficit that defines the drought.",
    "extreme_precipitation": "Integrated vapor transport forms a focused "
                             "moisture corridor into the region; its "
                             "convergence supplies the column moisture flux "
                             "that the heavy rainfall taps, linking the "
                             "large-scale flow to the local accumulations.",
    "tropical_cyclone": "The integrated vapor transport field shows a "
                        "moisture conveyor spiraling into the circulation, "
                        "feeding the convection that sustains the warm "
                        "core through latent-heat release.",
    "extratropical_cyclone": "An upper-level potential vorticity anomaly "
                             "overlies the surface low: the tropopause-level "
                             "PV maximum induces ascent ahead of it, "
                             "coupling with low-level baroclinicity to "
                             "deepen the cyclone.",
}


def _thermo_code(event_type: str) -> str:
    if event_type in ("heatwave", "cold_wave", "drought"):
        var = _IDENT[event_type][0]
        return f"""\
from metloop import toolkit
import matplotlib.pyplot as plt
f = toolkit.load_field("{var}")
clim = toolkit.load_climatology("{var}")
anom = toolkit.anomaly(f, clim)
mean_anom = anom.values.mean(axis=0)
fig, ax = plt.subplots(figsize=(7, 5))
pm = ax.pcolormesh(anom.coords["lon"], anom.coords["lat"], mean_anom,
                   cmap="RdBu_r", shading="auto")
fig.colorbar(pm, ax=ax, label="{var} anomaly ({{}})".format(anom.units))
ax.set_title("Mean {var} anomaly vs 1991-2020 climatology")
ax.set_xlabel("lon")
ax.set_ylabel("lat")
fig.tight_layout()
fig.savefig("artifacts/thermodynamic.png", dpi=110,
            metadata={{"Software": None}})
print(f"anomaly range {{mean_anom.min():.2f}}..{{mean_anom.max():.2f}} {{anom.units}}")
"""
    if event_type in ("extreme_precipitation", "tropical_cyclone"):
        return """\
from metloop import toolkit
import matplotlib.pyplot as plt
q = toolkit.load_field("q")
u = toolkit.load_field("u")
v = toolkit.load_field("v")
ivt_u, ivt_v, ivt_mag = toolkit.ivt(q, u, v)
mean_mag = ivt_mag.values.mean(axis=0)
fig, ax = plt.subplots(figsize=(7, 5))
pm = ax.pcolormesh(ivt_mag.coords["lon"], ivt_mag.coords["lat"], mean_mag,
                   cmap="viridis", shading="auto")
fig.colorbar(pm, ax=ax, label="IVT (kg m-1 s-1)")
ax.set_title("Mean integrated vapor transport magnitude")
ax.set_xlabel("lon")
ax.set_ylabel("lat")
fig.tight_layout()
fig.savefig("artifacts/thermodynamic.png", dpi=110,
            metadata={"Software": None})
print(f"peak IVT {mean_mag.max():.1f} kg m-1 s-1")
"""
    return """\
from metloop import toolkit
import matplotlib.pyplot as plt
u = toolkit.load_field("u")
v = toolkit.load_field("v")
t = toolkit.load_field("t")
pv = toolkit.potential_vorticity(u, v, t)
pv500 = pv.sel_level(500.0)
mean_pvu = pv500.values.mean(axis=0) / 1e-6
fig, ax = plt.subplots(figsize=(7, 5))
pm = ax.pcolormesh(pv500.coords["lon"], pv500.coords["lat"], mean_pvu,
                   cmap="magma", shading="auto")
fig.colorbar(pm, ax=ax, label="potential vorticity (PVU)")
ax.set_title("Mean 500 hPa potential vorticity")
ax.set_xlabel("lon")
ax.set_ylabel("lat")
fig.tight_layout()
fig.savefig("artifacts/thermodynamic.png", dpi=110,
            metadata={"Software": None})
print(f"mean 500 hPa PV {mean_pvu.mean():.2f} PVU")
"""


def _identification_code(event_type: str) -> str:
    var, label, argfn = _IDENT[event_type]
    return f"""\
from metloop import toolkit
import numpy as np
import matplotlib.pyplot as plt
f = toolkit.load_field("{var}")
series = f.values.mean(axis=(1, 2))
days = [str(t)[:10] for t in f.coords["time"]]
fig, ax = plt.subplots(figsize=(8, 4))
ax.plot(range(len(series)), series, marker="o")
ax.set_xticks(range(len(series)))
ax.set_xticklabels(days, rotation=45, fontsize=7)
ax.set_title("Area-mean {var} over the event window")
ax.set_ylabel(f.units)
fig.tight_layout()
fig.savefig("artifacts/identification.png", dpi=110,
            metadata={{"Software": None}})
peak = int(np.{argfn}(series))
print(f"{label} day {{days[peak]}} with area-mean {var} {{series[peak]:.2f}} {{f.units}}")
"""


def _synoptic_code() -> str:
    return """\
from metloop import toolkit
import matplotlib.pyplot as plt
z = toolkit.load_field("z", level=500)
height_m = z.values.mean(axis=0) / 9.80665
fig, ax = plt.subplots(figsize=(7, 5))
cs = ax.contour(z.coords["lon"], z.coords["lat"], height_m, levels=12,
                colors="k", linewidths=0.8)
ax.clabel(cs, fontsize=7, fmt="%.0f")
ax.set_title("Mean 500 hPa geopotential height (m)")
ax.set_xlabel("lon")
ax.set_ylabel("lat")
fig.tight_layout()
fig.savefig("artifacts/synoptic.png", dpi=110, metadata={"Software": None})
print(f"z500 range {height_m.min():.0f}..{height_m.max():.0f} m")
"""


def _mesoscale_code(with_colorbar: bool) -> str:
    colorbar = (
        'fig.colorbar(pm, ax=ax, label="relative vorticity (s-1)")\n'
        if with_colorbar else ""
    )
    return f"""\
from metloop import toolkit
import matplotlib.pyplot as plt
u = toolkit.load_field("u", level=850)
v = toolkit.load_field("v", level=850)
zeta = toolkit.relative_vorticity(u, v)
mean_zeta = zeta.values.mean(axis=0)
fig, ax = plt.subplots(figsize=(7, 5))
pm = ax.pcolormesh(zeta.coords["lon"], zeta.coords["lat"], mean_zeta,
                   cmap="RdBu_r", shading="auto")
{colorbar}ax.set_title("Mean 850 hPa relative vorticity")
ax.set_xlabel("lon")
ax.set_ylabel("lat")
fig.tight_layout()
fig.savefig("artifacts/mesoscale.png", dpi=110, metadata={{"Software": None}})
print(f"vorticity extrema {{mean_zeta.min():.2e}}..{{mean_zeta.max():.2e}} s-1")
"""


def _planning_code(event_type: str) -> str:
    return f"""\
print("Analysis outline for the {event_type} case:")
for stage in ("data acquisition", "event identification",
              "synoptic-scale circulation", "mesoscale structure",
              "thermodynamic drivers", "final report"):
    print(" -", stage)
"""


_BASELINE_EXPLORE = """\
import numpy as np
from scipy.io import netcdf_file
with netcdf_file("data/z.nc", "r", mmap=False) as nc:
    vals = np.array(nc.variables["z"].data)
print("z shape", vals.shape)
"""

_BASELINE_SYNOPTIC = """\
import numpy as np
import matplotlib.pyplot as plt
from scipy.io import netcdf_file
with netcdf_file("data/z.nc", "r", mmap=False) as nc:
    vals = np.array(nc.variables["z"].data)
plt.figure()
plt.contour(vals.mean(axis=0)[-1])
plt.savefig("artifacts/synoptic.png", metadata={"Software": None})
print("plotted")
"""

_REPORT_TEMPLATE = """\
Diagnostic report: {etype} '{event_id}'

1. Event identification. The area-aggregated series over the event window
isolates the {label} day and bounds the event's intensity and duration.

2. Synoptic-scale circulation. {synoptic}

3. Mesoscale structure. Cyclonic relative vorticity maxima at 850 hPa mark
the embedded circulation centers; positive vorticity advection aloft favors
ascent over the same region, linking the rotation signature to vertical
motion.

4. Thermodynamic drivers. {thermo}

Conclusion. The staged evidence composes a consistent causal chain from the
large-scale circulation anomaly through the mesoscale response to the
surface impact that defines this {etype} event.
"""

_BASELINE_REPORT = """\
Report for event '{event_id}': data were loaded and a chart was produced.
The pattern in the chart is consistent with the event.
"""


def _grade_items(prompt: str):
    """Checklist item lines rendered into the grading prompt."""
    return re.findall(r"item ([\w.-]+) \[(\w+)\]: (.+)", prompt)


class ScriptedBackend:
    """Rule-based responder; behavior varies only through `policy`."""

    def __init__(self, policy: str = "default"):
        if policy not in POLICIES:
            raise ValueError(f"unknown scripted policy '{policy}'")
        self.policy = policy

    # -- dispatch --------------------------------------------------------

    def complete(self, messages, cfg) -> str:
        prompt = "\n".join(
            part.text for msg in messages for part in msg.parts
            if isinstance(part, TextPart)
        )
        has_images = any(
            not isinstance(part, TextPart)
            for msg in messages for part in msg.parts
        )
        if "== PLAN REQUEST ==" in prompt:
            return self._plan(prompt)
        if "== STEP REQUEST ==" in prompt:
            return self._step(prompt)
        if "== INTERPRETATION REQUEST ==" in prompt:
            return self._interpret(prompt)
        if "== GOAL CHECK ==" in prompt:
            return "NO" if self.policy == "never_pass_goals" else "YES"
        if "== CODE REVIEW REQUEST ==" in prompt:
            return self._review(prompt)
        if "== FIGURE CRITIQUE REQUEST ==" in prompt:
            return self._critique(prompt, has_images)
        if "== SUMMARY REQUEST ==" in prompt:
            return self._summary(prompt)
        if "== COMPRESS REQUEST ==" in prompt:
            return " ".join(prompt.split()[-40:])
        if "== CHECKLIST REQUEST ==" in prompt:
            return self._checklist(prompt)
        if "== CLASSIFY REQUEST ==" in prompt:
            return self._classify(prompt)
        if "== GRADE REQUEST (single) ==" in prompt:
            return self._grade_single(prompt)
        if "== GRADE REQUEST (comparative) ==" in prompt:
            return self._grade_comparative(prompt)
        return "UNRECOGNIZED REQUEST"

    # -- planning --------------------------------------------------------

    def _plan(self, prompt: str) -> str:
        if self.policy == "malformed_plan":
            return ("The analysis should start by looking at the data and "
                    "then proceed to charts.")
        if "Expert guideline" in prompt:
            lines = [
                "s1 | analysis_planning | Outline the staged diagnostic "
                "workflow | The outline names every analysis stage in order",
                "s2 | data_exploration | Retrieve the event's fields and "
                "climatology | The data manifest lists every required variable",
                "s3 | event_identification | Locate the event in the "
                "area-aggregated series | A dated series pinpoints the peak day",
                "s4 | synoptic_analysis | Chart the mid-tropospheric "
                "circulation | A 500 hPa height chart shows the driving pattern",
                "s5 | mesoscale_analysis | Map the embedded rotation | A "
                "vorticity map isolates the mesoscale circulation centers",
                "s6 | thermodynamic_analysis | Quantify the thermodynamic "
                "driver | A diagnostic map ties the driver to the event",
                "s7 | final_report | Synthesize the causal chain | A report "
                "links every stage into one mechanism narrative",
            ]
        else:
            lines = [
                "g1 | data_exploration | Load some data | Data are loaded",
                "g2 | synoptic_analysis | Plot a chart | A chart exists",
                "g3 | final_report | Write a report | A report exists",
            ]
        return "PLAN:\n```plan\n" + "\n".join(lines) + "\n```"

    # -- acting ----------------------------------------------------------

    def _step(self, prompt: str) -> str:
        stage_m = _STAGE_RE.search(prompt)
        event_m = _EVENT_RE.search(prompt)
        stage = stage_m.group(2) if stage_m else "event_identification"
        etype = event_m.group(1) if event_m else "heatwave"
        event_id = event_m.group(2) if event_m else "unknown"
        baseline = "No analysis toolkit" in prompt
        feedback = "FEEDBACK FROM PREVIOUS ATTEMPT" in prompt

        if self.policy == "broken_code" and stage != "data_exploration":
            return self._wrap(
                "Attempting the analysis step.",
                "python",
                'raise RuntimeError("synthetic failure for retry testing")\n',
            )
        if (self.policy == "fix_on_retry" and stage == "event_identification"
                and not feedback):
            return self._wrap(
                "Quick look at the series (first attempt).",
                "python",
                "total = 1 / 0\n",
            )

        if stage == "data_exploration":
            variables, clim = _FETCH_ARGS[etype]
            return self._wrap(
                "Fetch the multivariate fields and the 30-year climatology "
                "for the event window.",
                "tool",
                f"fetch(variables={variables}, "
                f"levels=[1000, 850, 700, 500], climatology={clim})\n",
            )
        if baseline:
            if stage == "final_report":
                return self._wrap(
                    "Write the report.",
                    "report",
                    _BASELINE_REPORT.format(event_id=event_id),
                )
            if stage == "synoptic_analysis":
                return self._wrap("Plot a chart of the height field.",
                                  "python", _BASELINE_SYNOPTIC)
            return self._wrap("Look at the data.", "python", _BASELINE_EXPLORE)

        if stage == "analysis_planning":
            return self._wrap(
                "Lay out the staged workflow before touching data.",
                "python", _planning_code(etype))
        if stage == "event_identification":
            code = _identification_code(etype)
            if self.policy == "flag_indexing_once" and feedback:
                code += "# reviewed: indexing re-checked against the manifest\n"
            return self._wrap(
                "Aggregate the indicator variable over the region to pin "
                "down the event's timing and peak.", "python", code)
        if stage == "synoptic_analysis":
            return self._wrap(
                "Chart the time-mean 500 hPa geopotential height to expose "
                "the steering circulation.", "python", _synoptic_code())
        if stage == "mesoscale_analysis":
            if self.policy == "missing_colorbar" and not feedback:
                return self._wrap(
                    "Map the 850 hPa relative vorticity.",
                    "python", _mesoscale_code(with_colorbar=False))
            thought = ("Map the 850 hPa relative vorticity with a labeled "
                       "colorbar for quantitative reading.")
            return self._wrap(thought, "python", _mesoscale_code(True))
        if stage == "thermodynamic_analysis":
            return self._wrap(
                "Quantify the thermodynamic driver with the toolkit "
                "diagnostics.", "python", _thermo_code(etype))
        if stage == "final_report":
            var, label, _ = _IDENT[etype]
            report = _REPORT_TEMPLATE.format(
                etype=etype, event_id=event_id, label=label,
                synoptic=_MECHANISM[(etype, "synoptic_analysis")],
                thermo=_THERMO_INTERP[etype],
            )
            return self._wrap("Synthesize the staged findings into the "
                              "final report.", "report", report)
        return self._wrap("Inspect the fetched data.", "python",
                          'from metloop import toolkit\n'
                          'print(toolkit.list_fields()["variables"].keys())\n')

    @staticmethod
    def _wrap(thought: str, kind: str, body: str) -> str:
        return f"THOUGHT: {thought}\nACTION:\n```{kind}\n{body}```"

    # -- interpreting ----------------------------------------------------

    def _interpret(self, prompt: str) -> str:
        stage_m = re.search(r"Subtask \S+ \[(\w+)\]", prompt)
        event_m = _EVENT_RE.search(prompt)
        stage = stage_m.group(1) if stage_m else "event_identification"
        etype = event_m.group(1) if event_m else "heatwave"
        if "No analysis toolkit" in prompt or "plotted" in prompt:
            pass
        if stage == "synoptic_analysis":
            return _MECHANISM.get((etype, stage),
                                  "The height field shows the synoptic driver.")
        if stage == "mesoscale_analysis":
            return ("Cyclonic relative vorticity maxima at 850 hPa mark the "
                    "embedded circulation centers; positive vorticity "
                    "advection downstream of them favors ascent, coupling "
                    "the rotation signature to the vertical motion that "
                    "organizes the event's mesoscale structure.")
        if stage == "thermodynamic_analysis":
            return _THERMO_INTERP.get(etype, "The diagnostic quantifies the "
                                             "thermodynamic driver.")
        if stage == "event_identification":
            return ("The area-aggregated series isolates the event window: "
                    "the extremum day and its magnitude bound the event's "
                    "intensity, giving the anchor for the staged dynamical "
                    "analysis that follows.")
        return "The step output is consistent with the planned analysis."

    # -- auditing --------------------------------------------------------

    def _review(self, prompt: str) -> str:
        if self.policy == "flag_indexing_once" and "# reviewed" not in prompt:
            return ("BLOCKER: flawed data indexing: verify the level "
                    "selection against the data manifest @ line 1")
        return "PASS"

    def _critique(self, prompt: str, has_images: bool) -> str:
        if not has_images:
            return "WARNING: no figure attached @ request"
        if self.policy == "missing_colorbar":
            intent_m = re.search(r"Figure intent: (.*)", prompt)
            intent = intent_m.group(1) if intent_m else ""
            if "colorbar" not in intent.lower():
                return ("BLOCKER: missing colorbar: the shaded field cannot "
                        "be read quantitatively @ figure")
        return "PASS"

    def _summary(self, prompt: str) -> str:
        stage_m = re.search(r"Subtask \S+ \[(\w+)\]", prompt)
        stage = stage_m.group(1) if stage_m else "stage"
        tail = " ".join(prompt.split()[-60:])
        return f"{stage} finished; key evidence: {tail}"

    # -- benchmark judging -----------------------------------------------

    def _checklist(self, prompt: str) -> str:
        event_m = re.search(r"Event: (\w+)", prompt)
        etype = event_m.group(1) if event_m else "heatwave"
        weight_pair = ("0.5 | ", "0.5 | ") if self.policy != "bad_checklist_weights" \
            else ("0.5 | ", "0.3 | ")
        lines = [
            "plan-1 | physical_interpretation | analysis_planning | 1.0 | "
            "The plan names every stage with a physically motivated goal",
            "data-1 | code_fidelity | data_exploration | 1.0 | "
            "The fetch covers the variables the event type requires",
            "ident-1 | code_fidelity | event_identification | 1.0 | "
            "The aggregation isolates the event in time correctly",
            "ident-2 | visualization_quality | event_identification | 1.0 | "
            "The series chart is dated, labeled, and legible",
            "ident-3 | physical_interpretation | event_identification | 1.0 | "
            "The interpretation bounds intensity and duration",
            "synop-1 | code_fidelity | synoptic_analysis | 1.0 | "
            "Heights are computed and averaged correctly",
            f"synop-2 | visualization_quality | synoptic_analysis | {weight_pair[0]}"
            "Contours are labeled with readable values",
            f"synop-3 | visualization_quality | synoptic_analysis | {weight_pair[1]}"
            "The chart exposes the large-scale pattern without clutter",
            "synop-4 | physical_interpretation | synoptic_analysis | 1.0 | "
            f"The narrative links the circulation to the {etype} mechanism",
            "meso-1 | code_fidelity | mesoscale_analysis | 1.0 | "
            "Vorticity uses the verified toolkit kernel, not an ad-hoc curl",
            "meso-2 | visualization_quality | mesoscale_analysis | 1.0 | "
            "The shaded field carries a labeled colorbar",
            "meso-3 | physical_interpretation | mesoscale_analysis | 1.0 | "
            "Rotation is causally tied to ascent, not just described",
            "thermo-1 | code_fidelity | thermodynamic_analysis | 1.0 | "
            "The thermodynamic diagnostic is computed with verified kernels",
            "thermo-2 | visualization_quality | thermodynamic_analysis | 1.0 | "
            "The diagnostic map is quantitatively readable",
            "thermo-3 | physical_interpretation | thermodynamic_analysis | 1.0 | "
            "The driver is linked to the surface impact",
            "report-1 | physical_interpretation | final_report | 1.0 | "
            "The report composes a coherent causal chain across stages",
        ]
        return "```checklist\n" + "\n".join(lines) + "\n```"

    def _classify(self, prompt: str) -> str:
        if self.policy == "offlabel_classifier":
            return "preprocessing"
        body = prompt
        if "write_report" in body or "Diagnostic report" in body:
            return "final_report"
        if "fetch(" in body:
            return "data_exploration"
        if ("potential_vorticity" in body or "anomaly(" in body
                or "ivt(" in body or "potential_temperature" in body):
            return "thermodynamic_analysis"
        if "relative_vorticity" in body:
            return "mesoscale_analysis"
        if "level=500" in body or "500 hPa" in body or "contour" in body:
            return "synoptic_analysis"
        if "outline" in body or "Analysis outline" in body:
            return "analysis_planning"
        return "event_identification"

    def _item_score(self, dimension: str, prompt: str, bundle: str) -> float:
        if dimension == "code_fidelity":
            if "toolkit." in bundle:
                return 1.0
            return 0.4 if "```python" in bundle else 0.2
        if dimension == "visualization_quality":
            if "artifacts:" not in bundle.lower():
                return 0.0
            has_figure = ".png" in bundle
            if not has_figure:
                return 0.0
            return 1.0 if "colorbar" in bundle or "clabel" in bundle else 0.5
        interp_m = re.search(r"interpretation: (.*?)(?:\n[A-Za-z_-]+:|\Z)",
                             bundle, re.DOTALL)
        interp = interp_m.group(1).strip() if interp_m else ""
        keywords = ("advection", "ridge", "trough", "vorticity", "anomaly",
                    "transport", "subsidence", "baroclinic", "causal")
        if len(interp) > 80 and any(k in interp.lower() for k in keywords):
            return 1.0
        return 0.5 if interp and interp != "(none)" else 0.0

    def _grade_single(self, prompt: str) -> str:
        items = _grade_items(prompt)
        lines = [
            f"item {item_id}: {self._item_score(dim, prompt, prompt):.2f}"
            for item_id, dim, _ in items
        ]
        lines.append("RATIONALE: rule-based scoring of toolkit usage, "
                     "figure legibility, and mechanism depth.")
        return "\n".join(lines)

    def _grade_comparative(self, prompt: str) -> str:
        items = _grade_items(prompt)
        bundles = re.split(r"== CANDIDATE (\S+) ==", prompt)
        candidates = []
        for i in range(1, len(bundles) - 1, 2):
            candidates.append((bundles[i], bundles[i + 1]))
        scored = []
        for name, bundle in candidates:
            total = sum(self._item_score(dim, prompt, bundle)
                        for _, dim, _ in items)
            scored.append((name, bundle, total))
        standard = max(scored, key=lambda x: x[2])[0]
        lines = [f"STANDARD: {standard}"]
        for name, bundle, _ in scored:
            for item_id, dim, _ in items:
                score = self._item_score(dim, prompt, bundle)
                lines.append(f"candidate {name} item {item_id}: {score:.2f}")
        lines.append("RATIONALE: graded relative to the strongest bundle.")
        return "\n".join(lines)
