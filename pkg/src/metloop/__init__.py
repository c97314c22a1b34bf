"""metloop: closed-loop diagnostic analysis of extreme weather events.

An autonomous analysis agent (plan -> think -> act -> observe -> interpret)
over a sandboxed execution environment with dual auditors, a physics-checked
diagnostics toolkit, plus the step-wise benchmark harness that scores each
step of a run.
"""

__version__ = "0.1.0"
