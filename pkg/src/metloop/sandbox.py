"""Isolated execution of agent-generated analysis code.

Each action runs in a fresh subprocess with a restricted environment:
cleared credentials, working-directory jail, socket/open/os interposition
installed by a bootstrap preamble, and rlimits. Failures never raise — they
come back encoded in the exit_status. Artifacts are discovered by a
before/after directory diff, so generated code needs no naming convention.

This guards against accidents, not a motivated adversary (C extensions can
write through their own file handles); OS-level container isolation is the
optional hardening layer on top.
"""

from __future__ import annotations

import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import metloop

WORKSPACE_SUBDIRS = ("data", "artifacts", "scratch")

_BOOTSTRAP = r'''
import builtins, io, os, resource, runpy, socket, sys, traceback

WORKSPACE = os.path.realpath(os.getcwd())
_DATA = os.path.join(WORKSPACE, "data")


def _deny_network(*args, **kwargs):
    raise PermissionError("network access is disabled in the sandbox")


socket.socket = _deny_network
socket.create_connection = _deny_network
socket.socketpair = _deny_network
socket.getaddrinfo = _deny_network
socket.gethostbyname = _deny_network

_WRITE_MODES = ("w", "a", "x", "+")
_real_open = builtins.open
_real_io_open = io.open
_real_os_open = os.open


def _writable_target(path):
    real = os.path.realpath(os.fspath(path))
    if not real.startswith(WORKSPACE + os.sep) and real != WORKSPACE:
        return "outside the sandbox workspace"
    if real.startswith(_DATA + os.sep):
        return "in the read-only data mount"
    return ""


def _guard_path(path, writing):
    if not writing:
        return
    if isinstance(path, int):
        return
    problem = _writable_target(path)
    if problem:
        raise PermissionError(f"write to {path!r} denied: {problem}")


def _guarded_open(file, mode="r", *args, **kwargs):
    _guard_path(file, any(c in mode for c in _WRITE_MODES))
    return _real_open(file, mode, *args, **kwargs)


def _guarded_io_open(file, mode="r", *args, **kwargs):
    _guard_path(file, any(c in mode for c in _WRITE_MODES))
    return _real_io_open(file, mode, *args, **kwargs)


def _guarded_os_open(path, flags, *args, **kwargs):
    writing = bool(flags & (os.O_WRONLY | os.O_RDWR | os.O_CREAT | os.O_TRUNC))
    _guard_path(path, writing)
    return _real_os_open(path, flags, *args, **kwargs)


builtins.open = _guarded_open
io.open = _guarded_io_open
os.open = _guarded_os_open

mem_mb = int(os.environ.get("METLOOP_MEM_MB", "0"))
if mem_mb > 0:
    limit = mem_mb * 1024 * 1024
    try:
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    except (ValueError, OSError):
        pass

code_path = sys.argv[1]
sys.argv = [code_path]
try:
    runpy.run_path(code_path, run_name="__main__")
except SystemExit as exc:
    raise
except BaseException:
    traceback.print_exc()
    sys.exit(1)
'''


@dataclass
class ExecutionResult:
    exit_status: str  # success | exception | timeout
    stdout: str = ""
    stderr: str = ""
    artifacts: list = field(default_factory=list)
    wall_time: float = 0.0


def prepare_workspace(workspace) -> Path:
    workspace = Path(workspace)
    for sub in WORKSPACE_SUBDIRS:
        (workspace / sub).mkdir(parents=True, exist_ok=True)
    return workspace


def _snapshot(workspace: Path) -> set:
    files = set()
    for path in workspace.rglob("*"):
        if path.is_file():
            rel = path.relative_to(workspace)
            if rel.parts and rel.parts[0] == "scratch":
                continue  # scratch is transient by contract
            files.add(str(rel))
    return files


def _child_env(workspace: Path, memory_mb: int, tools_enabled: bool) -> dict:
    package_root = Path(metloop.__file__).resolve().parents[1]
    scratch = workspace / "scratch"
    return {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "PYTHONPATH": str(package_root),
        "HOME": str(scratch),
        "TMPDIR": str(scratch),
        "MPLBACKEND": "Agg",
        "MPLCONFIGDIR": str(scratch / "mpl"),
        "PYTHONDONTWRITEBYTECODE": "1",
        "PYTHONHASHSEED": "0",
        "METLOOP_MEM_MB": str(int(memory_mb)),
        "METLOOP_TOOLS": "1" if tools_enabled else "0",
    }


def execute(code: str, workspace, wall_time_s: float = 120.0,
            memory_mb: int = 2048, tools_enabled: bool = True) -> ExecutionResult:
    """Run a code block in the workspace jail and capture everything.

    Never raises for failures of the executed code: exceptions and timeouts
    come back in exit_status; stdout/stderr are captured in full; new files
    under the workspace (minus scratch) are listed as artifacts.
    """
    workspace = prepare_workspace(workspace)
    (workspace / "scratch" / "mpl").mkdir(parents=True, exist_ok=True)
    before = _snapshot(workspace)
    start = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="metloop-exec-") as staging:
        staging = Path(staging)
        (staging / "bootstrap.py").write_text(_BOOTSTRAP, encoding="utf-8")
        (staging / "action.py").write_text(code, encoding="utf-8")
        proc = subprocess.Popen(
            [sys.executable, str(staging / "bootstrap.py"),
             str(staging / "action.py")],
            cwd=str(workspace),
            env=_child_env(workspace, memory_mb, tools_enabled),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            stdout, stderr = proc.communicate(timeout=wall_time_s)
            status = "success" if proc.returncode == 0 else "exception"
        except subprocess.TimeoutExpired:
            proc.kill()
            stdout, stderr = proc.communicate()
            status = "timeout"
            stderr = (stderr or "") + f"\n[killed after {wall_time_s} s wall time]"
    wall = time.monotonic() - start
    artifacts = sorted(_snapshot(workspace) - before)
    return ExecutionResult(status, stdout or "", stderr or "", artifacts, wall)
