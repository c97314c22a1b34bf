"""Run configuration for an analysis trajectory."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass
class RunConfig:
    """Knobs for one agent run.

    The three enable flags are independently togglable so component
    contributions can be measured one at a time. Temperature defaults to 0
    and all randomness funnels through `seed` for reproducibility.
    """

    workspace_root: Path
    backend_name: str = "scripted"
    max_steps: int = 40
    temperature: float = 0.0
    enable_tools: bool = True
    enable_auditor: bool = True
    enable_cot: bool = True
    seed: int = 0
    sandbox_wall_time_s: float = 120.0
    sandbox_memory_mb: int = 2048
    memory_token_budget: int = 16384

    def __post_init__(self):
        self.workspace_root = Path(self.workspace_root)
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.memory_token_budget < 1:
            raise ValueError("memory_token_budget must be >= 1")
