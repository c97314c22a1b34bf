"""Structured memory: persistent distillations plus transient working context.

On subtask completion the key findings are distilled into one bounded
summary for long-term retention and everything transient (step records,
variable notes) is pruned. The estimated rendered size is kept under the
token budget before every model call; when summaries alone overflow it, the
oldest pair is re-summarized into one — compressed, never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from metloop.gateway import GatewayError, text_message

SUMMARY_WORD_LIMIT = 200


def estimate_tokens(text: str) -> int:
    """Crude chars/4 estimate; only boundedness matters, not exactness."""
    return (len(text) + 3) // 4


@dataclass
class MemoryStore:
    guideline_text: str = ""
    summaries: list = field(default_factory=list)
    transient_steps: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    token_budget: int = 16384

    def estimated_tokens(self) -> int:
        parts = [self.guideline_text, *self.summaries,
                 *self.transient_steps, *self.notes]
        return estimate_tokens("\n".join(parts))

    def render(self) -> str:
        blocks = []
        if self.guideline_text:
            blocks.append(self.guideline_text)
        if self.summaries:
            blocks.append("Findings so far:\n" + "\n".join(
                f"- {s}" for s in self.summaries))
        if self.transient_steps:
            blocks.append("Recent steps on the active subtask:\n" + "\n".join(
                self.transient_steps))
        if self.notes:
            blocks.append("Working notes:\n" + "\n".join(self.notes))
        return "\n\n".join(blocks)


def _truncate_words(text: str, limit: int = SUMMARY_WORD_LIMIT) -> str:
    words = text.split()
    return " ".join(words[:limit]) if len(words) > limit else text


def distill(memory: MemoryStore, subtask, steps, gateway_fn) -> None:
    """Append exactly one bounded summary for a just-completed subtask.

    Falls back to the concatenated step interpretations (truncated to the
    bound) when the model is unavailable.
    """
    interpretations = [s.interpretation for s in steps if s.interpretation]
    evidence = "\n".join(interpretations) or "\n".join(
        s.observation.stdout for s in steps if s.observation.stdout
    )
    prompt = (
        "== SUMMARY REQUEST ==\n"
        f"Subtask {subtask.subtask_id} [{subtask.stage}] is complete: "
        f"{subtask.goal}\n"
        f"Distill the key findings into at most {SUMMARY_WORD_LIMIT} words.\n"
        f"Evidence:\n{evidence[:4000]}"
    )
    try:
        summary = gateway_fn([text_message("user", prompt)])
    except GatewayError:
        summary = evidence or f"{subtask.stage}: completed with no recorded findings"
    memory.summaries.append(
        f"[{subtask.stage}] " + _truncate_words(summary.strip())
    )


def prune(memory: MemoryStore) -> MemoryStore:
    """Empty all transient context; persistent summaries are untouched."""
    memory.transient_steps = []
    memory.notes = []
    return memory


def ensure_budget(memory: MemoryStore, gateway_fn) -> None:
    """Restore the size invariant before a model call.

    Oldest summaries are merged pairwise (model-compressed when possible,
    hard-truncated otherwise) until the estimate fits; a lone oversized
    summary is truncated outright as the terminal guarantee.
    """
    while memory.estimated_tokens() > memory.token_budget:
        if memory.transient_steps or memory.notes:
            prune(memory)
            continue
        if len(memory.summaries) >= 2:
            merged_input = memory.summaries[0] + "\n" + memory.summaries[1]
            prompt = (
                "== COMPRESS REQUEST ==\n"
                "Merge these findings into one summary of at most "
                f"{SUMMARY_WORD_LIMIT // 2} words:\n{merged_input}"
            )
            try:
                merged = gateway_fn([text_message("user", prompt)]).strip()
            except GatewayError:
                merged = _truncate_words(merged_input, SUMMARY_WORD_LIMIT // 2)
            memory.summaries[:2] = [_truncate_words(merged,
                                                    SUMMARY_WORD_LIMIT // 2)]
            continue
        if memory.summaries:
            budget_chars = max(memory.token_budget * 4 - len(memory.guideline_text), 64)
            memory.summaries[0] = memory.summaries[0][:budget_chars]
        if memory.estimated_tokens() > memory.token_budget:
            memory.guideline_text = memory.guideline_text[
                : max(memory.token_budget * 4 - 64, 64)]
        break
