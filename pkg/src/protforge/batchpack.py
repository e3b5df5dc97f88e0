"""Token-budget batch packing for variable-length sequences.

Groups sequences into batches whose summed token count stays under a budget
(default 12,000) instead of using a fixed batch size, so long sequences are
never cut. Packing is first-fit-decreasing (a documented approximation;
exact bin packing is NP-hard) with a stable index tie-break, making
plans deterministic. A conventional truncation mode caps lengths first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

__all__ = [
    "DEFAULT_BUDGET",
    "PackPlan",
    "pack_batches",
    "effective_batch_stats",
    "propose_budget",
]

DEFAULT_BUDGET = 12_000


@dataclass(frozen=True)
class PackPlan:
    """Batch assignment over the input sequence order.

    ``batches[b]`` lists input indices; every index appears in exactly one
    batch. ``oversized`` flags batches holding a single sequence longer
    than the budget (only possible in preserve mode).
    """

    batches: tuple[tuple[int, ...], ...]
    budget: int
    mode: str  # "preserve" | "truncate"
    max_len: Optional[int] = None
    oversized: tuple[int, ...] = field(default=())

    def to_json(self) -> str:
        return json.dumps(
            {
                "budget": self.budget,
                "mode": self.mode,
                "max_len": self.max_len,
                "oversized": list(self.oversized),
                "batches": [list(b) for b in self.batches],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "PackPlan":
        payload = json.loads(text)
        return cls(
            batches=tuple(tuple(b) for b in payload["batches"]),
            budget=payload["budget"],
            mode=payload["mode"],
            max_len=payload.get("max_len"),
            oversized=tuple(payload.get("oversized", ())),
        )


def pack_batches(lengths: Sequence[int], budget: int = DEFAULT_BUDGET,
                 mode: str = "preserve",
                 max_len: Optional[int] = None) -> PackPlan:
    """First-fit-decreasing packing of sequence lengths under a token budget.

    preserve: sequences keep their full length; a single sequence longer
    than the budget becomes its own batch, flagged oversized.
    truncate: lengths are capped at ``max_len`` first, then packed.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if mode not in ("preserve", "truncate"):
        raise ValueError(f"unknown packing mode {mode!r}")
    for pos, length in enumerate(lengths):
        if length < 1:
            raise ValueError(f"lengths must be positive (index {pos}: {length})")

    effective = list(lengths)
    if mode == "truncate":
        if max_len is None or max_len < 1:
            raise ValueError("truncate mode requires max_len >= 1")
        effective = [min(v, max_len) for v in effective]

    order = sorted(range(len(effective)), key=lambda i: (-effective[i], i))
    batches: list[list[int]] = []
    loads: list[int] = []
    for i in order:
        size = effective[i]
        for b, load in enumerate(loads):
            if load + size <= budget:
                batches[b].append(i)
                loads[b] += size
                break
        else:
            batches.append([i])
            loads.append(size)

    oversized = tuple(b for b, load in enumerate(loads) if load > budget)
    return PackPlan(
        batches=tuple(tuple(b) for b in batches),
        budget=budget,
        mode=mode,
        max_len=max_len if mode == "truncate" else None,
        oversized=oversized,
    )


def effective_batch_stats(plan: PackPlan, lengths: Sequence[int]) -> dict:
    """Exact arithmetic over a plan: batch count, mean tokens, mean sequences."""
    n_batches = len(plan.batches)
    total_tokens = 0
    total_seqs = 0
    for batch in plan.batches:
        for i in batch:
            if not 0 <= i < len(lengths):
                raise IndexError(f"plan index {i} out of range for {len(lengths)} lengths")
            total_tokens += lengths[i]
            total_seqs += 1
    return {
        "batch_count": n_batches,
        "mean_tokens_per_batch": total_tokens / n_batches if n_batches else 0.0,
        "mean_seqs_per_batch": total_seqs / n_batches if n_batches else 0.0,
    }


def propose_budget(lengths: Sequence[int], target_seqs_per_batch: int) -> int:
    """Suggest a per-batch token budget from the length distribution.

    Heuristic: the 95th-percentile length times the desired number of
    sequences per batch, so most batches reach the target count without
    splitting long sequences.
    """
    if not lengths:
        raise ValueError("lengths must be non-empty")
    if target_seqs_per_batch < 1:
        raise ValueError("target_seqs_per_batch must be >= 1")
    ordered = sorted(lengths)
    rank = max(0, min(len(ordered) - 1, round(0.95 * (len(ordered) - 1))))
    return int(ordered[rank]) * target_seqs_per_batch
