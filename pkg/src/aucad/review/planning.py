"""Assignment planning for the relevance review.

Entries are shuffled deterministically under a seed. A subset is assigned
to every annotator (the overlap set, used for inter-rater agreement); the
rest is split so each annotator reviews at most ``per_annotator`` entries
and every entry is examined at least once. With two annotators the overlap
size is exactly 2*per - N, e.g. 826 entries at 500 each overlap on 174.
"""

from __future__ import annotations

import random
from dataclasses import dataclass


class PlanError(ValueError):
    """The requested assignment cannot cover every entry."""


@dataclass(frozen=True)
class AssignmentPlan:
    annotators: tuple
    per_annotator: int
    overlap_ids: tuple
    assignments: dict  # annotator -> tuple of entry ids
    seed: int

    def to_dict(self):
        return {
            "annotators": list(self.annotators),
            "per_annotator": self.per_annotator,
            "seed": self.seed,
            "overlap_ids": list(self.overlap_ids),
            "assignments": {a: list(ids) for a, ids in self.assignments.items()},
        }


def plan_assignments(entry_ids, annotators, per_annotator, seed=0):
    """Deterministic assignment plan; overlap entries go to every annotator.

    The overlap size is the largest o with N - o + o*A <= per*A, i.e.
    (per*A - N) // (A - 1); every annotator receives the full overlap plus
    an exclusive share, never exceeding per_annotator entries.
    """
    entry_ids = list(entry_ids)
    annotators = list(annotators)
    n = len(entry_ids)
    a = len(annotators)
    if a < 2:
        raise PlanError("at least two annotators are required")
    if per_annotator <= 0:
        raise PlanError("per_annotator must be positive")
    if len(set(entry_ids)) != n:
        raise PlanError("entry ids must be unique")
    if per_annotator * a < n:
        raise PlanError(
            f"cannot cover {n} entries with {a} annotators x {per_annotator}"
        )
    rng = random.Random(seed)
    shuffled = entry_ids[:]
    rng.shuffle(shuffled)
    overlap_size = min((per_annotator * a - n) // (a - 1), n)
    overlap = shuffled[:overlap_size]
    exclusive = shuffled[overlap_size:]
    capacity = per_annotator - overlap_size
    assignments = {}
    cursor = 0
    remaining = len(exclusive)
    for idx, annotator in enumerate(annotators):
        # spread the exclusive entries evenly over the remaining annotators
        share = -(-remaining // (a - idx))  # ceil division
        share = min(share, capacity)
        chunk = exclusive[cursor : cursor + share]
        cursor += share
        remaining -= share
        assignments[annotator] = tuple(overlap + chunk)
    if cursor < len(exclusive):
        raise PlanError("internal: exclusive entries left unassigned")
    return AssignmentPlan(
        annotators=tuple(annotators),
        per_annotator=per_annotator,
        overlap_ids=tuple(overlap),
        assignments=assignments,
        seed=seed,
    )
