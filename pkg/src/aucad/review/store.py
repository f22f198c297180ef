"""Label persistence and relevance resolution for the review workflow.

All writes go through an append-only journal file; replaying the journal
at startup reproduces the exact current-label state, so the service needs
no database. Later labels by the same annotator supersede earlier ones
while the full history stays in the journal. Disagreements on overlap
entries are resolved by a label from the designated adjudicator.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from .. import pairs as pairs_mod
from ..metrics import kappa_details

DEFAULT_ADJUDICATOR = "adjudicator"


class UnknownEntryError(KeyError):
    """Label for an entry id that does not exist."""


class NotAssignedError(PermissionError):
    """Label by an annotator the entry is not assigned to."""


class ExportBlocked(RuntimeError):
    """Export refused; carries the blocking entry ids."""

    def __init__(self, message, blocking_ids):
        super().__init__(message)
        self.blocking_ids = list(blocking_ids)


@dataclass(frozen=True)
class AnnotationRecord:
    entry_id: str
    annotator: str
    relevant: bool
    note: str = ""
    timestamp: str = ""
    request_id: str = ""

    def to_dict(self):
        return {
            "entry_id": self.entry_id,
            "annotator": self.annotator,
            "relevant": self.relevant,
            "note": self.note,
            "timestamp": self.timestamp,
            "request_id": self.request_id,
        }

    @classmethod
    def from_dict(cls, raw):
        return cls(
            entry_id=raw["entry_id"],
            annotator=raw["annotator"],
            relevant=bool(raw["relevant"]),
            note=raw.get("note", ""),
            timestamp=raw.get("timestamp", ""),
            request_id=raw.get("request_id", ""),
        )


class ReviewStore:
    """Entries, plan, and label state behind the review service."""

    def __init__(self, entries, plan, journal_path, adjudicator=DEFAULT_ADJUDICATOR,
                 issues_by_key=None):
        self.entries = {e.id: e for e in entries}
        if len(self.entries) != len(entries):
            raise ValueError("duplicate entry ids")
        self.plan = plan
        self.journal_path = Path(journal_path)
        self.adjudicator = adjudicator
        self.issues_by_key = issues_by_key or {}
        self._lock = threading.Lock()
        # (entry_id, annotator) -> AnnotationRecord (latest wins)
        self.current = {}
        # entry_id -> list of all records ever seen, journal order
        self.history = {}
        self._replay()

    def _replay(self):
        if not self.journal_path.exists():
            return
        with open(self.journal_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(AnnotationRecord.from_dict(json.loads(line)))

    def _apply(self, record):
        self.current[(record.entry_id, record.annotator)] = record
        self.history.setdefault(record.entry_id, []).append(record)

    def assigned_to(self, annotator):
        return self.plan.assignments.get(annotator, ())

    def is_assigned(self, entry_id, annotator):
        if annotator == self.adjudicator:
            return True
        return entry_id in set(self.assigned_to(annotator))

    def record_label(self, record):
        """Append to the journal and update state; idempotent repeats of the
        current label do not re-journal."""
        if record.entry_id not in self.entries:
            raise UnknownEntryError(record.entry_id)
        if not self.is_assigned(record.entry_id, record.annotator):
            raise NotAssignedError(
                f"entry {record.entry_id} is not assigned to {record.annotator}"
            )
        if not record.timestamp:
            record = AnnotationRecord(
                record.entry_id,
                record.annotator,
                record.relevant,
                record.note,
                dt.datetime.now(dt.timezone.utc).isoformat(),
                record.request_id,
            )
        with self._lock:
            existing = self.current.get((record.entry_id, record.annotator))
            if existing is not None:
                same_label = (
                    existing.relevant == record.relevant
                    and existing.note == record.note
                )
                same_request = bool(record.request_id) and (
                    existing.request_id == record.request_id
                )
                if same_label or same_request:
                    return existing
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            self._apply(record)
            return record

    def labels_for(self, entry_id):
        """annotator -> latest record for one entry."""
        out = {}
        for (eid, annotator), record in self.current.items():
            if eid == entry_id:
                out[annotator] = record
        return out

    def overlap_label_vectors(self):
        """(labels_a, labels_b, entry_ids) over doubly-labeled overlap entries.

        Only defined for the first two annotators of the plan; entries not
        yet labeled by both are excluded.
        """
        if len(self.plan.annotators) < 2:
            return [], [], []
        a, b = self.plan.annotators[0], self.plan.annotators[1]
        ids, va, vb = [], [], []
        for entry_id in self.plan.overlap_ids:
            ra = self.current.get((entry_id, a))
            rb = self.current.get((entry_id, b))
            if ra is None or rb is None:
                continue
            ids.append(entry_id)
            va.append(1 if ra.relevant else 0)
            vb.append(1 if rb.relevant else 0)
        return va, vb, ids

    def agreement_stats(self):
        """Kappa with contingency details over the doubly-labeled subset."""
        va, vb, ids = self.overlap_label_vectors()
        if not ids:
            return {"kappa": None, "n": 0, "p_o": None, "p_e": None, "table": {}}
        details = kappa_details(va, vb)
        details["entry_ids"] = ids
        return details

    def final_relevance(self, entry_id):
        """'Relevant', 'NonRelevant', 'Unlabeled', or 'Disagreement'.

        A label from the adjudicator settles disagreements between
        annotators; without one, conflicting labels stay unresolved.
        """
        labels = self.labels_for(entry_id)
        adjudication = labels.pop(self.adjudicator, None)
        verdicts = {record.relevant for record in labels.values()}
        if adjudication is not None and (len(verdicts) > 1 or not verdicts):
            verdicts = {adjudication.relevant}
        if not verdicts:
            return "Unlabeled"
        if len(verdicts) > 1:
            return "Disagreement"
        return pairs_mod.RELEVANT if verdicts.pop() else pairs_mod.NON_RELEVANT

    def export_reviewed(self, path, allow_partial=False):
        """Write relevance-filtered entries and return the summary.

        Unlabeled entries and unresolved disagreements block the export
        unless allow_partial is set, in which case they are excluded and
        listed. Exported + excluded always equals the total entry count.
        """
        kept = []
        removed = []
        blocking = []
        for entry_id in sorted(self.entries):
            verdict = self.final_relevance(entry_id)
            if verdict == pairs_mod.RELEVANT:
                kept.append(
                    pairs_mod.with_relevance(self.entries[entry_id], verdict)
                )
            elif verdict == pairs_mod.NON_RELEVANT:
                removed.append(entry_id)
            else:
                blocking.append(entry_id)
        if blocking and not allow_partial:
            raise ExportBlocked(
                f"{len(blocking)} entries unlabeled or in disagreement", blocking
            )
        pairs_mod.export_jsonl(kept, path)
        total = len(self.entries)
        return {
            "path": str(path),
            "total": total,
            "exported": len(kept),
            "removed_non_relevant": len(removed),
            "excluded_unresolved": blocking,
            "retention": (len(kept) / total) if total else None,
        }
