"""Building, filtering, and exporting preference-pair dataset entries.

A Modified log change plus its issue becomes one entry: the post-change
method is the chosen response, the pre-change method the rejected one, and
the prompt embeds the post-change method with the target log statement
removed. Added/Deleted changes cannot form a pair and go to an auxiliary
side channel instead.

Three independent filters clean the set: trivially identical pairs
(byte-identical, or differing only in indentation), pairs whose method
diff touches non-log code, and entries whose method appears verbatim in an
evaluation corpus (leakage). Filter outcomes are order-insensitive; the
report keeps per-rule counts that always sum to the input size.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from difflib import SequenceMatcher
from pathlib import Path

from . import changes as changes_mod
from . import javasource, logdetect
from .prompt import render_prompt
from .textops import StatementNotFound, norm_ws, strip_lines
from .textops import remove_statement as _remove_statement

UNREVIEWED = "Unreviewed"
RELEVANT = "Relevant"
NON_RELEVANT = "NonRelevant"

# the documented export column order for entries.jsonl
FIELD_ORDER = (
    "id",
    "project",
    "issue_key",
    "issue_url",
    "issue_title",
    "repo",
    "sha",
    "file_path",
    "method_signature",
    "method_before",
    "method_after",
    "log_before",
    "log_after",
    "level_before",
    "level_after",
    "prompt",
    "chosen",
    "rejected",
    "relevance",
)


class EntryBuildError(ValueError):
    """The change is internally inconsistent (e.g. statement not in method)."""


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    project: str
    issue_key: str
    issue_url: str
    issue_title: str
    repo: str
    sha: str
    file_path: str
    method_signature: str
    method_before: str
    method_after: str
    log_before: str | None
    log_after: str | None
    level_before: str | None
    level_after: str | None
    prompt: str
    chosen: str
    rejected: str
    relevance: str = UNREVIEWED

    def to_dict(self):
        raw = {name: getattr(self, name) for name in FIELD_ORDER}
        return raw

    @classmethod
    def from_dict(cls, raw):
        return cls(**{name: raw.get(name) for name in FIELD_ORDER})


@dataclass
class FilterReport:
    trivial_identical: int = 0
    indentation_only: int = 0
    functional_coupling: int = 0
    leakage: int = 0
    kept: int = 0

    def to_dict(self):
        return {
            "trivial_identical": self.trivial_identical,
            "indentation_only": self.indentation_only,
            "functional_coupling": self.functional_coupling,
            "leakage": self.leakage,
            "kept": self.kept,
        }

    @property
    def total(self):
        return (
            self.trivial_identical
            + self.indentation_only
            + self.functional_coupling
            + self.leakage
            + self.kept
        )


def remove_statement(method_text, stmt_text):
    """Method text with one statement spliced out (EntryBuildError if absent)."""
    try:
        return _remove_statement(method_text, stmt_text)
    except StatementNotFound as exc:
        raise EntryBuildError(str(exc)) from exc


def entry_id(repo, sha, file_path, method_signature, log_after):
    digest = hashlib.sha256(
        "\x1f".join([repo, sha, file_path, method_signature, log_after or ""]).encode(
            "utf-8"
        )
    ).hexdigest()
    return digest[:16]


def build_entry(change, issue):
    """One DatasetEntry from a Modified change and its source issue."""
    if change.kind != changes_mod.MODIFIED:
        raise EntryBuildError(f"preference pairs need Modified changes, got {change.kind}")
    if change.after.text not in change.method_after:
        raise EntryBuildError("after statement missing from method_after")
    if change.before.text not in change.method_before:
        raise EntryBuildError("before statement missing from method_before")
    context = remove_statement(change.method_after, change.after.text)
    rendered = render_prompt(context)
    return DatasetEntry(
        id=entry_id(
            change.repo,
            change.sha,
            change.file_path,
            change.method_signature,
            change.after.text,
        ),
        project=issue.project,
        issue_key=issue.key,
        issue_url=issue.url,
        issue_title=issue.title,
        repo=change.repo,
        sha=change.sha,
        file_path=change.file_path,
        method_signature=change.method_signature,
        method_before=change.method_before,
        method_after=change.method_after,
        log_before=change.before.text,
        log_after=change.after.text,
        level_before=change.before.level,
        level_after=change.after.level,
        prompt=rendered.text,
        chosen=change.method_after,
        rejected=change.method_before,
    )


@dataclass
class BuildSummary:
    modified: int = 0
    side_channel: int = 0
    dropped_inconsistent: list = field(default_factory=list)

    def to_dict(self):
        return {
            "modified": self.modified,
            "side_channel": self.side_channel,
            "dropped_inconsistent": self.dropped_inconsistent,
        }


def build_entries(all_changes, issues_by_key):
    """(entries, side_channel_changes, summary) for a change list.

    Modified changes become entries; Added/Deleted changes are routed to
    the side channel. Changes whose issue is unknown or whose statement
    cannot be located are dropped and recorded.
    """
    summary = BuildSummary()
    entries = []
    side = []
    for change in all_changes:
        if change.kind != changes_mod.MODIFIED:
            side.append(change)
            summary.side_channel += 1
            continue
        issue = issues_by_key.get(change.issue_key)
        if issue is None:
            summary.dropped_inconsistent.append(
                f"{change.repo}@{change.sha}: unknown issue {change.issue_key}"
            )
            continue
        try:
            entries.append(build_entry(change, issue))
        except EntryBuildError as exc:
            summary.dropped_inconsistent.append(
                f"{change.repo}@{change.sha}:{change.file_path}: {exc}"
            )
            continue
        summary.modified += 1
    return entries, side, summary


def _is_trivial(entry):
    """None, 'identical', or 'indentation'."""
    if entry.chosen == entry.rejected:
        return "identical"
    if strip_lines(entry.chosen) == strip_lines(entry.rejected):
        return "indentation"
    return None


def filter_trivial(entries):
    kept = []
    report = FilterReport()
    for entry in entries:
        verdict = _is_trivial(entry)
        if verdict == "identical":
            report.trivial_identical += 1
        elif verdict == "indentation":
            report.indentation_only += 1
        else:
            kept.append(entry)
    report.kept = len(kept)
    return kept, report


def _log_related_lines(method_text):
    """1-based method-text lines that belong to logging rather than logic:
    log statement spans plus guard headers of conditionals that contain
    only log statements."""
    related = set()
    detection = logdetect.detect_log_statements_in_text(method_text)
    log_indices = set()
    for stmt in detection.statements:
        log_indices.add(stmt.statement_index)
        for ln in range(stmt.line, stmt.line + stmt.text.count("\n") + 1):
            related.add(ln)
    _, blocks = javasource.split_statements(method_text)
    for block in blocks.values():
        if block.header_first not in ("if", "else"):
            continue
        if block.stmt_count == 0 or block.child_blocks > 0:
            continue
        if set(block.stmt_indices) <= log_indices:
            related.add(block.header_line)
    return related


_STRUCTURAL = {"", "{", "}", "} else {", "else {", "} else"}


def _coupled_to_functional_code(entry):
    """True when the before/after method diff touches a non-log line."""
    before_lines = [ln.strip() for ln in entry.method_before.splitlines()]
    after_lines = [ln.strip() for ln in entry.method_after.splitlines()]
    related_before = _log_related_lines(entry.method_before)
    related_after = _log_related_lines(entry.method_after)
    matcher = SequenceMatcher(None, before_lines, after_lines, autojunk=False)
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        for i in range(i1, i2):
            if before_lines[i] in _STRUCTURAL:
                continue
            if (i + 1) not in related_before:
                return True
        for j in range(j1, j2):
            if after_lines[j] in _STRUCTURAL:
                continue
            if (j + 1) not in related_after:
                return True
    return False


def filter_functional_coupling(entries):
    kept = []
    report = FilterReport()
    for entry in entries:
        if _coupled_to_functional_code(entry):
            report.functional_coupling += 1
        else:
            kept.append(entry)
    report.kept = len(kept)
    return kept, report


def filter_leakage(entries, eval_corpora):
    """Drop entries whose normalized post-change method appears in any
    evaluation corpus."""
    corpus_norms = set()
    for corpus in eval_corpora:
        for method_text in corpus:
            corpus_norms.add(norm_ws(method_text))
    kept = []
    report = FilterReport()
    for entry in entries:
        if norm_ws(entry.method_after) in corpus_norms:
            report.leakage += 1
        else:
            kept.append(entry)
    report.kept = len(kept)
    return kept, report


def apply_filters(entries, eval_corpora=()):
    """Run all three filters; merged report conserves the input count."""
    total = len(entries)
    kept, r1 = filter_trivial(entries)
    kept, r2 = filter_functional_coupling(kept)
    kept, r3 = filter_leakage(kept, eval_corpora)
    report = FilterReport(
        trivial_identical=r1.trivial_identical,
        indentation_only=r1.indentation_only,
        functional_coupling=r2.functional_coupling,
        leakage=r3.leakage,
        kept=len(kept),
    )
    assert report.total == total
    return kept, report


def load_corpus_methods(path):
    """Method texts from a jsonl file ({'method': ...} or raw string lines)
    or from a directory of one-method-per-file sources."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus not found: {path}")
    methods = []
    if path.is_dir():
        for fpath in sorted(path.rglob("*")):
            if fpath.is_file():
                methods.append(fpath.read_text(encoding="utf-8"))
        return methods
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if isinstance(record, str):
                methods.append(record)
            else:
                methods.append(record["method"])
    return methods


def sort_key(entry):
    # id is a content hash; it breaks ties so re-runs stay byte-identical
    return (entry.project, entry.issue_key, entry.sha, entry.file_path,
            entry.method_signature, entry.id)


def export_jsonl(entries, path):
    """Write entries one per line, fields in FIELD_ORDER, sorted, stable."""
    ordered = sorted(entries, key=sort_key)
    with open(path, "w", encoding="utf-8") as fh:
        for entry in ordered:
            fh.write(json.dumps(entry.to_dict(), ensure_ascii=False) + "\n")
    return {"path": str(path), "count": len(ordered)}


def read_entries_jsonl(path):
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(DatasetEntry.from_dict(json.loads(line)))
    return entries


def export_side_channel(side_changes, path):
    """Added/Deleted changes, exported for reference rather than training."""
    ordered = sorted(
        side_changes, key=lambda c: (c.repo, c.sha, c.file_path, c.anchor_line)
    )
    with open(path, "w", encoding="utf-8") as fh:
        for change in ordered:
            fh.write(
                json.dumps(changes_mod.pair_to_dict(change), ensure_ascii=False) + "\n"
            )
    return {"path": str(path), "count": len(ordered)}


def with_relevance(entry, relevance):
    return replace(entry, relevance=relevance)
