"""Aligning commit diffs with per-method log statements.

For every Java file in a bundle's diff the pre-change content is
reconstructed by reverse-applying the hunks to the post-change file, both
sides are parsed into methods, and log statements touched by the diff are
paired: removed and added statements in the same method with the same
logger receiver pair into Modified changes (nearest line distance, greedy
stable matching); leftovers become Deleted or Added. When the changed
statement is the sole content of a conditional the pair is flagged so the
guard is treated as part of the logging context downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import javasource, logdetect, udiff

MODIFIED = "Modified"
ADDED = "Added"
DELETED = "Deleted"

METHOD_ONLY = "MethodOnly"
CONDITIONAL_EXPANDED = "ConditionalExpanded"


@dataclass(frozen=True)
class LogChangePair:
    kind: str  # Modified | Added | Deleted
    before: logdetect.LogStatement | None
    after: logdetect.LogStatement | None
    method_before: str
    method_after: str
    context_rule: str
    repo: str
    sha: str
    issue_key: str
    file_path: str = ""
    method_signature: str = ""

    @property
    def anchor_line(self):
        stmt = self.after or self.before
        return stmt.line if stmt else 0


def _statement_to_dict(stmt):
    if stmt is None:
        return None
    return {
        "text": stmt.text,
        "level": stmt.level,
        "logger_expr": stmt.logger_expr,
        "message_literals": stmt.message_literals,
        "variable_exprs": list(stmt.variable_exprs),
        "line": stmt.line,
        "statement_index": stmt.statement_index,
        "sole_in_conditional": stmt.sole_in_conditional,
    }


def _statement_from_dict(raw):
    if raw is None:
        return None
    return logdetect.LogStatement(
        text=raw["text"],
        level=raw["level"],
        logger_expr=raw["logger_expr"],
        message_literals=raw["message_literals"],
        variable_exprs=tuple(raw["variable_exprs"]),
        line=raw["line"],
        statement_index=raw["statement_index"],
        sole_in_conditional=raw.get("sole_in_conditional", False),
    )


def pair_to_dict(pair):
    return {
        "kind": pair.kind,
        "repo": pair.repo,
        "sha": pair.sha,
        "issue_key": pair.issue_key,
        "file_path": pair.file_path,
        "method_signature": pair.method_signature,
        "context_rule": pair.context_rule,
        "before": _statement_to_dict(pair.before),
        "after": _statement_to_dict(pair.after),
        "method_before": pair.method_before,
        "method_after": pair.method_after,
    }


def pair_from_dict(raw):
    return LogChangePair(
        kind=raw["kind"],
        before=_statement_from_dict(raw.get("before")),
        after=_statement_from_dict(raw.get("after")),
        method_before=raw.get("method_before", ""),
        method_after=raw.get("method_after", ""),
        context_rule=raw.get("context_rule", METHOD_ONLY),
        repo=raw["repo"],
        sha=raw["sha"],
        issue_key=raw.get("issue_key", ""),
        file_path=raw.get("file_path", ""),
        method_signature=raw.get("method_signature", ""),
    )


@dataclass
class ExtractionSummary:
    bundles: int = 0
    java_files: int = 0
    skipped_non_java: int = 0
    parse_failures: list = field(default_factory=list)
    pairs: int = 0

    def to_dict(self):
        return {
            "bundles": self.bundles,
            "java_files": self.java_files,
            "skipped_non_java": self.skipped_non_java,
            "parse_failures": self.parse_failures,
            "pairs": self.pairs,
        }


def _stmt_lines(stmt):
    return range(stmt.line, stmt.line + stmt.text.count("\n") + 1)


def _changed_statements(methods, changed_lines, config):
    """(method, [changed log statements]) for statements touching changed lines."""
    out = []
    for m in methods:
        logs = logdetect.detect_log_statements(m, config)
        hits = [s for s in logs if any(ln in changed_lines for ln in _stmt_lines(s))]
        out.append((m, hits))
    return out


def _context_rule(stmt):
    return CONDITIONAL_EXPANDED if stmt.sole_in_conditional else METHOD_ONLY


def _match_modified(removed, added, m_pre, m_post):
    """Greedy stable matching: same receiver first, nearest in-method line."""
    candidates = []
    for ri, r in enumerate(removed):
        for ai, a in enumerate(added):
            if r.logger_expr != a.logger_expr:
                continue
            dist = abs((r.line - m_pre.start_line) - (a.line - m_post.start_line))
            candidates.append((dist, r.line, a.line, ri, ai))
    candidates.sort()
    used_r, used_a = set(), set()
    pairs = []
    for _, _, _, ri, ai in candidates:
        if ri in used_r or ai in used_a:
            continue
        used_r.add(ri)
        used_a.add(ai)
        pairs.append((removed[ri], added[ai]))
    rest_r = [r for i, r in enumerate(removed) if i not in used_r]
    rest_a = [a for i, a in enumerate(added) if i not in used_a]
    return pairs, rest_r, rest_a


def extract_log_changes(bundle, config=None, summary=None):
    """All log statement changes in one commit bundle, deterministically
    ordered by (repo, sha, file_path, line)."""
    if summary is None:
        summary = ExtractionSummary()
    summary.bundles += 1
    results = []
    grouped = udiff.hunks_by_file(udiff.parse_unified_diff(bundle.diff_text))
    for path, hunks in grouped.items():
        if not path.endswith(".java"):
            summary.skipped_non_java += 1
            continue
        summary.java_files += 1
        post_content = bundle.files_after.get(path, "")
        try:
            pre_content = udiff.apply_hunks(post_content, hunks, reverse=True)
        except udiff.PatchError as exc:
            summary.parse_failures.append(f"{path}: {exc}")
            continue
        pre_parse = javasource.scan_methods(pre_content, path)
        post_parse = javasource.scan_methods(post_content, path)
        if pre_parse.diagnostics or post_parse.diagnostics:
            summary.parse_failures.extend(
                f"{path}: {d}" for d in pre_parse.diagnostics + post_parse.diagnostics
            )
            continue
        removed_lines = set()
        added_lines = set()
        for h in hunks:
            removed_lines.update(h.removed_old_lines())
            added_lines.update(h.added_new_lines())
        pre_changed = _changed_statements(pre_parse.methods, removed_lines, config)
        post_changed = _changed_statements(post_parse.methods, added_lines, config)

        def index_by_sig(changed):
            # key by (signature, nth occurrence) so same-named methods in
            # different nested classes cannot collide
            counts = {}
            out = {}
            for m, hits in changed:
                n = counts.get(m.signature, 0)
                counts[m.signature] = n + 1
                out[(m.signature, n)] = (m, hits)
            return out

        pre_by_sig = index_by_sig(pre_changed)
        post_by_sig = index_by_sig(post_changed)

        def emit(kind, before, after, m_pre, m_post):
            stmt = after or before
            results.append(
                LogChangePair(
                    kind=kind,
                    before=before,
                    after=after,
                    method_before=m_pre.source_text if m_pre else "",
                    method_after=m_post.source_text if m_post else "",
                    context_rule=_context_rule(stmt),
                    repo=bundle.repo,
                    sha=bundle.sha,
                    issue_key=bundle.issue_key,
                    file_path=path,
                    method_signature=(m_post or m_pre).signature,
                )
            )

        for sig, (m_pre, removed) in pre_by_sig.items():
            if sig in post_by_sig:
                m_post, added = post_by_sig[sig]
                pairs, rest_r, rest_a = _match_modified(removed, added, m_pre, m_post)
                for r, a in pairs:
                    emit(MODIFIED, r, a, m_pre, m_post)
                for r in rest_r:
                    emit(DELETED, r, None, m_pre, m_post)
                for a in rest_a:
                    emit(ADDED, None, a, m_pre, m_post)
            else:
                for r in removed:
                    emit(DELETED, r, None, m_pre, None)
        for sig, (m_post, added) in post_by_sig.items():
            if sig not in pre_by_sig:
                for a in added:
                    emit(ADDED, None, a, None, m_post)
    results.sort(key=lambda p: (p.repo, p.sha, p.file_path, p.anchor_line))
    summary.pairs += len(results)
    return results


def extract_all(bundles, config=None):
    """Changes across bundles, merged deterministically."""
    summary = ExtractionSummary()
    all_pairs = []
    for bundle in sorted(bundles, key=lambda b: (b.repo, b.sha)):
        all_pairs.extend(extract_log_changes(bundle, config, summary))
    all_pairs.sort(key=lambda p: (p.repo, p.sha, p.file_path, p.anchor_line))
    return all_pairs, summary


def write_changes_jsonl(pairs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_dict(pair), ensure_ascii=False) + "\n")


def read_changes_jsonl(path):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(pair_from_dict(json.loads(line)))
    return pairs
