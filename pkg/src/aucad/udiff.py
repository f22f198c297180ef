"""Unified diff parsing and (reverse) application.

The parser keeps exact old/new line coordinates so hunks can be applied
forward (old -> new) or in reverse (new -> old). Reverse application is
how pre-change file contents are reconstructed from a commit's diff plus
its post-change files, without fetching parent blobs.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")

CONTEXT = "context"
REMOVED = "removed"
ADDED = "added"

_TAG_BY_PREFIX = {" ": CONTEXT, "-": REMOVED, "+": ADDED}


class DiffParseError(ValueError):
    """Raised when diff text cannot be parsed; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"{message} (diff line {line_no})"
        super().__init__(message)
        self.line_no = line_no


class PatchError(ValueError):
    """Raised when a hunk does not apply cleanly to the given content."""


@dataclass(frozen=True)
class DiffHunk:
    """One hunk of a unified diff, with 1-based old/new start coordinates."""

    file_path: str
    old_start: int
    old_count: int
    new_start: int
    new_count: int
    lines: tuple = field(default_factory=tuple)  # of (tag, text) pairs

    def removed_old_lines(self):
        """Old-file line numbers carrying a removed line."""
        out = []
        old = self.old_start
        for tag, _ in self.lines:
            if tag == REMOVED:
                out.append(old)
            if tag in (CONTEXT, REMOVED):
                old += 1
        return out

    def added_new_lines(self):
        """New-file line numbers carrying an added line."""
        out = []
        new = self.new_start
        for tag, _ in self.lines:
            if tag == ADDED:
                out.append(new)
            if tag in (CONTEXT, ADDED):
                new += 1
        return out


def _strip_git_prefix(path):
    if path.startswith(("a/", "b/")):
        return path[2:]
    return path


def parse_unified_diff(diff_text):
    """Parse unified diff text into a list of DiffHunk, grouped in diff order.

    Recognizes git-style headers (``diff --git``, ``index``, mode lines),
    ``---``/``+++`` file lines, and ``\\ No newline at end of file`` markers
    (attached to the preceding line, newline stripped). Raises DiffParseError
    on malformed hunk headers or when nothing parseable is found.
    """
    hunks = []
    lines = diff_text.splitlines()
    current_path = None
    old_path = None
    i = 0
    saw_file_header = False
    while i < len(lines):
        line = lines[i]
        if line.startswith("diff --git"):
            current_path = None
            old_path = None
            i += 1
            continue
        if line.startswith("--- "):
            old_path = line[4:].split("\t")[0].strip()
            i += 1
            continue
        if line.startswith("+++ "):
            new_path = line[4:].split("\t")[0].strip()
            if new_path == "/dev/null":
                current_path = _strip_git_prefix(old_path) if old_path else None
            else:
                current_path = _strip_git_prefix(new_path)
            saw_file_header = True
            i += 1
            continue
        if line.startswith("@@"):
            m = HUNK_HEADER.match(line)
            if not m:
                raise DiffParseError(f"malformed hunk header: {line!r}", i + 1)
            if current_path is None:
                raise DiffParseError("hunk before any +++/--- file header", i + 1)
            old_start = int(m.group(1))
            old_count = int(m.group(2)) if m.group(2) is not None else 1
            new_start = int(m.group(3))
            new_count = int(m.group(4)) if m.group(4) is not None else 1
            i += 1
            body = []
            seen_old = seen_new = 0
            while i < len(lines) and (seen_old < old_count or seen_new < new_count):
                raw = lines[i]
                if raw.startswith("\\"):
                    i += 1
                    continue
                if raw == "":
                    # some tools emit a bare empty line for an empty context line
                    raw = " "
                tag = _TAG_BY_PREFIX.get(raw[0])
                if tag is None:
                    raise DiffParseError(f"unexpected line in hunk body: {raw!r}", i + 1)
                body.append((tag, raw[1:]))
                if tag in (CONTEXT, REMOVED):
                    seen_old += 1
                if tag in (CONTEXT, ADDED):
                    seen_new += 1
                i += 1
            if seen_old != old_count or seen_new != new_count:
                raise DiffParseError(
                    f"hunk body does not match counts -{old_count}/+{new_count}", i
                )
            hunks.append(
                DiffHunk(
                    file_path=current_path,
                    old_start=old_start,
                    old_count=old_count,
                    new_start=new_start,
                    new_count=new_count,
                    lines=tuple(body),
                )
            )
            continue
        i += 1
    if not hunks and not saw_file_header and diff_text.strip():
        raise DiffParseError("no unified diff content found", 1)
    return hunks


def hunks_by_file(hunks):
    """Group hunks per file path, preserving diff order of files and hunks."""
    grouped = {}
    for h in hunks:
        grouped.setdefault(h.file_path, []).append(h)
    return grouped


def apply_hunks(content, hunks, reverse=False):
    """Apply hunks of one file to ``content``; with reverse=True undo them.

    Context and removed (added, when reversed) lines are checked against the
    input; a mismatch raises PatchError rather than producing silent garbage.
    """
    src_lines = content.splitlines()
    out = []
    # position in the source being consumed, 0-based
    pos = 0
    for h in hunks:
        start = h.new_start if reverse else h.old_start
        count = h.new_count if reverse else h.old_count
        # a zero-count side names the line *before* the change, not its first line
        start = start if count == 0 else start - 1
        if start < pos:
            raise PatchError(f"overlapping hunks at {h.file_path}:{start + 1}")
        out.extend(src_lines[pos:start])
        pos = start
        for tag, text in h.lines:
            if reverse:
                tag = {ADDED: REMOVED, REMOVED: ADDED, CONTEXT: CONTEXT}[tag]
            if tag == CONTEXT:
                if pos >= len(src_lines) or src_lines[pos] != text:
                    got = src_lines[pos] if pos < len(src_lines) else "<eof>"
                    raise PatchError(
                        f"context mismatch at {h.file_path}:{pos + 1}: "
                        f"expected {text!r}, got {got!r}"
                    )
                out.append(text)
                pos += 1
            elif tag == REMOVED:
                if pos >= len(src_lines) or src_lines[pos] != text:
                    got = src_lines[pos] if pos < len(src_lines) else "<eof>"
                    raise PatchError(
                        f"removed-line mismatch at {h.file_path}:{pos + 1}: "
                        f"expected {text!r}, got {got!r}"
                    )
                pos += 1
            else:  # ADDED
                out.append(text)
    out.extend(src_lines[pos:])
    text = "\n".join(out)
    if out:
        text += "\n"
    return text


def make_diff(before, after, path):
    """Produce unified diff text between two file contents (test/fixture helper)."""
    lines = difflib.unified_diff(
        before.splitlines(keepends=True),
        after.splitlines(keepends=True),
        fromfile=f"a/{path}",
        tofile=f"b/{path}",
    )
    out = []
    for ln in lines:
        if not ln.endswith("\n"):
            ln += "\n"
        out.append(ln)
    return "".join(out)
