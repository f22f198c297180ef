"""Small text normalization helpers shared across the pipeline."""

from __future__ import annotations


class StatementNotFound(ValueError):
    """A statement text could not be located inside its method text."""


def norm_ws(text):
    """Collapse every whitespace run to a single space and strip."""
    return " ".join(text.split())


def strip_lines(text):
    """Trim trailing whitespace and collapse leading whitespace per line."""
    return "\n".join(line.strip() for line in text.splitlines())


def remove_statement(method_text, stmt_text):
    """Method text with one statement spliced out.

    Lines fully occupied by the statement are dropped; a statement sharing
    its line with other code is cut out in place. Raises StatementNotFound
    when the statement does not occur in the method.
    """
    idx = method_text.find(stmt_text)
    if idx < 0:
        raise StatementNotFound("log statement not found in method text")
    end = idx + len(stmt_text)
    line_start = method_text.rfind("\n", 0, idx) + 1
    line_end = method_text.find("\n", end)
    if line_end < 0:
        line_end = len(method_text)
    prefix = method_text[line_start:idx]
    suffix = method_text[end:line_end]
    if prefix.strip() == "" and suffix.strip() == "":
        cut_end = min(line_end + 1, len(method_text))
        return method_text[:line_start] + method_text[cut_end:]
    return method_text[:idx] + method_text[end:]
