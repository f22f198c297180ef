"""Detection of logger invocation statements inside Java methods.

A log statement is an invocation ``receiver.callee(args);`` where the
callee is a verbosity-level name (trace/debug/info/warn/error/fatal, case
insensitive) or one of the configured extra callees, and the receiver
expression matches the configured logger-receiver pattern. Detection runs
on the flattened statement chunks produced by :mod:`aucad.javasource`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from . import javasource
from .javasource import IDENT, PUNCT, STRING

UNKNOWN = "UNKNOWN"


class LogLevel(enum.IntEnum):
    """Verbosity levels ordered from least to most severe."""

    TRACE = 0
    DEBUG = 1
    INFO = 2
    WARN = 3
    ERROR = 4
    FATAL = 5

    @classmethod
    def from_name(cls, name):
        """Level for a name like 'warn'; None for unknown/UNKNOWN."""
        if name is None:
            return None
        try:
            return cls[name.upper()]
        except KeyError:
            return None


LEVEL_NAMES = tuple(level.name for level in LogLevel)

DEFAULT_RECEIVER_PATTERN = r"(?i)^(log|logger|s_log|.*logger)$"
DEFAULT_EXTRA_CALLEES = ("log", "severe")


@dataclass(frozen=True)
class DetectorConfig:
    receiver_pattern: str = DEFAULT_RECEIVER_PATTERN
    extra_callees: tuple = DEFAULT_EXTRA_CALLEES

    def callee_names(self):
        return tuple(n.lower() for n in LEVEL_NAMES) + tuple(
            n.lower() for n in self.extra_callees
        )


@dataclass(frozen=True)
class LogStatement:
    """One detected log invocation, with parsed message/variable parts."""

    text: str
    level: str  # TRACE..FATAL or UNKNOWN
    logger_expr: str
    message_literals: str
    variable_exprs: tuple
    line: int  # 1-based line within the enclosing file
    statement_index: int  # 0-based among the enclosing method's statements
    sole_in_conditional: bool = False

    @property
    def normalized_text(self):
        return " ".join(self.text.split())


def _norm_expr(text):
    return " ".join(text.split())


def _string_inner(token_text):
    if token_text.startswith('"""') and token_text.endswith('"""'):
        return token_text[3:-3]
    return token_text[1:-1]


def _split_top_level(tokens, sep_text):
    """Split a token list on a separator at paren/bracket depth zero."""
    groups = []
    current = []
    depth = 0
    for t in tokens:
        if t.kind == PUNCT and t.text in "([{":
            depth += 1
        elif t.kind == PUNCT and t.text in ")]}":
            depth -= 1
        if depth == 0 and t.kind == PUNCT and t.text == sep_text:
            groups.append(current)
            current = []
        else:
            current.append(t)
    groups.append(current)
    return groups


def _parse_arguments(arg_tokens, src):
    """Split call arguments into (message_literals, variable_exprs)."""
    literals = []
    variables = []
    if not arg_tokens:
        return "", ()
    for arg in _split_top_level(arg_tokens, ","):
        if not arg:
            continue
        operands = _split_top_level(arg, "+")
        for op in operands:
            if not op:
                continue
            if len(op) == 1 and op[0].kind == STRING:
                literals.append(_string_inner(op[0].text))
            else:
                variables.append(_norm_expr(src[op[0].pos : op[-1].end]))
    return "".join(literals), tuple(variables)


def _receiver_start(tokens, dot_idx):
    """Walk a call chain backwards from the '.' before the callee; return the
    index of the receiver's first token, or None."""
    j = dot_idx - 1
    if j < 0:
        return None
    while True:
        t = tokens[j]
        if t.kind == PUNCT and t.text == ")":
            depth = 0
            while j >= 0:
                if tokens[j].text == ")":
                    depth += 1
                elif tokens[j].text == "(":
                    depth -= 1
                    if depth == 0:
                        break
                j -= 1
            if j < 0:
                return None
            j -= 1
            if j < 0 or tokens[j].kind != IDENT:
                return None
        elif t.kind != IDENT:
            return None
        # tokens[j] is the chain segment head; extend left over '.'
        if j - 1 >= 0 and tokens[j - 1].kind == PUNCT and tokens[j - 1].text == ".":
            j -= 2
            continue
        return j


def _find_calls(tokens, src, receiver_re, callees):
    """All qualifying log calls in one statement chunk; returns list of
    (receiver_text, level, args_tokens, start_pos, end_pos)."""
    found = []
    for k, tok in enumerate(tokens):
        if not (tok.kind == PUNCT and tok.text == "."):
            continue
        if k + 2 >= len(tokens):
            continue
        callee_tok, paren_tok = tokens[k + 1], tokens[k + 2]
        if callee_tok.kind != IDENT or callee_tok.text.lower() not in callees:
            continue
        if not (paren_tok.kind == PUNCT and paren_tok.text == "("):
            continue
        start_idx = _receiver_start(tokens, k)
        if start_idx is None:
            continue
        receiver_text = _norm_expr(src[tokens[start_idx].pos : tok.pos])
        if not receiver_re.match(receiver_text):
            continue
        depth = 0
        close_idx = None
        for idx in range(k + 2, len(tokens)):
            if tokens[idx].kind == PUNCT and tokens[idx].text == "(":
                depth += 1
            elif tokens[idx].kind == PUNCT and tokens[idx].text == ")":
                depth -= 1
                if depth == 0:
                    close_idx = idx
                    break
        if close_idx is None:
            continue
        end_pos = tokens[close_idx].end
        for idx in range(close_idx + 1, len(tokens)):
            if tokens[idx].kind == PUNCT and tokens[idx].text == ";":
                end_pos = tokens[idx].end
                break
        arg_tokens = tokens[k + 3 : close_idx]
        level = LogLevel.from_name(callee_tok.text)
        found.append(
            (
                receiver_text,
                level.name if level is not None else UNKNOWN,
                arg_tokens,
                tokens[start_idx].pos,
                end_pos,
            )
        )
    return found


@dataclass
class DetectionResult:
    statements: list = field(default_factory=list)
    ambiguous_count: int = 0


def detect_log_statements_in_text(method_text, base_line=1, config=None):
    """Detect log statements inside a method's source text.

    ``base_line`` is the file line of the method text's first line, so the
    reported statement lines are file coordinates. Statements with more than
    one qualifying call are ambiguous and excluded (counted).
    """
    config = config or DetectorConfig()
    receiver_re = re.compile(config.receiver_pattern)
    callees = set(config.callee_names())
    statements, blocks = javasource.split_statements(method_text)
    result = DetectionResult()
    for stmt in statements:
        try:
            tokens = javasource.tokenize(stmt.text)
        except javasource.JavaParseError:
            continue
        hits = _find_calls(tokens, stmt.text, receiver_re, callees)
        if not hits:
            continue
        if len(hits) > 1:
            result.ambiguous_count += 1
            continue
        receiver, level, arg_tokens, start_pos, end_pos = hits[0]
        text = stmt.text[start_pos:end_pos]
        message, variables = _parse_arguments(arg_tokens, stmt.text)
        line_in_method = stmt.line + stmt.text.count("\n", 0, start_pos)
        result.statements.append(
            LogStatement(
                text=text,
                level=level,
                logger_expr=receiver,
                message_literals=message,
                variable_exprs=variables,
                line=base_line + line_in_method - 1,
                statement_index=stmt.index,
                sole_in_conditional=javasource.is_sole_conditional_statement(
                    stmt, blocks
                ),
            )
        )
    result.statements.sort(key=lambda s: s.line)
    return result


def detect_log_statements(method, config=None):
    """Log statements of a MethodSpan, ordered by line (file coordinates)."""
    return detect_log_statements_in_text(
        method.source_text, base_line=method.start_line, config=config
    ).statements
