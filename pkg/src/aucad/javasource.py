"""Lightweight structural scanner for Java source.

Extracts method/constructor spans and splits method bodies into statement
chunks without a full grammar: a comment/string-aware tokenizer feeds a
brace-matching pass that classifies each block as a type body, a method
body, or other (control flow, initializers, lambdas). That is enough to
recover method boundaries, exact source slices, and a stable statement
numbering, which is all the downstream diff analysis and position metrics
need.

Known blind spots, accepted as noise: enum constant bodies are classified
as methods, and statements nested inside anonymous-class arguments are not
enumerated. Both sides of any comparison go through the same scanner, so
relative results stay consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

IDENT = "ident"
STRING = "string"
CHAR = "char"
NUMBER = "number"
PUNCT = "punct"

_TYPE_KEYWORDS = frozenset({"class", "interface", "enum", "record"})
_IDENT_START = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_$"
)
_IDENT_CONT = _IDENT_START | frozenset("0123456789")


class JavaParseError(ValueError):
    """Raised for source the scanner cannot make sense of."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int
    line: int

    @property
    def end(self):
        return self.pos + len(self.text)


def tokenize(src):
    """Tokenize Java source, skipping comments; literals become single tokens."""
    tokens = []
    i, n = 0, len(src)
    line = 1
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r\f":
            i += 1
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            i = n if j < 0 else j
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j < 0:
                raise JavaParseError("unterminated block comment", line)
            line += src.count("\n", i, j + 2)
            i = j + 2
            continue
        if src.startswith('"""', i):
            j = i + 3
            while j < n:
                if src[j] == "\\":
                    j += 2
                    continue
                if src.startswith('"""', j):
                    break
                j += 1
            else:
                raise JavaParseError("unterminated text block", line)
            text = src[i : j + 3]
            tokens.append(Token(STRING, text, i, line))
            line += text.count("\n")
            i = j + 3
            continue
        if c == '"':
            j = i + 1
            while j < n and src[j] not in '"\n':
                if src[j] == "\\":
                    j += 1
                j += 1
            if j >= n or src[j] != '"':
                raise JavaParseError("unterminated string literal", line)
            tokens.append(Token(STRING, src[i : j + 1], i, line))
            i = j + 1
            continue
        if c == "'":
            j = i + 1
            while j < n and src[j] not in "'\n":
                if src[j] == "\\":
                    j += 1
                j += 1
            if j >= n or src[j] != "'":
                raise JavaParseError("unterminated char literal", line)
            tokens.append(Token(CHAR, src[i : j + 1], i, line))
            i = j + 1
            continue
        if c in _IDENT_START:
            j = i + 1
            while j < n and src[j] in _IDENT_CONT:
                j += 1
            tokens.append(Token(IDENT, src[i:j], i, line))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and (src[j].isalnum() or src[j] in "._"):
                # crude but sufficient: covers hex, underscores, suffixes
                if src[j] == "." and not (j + 1 < n and src[j + 1].isdigit()):
                    break
                j += 1
            tokens.append(Token(NUMBER, src[i:j], i, line))
            i = j
            continue
        tokens.append(Token(PUNCT, c, i, line))
        i += 1
    return tokens


@dataclass(frozen=True)
class MethodSpan:
    """One method or constructor declaration with its exact source slice."""

    file_path: str
    name: str
    signature: str
    start_line: int
    end_line: int
    source_text: str


@dataclass
class ParseResult:
    methods: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def _strip_annotations(header):
    """Drop @Name and @Name(...) token runs from a header token list."""
    out = []
    i = 0
    while i < len(header):
        t = header[i]
        if t.kind == PUNCT and t.text == "@" and i + 1 < len(header):
            i += 2  # skip '@' and the annotation name
            if i < len(header) and header[i].text == "(":
                depth = 0
                while i < len(header):
                    if header[i].text == "(":
                        depth += 1
                    elif header[i].text == ")":
                        depth -= 1
                        if depth == 0:
                            i += 1
                            break
                    i += 1
            continue
        out.append(t)
        i += 1
    return out


def _tidy_signature(text):
    parts = " ".join(text.split())
    for a, b in ((" ,", ","), ("( ", "("), (" )", ")"), (" .", "."), (". ", "."),
                 ("< ", "<"), (" >", ">"), (" <", "<"), ("[ ", "["), (" ]", "]")):
        while a in parts:
            parts = parts.replace(a, b)
    return parts


def _match_method_header(header, src):
    """If a type-body block header looks like a method/constructor, return
    (name, signature, start_line); otherwise None. The start line covers
    leading annotations."""
    if not header:
        return None
    decl_start_line = header[0].line
    header = _strip_annotations(header)
    if not header:
        return None
    # locate the parameter-list '(' : first '(' in the header
    open_idx = None
    for idx, t in enumerate(header):
        if t.kind == PUNCT and t.text == "(":
            open_idx = idx
            break
    if open_idx is None or open_idx == 0:
        return None
    name_tok = header[open_idx - 1]
    if name_tok.kind != IDENT or name_tok.text in _TYPE_KEYWORDS:
        return None
    if name_tok.text in ("new", "if", "for", "while", "switch", "catch",
                         "synchronized", "return", "super", "this"):
        return None
    depth = 0
    close_idx = None
    for idx in range(open_idx, len(header)):
        t = header[idx]
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
            if depth == 0:
                close_idx = idx
                break
    if close_idx is None:
        return None
    # after the parameter list only throws-clauses (or array dims) may remain
    for t in header[close_idx + 1 :]:
        if t.kind == IDENT and t.text == "throws":
            continue
        if t.kind == IDENT or (t.kind == PUNCT and t.text in ",.[]"):
            continue
        return None
    sig_text = src[name_tok.pos : header[close_idx].end]
    return name_tok.text, _tidy_signature(sig_text), decl_start_line


def _header_flags(header):
    has_type_kw = False
    has_arrow = False
    has_new = False
    has_assign = False
    depth = 0
    prev = None
    for t in header:
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
        elif depth == 0:
            if t.kind == IDENT and t.text in _TYPE_KEYWORDS:
                has_type_kw = True
            elif t.kind == IDENT and t.text == "new":
                has_new = True
            elif t.text == ">" and prev is not None and prev.text == "-" \
                    and prev.end == t.pos:
                has_arrow = True
            elif t.text == "=" and (prev is None or prev.text not in "=<>!+-*/&|^%"):
                has_assign = True
        prev = t
    return has_type_kw, has_arrow, has_new, has_assign


def scan_methods(src, file_path=""):
    """Find all method/constructor declarations with bodies, in source order.

    The top level is treated as a type body, so both whole files and bare
    method snippets parse. Returns a ParseResult; scanner-level failures
    yield an empty method list plus a diagnostic instead of raising.
    """
    result = ParseResult()
    try:
        tokens = tokenize(src)
    except JavaParseError as exc:
        result.diagnostics.append(str(exc))
        return result
    lines = src.splitlines()
    # stack entries: (block_kind, method_info or None)
    stack = []
    header = []
    pending = []  # methods opened but not yet closed: (name, sig, start_line)

    def context():
        return stack[-1][0] if stack else "type"

    for tok in tokens:
        if tok.kind == PUNCT and tok.text == "{":
            kind = "other"
            info = None
            has_type_kw, has_arrow, has_new, has_assign = _header_flags(header)
            if has_type_kw:
                kind = "type"
            elif has_new and header and header[-1].text == ")":
                # anonymous class body: the header ends with the ctor call
                kind = "type"
            elif has_arrow or has_assign:
                kind = "other"
            elif context() == "type":
                m = _match_method_header(header, src)
                if m is not None:
                    kind = "method"
                    info = m
            stack.append((kind, info))
            header = []
        elif tok.kind == PUNCT and tok.text == "}":
            if not stack:
                result.diagnostics.append(
                    f"unbalanced closing brace at line {tok.line}"
                )
                result.methods = []
                return result
            kind, info = stack.pop()
            if kind == "method":
                name, sig, start_line = info
                end_line = tok.line
                source_text = "\n".join(lines[start_line - 1 : end_line])
                result.methods.append(
                    MethodSpan(file_path, name, sig, start_line, end_line,
                               source_text)
                )
            header = []
        elif tok.kind == PUNCT and tok.text == ";":
            header = []
        else:
            header.append(tok)
    if stack:
        result.diagnostics.append("unbalanced braces at end of file")
        result.methods = []
        return result
    result.methods.sort(key=lambda m: (m.start_line, m.end_line))
    return result


def parse_methods(file_content, file_path=""):
    """MethodSpans for every method/constructor with a body, in source order."""
    return scan_methods(file_content, file_path).methods


@dataclass(frozen=True)
class Statement:
    """One ';'-terminated statement chunk inside a method body."""

    text: str
    start: int  # offset into the method source
    end: int
    line: int  # 1-based line within the method source
    index: int  # 0-based position among the method's statements
    block_id: int  # innermost enclosing block
    starts_with_if: bool


@dataclass
class _Block:
    header_first: str
    header_line: int = 0  # 1-based line (within the method text) of the header
    stmt_count: int = 0
    child_blocks: int = 0
    stmt_indices: list = field(default_factory=list)


def split_statements(method_text):
    """Split a method's body into flattened statement chunks.

    A statement is whatever sits between the previous ``;``/``{``/``}`` and
    the next ``;`` at parenthesis depth zero. Returns (statements, blocks)
    where blocks maps block_id -> _Block for conditional-structure queries.
    Statement ``line`` values are relative to the method text.
    """
    tokens = tokenize(method_text)
    # the body opens at the first '{' at brace depth 0
    statements = []
    blocks = {0: _Block(header_first="<body>")}
    stack = [0]
    next_block_id = 1
    chunk_start = None
    chunk_line = None
    chunk_first_ident = None
    paren_depth = 0
    body_open = None
    depth = 0
    for tok in tokens:
        if body_open is None:
            if tok.kind == PUNCT and tok.text == "{":
                body_open = tok.pos
            continue
        if tok.kind == PUNCT and tok.text == "(":
            paren_depth += 1
        elif tok.kind == PUNCT and tok.text == ")":
            paren_depth -= 1
        if tok.kind == PUNCT and tok.text == "{" and paren_depth == 0:
            first = chunk_first_ident or ""
            blocks[next_block_id] = _Block(
                header_first=first,
                header_line=chunk_line if chunk_start is not None else tok.line,
            )
            blocks[stack[-1]].child_blocks += 1
            stack.append(next_block_id)
            next_block_id += 1
            depth += 1
            chunk_start = None
            chunk_first_ident = None
            continue
        if tok.kind == PUNCT and tok.text == "}" and paren_depth == 0:
            if len(stack) > 1:
                stack.pop()
            depth -= 1
            chunk_start = None
            chunk_first_ident = None
            if depth < 0:
                break  # closed the method body
            continue
        if chunk_start is None and not (tok.kind == PUNCT and tok.text == ";"):
            chunk_start = tok.pos
            chunk_line = tok.line
            chunk_first_ident = tok.text if tok.kind == IDENT else None
        if tok.kind == PUNCT and tok.text == ";" and paren_depth == 0:
            if chunk_start is not None:
                text = method_text[chunk_start : tok.end]
                statements.append(
                    Statement(
                        text=text,
                        start=chunk_start,
                        end=tok.end,
                        line=chunk_line,
                        index=len(statements),
                        block_id=stack[-1],
                        starts_with_if=chunk_first_ident in ("if", "else"),
                    )
                )
                blocks[stack[-1]].stmt_count += 1
                blocks[stack[-1]].stmt_indices.append(len(statements) - 1)
            chunk_start = None
            chunk_first_ident = None
    return statements, blocks


def is_sole_conditional_statement(stmt, blocks):
    """True when the statement is the only content of an if/else block, or a
    braceless ``if (...) stmt;`` form."""
    if stmt.starts_with_if:
        return True
    block = blocks.get(stmt.block_id)
    if block is None:
        return False
    if block.header_first not in ("if", "else"):
        return False
    return block.stmt_count == 1 and block.child_blocks == 0
