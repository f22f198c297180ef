"""Evaluation suite for generated log statements.

Scores a model response against the ground-truth method along three axes:
position (the statement slot and the surrounding code are unchanged),
verbosity level (exact and adjusted via a configurable must-adjust table),
and content (clipped word overlap, strict sentence-level BLEU without
smoothing, and precision/recall/F1 over the logged variable expressions).
Cohen's kappa for the human-review workflow lives here too, next to the
rest of the measurement code.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import javasource, logdetect
from .logdetect import LogLevel
from .prompt import build_prompt  # re-exported: the prompt is part of the eval contract
from .textops import StatementNotFound, norm_ws, remove_statement

__all__ = [
    "AdjustMatrix",
    "BleuBreakdown",
    "EvalSample",
    "MetricsReport",
    "adjusted_level_correct",
    "bleu_dm",
    "build_prompt",
    "cohens_kappa",
    "evaluate_corpus",
    "level_accuracy",
    "load_benchmark_corpus",
    "locate_generated_log",
    "message_accuracy",
    "position_accuracy",
    "tokenize_words",
    "variable_prf",
]

_SEVERITY_CLASSES = (
    frozenset({LogLevel.TRACE, LogLevel.DEBUG, LogLevel.INFO}),
    frozenset({LogLevel.WARN, LogLevel.ERROR, LogLevel.FATAL}),
)


def _severity_class(level):
    return 0 if level in _SEVERITY_CLASSES[0] else 1


@dataclass(frozen=True)
class AdjustMatrix:
    """6x6 table: cells[truth][pred] is True when the predicted level counts
    as wrong (must be adjusted). The diagonal is always False."""

    cells: tuple

    def __post_init__(self):
        if len(self.cells) != 6 or any(len(row) != 6 for row in self.cells):
            raise ValueError("adjust matrix must be 6x6")
        for level in LogLevel:
            if self.cells[level][level]:
                raise ValueError(f"diagonal cell {level.name} must be False")

    @classmethod
    def default(cls):
        """Cross-severity-class predictions must be adjusted; within-class
        substitutions (e.g. INFO vs DEBUG) pass. This default is an
        assumption and should be replaced by a reviewed table when one is
        available; load_json makes the table a config input."""
        cells = tuple(
            tuple(
                _severity_class(LogLevel(t)) != _severity_class(LogLevel(p))
                for p in range(6)
            )
            for t in range(6)
        )
        return cls(cells)

    @classmethod
    def from_dict(cls, raw):
        cells = []
        for truth in LogLevel:
            row_raw = raw[truth.name]
            cells.append(tuple(bool(row_raw[pred.name]) for pred in LogLevel))
        return cls(tuple(cells))

    @classmethod
    def load_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self):
        return {
            truth.name: {pred.name: bool(self.cells[truth][pred]) for pred in LogLevel}
            for truth in LogLevel
        }

    def must_adjust(self, truth, pred):
        return self.cells[truth][pred]


def level_accuracy(truth, pred):
    """1 iff the predicted level equals the truth; unknown prediction scores 0."""
    if pred is None:
        return 0
    return 1 if truth == pred else 0


def adjusted_level_correct(truth, pred, matrix):
    """1 unless the (truth, pred) cell is marked must-adjust; unknown pred is 0."""
    if pred is None:
        return 0
    return 0 if matrix.must_adjust(truth, pred) else 1


def tokenize_words(text):
    """Lowercased word tokens: split on whitespace and punctuation."""
    return re.findall(r"\w+", text.lower())


def message_accuracy(pred_text, truth_text):
    """Clipped multiset overlap of predicted words against the truth words,
    normalized by the predicted word count. Empty prediction scores 0."""
    pred_tokens = tokenize_words(pred_text)
    if not pred_tokens:
        return 0.0
    truth_counts = Counter(tokenize_words(truth_text))
    pred_counts = Counter(pred_tokens)
    hits = sum(min(count, truth_counts[tok]) for tok, count in pred_counts.items())
    return hits / len(pred_tokens)


@dataclass(frozen=True)
class BleuBreakdown:
    p_n: tuple  # clipped n-gram precisions, n = 1..4
    w_n: tuple
    c: int  # candidate length
    r: int  # reference length
    bp: float
    score: float


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_dm(candidate_tokens, reference_tokens, max_n=4):
    """Sentence-level BLEU with uniform weights and no smoothing.

    Any zero n-gram precision zeroes the score. The brevity penalty is
    exp(1 - r/c) for candidates not longer than the reference, else 1,
    so short candidates are penalized.
    """
    candidate_tokens = list(candidate_tokens)
    reference_tokens = list(reference_tokens)
    c = len(candidate_tokens)
    r = len(reference_tokens)
    w = 1.0 / max_n
    p_n = []
    for n in range(1, max_n + 1):
        total = max(c - n + 1, 0)
        if total == 0:
            p_n.append(0.0)
            continue
        ref_counts = _ngram_counts(reference_tokens, n)
        cand_counts = _ngram_counts(candidate_tokens, n)
        hits = sum(min(count, ref_counts[g]) for g, count in cand_counts.items())
        p_n.append(hits / total)
    if c == 0:
        return BleuBreakdown(tuple(p_n), (w,) * max_n, c, r, 0.0, 0.0)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    if any(p == 0.0 for p in p_n):
        score = 0.0
    else:
        score = bp * math.exp(sum(w * math.log(p) for p in p_n))
    return BleuBreakdown(tuple(p_n), (w,) * max_n, c, r, bp, score)


def variable_prf(pred_vars, truth_vars):
    """(precision, recall, F1) over variable-expression sets.

    Conventions: both empty scores (1, 1, 1); an empty prediction against a
    non-empty truth (or vice versa) scores 0 across the board.
    """
    pred = set(pred_vars)
    truth = set(truth_vars)
    if not pred and not truth:
        return (1.0, 1.0, 1.0)
    if not pred or not truth:
        return (0.0, 0.0, 0.0)
    inter = len(pred & truth)
    vp = inter / len(pred)
    vr = inter / len(truth)
    if vp + vr == 0:
        return (vp, vr, 0.0)
    return (vp, vr, 2 * vp * vr / (vp + vr))


def cohens_kappa(labels_a, labels_b):
    """Cohen's kappa for two equal-length label sequences.

    Expected agreement comes from the raters' marginal label frequencies.
    A degenerate p_e of 1 yields kappa 1 when observed agreement is also
    perfect, else 0.
    """
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise ValueError(f"label sequences differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("label sequences are empty")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    values = set(a) | set(b)
    freq_a = Counter(a)
    freq_b = Counter(b)
    p_e = sum((freq_a[v] / n) * (freq_b[v] / n) for v in values)
    if p_e >= 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def kappa_details(labels_a, labels_b):
    """kappa plus observed/expected agreement and the contingency table."""
    a = list(labels_a)
    b = list(labels_b)
    kappa = cohens_kappa(a, b)
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    values = sorted(set(a) | set(b), key=str)
    freq_a = Counter(a)
    freq_b = Counter(b)
    p_e = sum((freq_a[v] / n) * (freq_b[v] / n) for v in values)
    table = {
        str(va): {str(vb): 0 for vb in values} for va in values
    }
    for x, y in zip(a, b):
        table[str(x)][str(y)] += 1
    return {"kappa": kappa, "p_o": p_o, "p_e": p_e, "n": n, "table": table}


@dataclass(frozen=True)
class EvalSample:
    """One evaluation unit: the prompt context, the model response, and the
    ground-truth method with its target log statement."""

    id: str
    input_code: str
    response_code: str
    truth_method: str
    truth_log: logdetect.LogStatement

    def with_response(self, response_code):
        return EvalSample(
            self.id, self.input_code, response_code, self.truth_method, self.truth_log
        )


def _detect_all(code, config=None):
    """Log statements anywhere in a code snippet, with snippet-relative lines.

    Parses methods when possible; falls back to wrapping the snippet in a
    synthetic method so bare statement sequences still scan.
    """
    methods = javasource.parse_methods(code)
    found = []
    if methods:
        for m in methods:
            found.extend(logdetect.detect_log_statements(m, config))
    else:
        wrapped = "void __wrapper__() {\n" + code + "\n}"
        found = logdetect.detect_log_statements_in_text(
            wrapped, base_line=0, config=config
        ).statements
    found.sort(key=lambda s: s.line)
    return found


def locate_generated_log(sample, config=None):
    """The log statement present in the response but absent from the input.

    Absence is judged on whitespace-normalized statement text. With several
    new statements the earliest by line wins; none (or an unparseable
    response) means the sample is missing and scores zero everywhere.
    """
    if not sample.response_code.strip():
        return None
    input_norms = {
        s.normalized_text for s in _detect_all(sample.input_code, config)
    }
    candidates = [
        s
        for s in _detect_all(sample.response_code, config)
        if s.normalized_text not in input_norms
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda s: s.line)


def position_accuracy(sample, generated):
    """1 iff removing the generated statement reproduces the truth context
    (whitespace-normalized) and the statement landed in the same slot."""
    try:
        response_context = remove_statement(sample.response_code, generated.text)
        truth_context = remove_statement(sample.truth_method, sample.truth_log.text)
    except StatementNotFound:
        return 0
    if norm_ws(response_context) != norm_ws(truth_context):
        return 0
    if generated.statement_index != sample.truth_log.statement_index:
        return 0
    return 1


_METRIC_NAMES = ("PA", "LA", "AdjLA", "MA", "BLEU_DM", "VP", "VR", "VF1")


@dataclass
class MetricsReport:
    per_sample: list = field(default_factory=list)
    missing: int = 0

    @property
    def count(self):
        return len(self.per_sample)

    def mean(self, name):
        if not self.per_sample:
            return None
        return sum(s[name] for s in self.per_sample) / len(self.per_sample)

    def means(self):
        return {name: self.mean(name) for name in _METRIC_NAMES}

    def to_dict(self):
        return {
            "count": self.count,
            "missing": self.missing,
            "means": self.means(),
            "per_sample": self.per_sample,
        }

    def write_json(self, path):
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )


def _zero_scores(sample_id):
    scores = {name: 0.0 for name in _METRIC_NAMES}
    scores["id"] = sample_id
    scores["missing"] = True
    return scores


def evaluate_sample(sample, matrix, config=None):
    """Per-sample metric dict; a response with no new log statement scores 0."""
    generated = locate_generated_log(sample, config)
    if generated is None:
        return _zero_scores(sample.id)
    truth_level = LogLevel.from_name(sample.truth_log.level)
    pred_level = LogLevel.from_name(generated.level)
    bleu = bleu_dm(
        tokenize_words(generated.message_literals),
        tokenize_words(sample.truth_log.message_literals),
    )
    vp, vr, vf1 = variable_prf(
        generated.variable_exprs, sample.truth_log.variable_exprs
    )
    return {
        "id": sample.id,
        "missing": False,
        "PA": float(position_accuracy(sample, generated)),
        "LA": float(level_accuracy(truth_level, pred_level)),
        "AdjLA": float(adjusted_level_correct(truth_level, pred_level, matrix)),
        "MA": message_accuracy(
            generated.message_literals, sample.truth_log.message_literals
        ),
        "BLEU_DM": bleu.score,
        "VP": vp,
        "VR": vr,
        "VF1": vf1,
    }


def evaluate_corpus(samples, matrix, config=None):
    """Aggregate report over samples; missing responses count as zeros."""
    report = MetricsReport()
    for sample in samples:
        scores = evaluate_sample(sample, matrix, config)
        if scores["missing"]:
            report.missing += 1
        report.per_sample.append(scores)
    return report


@dataclass
class CorpusLoadSummary:
    records: int = 0
    loaded: int = 0
    skipped: list = field(default_factory=list)


def _sample_from_method(sample_id, method_text, target_line=None, config=None,
                        summary=None):
    logs = logdetect.detect_log_statements_in_text(method_text, config=config).statements
    if target_line is not None:
        logs = [s for s in logs if s.line == target_line]
    if len(logs) != 1:
        if summary is not None:
            reason = "no log statement" if not logs else "ambiguous log statements"
            summary.skipped.append(f"{sample_id}: {reason}")
        return None
    truth_log = logs[0]
    try:
        input_code = remove_statement(method_text, truth_log.text)
    except StatementNotFound:
        if summary is not None:
            summary.skipped.append(f"{sample_id}: statement not in method")
        return None
    return EvalSample(
        id=sample_id,
        input_code=input_code,
        response_code="",
        truth_method=method_text,
        truth_log=truth_log,
    )


def load_benchmark_corpus(path, fmt="jsonl", config=None):
    """EvalSamples from a benchmark corpus.

    ``jsonl``: one record per line with a ``method`` field, optional ``id``
    and ``target_line`` (1-based, selects among several log statements).
    ``dir``: a directory tree of one-method-per-file sources. Records
    without exactly one detectable target are skipped and counted.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"benchmark corpus not found: {path}")
    summary = CorpusLoadSummary()
    samples = []
    if fmt == "dir":
        for fpath in sorted(p for p in path.rglob("*") if p.is_file()):
            summary.records += 1
            sample = _sample_from_method(
                fpath.relative_to(path).as_posix(),
                fpath.read_text(encoding="utf-8"),
                config=config,
                summary=summary,
            )
            if sample:
                samples.append(sample)
    elif fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                summary.records += 1
                record = json.loads(line)
                sample = _sample_from_method(
                    str(record.get("id", lineno)),
                    record["method"],
                    target_line=record.get("target_line"),
                    config=config,
                    summary=summary,
                )
                if sample:
                    samples.append(sample)
    else:
        raise ValueError(f"unknown corpus format: {fmt!r}")
    summary.loaded = len(samples)
    return samples, summary
