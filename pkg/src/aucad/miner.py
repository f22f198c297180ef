"""Mining log-related issues from a Jira-style tracker.

Candidate issues are selected by keyword matches on the issue summary,
restricted to configured issue types and a resolved-date window. Phrases
like "log in" that merely contain a keyword are excluded: a summary
matches only if at least one keyword occurrence falls outside every
exclusion-phrase occurrence. Matching is word-boundary-aware for keywords
and substring-based for phrases, both on the lowercased title.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field

DEFAULT_INCLUDE_KEYWORDS = ("log", "logger", "print", "logging")
DEFAULT_EXCLUDE_PHRASES = ("log in", "log out", "blue print", "print command")
DEFAULT_ISSUE_TYPES = ("Bug", "Dependency", "Dependency upgrade", "Improvement")
DEFAULT_DATE_FROM = dt.date(2002, 1, 1)
DEFAULT_DATE_TO = dt.date(2024, 12, 31)


class ConfigError(ValueError):
    """Invalid miner configuration; names the offending field."""

    def __init__(self, fieldname, message):
        super().__init__(f"{fieldname}: {message}")
        self.fieldname = fieldname


@dataclass(frozen=True)
class MinerConfig:
    include_keywords: tuple = DEFAULT_INCLUDE_KEYWORDS
    exclude_phrases: tuple = DEFAULT_EXCLUDE_PHRASES
    issue_types: tuple = DEFAULT_ISSUE_TYPES
    date_from: dt.date = DEFAULT_DATE_FROM
    date_to: dt.date = DEFAULT_DATE_TO
    projects: tuple = ()
    require_resolved: bool = True

    def validate(self):
        if not self.include_keywords:
            raise ConfigError("include_keywords", "must not be empty")
        for kw in self.include_keywords:
            if kw != kw.lower():
                raise ConfigError("include_keywords", f"{kw!r} is not lowercase")
        for phrase in self.exclude_phrases:
            if phrase != phrase.lower():
                raise ConfigError("exclude_phrases", f"{phrase!r} is not lowercase")
            if not any(kw in phrase for kw in self.include_keywords):
                raise ConfigError(
                    "exclude_phrases",
                    f"{phrase!r} contains no include keyword and can never fire",
                )
        if self.date_from > self.date_to:
            raise ConfigError("date_from", "must not be after date_to")
        return self

    @classmethod
    def from_dict(cls, raw):
        kwargs = {}
        for key in ("include_keywords", "exclude_phrases", "issue_types", "projects"):
            if key in raw:
                kwargs[key] = tuple(raw[key])
        for key in ("date_from", "date_to"):
            if key in raw:
                kwargs[key] = dt.date.fromisoformat(raw[key])
        if "require_resolved" in raw:
            kwargs["require_resolved"] = bool(raw["require_resolved"])
        return cls(**kwargs)


@dataclass(frozen=True)
class QueryPlan:
    query_text: str
    page_size: int = 50
    max_pages: int | None = None


@dataclass(frozen=True)
class LogIssue:
    key: str
    project: str
    title: str
    description: str
    comments: tuple  # of (author, body)
    issue_type: str
    resolution_date: dt.date | None
    url: str

    def to_dict(self):
        """Serializable form; keys in the documented fixed order."""
        return {
            "key": self.key,
            "project": self.project,
            "title": self.title,
            "description": self.description,
            "comments": [list(c) for c in self.comments],
            "issue_type": self.issue_type,
            "resolution_date": (
                self.resolution_date.isoformat() if self.resolution_date else None
            ),
            "url": self.url,
        }

    @classmethod
    def from_dict(cls, raw):
        return cls(
            key=raw["key"],
            project=raw["project"],
            title=raw["title"],
            description=raw.get("description", ""),
            comments=tuple((c[0], c[1]) for c in raw.get("comments", [])),
            issue_type=raw.get("issue_type", ""),
            resolution_date=(
                dt.date.fromisoformat(raw["resolution_date"])
                if raw.get("resolution_date")
                else None
            ),
            url=raw.get("url", ""),
        )


def build_query(config):
    """Deterministic tracker query text for a config.

    Identical configs produce byte-identical query text: keyword clauses on
    the summary, issue types, resolution status, and the resolved-date window.
    """
    config.validate()
    keyword_clause = " OR ".join(
        f'summary ~ "{kw}"' for kw in config.include_keywords
    )
    types = ", ".join(f'"{t}"' for t in config.issue_types)
    parts = [f"({keyword_clause})", f"issuetype in ({types})"]
    if config.require_resolved:
        parts.append("resolution = Resolved")
    parts.append(
        f'resolutiondate >= "{config.date_from.isoformat()}"'
        f' AND resolutiondate <= "{config.date_to.isoformat()}"'
    )
    if config.projects:
        projects = ", ".join(config.projects)
        parts.append(f"project in ({projects})")
    query = " AND ".join(parts) + " ORDER BY key ASC"
    return QueryPlan(query_text=query)


def _keyword_spans(summary, keywords):
    spans = []
    for kw in keywords:
        for m in re.finditer(rf"\b{re.escape(kw)}\b", summary):
            spans.append((m.start(), m.end()))
    return spans


def _phrase_spans(summary, phrases):
    spans = []
    for phrase in phrases:
        start = 0
        while True:
            idx = summary.find(phrase, start)
            if idx < 0:
                break
            spans.append((idx, idx + len(phrase)))
            start = idx + 1
    return spans


def matches_summary(summary, config):
    """True iff a keyword occurs in the summary outside all exclusion phrases."""
    lowered = summary.lower()
    keyword_spans = _keyword_spans(lowered, config.include_keywords)
    if not keyword_spans:
        return False
    phrase_spans = _phrase_spans(lowered, config.exclude_phrases)
    for ks, ke in keyword_spans:
        inside = any(ps <= ks and ke <= pe for ps, pe in phrase_spans)
        if not inside:
            return True
    return False


@dataclass
class MiningSummary:
    pages: int = 0
    fetched: int = 0
    kept: int = 0
    parse_errors: list = field(default_factory=list)

    def to_dict(self):
        return {
            "pages": self.pages,
            "fetched": self.fetched,
            "kept": self.kept,
            "parse_errors": self.parse_errors,
        }


def _parse_issue(raw, browse_base):
    fields = raw.get("fields") or {}
    key = raw.get("key")
    if not key or not isinstance(key, str):
        raise ValueError("issue without a key")
    summary = fields.get("summary")
    if summary is None:
        raise ValueError(f"{key}: missing summary")
    project = (fields.get("project") or {}).get("key") or key.split("-")[0]
    comments = tuple(
        (
            (c.get("author") or {}).get("displayName", ""),
            c.get("body", ""),
        )
        for c in (fields.get("comment") or {}).get("comments", [])
    )
    resolution_date = None
    raw_date = fields.get("resolutiondate")
    if raw_date:
        resolution_date = dt.date.fromisoformat(raw_date[:10])
    return LogIssue(
        key=key,
        project=project,
        title=summary,
        description=fields.get("description") or "",
        comments=comments,
        issue_type=(fields.get("issuetype") or {}).get("name", ""),
        resolution_date=resolution_date,
        url=f"{browse_base}/{key}",
    )


def _issue_passes(issue, config):
    if not matches_summary(issue.title, config):
        return False
    if config.issue_types and issue.issue_type not in config.issue_types:
        return False
    if config.projects and issue.project not in config.projects:
        return False
    if config.require_resolved:
        if issue.resolution_date is None:
            return False
        if not (config.date_from <= issue.resolution_date <= config.date_to):
            return False
    return True


def fetch_issues(source, plan, config, browse_base="https://issues.example.org/browse",
                 summary=None):
    """Yield matching LogIssues, deduplicated by key, in (project, key) order.

    Every issue from the tracker is re-checked client-side with
    matches_summary plus the type/date filters, so offline fixture pages do
    not need to be pre-filtered. Malformed issue payloads are skipped and
    recorded on the summary; the stream continues.
    """
    if summary is None:
        summary = MiningSummary()
    seen = {}
    for page_name, text in source.pages(plan):
        summary.pages += 1
        try:
            payload = json.loads(text)
            issues = payload["issues"]
        except (ValueError, KeyError) as exc:
            summary.parse_errors.append(f"{page_name}: {exc}")
            continue
        for raw in issues:
            summary.fetched += 1
            try:
                issue = _parse_issue(raw, browse_base)
            except (ValueError, AttributeError, TypeError) as exc:
                summary.parse_errors.append(f"{page_name}: {exc}")
                continue
            if not _issue_passes(issue, config):
                continue
            seen.setdefault(issue.key, issue)
    kept = sorted(seen.values(), key=lambda i: (i.project, i.key))
    summary.kept = len(kept)
    yield from kept


def write_issues_jsonl(issues, path):
    """One LogIssue per line, UTF-8, fixed key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for issue in issues:
            fh.write(json.dumps(issue.to_dict(), ensure_ascii=False) + "\n")


def read_issues_jsonl(path):
    issues = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                issues.append(LogIssue.from_dict(json.loads(line)))
    return issues
