"""Resolving forge references found in issue text to concrete commits.

Issue descriptions and comments are scanned for commit, file, issue, and
pull-request URLs. GitBox URLs are rewritten to their GitHub mirrors. Each
reference is resolved to a commit whose unified diff and post-change file
contents form a CommitBundle; pre-change contents are later reconstructed
by reverse-applying the diff, which halves the number of file fetches.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import udiff
from .transport import NotFoundError

COMMIT = "Commit"
FILE_REF = "FileRef"
FORGE_ISSUE = "ForgeIssue"
PULL_REQUEST = "PullRequest"

_GITHUB_URL = re.compile(
    r"https?://github\.com/"
    r"(?P<repo>[\w.-]+/[\w.-]+?)"
    r"(?:\.git)?/"
    r"(?P<rest>(?:commit|blob|issues|pull)/[^\s\)\]\"'<>|,]+)"
)
_GITBOX_COMMIT = re.compile(
    r"https?://gitbox\.apache\.org/repos/asf\?p=(?P<name>[\w.-]+?)(?:\.git)?"
    r";[^\s\)\]\"'<>|]*h=(?P<sha>[0-9a-f]{7,40})"
)
_SHA40 = re.compile(r"^[0-9a-f]{40}$")


class UnresolvableLinkError(Exception):
    """A forge reference that cannot be resolved to an existing commit."""


@dataclass(frozen=True)
class RepoLink:
    kind: str  # Commit | FileRef | ForgeIssue | PullRequest
    repo: str  # owner/name
    identifier: str  # sha, number, or path@sha
    source_field: str  # "description" or "comment[N]"

    def validate(self):
        if self.kind == COMMIT and not _SHA40.match(self.identifier):
            raise ValueError(f"commit identifier must be a 40-hex sha: {self.identifier}")
        if self.kind in (PULL_REQUEST, FORGE_ISSUE) and not self.identifier.isdigit():
            raise ValueError(f"{self.kind} identifier must be a number: {self.identifier}")
        return self


@dataclass(frozen=True)
class CommitBundle:
    repo: str
    sha: str
    diff_text: str
    files_after: dict  # path -> post-change content
    parent_sha: str
    deleted_paths: frozenset = frozenset()
    truncated: bool = False
    issue_key: str = ""

    def validate(self):
        hunks = udiff.parse_unified_diff(self.diff_text)
        for path in udiff.hunks_by_file(hunks):
            if path not in self.files_after and path not in self.deleted_paths:
                raise ValueError(f"diff path {path} missing from files_after")
        return self


def _links_in_text(text, source_field, gitbox_org="apache"):
    links = []
    for m in _GITHUB_URL.finditer(text):
        repo = m.group("repo")
        rest = m.group("rest")
        kind_word, _, tail = rest.partition("/")
        tail = tail.rstrip(".")
        if kind_word == "commit":
            sha = tail.split("/")[0].split("#")[0].split("?")[0]
            if re.fullmatch(r"[0-9a-f]{7,40}", sha):
                links.append(RepoLink(COMMIT, repo, sha, source_field))
        elif kind_word == "blob":
            parts = tail.split("/", 1)
            if len(parts) == 2 and re.fullmatch(r"[0-9a-f]{7,40}", parts[0]):
                path = parts[1].split("#")[0].split("?")[0]
                links.append(
                    RepoLink(FILE_REF, repo, f"{path}@{parts[0]}", source_field)
                )
        elif kind_word == "issues":
            num = tail.split("/")[0].split("#")[0].split("?")[0]
            if num.isdigit():
                links.append(RepoLink(FORGE_ISSUE, repo, num, source_field))
        elif kind_word == "pull":
            num = tail.split("/")[0].split("#")[0].split("?")[0]
            if num.isdigit():
                links.append(RepoLink(PULL_REQUEST, repo, num, source_field))
    for m in _GITBOX_COMMIT.finditer(text):
        # GitBox repositories mirror to GitHub under the same project name
        repo = f"{gitbox_org}/{m.group('name')}"
        links.append(RepoLink(COMMIT, repo, m.group("sha"), source_field))
    return links


def extract_links(issue, gitbox_org="apache"):
    """All recognized forge URLs in description then comments, document
    order, deduplicated on (kind, repo, identifier)."""
    found = []
    found.extend(_links_in_text(issue.description, "description", gitbox_org))
    for idx, (_, body) in enumerate(issue.comments):
        found.extend(_links_in_text(body, f"comment[{idx}]", gitbox_org))
    seen = set()
    out = []
    for link in found:
        key = (link.kind, link.repo, link.identifier)
        if key not in seen:
            seen.add(key)
            out.append(link)
    return out


def resolve_pull_request(link, source):
    """Sha of the chronologically last commit in the PR that still exists.

    Commits force-pushed out of existence no longer resolve; walk the
    timeline backwards until one does.
    """
    if link.kind != PULL_REQUEST:
        raise ValueError(f"not a pull-request link: {link}")
    try:
        commits = source.pr_commits(link.repo, int(link.identifier))
    except NotFoundError as exc:
        raise UnresolvableLinkError(f"PR {link.repo}#{link.identifier}: {exc}") from exc
    shas = [c["sha"] for c in commits if c.get("sha")]
    for sha in reversed(shas):
        if source.commit_exists(link.repo, sha):
            return sha
    raise UnresolvableLinkError(
        f"PR {link.repo}#{link.identifier} has no valid commits"
    )


def fetch_commit_bundle(repo, sha, source, issue_key="", extra_paths=()):
    """Assemble a CommitBundle: metadata, raw diff, and post-change files.

    ``extra_paths`` lets FileRef links pull their referenced file content
    even when it is not touched by the diff. A truncated diff from the
    forge still yields a bundle, flagged as degraded.
    """
    try:
        meta = source.commit_meta(repo, sha)
    except NotFoundError as exc:
        raise UnresolvableLinkError(f"unknown commit {repo}@{sha}") from exc
    full_sha = meta.get("sha", sha)
    parents = meta.get("parents") or []
    parent_sha = parents[0]["sha"] if parents else ""
    diff_text = source.commit_diff(repo, full_sha)
    truncated = bool(meta.get("truncated", False))
    files_after = {}
    deleted = set()
    for entry in meta.get("files", []):
        path = entry.get("filename")
        if not path:
            continue
        if entry.get("status") == "removed":
            deleted.add(path)
            continue
        files_after[path] = source.file_after(repo, full_sha, path)
    for path in extra_paths:
        if path not in files_after and path not in deleted:
            files_after[path] = source.file_after(repo, full_sha, path)
    bundle = CommitBundle(
        repo=repo,
        sha=full_sha,
        diff_text=diff_text,
        files_after=files_after,
        parent_sha=parent_sha,
        deleted_paths=frozenset(deleted),
        truncated=truncated,
        issue_key=issue_key,
    )
    return bundle.validate()


@dataclass
class LinkSummary:
    issues: int = 0
    links_found: int = 0
    bundles: int = 0
    ignored_urls: int = 0
    unresolved: list = field(default_factory=list)

    def to_dict(self):
        return {
            "issues": self.issues,
            "links_found": self.links_found,
            "bundles": self.bundles,
            "ignored_urls": self.ignored_urls,
            "unresolved": self.unresolved,
        }


_ANY_URL = re.compile(r"https?://[^\s\)\]\"'<>|]+")


def count_unrecognized_urls(issue):
    """URLs present in the issue text that extract_links does not recognize."""
    texts = [issue.description] + [body for _, body in issue.comments]
    total = sum(len(_ANY_URL.findall(t)) for t in texts)
    recognized = 0
    for t in texts:
        recognized += len(_GITHUB_URL.findall(t)) + len(_GITBOX_COMMIT.findall(t))
    return max(0, total - recognized)


def resolve_issue_links(issue, source, summary=None):
    """Resolve every link of one issue into CommitBundles.

    Each commit an issue references becomes its own bundle tagged with the
    issue key; duplicates by (repo, sha) collapse. FileRef links contribute
    their file to the matching commit bundle.
    """
    if summary is None:
        summary = LinkSummary()
    links = extract_links(issue)
    summary.issues += 1
    summary.links_found += len(links)
    # group FileRef paths by (repo, sha) so their content rides along
    extra = {}
    targets = []
    for link in links:
        try:
            if link.kind == COMMIT:
                targets.append((link.repo, link.identifier))
            elif link.kind == PULL_REQUEST:
                targets.append((link.repo, resolve_pull_request(link, source)))
            elif link.kind == FILE_REF:
                path, _, sha = link.identifier.rpartition("@")
                extra.setdefault((link.repo, sha), []).append(path)
                targets.append((link.repo, sha))
            # ForgeIssue links carry no commit; recorded but not resolved
        except UnresolvableLinkError as exc:
            summary.unresolved.append(str(exc))
    bundles = []
    seen = set()
    for repo, sha in targets:
        if (repo, sha) in seen:
            continue
        seen.add((repo, sha))
        try:
            bundle = fetch_commit_bundle(
                repo, sha, source,
                issue_key=issue.key,
                extra_paths=extra.get((repo, sha), ()),
            )
        except UnresolvableLinkError as exc:
            summary.unresolved.append(str(exc))
            continue
        bundles.append(bundle)
    summary.bundles += len(bundles)
    return bundles


def write_bundles(bundles, out_dir, links_index_path=None):
    """bundles/ tree: one directory per (repo, sha) with diff.patch and
    files/, plus a links.jsonl index."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = []
    for bundle in bundles:
        slug = f"{bundle.repo.replace('/', '__')}__{bundle.sha}"
        bdir = out_dir / slug
        (bdir / "files").mkdir(parents=True, exist_ok=True)
        (bdir / "diff.patch").write_text(bundle.diff_text, encoding="utf-8")
        meta = {
            "repo": bundle.repo,
            "sha": bundle.sha,
            "parent_sha": bundle.parent_sha,
            "issue_key": bundle.issue_key,
            "deleted_paths": sorted(bundle.deleted_paths),
            "truncated": bundle.truncated,
        }
        (bdir / "bundle.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        for path, content in sorted(bundle.files_after.items()):
            fpath = bdir / "files" / path
            fpath.parent.mkdir(parents=True, exist_ok=True)
            fpath.write_text(content, encoding="utf-8")
        index.append(meta)
    if links_index_path:
        with open(links_index_path, "w", encoding="utf-8") as fh:
            for meta in index:
                fh.write(json.dumps(meta, ensure_ascii=False) + "\n")
    return index


def read_bundles(out_dir):
    """Load bundles written by write_bundles, sorted by (repo, sha)."""
    out_dir = Path(out_dir)
    bundles = []
    for bdir in sorted(out_dir.iterdir()):
        meta_path = bdir / "bundle.json"
        if not meta_path.is_file():
            continue
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        files_after = {}
        files_root = bdir / "files"
        if files_root.is_dir():
            for fpath in sorted(files_root.rglob("*")):
                if fpath.is_file():
                    rel = fpath.relative_to(files_root).as_posix()
                    files_after[rel] = fpath.read_text(encoding="utf-8")
        bundles.append(
            CommitBundle(
                repo=meta["repo"],
                sha=meta["sha"],
                diff_text=(bdir / "diff.patch").read_text(encoding="utf-8"),
                files_after=files_after,
                parent_sha=meta.get("parent_sha", ""),
                deleted_paths=frozenset(meta.get("deleted_paths", [])),
                truncated=meta.get("truncated", False),
                issue_key=meta.get("issue_key", ""),
            )
        )
    bundles.sort(key=lambda b: (b.repo, b.sha))
    return bundles
