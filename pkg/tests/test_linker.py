"""Forge link extraction and commit bundle assembly."""

import datetime as dt

import pytest

from aucad import udiff
from aucad.linker import (
    COMMIT,
    FILE_REF,
    FORGE_ISSUE,
    PULL_REQUEST,
    UnresolvableLinkError,
    extract_links,
    fetch_commit_bundle,
    resolve_pull_request,
)
from aucad.miner import LogIssue

F2001_SHA = "00000000000000000000000000000000000f2001"
B4400_SHA = "00000000000000000000000000000000000b4400"
B4100_SHA = "00000000000000000000000000000000000b4100"


def mk_issue(description="", comments=()):
    return LogIssue(
        key="TEST-1",
        project="TEST",
        title="Log level wrong",
        description=description,
        comments=tuple(comments),
        issue_type="Bug",
        resolution_date=dt.date(2020, 1, 1),
        url="https://issues.example.org/browse/TEST-1",
    )


def test_commit_url_in_description():
    sha = "a" * 40
    issue = mk_issue(f"Fixed by https://github.com/apache/flink/commit/{sha}")
    links = extract_links(issue)
    assert len(links) == 1
    link = links[0]
    assert (link.kind, link.repo, link.identifier) == (COMMIT, "apache/flink", sha)
    assert link.source_field == "description"
    link.validate()


def test_pull_request_url_in_comment():
    issue = mk_issue(comments=[("dev", "see https://github.com/apache/kafka/pull/4711")])
    links = extract_links(issue)
    assert len(links) == 1
    assert links[0].kind == PULL_REQUEST
    assert links[0].identifier == "4711"
    assert links[0].source_field == "comment[0]"


def test_issue_without_urls_yields_nothing():
    assert extract_links(mk_issue("no links here")) == []


def test_blob_and_forge_issue_links():
    sha = "b" * 40
    text = (
        f"https://github.com/apache/hive/blob/{sha}/ql/src/Foo.java "
        "and https://github.com/apache/hive/issues/77"
    )
    links = extract_links(mk_issue(text))
    kinds = [l.kind for l in links]
    assert kinds == [FILE_REF, FORGE_ISSUE]
    assert links[0].identifier == f"ql/src/Foo.java@{sha}"


def test_gitbox_url_rewritten_to_github():
    url = (
        "https://gitbox.apache.org/repos/asf?p=flink.git;a=commit;"
        f"h={F2001_SHA}"
    )
    links = extract_links(mk_issue(url))
    assert len(links) == 1
    assert links[0].repo == "apache/flink"
    assert links[0].identifier == F2001_SHA


def test_unrecognized_urls_are_counted():
    from aucad.linker import count_unrecognized_urls

    sha = "d" * 40
    issue = mk_issue(
        f"https://github.com/apache/flink/commit/{sha} and "
        "https://example.org/unrelated/page",
        comments=[("dev", "docs at https://cwiki.apache.org/x/abc")],
    )
    assert len(extract_links(issue)) == 1
    assert count_unrecognized_urls(issue) == 2


def test_extraction_is_idempotent_and_deduplicated():
    sha = "c" * 40
    url = f"https://github.com/apache/flink/commit/{sha}"
    issue = mk_issue(f"{url} and again {url}", comments=[("dev", url)])
    first = extract_links(issue)
    second = extract_links(issue)
    assert first == second
    assert len(first) == 1


def test_resolve_pr_last_commit_wins(forge_source):
    issue_link = extract_links(
        mk_issue("https://github.com/apache/kafka/pull/4400")
    )[0]
    assert resolve_pull_request(issue_link, forge_source) == B4400_SHA


def test_resolve_pr_falls_back_when_head_force_pushed(forge_source):
    link = extract_links(mk_issue("https://github.com/apache/kafka/pull/4401"))[0]
    assert resolve_pull_request(link, forge_source) == B4100_SHA


def test_resolve_pr_with_no_commits_is_unresolvable(forge_source):
    link = extract_links(mk_issue("https://github.com/apache/kafka/pull/4402"))[0]
    with pytest.raises(UnresolvableLinkError):
        resolve_pull_request(link, forge_source)


def test_bundle_for_two_file_commit(forge_source):
    bundle = fetch_commit_bundle("apache/kafka", B4100_SHA, forge_source)
    assert len(bundle.files_after) == 2
    grouped = udiff.hunks_by_file(udiff.parse_unified_diff(bundle.diff_text))
    assert len(grouped) == 2
    assert bundle.parent_sha and bundle.parent_sha != bundle.sha


def test_unknown_sha_is_unresolvable(forge_source):
    with pytest.raises(UnresolvableLinkError):
        fetch_commit_bundle("apache/kafka", "9" * 40, forge_source)


def test_bundle_reverse_apply_round_trip(forge_source):
    """Reverse-applying the bundle diff to files_after must reproduce the
    pre-change content, and re-diffing reproduces the hunk line sets."""
    bundle = fetch_commit_bundle("apache/flink", F2001_SHA, forge_source)
    grouped = udiff.hunks_by_file(udiff.parse_unified_diff(bundle.diff_text))
    for path, hunks in grouped.items():
        after = bundle.files_after[path]
        before = udiff.apply_hunks(after, hunks, reverse=True)
        assert udiff.apply_hunks(before, hunks) == after
        rediff = udiff.make_diff(before, after, path)
        assert udiff.parse_unified_diff(rediff) == list(hunks)


def test_deleted_file_marked_not_in_files_after(tmp_path):
    """Synthetic fixture: a commit that deletes a file."""
    import json

    repo_dir = tmp_path / "repos" / "apache" / "demo"
    commits = repo_dir / "commits"
    commits.mkdir(parents=True)
    sha = "d" * 40
    gone = "src/Gone.java"
    diff = udiff.make_diff("class Gone {}\n", "", gone)
    (commits / f"{sha}.diff").write_text(diff)
    (commits / f"{sha}.json").write_text(
        json.dumps(
            {
                "sha": sha,
                "parents": [{"sha": "e" * 40}],
                "files": [{"filename": gone, "status": "removed"}],
            }
        )
    )
    from aucad.transport import ForgeSource

    source = ForgeSource(fixtures_dir=tmp_path)
    bundle = fetch_commit_bundle("apache/demo", sha, source)
    assert gone in bundle.deleted_paths
    assert gone not in bundle.files_after
    bundle.validate()
