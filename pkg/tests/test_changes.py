"""Diff-to-log-change alignment."""

from aucad import udiff
from aucad.changes import (
    ADDED,
    CONDITIONAL_EXPANDED,
    DELETED,
    METHOD_ONLY,
    MODIFIED,
    extract_log_changes,
)
from aucad.linker import CommitBundle

F2001_SHA = "00000000000000000000000000000000000f2001"


def bundle_for(path, before, after, repo="apache/demo", issue_key="DEMO-1"):
    diff = udiff.make_diff(before, after, path)
    return CommitBundle(
        repo=repo,
        sha="1" * 40,
        diff_text=diff,
        files_after={path: after},
        parent_sha="2" * 40,
        issue_key=issue_key,
    )


WRAP = """\
class C {{

    private static final Logger LOG = LoggerFactory.getLogger(C.class);

{body}
}}
"""


def java_file(body):
    return WRAP.format(body=body)


def test_level_raise_debug_to_warn():
    before = java_file(
        "    void handle(Throwable e) {\n"
        "        count++;\n"
        '        LOG.debug("acquire failure", e);\n'
        "    }\n"
    )
    after = before.replace("LOG.debug", "LOG.warn")
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    assert len(pairs) == 1
    p = pairs[0]
    assert p.kind == MODIFIED
    assert p.before.level == "DEBUG"
    assert p.after.level == "WARN"
    assert p.method_before and p.method_after
    assert p.after.text in p.method_after
    assert p.before.text in p.method_before


def test_level_raise_debug_to_info():
    before = java_file(
        "    void report(int n) {\n"
        '        LOG.debug("Received {} records", n);\n'
        "    }\n"
    )
    after = before.replace("LOG.debug", "LOG.info")
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    assert [ (p.kind, p.before.level, p.after.level) for p in pairs ] == [
        (MODIFIED, "DEBUG", "INFO")
    ]


def test_no_log_changes_yields_empty():
    before = java_file(
        "    int add(int a, int b) {\n        return a + b;\n    }\n"
    )
    after = before.replace("a + b", "b + a")
    assert extract_log_changes(bundle_for("src/C.java", before, after)) == []


def test_added_and_deleted_statements():
    before = java_file(
        "    void start() {\n"
        '        LOG.trace("tick");\n'
        "        boot();\n"
        "    }\n"
    )
    after = java_file(
        "    void start() {\n"
        "        boot();\n"
        '        LOG.info("started");\n'
        "    }\n"
    )
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    kinds = sorted(p.kind for p in pairs)
    # trace deleted and info added share neither receiver line pairing rules:
    # same receiver LOG pairs them as Modified instead
    assert kinds == [MODIFIED]


def test_added_and_deleted_with_distinct_receivers():
    before = java_file(
        "    void start() {\n"
        '        oldLogger.trace("tick");\n'
        "        boot();\n"
        "    }\n"
    )
    after = java_file(
        "    void start() {\n"
        "        boot();\n"
        '        newLogger.info("started");\n'
        "    }\n"
    )
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    kinds = sorted(p.kind for p in pairs)
    assert kinds == [ADDED, DELETED]
    for p in pairs:
        assert p.method_before and p.method_after


def test_pairing_is_partial_matching():
    """Two removed + one added with the same receiver: at most one Modified."""
    before = java_file(
        "    void f() {\n"
        '        LOG.debug("one");\n'
        "        mid();\n"
        '        LOG.debug("two");\n'
        "    }\n"
    )
    after = java_file(
        "    void f() {\n"
        "        mid();\n"
        '        LOG.info("merged");\n'
        "    }\n"
    )
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    kinds = sorted(p.kind for p in pairs)
    assert kinds == [DELETED, MODIFIED]


def test_conditional_wrapper_sets_context_rule_and_keeps_guard():
    before = java_file(
        "    void onFetch(State state) {\n"
        "        touch(state);\n"
        '        LOG.debug("fetch state {}", state.describe());\n'
        "        record(state);\n"
        "    }\n"
    )
    after = java_file(
        "    void onFetch(State state) {\n"
        "        touch(state);\n"
        "        if (LOG.isDebugEnabled()) {\n"
        '            LOG.debug("fetch state {}", state.describe());\n'
        "        }\n"
        "        record(state);\n"
        "    }\n"
    )
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    assert len(pairs) == 1
    p = pairs[0]
    assert p.kind == MODIFIED
    assert p.context_rule == CONDITIONAL_EXPANDED
    # the entire conditional structure is inside the recorded context
    assert "if (LOG.isDebugEnabled()) {" in p.method_after
    assert p.method_after.index("if (") < p.method_after.index("LOG.debug")


def test_plain_change_is_method_only():
    before = java_file(
        "    void f() {\n"
        '        LOG.info("a");\n'
        "        g();\n"
        "    }\n"
    )
    after = before.replace('LOG.info("a")', 'LOG.info("b")')
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    assert pairs[0].context_rule == METHOD_ONLY


def test_method_added_on_one_side_only():
    before = java_file("    void keep() {\n        stay();\n    }\n")
    after = java_file(
        "    void keep() {\n        stay();\n    }\n\n"
        "    void fresh() {\n"
        '        LOG.info("new method logs");\n'
        "    }\n"
    )
    pairs = extract_log_changes(bundle_for("src/C.java", before, after))
    assert len(pairs) == 1
    assert pairs[0].kind == ADDED
    assert pairs[0].method_before == ""
    assert pairs[0].method_after


def test_non_java_files_are_skipped_and_counted():
    from aucad.changes import ExtractionSummary

    bundle = bundle_for("README.md", "a\n", "b\n")
    summary = ExtractionSummary()
    assert extract_log_changes(bundle, summary=summary) == []
    assert summary.skipped_non_java == 1


def test_golden_fixture_bundle(forge_source):
    from aucad.linker import fetch_commit_bundle

    bundle = fetch_commit_bundle(
        "apache/flink", F2001_SHA, forge_source, issue_key="FLINK-2001"
    )
    pairs = extract_log_changes(bundle)
    assert len(pairs) == 1
    assert pairs[0].before.level == "DEBUG"
    assert pairs[0].after.level == "WARN"
    assert pairs[0].issue_key == "FLINK-2001"
    assert pairs[0].after.message_literals == "acquire failure"
