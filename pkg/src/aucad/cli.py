"""Command-line entry point for the pipeline stages.

Stages communicate only via files so any stage can be rerun or swapped:
mine writes issues.jsonl, link materializes bundles/, extract produces
changes.jsonl, build exports the preference-pair dataset, eval scores
model responses, kappa computes agreement, review-serve runs the HTTP
review tool. Each stage prints a JSON summary to stdout; exit code 1
signals a configuration error, 2 a missing input file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import changes as changes_mod
from . import linker, metrics, miner, pairs
from .review.planning import PlanError, plan_assignments
from .review.store import ReviewStore
from .transport import ForgeSource, TrackerSource

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING_INPUT = 2


class CliConfigError(ValueError):
    pass


def _load_miner_config(path):
    if path is None:
        return miner.MinerConfig()
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return miner.MinerConfig.from_dict(raw.get("miner", raw))


def _require_file(path, kind="input"):
    if not Path(path).exists():
        raise FileNotFoundError(f"{kind} not found: {path}")
    return Path(path)


def _emit(summary):
    json.dump(summary, sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")


def _tracker_source(args):
    if args.offline:
        if not args.fixtures:
            raise CliConfigError("--offline requires --fixtures")
        if getattr(args, "tracker_url", None):
            raise CliConfigError("--offline forbids --tracker-url")
        root = Path(args.fixtures) / "tracker"
        _require_file(root, "tracker fixtures")
        return TrackerSource(fixtures_dir=root)
    if not args.tracker_url:
        raise CliConfigError("live mode requires --tracker-url (or use --offline)")
    return TrackerSource(base_url=args.tracker_url)


def _forge_source(args):
    if args.offline:
        if not args.fixtures:
            raise CliConfigError("--offline requires --fixtures")
        if getattr(args, "forge_api", None):
            raise CliConfigError("--offline forbids --forge-api")
        root = Path(args.fixtures) / "forge"
        _require_file(root, "forge fixtures")
        return ForgeSource(fixtures_dir=root)
    if not args.forge_api:
        raise CliConfigError("live mode requires --forge-api (or use --offline)")
    return ForgeSource(api_base=args.forge_api)


def cmd_mine(args):
    config = _load_miner_config(args.config)
    config.validate()
    source = _tracker_source(args)
    plan = miner.build_query(config)
    if args.max_pages:
        plan = miner.QueryPlan(plan.query_text, plan.page_size, args.max_pages)
    summary = miner.MiningSummary()
    issues = list(
        miner.fetch_issues(source, plan, config, browse_base=args.browse_base,
                           summary=summary)
    )
    miner.write_issues_jsonl(issues, args.out)
    _emit({"stage": "mine", "out": str(args.out), **summary.to_dict()})
    return EXIT_OK


def cmd_link(args):
    issues = miner.read_issues_jsonl(_require_file(args.issues, "issues file"))
    source = _forge_source(args)
    summary = linker.LinkSummary()
    jobs = max(1, getattr(args, "jobs", 1) or 1)
    if jobs > 1:
        # bundles are immutable and per-issue resolution is independent;
        # the deterministic (repo, sha) sort below fixes the merge order
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_issue = list(
                pool.map(
                    lambda issue: linker.resolve_issue_links(
                        issue, source, linker.LinkSummary()
                    ),
                    issues,
                )
            )
        bundles = [b for group in per_issue for b in group]
        summary.issues = len(issues)
        summary.links_found = sum(
            len(linker.extract_links(issue)) for issue in issues
        )
        summary.bundles = len(bundles)
    else:
        bundles = []
        for issue in issues:
            bundles.extend(linker.resolve_issue_links(issue, source, summary))
    summary.ignored_urls = sum(
        linker.count_unrecognized_urls(issue) for issue in issues
    )
    # one bundle per (repo, sha); first issue wins provenance
    unique = {}
    for bundle in bundles:
        unique.setdefault((bundle.repo, bundle.sha), bundle)
    ordered = [unique[k] for k in sorted(unique)]
    linker.write_bundles(ordered, args.out_dir, links_index_path=args.links)
    _emit({"stage": "link", "out_dir": str(args.out_dir), **summary.to_dict()})
    return EXIT_OK


def cmd_extract(args):
    bundles = linker.read_bundles(_require_file(args.bundles, "bundles directory"))
    all_pairs, summary = changes_mod.extract_all(bundles)
    changes_mod.write_changes_jsonl(all_pairs, args.out)
    _emit({"stage": "extract", "out": str(args.out), **summary.to_dict()})
    return EXIT_OK


def cmd_build(args):
    all_changes = changes_mod.read_changes_jsonl(
        _require_file(args.changes, "changes file")
    )
    issues = miner.read_issues_jsonl(_require_file(args.issues, "issues file"))
    issues_by_key = {i.key: i for i in issues}
    entries, side, build_summary = pairs.build_entries(all_changes, issues_by_key)
    corpora = []
    for corpus_path in args.leakage_corpus or []:
        corpora.append(pairs.load_corpus_methods(_require_file(corpus_path, "corpus")))
    kept, report = pairs.apply_filters(entries, corpora)
    export_summary = pairs.export_jsonl(kept, args.out)
    if args.aux:
        pairs.export_side_channel(side, args.aux)
    if args.filter_report:
        Path(args.filter_report).write_text(
            json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
    _emit(
        {
            "stage": "build",
            "out": str(args.out),
            "build": build_summary.to_dict(),
            "filters": report.to_dict(),
            "exported": export_summary["count"],
        }
    )
    return EXIT_OK


def cmd_eval(args):
    matrix = (
        metrics.AdjustMatrix.load_json(_require_file(args.level_matrix, "level matrix"))
        if args.level_matrix
        else metrics.AdjustMatrix.default()
    )
    samples, load_summary = metrics.load_benchmark_corpus(
        _require_file(args.truth, "truth file"), fmt=args.truth_format
    )
    responses = {}
    with open(_require_file(args.responses, "responses file"), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                responses[str(record["id"])] = record.get("response", "")
    joined = [s.with_response(responses.get(s.id, "")) for s in samples]
    report = metrics.evaluate_corpus(joined, matrix)
    report.write_json(args.out)
    _emit(
        {
            "stage": "eval",
            "out": str(args.out),
            "count": report.count,
            "missing": report.missing,
            "skipped_truth_records": load_summary.skipped,
            "means": report.means(),
        }
    )
    return EXIT_OK


def cmd_kappa(args):
    labels_a = json.loads(_require_file(args.labels_a, "labels file").read_text())
    labels_b = json.loads(_require_file(args.labels_b, "labels file").read_text())
    details = metrics.kappa_details(labels_a, labels_b)
    _emit({"stage": "kappa", **details})
    return EXIT_OK


def cmd_review_serve(args):
    entries = pairs.read_entries_jsonl(_require_file(args.entries, "entries file"))
    issues_by_key = {}
    if args.issues:
        issues_by_key = {
            i.key: i
            for i in miner.read_issues_jsonl(_require_file(args.issues, "issues file"))
        }
    annotators = [a for a in args.annotators.split(",") if a]
    if len(annotators) < 2:
        raise CliConfigError("--annotators needs at least two comma-separated ids")
    per = args.per_annotator
    if per is None:
        # smallest even split that still covers every entry
        per = -(-len(entries) // len(annotators))
    plan = plan_assignments([e.id for e in entries], annotators, per, seed=args.seed)
    store = ReviewStore(
        entries,
        plan,
        args.journal,
        adjudicator=args.adjudicator,
        issues_by_key=issues_by_key,
    )
    from .review.service import serve

    print(
        json.dumps(
            {
                "stage": "review-serve",
                "entries": len(entries),
                "overlap": len(plan.overlap_ids),
                "port": args.port,
            }
        ),
        flush=True,
    )
    serve(store, host=args.host, port=args.port, static_dir=args.static)
    return EXIT_OK


def cmd_pipeline(args):
    """mine -> link -> extract -> build in one process, via the same files."""
    workdir = Path(args.out_dir)
    workdir.mkdir(parents=True, exist_ok=True)
    args.out = workdir / "issues.jsonl"
    rc = cmd_mine(args)
    if rc != EXIT_OK:
        return rc
    args.issues = workdir / "issues.jsonl"
    args.out_dir = workdir / "bundles"
    args.links = workdir / "links.jsonl"
    rc = cmd_link(args)
    if rc != EXIT_OK:
        return rc
    args.bundles = workdir / "bundles"
    args.out = workdir / "changes.jsonl"
    rc = cmd_extract(args)
    if rc != EXIT_OK:
        return rc
    args.changes = workdir / "changes.jsonl"
    args.out = workdir / "entries.jsonl"
    args.aux = workdir / "added_deleted.jsonl"
    args.filter_report = workdir / "filter_report.json"
    return cmd_build(args)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aucad",
        description="Log-related issue mining, dataset construction, and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_offline(p):
        p.add_argument("--offline", action="store_true",
                       help="read recorded fixtures instead of live endpoints")
        p.add_argument("--fixtures", help="fixture root (tracker/ and forge/ subdirs)")

    p = sub.add_parser("mine", help="collect log-related issues")
    add_offline(p)
    p.add_argument("--config", help="JSON config with a 'miner' section")
    p.add_argument("--tracker-url", help="live tracker REST base URL")
    p.add_argument("--browse-base", default="https://issues.apache.org/jira/browse")
    p.add_argument("--max-pages", type=int, default=None)
    p.add_argument("--out", required=True, help="issues.jsonl output path")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("link", help="resolve issue links into commit bundles")
    add_offline(p)
    p.add_argument("--issues", required=True)
    p.add_argument("--forge-api", help="live forge REST base URL")
    p.add_argument("--out-dir", required=True, help="bundles output directory")
    p.add_argument("--links", help="links.jsonl index path")
    p.add_argument("--jobs", type=int, default=1,
                   help="bounded parallel issue resolution (rate limit still applies)")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("extract", help="extract log statement changes from bundles")
    p.add_argument("--bundles", required=True)
    p.add_argument("--out", required=True, help="changes.jsonl output path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build", help="build and filter the preference-pair dataset")
    p.add_argument("--changes", required=True)
    p.add_argument("--issues", required=True)
    p.add_argument("--out", required=True, help="entries.jsonl output path")
    p.add_argument("--aux", help="added/deleted side-channel output path")
    p.add_argument("--filter-report", help="filter_report.json output path")
    p.add_argument("--leakage-corpus", action="append",
                   help="evaluation corpus for leakage filtering (repeatable)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="score model responses against ground truth")
    p.add_argument("--responses", required=True, help="jsonl of {id, response}")
    p.add_argument("--truth", required=True, help="benchmark corpus")
    p.add_argument("--truth-format", choices=("jsonl", "dir"), default="jsonl")
    p.add_argument("--level-matrix", help="must-adjust table (level_matrix.json)")
    p.add_argument("--out", required=True, help="report.json output path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("kappa", help="inter-rater agreement for two label files")
    p.add_argument("--labels-a", required=True, help="JSON array of labels")
    p.add_argument("--labels-b", required=True, help="JSON array of labels")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("review-serve", help="run the relevance-review service")
    p.add_argument("--entries", required=True)
    p.add_argument("--issues", help="issues.jsonl for evaluator packets")
    p.add_argument("--journal", required=True, help="append-only label journal path")
    p.add_argument("--annotators", default="annotator-a,annotator-b")
    p.add_argument("--per-annotator", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--adjudicator", default="adjudicator")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--static", help="directory with the built UI bundle")
    p.set_defaults(func=cmd_review_serve)

    p = sub.add_parser("pipeline", help="mine, link, extract, and build in one run")
    add_offline(p)
    p.add_argument("--config", help="JSON config with a 'miner' section")
    p.add_argument("--tracker-url")
    p.add_argument("--forge-api")
    p.add_argument("--browse-base", default="https://issues.apache.org/jira/browse")
    p.add_argument("--max-pages", type=int, default=None)
    p.add_argument("--out-dir", required=True, help="working directory for all outputs")
    p.add_argument("--leakage-corpus", action="append")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliConfigError, miner.ConfigError, PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT


if __name__ == "__main__":
    sys.exit(main())
