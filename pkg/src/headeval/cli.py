"""Command-line entry points.

Exit codes: 0 success, 1 data error, 2 usage error (argparse default).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fixtures as fixtures_mod
from .features import FeatureFormatError, load_feature_bundle, validate_bundle
from .harness import (
    DEFAULT_RESAMPLES,
    PipelineError,
    cards_from_report,
    correlation_report,
    evaluate_corpus,
    read_report,
    write_report,
)
from .manifest import ManifestError, load_manifest
from .scoring import build_leaderboard
from .service import StudyConfigError, StudyState, load_study_config, serve_forever
from .topology import TopologyError, load_topology
from .votes import VoteLogError, load_votes

DATA_ERRORS = (
    FeatureFormatError, ManifestError, TopologyError, PipelineError,
    StudyConfigError, VoteLogError, FileNotFoundError, FileExistsError,
    json.JSONDecodeError, ValueError, OSError,
)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_evaluate(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    topo_path = Path(args.topology) if args.topology else manifest.topology_path
    if topo_path is None:
        return _fail("no topology: pass --topology or list one in the manifest")
    topology = load_topology(topo_path)
    report = evaluate_corpus(
        manifest, topology, workers=args.workers, mode=args.norm_mode
    )
    write_report(args.out, report)
    failures = report.get("failures", {})
    if failures:
        for label, errors in failures.items():
            for vid, msg in errors.items():
                print(f"partial failure: {label}/{vid}: {msg}", file=sys.stderr)
    print(f"wrote {args.out} ({len(report['cards'])} models, "
          f"{len(report['video_ids'])} videos)")
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    report = read_report(args.report)
    cards = cards_from_report(report)
    votes = load_votes(args.votes)
    out = correlation_report(cards, votes, seed=args.seed, resamples=args.resamples,
                             resample_unit=args.resample_unit)
    write_report(args.out, out)
    print(f"wrote {args.out} ({len(out['rows'])} rows over {out['n_votes']} votes)")
    return 0


def cmd_fixtures(args: argparse.Namespace) -> int:
    if args.spec:
        corpus = fixtures_mod.load_corpus_spec(args.spec)
    else:
        corpus = fixtures_mod.demo_corpus_spec()
    out = fixtures_mod.generate_corpus(corpus, args.out, overwrite=args.overwrite)
    n = sum(len(specs) for specs in corpus.models.values())
    print(f"wrote {n} feature directories under {out}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    topology = load_topology(args.topology) if args.topology else None
    bundle = load_feature_bundle(args.dir, topology)
    report = validate_bundle(bundle, topology)
    print(report.render())
    return 0 if report.ok else 1


def cmd_leaderboard(args: argparse.Namespace) -> int:
    report = read_report(args.report)
    cards = cards_from_report(report)
    print(build_leaderboard(cards).render_text())
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = load_study_config(
        args.manifest, votes_path=args.votes, seed=args.seed, port=args.port,
        balance_pairs=args.balance_pairs,
    )
    state = StudyState(config)
    print(f"study service on port {args.port}; votes -> {args.votes}")
    serve_forever(state, host=args.host, static_dir=args.static_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="headeval",
        description="Evaluate generated talking-head videos and run preference studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="score a corpus against its ground truth")
    p.add_argument("--manifest", required=True)
    p.add_argument("--topology", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--norm-mode", choices=("corpus", "per_video"), default="corpus",
                   help="normalize corpus means once, or per video then average")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("correlate", help="correlate scores with human votes")
    p.add_argument("--report", required=True)
    p.add_argument("--votes", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--resample-unit", choices=("models", "votes"), default="models",
                   help="bootstrap over paired model points, or over raw votes")
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("fixtures", help="generate a synthetic feature corpus")
    p.add_argument("--spec", default=None, help="corpus spec JSON (default: built-in demo)")
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(fn=cmd_fixtures)

    p = sub.add_parser("validate", help="check one feature directory")
    p.add_argument("dir")
    p.add_argument("--topology", default=None)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("leaderboard", help="print the ranking table of a report")
    p.add_argument("--report", required=True)
    p.set_defaults(fn=cmd_leaderboard)

    p = sub.add_parser("serve", help="run the pairwise study service")
    p.add_argument("--manifest", required=True, help="study manifest JSON")
    p.add_argument("--votes", required=True, help="append-only vote log path")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--static-dir", default=None, help="frontend assets to serve at /")
    p.add_argument("--balance-pairs", action="store_true",
                   help="issue the least-shown pair instead of sampling uniformly")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DATA_ERRORS as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
