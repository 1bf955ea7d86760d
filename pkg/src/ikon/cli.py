"""Command-line entry point.

Exit codes: 0 success, 1 user error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import IkonError, StageFailure
from .pipeline import DONE, STAGES, ProjectStore


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise IkonError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ikon", description="ontology-building pipeline over text corpora")
    parser.add_argument("--root", default=os.environ.get("IKON_ROOT", "ikon_data"),
                        help="data root holding projects/ and library/ (env IKON_ROOT)")
    sub = parser.add_subparsers(dest="command", required=True)

    new = sub.add_parser("new", help="create a project with a frozen configuration")
    new.add_argument("domain")
    new.add_argument("--lexicon", required=True)
    new.add_argument("--rules", required=True)
    new.add_argument("--seeds", required=True, help="file with one seed term per line")
    new.add_argument("--threshold", type=float, required=True)
    new.add_argument("--sources", action="append", default=[], help="source document directory (repeatable)")
    new.add_argument("--url", action="append", default=[], dest="urls", help="source url (repeatable)")
    new.add_argument("--auto-accept-min-freq", type=int, default=2,
                     help="auto-accept candidates at or above this frequency; 0 disables")
    new.add_argument("--seed-ontology", default=None, help=".nt file consulted for sense resolution")

    run = sub.add_parser("run", help="run one stage or all runnable stages in order")
    run.add_argument("project")
    run.add_argument("stage", choices=[*STAGES, "all"])

    rollback = sub.add_parser("rollback", help="take one of the two rollback edges")
    rollback.add_argument("project")
    rollback.add_argument("edge", choices=["S2toS1", "S3toS2"])
    rollback.add_argument("--reason", required=True)

    status = sub.add_parser("status", help="show stage statuses and artifacts")
    status.add_argument("project")

    export = sub.add_parser("export", help="write the current ontology as OWL triples")
    export.add_argument("project")
    export.add_argument("--owl", required=True, metavar="PATH")

    search = sub.add_parser("search", help="search documents, terms and concepts")
    search.add_argument("project")
    search.add_argument("query")
    search.add_argument("-k", type=int, default=10)

    serve = sub.add_parser("serve", help="start the HTTP control API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--ui", default=None, help="directory of built UI assets to mount at /ui")
    return parser


def _print_status(state) -> None:
    print(f"project {state.project_id} (domain: {state.domain_name}, version {state.version})")
    for name in STAGES:
        record = state.stages[name]
        flags = " stale" if record.stale else ""
        extra = f" [{record.diagnostic}]" if record.diagnostic else ""
        print(f"  {name}: {record.status}{flags}{extra}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except IkonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        return _dispatch(args)
    except StageFailure as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 2
    except IkonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    store = ProjectStore(args.root)

    if args.command == "new":
        config = {
            "lexicon": args.lexicon,
            "rules": args.rules,
            "seeds": args.seeds,
            "threshold": args.threshold,
            "sources": args.sources,
            "urls": args.urls,
            "auto_accept_min_freq": args.auto_accept_min_freq or None,
            "seed_ontology": args.seed_ontology,
        }
        project = store.create(args.domain, config)
        print(f"created project {project.state.project_id}")
        _print_status(project.state)
        return 0

    if args.command == "run":
        project = store.get(args.project)
        stages = [args.stage] if args.stage != "all" else list(STAGES)
        for stage in stages:
            if args.stage == "all" and project.state.stages[stage].status == DONE:
                print(f"{stage}: already done, skipping")
                continue
            project.run_stage(stage)
            print(f"{stage}: done")
        return 0

    if args.command == "rollback":
        state = store.get(args.project).rollback(args.edge, args.reason)
        _print_status(state)
        return 0

    if args.command == "status":
        _print_status(store.get(args.project).status())
        return 0

    if args.command == "export":
        text = store.get(args.project).export_owl()
        Path(args.owl).write_text(text, encoding="utf-8")
        print(f"wrote {args.owl}")
        return 0

    if args.command == "search":
        results = store.get(args.project).search(args.query, args.k)
        for kind in ("documents", "terms", "concepts"):
            hits = results[kind]
            if not hits:
                continue
            print(f"{kind}:")
            for hit in hits:
                snippet = f"  {hit.snippet}" if hit.snippet else ""
                print(f"  {hit.target_id}  {hit.score:.4f}{snippet}")
        return 0

    if args.command == "serve":
        import uvicorn

        from .server import create_app

        app = create_app(args.root, args.ui)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    raise IkonError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
