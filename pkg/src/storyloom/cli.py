"""Headless driver: extract, view, edit, diff, history, serve.

Exit codes: 0 success, 1 environment or gateway failure, 2 bad user input.
With ``--mock FIXTURES`` every run is fully offline and deterministic.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .constructs import (
    BUILTIN_VIEWS,
    ExprError,
    builtin_view,
    evaluate,
    group_parallel_edges,
    parse_expr,
    view_to_dict,
)
from .edits import (
    EditFailedError,
    EditScope,
    apply_registration,
    describe_intent,
    execute,
    intent_from_dict,
    recommended_refresh,
    registers_only,
)
from .errors import NotFoundError, RangeError, ValidityError
from .extraction import ExtractionError, ExtractionPipeline
from .gateway import Gateway, GatewayConfig, GatewayError, HttpGateway, ReplayGateway
from .project import (
    MigrationError,
    PendingChange,
    Project,
    ProjectParseError,
    apply_extraction,
    apply_model_change,
    checkout_snapshot,
    load_project,
    resolve_pending,
    save_project,
    set_pending,
)
from .revision import (
    ChangeSet,
    Delete,
    HistoryTree,
    Insert,
    accept_all,
    commit,
    diff,
    reject_all,
)

__all__ = ["main", "render_track_changes"]

EXIT_OK = 0
EXIT_ENVIRONMENT = 1
EXIT_USAGE = 2

_USAGE_ERRORS = (
    ValidityError,
    RangeError,
    NotFoundError,
    ExprError,
    ProjectParseError,
    MigrationError,
)


def render_track_changes(change_set: ChangeSet) -> str:
    """Inline rendering: deletions in [-...-], insertions in {+...+}."""
    if change_set.is_empty():
        return "no changes"
    parts = []
    for run in change_set.runs:
        if isinstance(run, Delete):
            parts.append(f"[-{run.text}-]")
        elif isinstance(run, Insert):
            parts.append(f"{{+{run.text}+}}")
        else:
            parts.append(run.text)
    return "".join(parts)


def _gateway_from_args(args) -> Gateway:
    if getattr(args, "mock", None):
        return ReplayGateway(args.mock)
    try:
        config = GatewayConfig.from_env()
    except ValidityError as exc:
        raise GatewayError(str(exc)) from exc
    return HttpGateway(config)


def _parse_scope(value: str) -> EditScope:
    try:
        start_text, end_text = value.split(":", 1)
        return EditScope(start=int(start_text), end=int(end_text))
    except ValueError:
        raise ValidityError(f"scope must look like START:END, got {value!r}")


def _cmd_extract(args) -> int:
    text = Path(args.input).read_text("utf-8")
    gateway = _gateway_from_args(args)
    pipeline = ExtractionPipeline(gateway, max_parallel=args.parallel)
    if args.incremental:
        project = load_project(args.project)
        result = pipeline.run_incremental(project.model, project.cache, text)
        project = apply_extraction(project, result, "incremental refresh")
    else:
        result = pipeline.run_full(text)
        # The extracted state is the project's root snapshot.
        project = Project(
            id=Path(args.project).stem,
            name=args.name or Path(args.input).stem,
            text=result.model.text,
            model=result.model,
            history=commit(HistoryTree(), result.model.text, result.model, "extract"),
            cache=result.cache,
        )
    save_project(project, args.project)
    for warning in result.report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"requests: {result.report.requests}")
    print(f"project: {args.project}")
    return EXIT_OK


def _cmd_view(args) -> int:
    project = load_project(args.project)
    if args.expr:
        view = evaluate(parse_expr(args.expr), project.model)
    else:
        view = builtin_view(args.builtin, project.model)
    if args.grouped:
        view = group_parallel_edges(view)
    payload = json.dumps(view_to_dict(view), indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(payload, "utf-8")
        print(f"view: {args.out}")
    else:
        print(payload, end="")
    return EXIT_OK


def _cmd_edit(args) -> int:
    project = load_project(args.project)
    intent = intent_from_dict(json.loads(Path(args.intent).read_text("utf-8")))
    scope = _parse_scope(args.scope) if args.scope else None

    if registers_only(intent):
        model = apply_registration(intent, project.model)
        project = apply_model_change(project, model, describe_intent(intent))
        save_project(project, args.project)
        print(f"registered: {describe_intent(intent)}")
        return EXIT_OK

    gateway = _gateway_from_args(args)
    outcome = execute(intent, scope, project.model, gateway)
    print(render_track_changes(outcome.change_set))
    pending = PendingChange(
        change_set=outcome.change_set,
        label=describe_intent(intent),
        base_text=project.model.text,
        recommended_refresh=recommended_refresh(intent),
    )
    project = set_pending(project, pending)
    if args.accept_all:
        project = resolve_pending(project, accept_all(pending.change_set))
        print(f"accepted; refresh recommended: {pending.recommended_refresh}")
    else:
        print("pending changes written to the project; resolve with 'diff --accept-all'")
    save_project(project, args.project)
    return EXIT_OK


def _cmd_diff(args) -> int:
    if args.old or args.new:
        if not (args.old and args.new):
            raise ValidityError("diff needs both --old and --new, or --project")
        change_set = diff(Path(args.old).read_text("utf-8"), Path(args.new).read_text("utf-8"))
        print(render_track_changes(change_set))
        return EXIT_OK
    if not args.project:
        raise ValidityError("diff needs --old/--new files or a --project with pending changes")
    project = load_project(args.project)
    if project.pending is None:
        print("no pending changes")
        return EXIT_OK
    print(render_track_changes(project.pending.change_set))
    if args.accept_all or args.reject_all:
        decisions = (
            accept_all(project.pending.change_set)
            if args.accept_all
            else reject_all(project.pending.change_set)
        )
        project = resolve_pending(project, decisions)
        save_project(project, args.project)
        print("accepted" if args.accept_all else "rejected")
    return EXIT_OK


def _cmd_history(args) -> int:
    project = load_project(args.project)
    if args.checkout:
        project = checkout_snapshot(project, args.checkout)
        save_project(project, args.project)
    for snap in project.history.snapshots:
        marker = "*" if snap.id == project.history.current_id else " "
        parent = snap.parent_id or "-"
        print(f"{marker} {snap.id}  parent={parent}  {snap.label}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    gateway = _gateway_from_args(args) if (args.mock or _env_configured()) else None
    app = create_app(data_dir=args.data_dir, gateway=gateway)
    host, _, port_text = args.listen.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_text or "8765"))
    return EXIT_OK


def _env_configured() -> bool:
    import os

    from .gateway import ENV_BASE_URL

    return bool(os.environ.get(ENV_BASE_URL))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storyloom",
        description="Extract story models, evaluate story constructs, and compile visual edits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    extract = sub.add_parser("extract", help="extract a story model into a project file")
    extract.add_argument("--in", dest="input", required=True, help="story text file")
    extract.add_argument("--project", required=True, help="project file to write")
    extract.add_argument("--mock", help="replay fixture file (offline)")
    extract.add_argument("--incremental", action="store_true",
                         help="re-extract only changed sentences of an existing project")
    extract.add_argument("--name", help="project display name")
    extract.add_argument("--parallel", type=int, default=8, help="max in-flight requests")
    extract.set_defaults(func=_cmd_extract)

    view = sub.add_parser("view", help="evaluate a construct expression or builtin view")
    view.add_argument("--project", required=True)
    group = view.add_mutually_exclusive_group(required=True)
    group.add_argument("--expr", help="construct DSL expression")
    group.add_argument("--builtin", choices=sorted(BUILTIN_VIEWS))
    view.add_argument("--grouped", action="store_true", help="group parallel edges")
    view.add_argument("--out", help="write the view JSON here instead of stdout")
    view.set_defaults(func=_cmd_view)

    edit = sub.add_parser("edit", help="apply an edit intent")
    edit.add_argument("--project", required=True)
    edit.add_argument("--intent", required=True, help="intent JSON file")
    edit.add_argument("--scope", help="character range START:END to restrict the rewrite")
    edit.add_argument("--mock", help="replay fixture file (offline)")
    edit.add_argument("--accept-all", action="store_true", help="accept and commit immediately")
    edit.set_defaults(func=_cmd_edit)

    diff_cmd = sub.add_parser("diff", help="show word-level tracked changes")
    diff_cmd.add_argument("--old", help="old text file")
    diff_cmd.add_argument("--new", help="new text file")
    diff_cmd.add_argument("--project", help="show/resolve a project's pending changes")
    diff_cmd.add_argument("--accept-all", action="store_true")
    diff_cmd.add_argument("--reject-all", action="store_true")
    diff_cmd.set_defaults(func=_cmd_diff)

    history = sub.add_parser("history", help="list snapshots or check one out")
    history.add_argument("--project", required=True)
    history.add_argument("--checkout", help="snapshot id to revert to")
    history.set_defaults(func=_cmd_history)

    serve = sub.add_parser("serve", help="run the workspace HTTP service")
    serve.add_argument("--data-dir", default=None, help="project storage directory")
    serve.add_argument("--listen", default="127.0.0.1:8765", help="HOST:PORT")
    serve.add_argument("--mock", help="replay fixture file (offline)")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GatewayError, EditFailedError, ExtractionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT


if __name__ == "__main__":
    sys.exit(main())
