"""HTTP workspace service over the engine.

One writer per project: mutations go through jobs or locked handlers, reads
never observe a half-applied edit. Extraction jobs stream per-sentence
progress over SSE (n sentence events plus one terminal event).
"""
from __future__ import annotations

import itertools
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from fastapi import Body, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .constructs import (
    ExprError,
    builtin_view,
    evaluate,
    group_parallel_edges,
    parse_expr,
    view_to_dict,
)
from .edits import (
    EditScope,
    RewriteFromVisuals,
    apply_registration,
    describe_intent,
    execute,
    intent_from_dict,
    recommended_refresh,
    registers_only,
)
from .errors import NotFoundError, RangeError, StoryloomError, ValidityError
from .extraction import ExtractionPipeline
from .gateway import Gateway
from .model import (
    events_for_span,
    model_to_dict,
    sentence_for_event,
)
from .project import (
    PendingChange,
    Project,
    apply_extraction,
    apply_model_change,
    checkout_snapshot,
    load_project,
    new_project,
    project_from_dict,
    project_to_dict,
    resolve_pending,
    save_project,
    set_pending,
    set_text,
)
from .revision import accept_all, changeset_to_runs, reject_all

__all__ = ["create_app", "Workspace", "Job"]


@dataclass
class Job:
    id: str
    kind: str  # extract | edit | rewrite
    status: str = "queued"  # queued | running | done | failed
    progress: dict[str, int] = field(default_factory=lambda: {"completed": 0, "total": 0})
    result: dict[str, Any] | None = None
    error: str | None = None

    def __post_init__(self):
        self._events: list[tuple[str, dict[str, Any]]] = []
        self._cv = threading.Condition()

    def emit(self, event: str, data: dict[str, Any]) -> None:
        with self._cv:
            self._events.append((event, data))
            self._cv.notify_all()

    def events_from(self, index: int) -> Iterator[tuple[str, dict[str, Any]]]:
        """Yield events from ``index`` on, waiting for more until terminal."""
        while True:
            with self._cv:
                while index >= len(self._events):
                    self._cv.wait()
                event = self._events[index]
            index += 1
            yield event
            if event[0] in ("done", "failed"):
                return

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "status": self.status,
            "progress": dict(self.progress),
            "result": self.result,
            "error": self.error,
        }


class _ProjectHandle:
    def __init__(self, project: Project):
        self.project = project
        self.lock = threading.RLock()
        self.jobs: dict[str, Job] = {}
        self.active_job: Job | None = None


class Workspace:
    """In-memory project registry backed by one JSON file per project."""

    def __init__(self, data_dir: str | Path | None, gateway: Gateway | None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.gateway = gateway
        self._handles: dict[str, _ProjectHandle] = {}
        self._lock = threading.Lock()
        self._job_counter = itertools.count(1)
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            for path in sorted(self.data_dir.glob("*.json")):
                project = load_project(path)
                self._handles[project.id] = _ProjectHandle(project)

    def create(self, name: str, text: str) -> Project:
        project_id = uuid.uuid4().hex[:12]
        project = new_project(project_id, name, text)
        with self._lock:
            self._handles[project_id] = _ProjectHandle(project)
        self.persist(project_id)
        return project

    def put(self, project: Project) -> None:
        with self._lock:
            handle = self._handles.get(project.id)
            if handle is None:
                self._handles[project.id] = _ProjectHandle(project)
            else:
                with handle.lock:
                    handle.project = project
        self.persist(project.id)

    def handle(self, project_id: str) -> _ProjectHandle:
        handle = self._handles.get(project_id)
        if handle is None:
            raise NotFoundError(f"unknown project id: {project_id}")
        return handle

    def persist(self, project_id: str) -> None:
        if self.data_dir is None:
            return
        handle = self.handle(project_id)
        save_project(handle.project, self.data_dir / f"{project_id}.json")

    def require_gateway(self) -> Gateway:
        if self.gateway is None:
            raise ValidityError(
                "no gateway configured; start the service with gateway settings or a fixture"
            )
        return self.gateway

    def new_job(self, handle: _ProjectHandle, kind: str) -> Job:
        job = Job(id=f"job-{next(self._job_counter)}", kind=kind)
        handle.jobs[job.id] = job
        return job

    def start_mutation(self, handle: _ProjectHandle, kind: str) -> Job:
        with handle.lock:
            if handle.active_job is not None:
                raise _Conflict(f"a {handle.active_job.kind} job is already running")
            job = self.new_job(handle, kind)
            handle.active_job = job
            job.status = "running"
            return job

    def finish_job(self, handle: _ProjectHandle, job: Job, *, error: str | None = None,
                   result: dict[str, Any] | None = None) -> None:
        with handle.lock:
            if error is not None:
                job.status = "failed"
                job.error = error
                job.emit("failed", {"error": error})
            else:
                job.status = "done"
                job.result = result
                job.emit("done", result or {})
            if handle.active_job is job:
                handle.active_job = None


class _Conflict(StoryloomError):
    pass


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, NotFoundError):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(exc, _Conflict):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, (ValidityError, RangeError, ExprError)):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def create_app(
    data_dir: str | Path | None = None,
    gateway: Gateway | None = None,
) -> FastAPI:
    app = FastAPI(title="storyloom workspace", version="0.1.0")
    # the studio is served from its own origin during development
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    workspace = Workspace(data_dir, gateway)
    app.state.workspace = workspace

    @app.exception_handler(StoryloomError)
    async def _storyloom_error(_request: Request, exc: StoryloomError):
        http = _http_error(exc)
        return JSONResponse(status_code=http.status_code, content={"detail": http.detail})

    # -- projects ----------------------------------------------------------

    @app.post("/projects")
    def create_project(body: dict = Body(default={})):
        project = workspace.create(body.get("name", "untitled"), body.get("text", ""))
        return {"id": project.id, "name": project.name, "stale": project.model.stale}

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return project_to_dict(workspace.handle(project_id).project)

    @app.put("/projects/{project_id}")
    def put_project(project_id: str, body: dict = Body(...)):
        project = project_from_dict(body)
        if project.id != project_id:
            raise ValidityError("project id in the body does not match the URL")
        workspace.put(project)
        return {"id": project_id, "saved": True}

    @app.get("/projects/{project_id}/model")
    def get_model(project_id: str):
        return model_to_dict(workspace.handle(project_id).project.model)

    # -- views ---------------------------------------------------------------

    @app.get("/projects/{project_id}/view/{builtin}")
    def get_builtin_view(project_id: str, builtin: str, grouped: bool = False):
        project = workspace.handle(project_id).project
        view = builtin_view(builtin, project.model)
        if grouped:
            view = group_parallel_edges(view)
        return view_to_dict(view)

    @app.post("/projects/{project_id}/view")
    def post_view(project_id: str, body: dict = Body(...)):
        project = workspace.handle(project_id).project
        expr = parse_expr(body.get("expr", ""))
        view = evaluate(expr, project.model)
        if body.get("grouped"):
            view = group_parallel_edges(view)
        return view_to_dict(view)

    # -- text and refresh ------------------------------------------------------

    @app.put("/projects/{project_id}/text")
    def put_text(project_id: str, body: dict = Body(...)):
        handle = workspace.handle(project_id)
        with handle.lock:
            if handle.active_job is not None:
                raise _Conflict(f"a {handle.active_job.kind} job is already running")
            handle.project = set_text(handle.project, body.get("text", ""))
            workspace.persist(project_id)
            return {
                "stale": handle.project.model.stale,
                "snapshotId": handle.project.history.current_id,
            }

    def _run_extraction(handle: _ProjectHandle, job: Job, incremental: bool) -> None:
        project = handle.project
        try:
            pipeline = ExtractionPipeline(
                workspace.require_gateway(),
                on_progress=lambda done, total: (
                    job.progress.update(completed=done, total=total),
                    job.emit("progress", {"completed": done, "total": total}),
                ),
            )
            if incremental:
                result = pipeline.run_incremental(project.model, project.cache, project.text)
                label = "incremental refresh"
            else:
                result = pipeline.run_full(project.text)
                label = "refresh"
        except Exception as exc:  # noqa: BLE001 - job failures land in the job record
            workspace.finish_job(handle, job, error=str(exc))
            return
        with handle.lock:
            handle.project = apply_extraction(handle.project, result, label)
            workspace.persist(handle.project.id)
        workspace.finish_job(
            handle,
            job,
            result={
                "requests": result.report.requests,
                "warnings": result.report.warnings,
                "snapshotId": handle.project.history.current_id,
                "stale": handle.project.model.stale,
            },
        )

    def _start_refresh(project_id: str, incremental: bool):
        handle = workspace.handle(project_id)
        job = workspace.start_mutation(handle, "extract")
        total = 0
        job.progress["total"] = total
        thread = threading.Thread(
            target=_run_extraction, args=(handle, job, incremental), daemon=True
        )
        thread.start()
        return {"jobId": job.id}

    @app.post("/projects/{project_id}/refresh", status_code=202)
    def refresh(project_id: str):
        return _start_refresh(project_id, incremental=False)

    @app.post("/projects/{project_id}/refresh-incremental", status_code=202)
    def refresh_incremental(project_id: str):
        return _start_refresh(project_id, incremental=True)

    # -- edits -----------------------------------------------------------------

    def _run_edit(handle: _ProjectHandle, job: Job, intent, scope) -> None:
        project = handle.project
        try:
            if registers_only(intent):
                model = apply_registration(intent, project.model)
                with handle.lock:
                    handle.project = apply_model_change(
                        handle.project, model, describe_intent(intent)
                    )
                    workspace.persist(handle.project.id)
                workspace.finish_job(
                    handle,
                    job,
                    result={
                        "registered": True,
                        "snapshotId": handle.project.history.current_id,
                    },
                )
                return
            outcome = execute(intent, scope, project.model, workspace.require_gateway())
            pending = PendingChange(
                change_set=outcome.change_set,
                label=describe_intent(intent),
                base_text=project.model.text,
                recommended_refresh=recommended_refresh(intent),
            )
            with handle.lock:
                handle.project = set_pending(handle.project, pending)
                workspace.persist(handle.project.id)
            workspace.finish_job(
                handle,
                job,
                result={
                    "pendingChange": {
                        "runs": changeset_to_runs(outcome.change_set),
                        "label": pending.label,
                        "recommendedRefresh": pending.recommended_refresh,
                        "modelStale": outcome.model_stale,
                    }
                },
            )
        except Exception as exc:  # noqa: BLE001 - job failures land in the job record
            workspace.finish_job(handle, job, error=str(exc))

    def _start_edit(project_id: str, intent, scope, kind: str):
        handle = workspace.handle(project_id)
        job = workspace.start_mutation(handle, kind)
        thread = threading.Thread(target=_run_edit, args=(handle, job, intent, scope), daemon=True)
        thread.start()
        return {"jobId": job.id}

    @app.post("/projects/{project_id}/edits", status_code=202)
    def post_edit(project_id: str, body: dict = Body(...)):
        intent = intent_from_dict(body.get("intent", {}))
        scope = None
        if body.get("scope"):
            scope = EditScope(start=body["scope"]["start"], end=body["scope"]["end"])
        return _start_edit(project_id, intent, scope, "edit")

    @app.post("/projects/{project_id}/rewrite-from-visuals", status_code=202)
    def rewrite_from_visuals(project_id: str, body: dict = Body(default={})):
        scope = None
        if body.get("scope"):
            scope = EditScope(start=body["scope"]["start"], end=body["scope"]["end"])
        return _start_edit(project_id, RewriteFromVisuals(), scope, "rewrite")

    @app.get("/projects/{project_id}/changes")
    def get_changes(project_id: str):
        project = workspace.handle(project_id).project
        if project.pending is None:
            return {"pendingChange": None}
        return {
            "pendingChange": {
                "runs": changeset_to_runs(project.pending.change_set),
                "label": project.pending.label,
                "recommendedRefresh": project.pending.recommended_refresh,
            }
        }

    @app.post("/projects/{project_id}/changes/resolve")
    def post_resolve(project_id: str, body: dict = Body(...)):
        handle = workspace.handle(project_id)
        with handle.lock:
            if handle.active_job is not None:
                raise _Conflict(f"a {handle.active_job.kind} job is already running")
            project = handle.project
            if project.pending is None:
                raise ValidityError("no pending changes to resolve")
            decisions = body.get("decisions")
            if decisions == "accept_all":
                mapping = accept_all(project.pending.change_set)
            elif decisions == "reject_all":
                mapping = reject_all(project.pending.change_set)
            elif isinstance(decisions, dict):
                mapping = {int(k): v for k, v in decisions.items()}
            else:
                raise ValidityError(
                    "decisions must be 'accept_all', 'reject_all', or a run-index map"
                )
            handle.project = resolve_pending(project, mapping)
            workspace.persist(project_id)
            return {
                "text": handle.project.text,
                "stale": handle.project.model.stale,
                "snapshotId": handle.project.history.current_id,
            }

    # -- history -----------------------------------------------------------------

    @app.get("/projects/{project_id}/history")
    def get_history(project_id: str):
        project = workspace.handle(project_id).project
        return {
            "snapshots": [
                {
                    "id": s.id,
                    "parentId": s.parent_id,
                    "label": s.label,
                    "createdAt": s.created_at,
                }
                for s in project.history.snapshots
            ],
            "currentId": project.history.current_id,
        }

    @app.post("/projects/{project_id}/history/checkout")
    def post_checkout(project_id: str, body: dict = Body(...)):
        handle = workspace.handle(project_id)
        with handle.lock:
            if handle.active_job is not None:
                raise _Conflict(f"a {handle.active_job.kind} job is already running")
            handle.project = checkout_snapshot(handle.project, body.get("snapshotId", ""))
            workspace.persist(project_id)
            return {
                "text": handle.project.text,
                "stale": handle.project.model.stale,
                "currentId": handle.project.history.current_id,
            }

    # -- bidirectional mapping ------------------------------------------------------

    @app.get("/projects/{project_id}/mapping")
    def get_mapping(
        project_id: str,
        source: str = Query(alias="from"),
        id: str | None = None,
        start: int | None = None,
        end: int | None = None,
    ):
        model = workspace.handle(project_id).project.model
        if source == "event":
            if id is None:
                raise ValidityError("mapping from=event needs an id")
            span = sentence_for_event(model, id)
            return {
                "sentenceIndex": span.index,
                "charStart": span.char_start,
                "charEnd": span.char_end,
            }
        if source == "range":
            if start is None or end is None:
                raise ValidityError("mapping from=range needs start and end")
            events = events_for_span(model, start, end)
            entity_ids: list[str] = []
            location_ids: list[str] = []
            for event in events:
                for entity_id in (event.source, event.target):
                    if entity_id not in entity_ids:
                        entity_ids.append(entity_id)
                if event.location is not None and event.location not in location_ids:
                    location_ids.append(event.location)
            return {
                "events": [e.id for e in events],
                "entities": entity_ids,
                "locations": location_ids,
                "sentences": sorted({e.sentence_index for e in events}),
            }
        raise ValidityError("mapping 'from' must be 'event' or 'range'")

    # -- jobs ---------------------------------------------------------------------

    @app.get("/projects/{project_id}/jobs/{job_id}")
    def get_job(project_id: str, job_id: str):
        handle = workspace.handle(project_id)
        job = handle.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job id: {job_id}")
        return job.to_dict()

    @app.get("/projects/{project_id}/jobs/{job_id}/events")
    def get_job_events(project_id: str, job_id: str):
        handle = workspace.handle(project_id)
        job = handle.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job id: {job_id}")

        def stream():
            for name, data in job.events_from(0):
                yield f"event: {name}\ndata: {json.dumps(data)}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
