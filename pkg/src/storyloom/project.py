"""Project state: current (text, model), history, cache, pending changes.

Every content mutation commits exactly one history snapshot, so the current
state always equals the current snapshot's state. Project files are a single
JSON document written deterministically (byte-identical for equal projects).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import StoryloomError, ValidityError
from .extraction import ExtractionCache, ExtractionResult, cache_from_dict, cache_to_dict
from .model import StoryModel, model_from_dict, model_to_dict
from .revision import (
    ChangeSet,
    HistoryTree,
    changeset_from_runs,
    changeset_to_runs,
    checkout,
    commit,
    history_from_dict,
    history_to_dict,
    resolve,
)

__all__ = [
    "PendingChange",
    "Project",
    "ProjectParseError",
    "MigrationError",
    "FILE_VERSION",
    "new_project",
    "set_text",
    "apply_extraction",
    "set_pending",
    "resolve_pending",
    "apply_model_change",
    "checkout_snapshot",
    "project_to_dict",
    "project_from_dict",
    "save_project",
    "load_project",
]

FILE_VERSION = 1


class ProjectParseError(StoryloomError):
    """The project file is not valid JSON; carries the byte offset."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (at byte {byte_offset})")
        self.byte_offset = byte_offset


class MigrationError(StoryloomError):
    def __init__(self, found: Any, expected: int):
        super().__init__(f"project file version {found!r} is not supported (expected {expected})")
        self.found = found
        self.expected = expected


@dataclass(frozen=True)
class PendingChange:
    """A tracked-changes proposal awaiting accept/reject decisions."""

    change_set: ChangeSet
    label: str
    base_text: str
    recommended_refresh: str = "incremental"


@dataclass(frozen=True)
class Project:
    id: str
    name: str
    text: str
    model: StoryModel
    history: HistoryTree
    cache: ExtractionCache = field(default_factory=ExtractionCache)
    settings: Mapping[str, Any] = field(default_factory=dict)
    pending: PendingChange | None = None


def new_project(project_id: str, name: str, text: str = "") -> Project:
    """Create a project; the initial state is its history root."""
    model = StoryModel(stale=bool(text.strip()))
    history = commit(HistoryTree(), text, model, "created")
    return Project(
        id=project_id,
        name=name,
        text=text,
        model=model,
        history=history,
    )


def set_text(project: Project, text: str, label: str = "manual text edit") -> Project:
    """Replace the story text; the model keeps its last-extracted view, stale."""
    model = project.model.marked_stale() if text != project.model.text else project.model
    history = commit(project.history, text, model, label)
    return replace(project, text=text, model=model, history=history, pending=None)


def apply_extraction(project: Project, result: ExtractionResult, label: str) -> Project:
    history = commit(project.history, result.model.text, result.model, label)
    return replace(
        project,
        text=result.model.text,
        model=result.model,
        history=history,
        cache=result.cache,
        pending=None,
    )


def set_pending(project: Project, pending: PendingChange) -> Project:
    """Park a tracked-changes proposal; nothing is committed yet."""
    return replace(project, pending=pending)


def resolve_pending(project: Project, decisions) -> Project:
    if project.pending is None:
        raise ValidityError("no pending changes to resolve")
    new_text = resolve(project.pending.change_set, decisions)
    label = f"{project.pending.label} (resolved)"
    if new_text == project.pending.base_text:
        # Everything rejected: state unchanged, proposal dropped.
        return replace(project, pending=None)
    model = project.model.marked_stale()
    history = commit(project.history, new_text, model, label)
    return replace(project, text=new_text, model=model, history=history, pending=None)


def apply_model_change(project: Project, model: StoryModel, label: str) -> Project:
    """Commit a model-only mutation (entity/location registration)."""
    history = commit(project.history, project.text, model, label)
    return replace(project, model=model, history=history)


def checkout_snapshot(project: Project, snapshot_id: str) -> Project:
    history, snap = checkout(project.history, snapshot_id)
    return replace(project, text=snap.text, model=snap.model, history=history, pending=None)


# --- Persistence ---


def project_to_dict(project: Project) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "version": FILE_VERSION,
        "id": project.id,
        "name": project.name,
        "text": project.text,
        "model": model_to_dict(project.model),
        "history": history_to_dict(project.history),
        "cache": cache_to_dict(project.cache),
        "settings": dict(project.settings),
    }
    if project.pending is not None:
        doc["pendingChange"] = {
            "runs": changeset_to_runs(project.pending.change_set),
            "label": project.pending.label,
            "baseText": project.pending.base_text,
            "recommendedRefresh": project.pending.recommended_refresh,
        }
    else:
        doc["pendingChange"] = None
    return doc


def project_from_dict(data: dict[str, Any]) -> Project:
    version = data.get("version")
    if version != FILE_VERSION:
        raise MigrationError(version, FILE_VERSION)
    pending = None
    if data.get("pendingChange"):
        raw = data["pendingChange"]
        pending = PendingChange(
            change_set=changeset_from_runs(raw["runs"]),
            label=raw["label"],
            base_text=raw["baseText"],
            recommended_refresh=raw.get("recommendedRefresh", "incremental"),
        )
    return Project(
        id=data["id"],
        name=data["name"],
        text=data["text"],
        model=model_from_dict(data["model"]),
        history=history_from_dict(data["history"]),
        cache=cache_from_dict(data["cache"]),
        settings=data.get("settings", {}),
        pending=pending,
    )


def save_project(project: Project, path: str | Path) -> None:
    """Write the project file atomically and deterministically."""
    path = Path(path)
    payload = json.dumps(project_to_dict(project), indent=2, ensure_ascii=False) + "\n"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(payload, "utf-8")
    os.replace(tmp, path)


def load_project(path: str | Path) -> Project:
    raw = Path(path).read_text("utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        byte_offset = len(raw[: exc.pos].encode("utf-8"))
        raise ProjectParseError(f"invalid project file: {exc.msg}", byte_offset)
    return project_from_dict(data)
