"""Word-level tracked changes and the branching snapshot history.

The diff aligns word tokens (non-whitespace runs with the following
whitespace attached) by longest common subsequence, so the Delete+Insert
token cost is minimal for that tokenization and ties break toward the
earliest match.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Literal, Mapping

from .errors import NotFoundError, ValidityError
from .model import StoryModel, model_from_dict, model_to_dict

__all__ = [
    "Keep",
    "Delete",
    "Insert",
    "Run",
    "ChangeSet",
    "diff",
    "resolve",
    "accept_all",
    "reject_all",
    "Snapshot",
    "HistoryTree",
    "commit",
    "checkout",
    "changeset_to_runs",
    "changeset_from_runs",
    "history_to_dict",
    "history_from_dict",
]


@dataclass(frozen=True)
class Keep:
    text: str


@dataclass(frozen=True)
class Delete:
    text: str


@dataclass(frozen=True)
class Insert:
    text: str


Run = Keep | Delete | Insert

Decision = Literal["accept", "reject"]


@dataclass(frozen=True)
class ChangeSet:
    """Ordered Keep/Delete/Insert runs in normal form.

    Keep+Delete texts concatenate to the old text, Keep+Insert texts to the
    new text; no two adjacent runs share a variant.
    """

    runs: tuple[Run, ...] = ()

    def old_text(self) -> str:
        return "".join(r.text for r in self.runs if not isinstance(r, Insert))

    def new_text(self) -> str:
        return "".join(r.text for r in self.runs if not isinstance(r, Delete))

    def is_empty(self) -> bool:
        return all(isinstance(r, Keep) for r in self.runs)


def _tokenize(text: str) -> list[str]:
    if not text:
        return []
    parts = re.findall(r"\S+\s*", text)
    if not parts:  # all-whitespace text
        return [text]
    if text[0].isspace():  # leading whitespace sticks to the first token
        first_non_ws = len(text) - len(text.lstrip())
        parts[0] = text[:first_non_ws] + parts[0]
    return parts


def _normalize(runs: Iterable[Run]) -> tuple[Run, ...]:
    out: list[Run] = []
    for run in runs:
        if not run.text:
            continue
        if out and type(out[-1]) is type(run):
            out[-1] = type(run)(out[-1].text + run.text)
        else:
            out.append(run)
    return tuple(out)


def diff(old_text: str, new_text: str) -> ChangeSet:
    """Word-level LCS diff of two texts, in normal form."""
    a = _tokenize(old_text)
    b = _tokenize(new_text)

    prefix = 0
    while prefix < len(a) and prefix < len(b) and a[prefix] == b[prefix]:
        prefix += 1
    suffix = 0
    while (
        suffix < len(a) - prefix
        and suffix < len(b) - prefix
        and a[len(a) - 1 - suffix] == b[len(b) - 1 - suffix]
    ):
        suffix += 1

    core_a = a[prefix : len(a) - suffix]
    core_b = b[prefix : len(b) - suffix]

    runs: list[Run] = [Keep("".join(a[:prefix]))]

    la, lb = len(core_a), len(core_b)
    # dp[i][j] = LCS length of core_a[i:], core_b[j:]
    dp = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la - 1, -1, -1):
        row, below = dp[i], dp[i + 1]
        for j in range(lb - 1, -1, -1):
            if core_a[i] == core_b[j]:
                row[j] = below[j + 1] + 1
            else:
                down, right = below[j], row[j + 1]
                row[j] = down if down >= right else right

    i = j = 0
    while i < la and j < lb:
        if core_a[i] == core_b[j]:
            runs.append(Keep(core_a[i]))
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            runs.append(Delete(core_a[i]))
            i += 1
        else:
            runs.append(Insert(core_b[j]))
            j += 1
    if i < la:
        runs.append(Delete("".join(core_a[i:])))
    if j < lb:
        runs.append(Insert("".join(core_b[j:])))

    runs.append(Keep("".join(a[len(a) - suffix :])))
    return ChangeSet(_normalize(runs))


def accept_all(change_set: ChangeSet) -> dict[int, Decision]:
    return {
        i: "accept" for i, r in enumerate(change_set.runs) if not isinstance(r, Keep)
    }


def reject_all(change_set: ChangeSet) -> dict[int, Decision]:
    return {
        i: "reject" for i, r in enumerate(change_set.runs) if not isinstance(r, Keep)
    }


def resolve(change_set: ChangeSet, decisions: Mapping[int, Decision]) -> str:
    """Compose the runs under per-run accept/reject decisions.

    Every Delete and Insert run needs a decision; Keep runs take none.
    """
    for index in decisions:
        if not 0 <= index < len(change_set.runs):
            raise ValidityError(f"decision for unknown run index {index}")
        if isinstance(change_set.runs[index], Keep):
            raise ValidityError(f"run {index} is a Keep run and takes no decision")
        if decisions[index] not in ("accept", "reject"):
            raise ValidityError(f"run {index}: decision must be 'accept' or 'reject'")

    out: list[str] = []
    for index, run in enumerate(change_set.runs):
        if isinstance(run, Keep):
            out.append(run.text)
            continue
        decision = decisions.get(index)
        if decision is None:
            raise ValidityError(f"missing decision for run {index}")
        if isinstance(run, Delete):
            if decision == "reject":
                out.append(run.text)
        else:  # Insert
            if decision == "accept":
                out.append(run.text)
    return "".join(out)


# --- ChangeSet wire format ---

_RUN_OPS = {Keep: "keep", Delete: "delete", Insert: "insert"}
_OP_RUNS = {"keep": Keep, "delete": Delete, "insert": Insert}


def changeset_to_runs(change_set: ChangeSet) -> list[dict[str, str]]:
    return [{"op": _RUN_OPS[type(r)], "text": r.text} for r in change_set.runs]


def changeset_from_runs(runs: list[dict[str, str]]) -> ChangeSet:
    return ChangeSet(tuple(_OP_RUNS[r["op"]](r["text"]) for r in runs))


# --- Branching history of (text, model) snapshots ---


@dataclass(frozen=True)
class Snapshot:
    """Full (text, model) state. ``created_at`` is a logical commit counter."""

    id: str
    parent_id: str | None
    text: str
    model: StoryModel
    label: str
    created_at: int


@dataclass(frozen=True)
class HistoryTree:
    snapshots: tuple[Snapshot, ...] = ()
    current_id: str | None = None

    def snapshot(self, snapshot_id: str) -> Snapshot:
        for snap in self.snapshots:
            if snap.id == snapshot_id:
                return snap
        raise NotFoundError(f"unknown snapshot id: {snapshot_id}")

    def current(self) -> Snapshot:
        if self.current_id is None:
            raise NotFoundError("history tree is empty")
        return self.snapshot(self.current_id)

    def children(self, snapshot_id: str | None) -> list[Snapshot]:
        return [s for s in self.snapshots if s.parent_id == snapshot_id]


def commit(tree: HistoryTree, text: str, model: StoryModel, label: str) -> HistoryTree:
    """Add a snapshot under the current one and advance to it.

    Committing after checking out an ancestor creates a sibling branch.
    """
    seq = len(tree.snapshots) + 1
    snap = Snapshot(
        id=f"snap-{seq}",
        parent_id=tree.current_id,
        text=text,
        model=model,
        label=label,
        created_at=seq,
    )
    return HistoryTree(snapshots=tree.snapshots + (snap,), current_id=snap.id)


def checkout(tree: HistoryTree, snapshot_id: str) -> tuple[HistoryTree, Snapshot]:
    """Move current to ``snapshot_id`` and return its stored state verbatim."""
    snap = tree.snapshot(snapshot_id)
    return HistoryTree(snapshots=tree.snapshots, current_id=snap.id), snap


def history_to_dict(tree: HistoryTree) -> dict[str, Any]:
    return {
        "snapshots": [
            {
                "id": s.id,
                "parentId": s.parent_id,
                "text": s.text,
                "model": model_to_dict(s.model),
                "label": s.label,
                "createdAt": s.created_at,
            }
            for s in tree.snapshots
        ],
        "currentId": tree.current_id,
    }


def history_from_dict(data: dict[str, Any]) -> HistoryTree:
    return HistoryTree(
        snapshots=tuple(
            Snapshot(
                id=s["id"],
                parent_id=s["parentId"],
                text=s["text"],
                model=model_from_dict(s["model"]),
                label=s["label"],
                created_at=s["createdAt"],
            )
            for s in data["snapshots"]
        ),
        current_id=data["currentId"],
    )
