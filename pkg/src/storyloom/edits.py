"""Compiling visual edit intents into prompts and executing them.

Every manipulation of a view (reordering the timeline, adding an action,
moving an entity, ...) becomes one intent here. Compilation instantiates the
matching template byte-for-byte; an optional scope narrows the rewrite to a
sentence-snapped passage via the TEXT_TO_REWRITE mechanism. Execution makes
exactly one gateway call and returns the new text with tracked changes —
or fails atomically, leaving everything untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Union

from .errors import NotFoundError, RangeError, StoryloomError, ValidityError
from .gateway import GatewayError
from .model import Entity, Location, StoryModel, normalize_name
from .prompts import RESPONSE_SCHEMAS, PromptSpec, render_template
from .revision import ChangeSet, diff
from .extraction import PLACEHOLDER_EMOJI, validate_payload

__all__ = [
    "ReorderEvents",
    "AddAction",
    "ChangeAction",
    "RemoveAction",
    "AddEntity",
    "RemoveEntity",
    "AddLocation",
    "MoveEntity",
    "SetTrait",
    "RewriteFromVisuals",
    "EditIntent",
    "EditScope",
    "EditOutcome",
    "EditFailedError",
    "compile_intent",
    "scope_prompt",
    "execute",
    "serialize_event_order",
    "registers_only",
    "apply_registration",
    "recommended_refresh",
    "intent_to_dict",
    "intent_from_dict",
    "describe_intent",
]


@dataclass(frozen=True)
class ReorderEvents:
    order: tuple[str, ...]


@dataclass(frozen=True)
class AddAction:
    source: str
    target: str
    name: str


@dataclass(frozen=True)
class ChangeAction:
    event_id: str
    new_name: str


@dataclass(frozen=True)
class RemoveAction:
    event_id: str


@dataclass(frozen=True)
class AddEntity:
    name: str


@dataclass(frozen=True)
class RemoveEntity:
    entity_id: str


@dataclass(frozen=True)
class AddLocation:
    name: str


@dataclass(frozen=True)
class MoveEntity:
    entity_id: str
    from_location: str
    to_location: str


@dataclass(frozen=True)
class SetTrait:
    entity_id: str
    trait_name: str
    new_value: int


@dataclass(frozen=True)
class RewriteFromVisuals:
    pass


EditIntent = Union[
    ReorderEvents,
    AddAction,
    ChangeAction,
    RemoveAction,
    AddEntity,
    RemoveEntity,
    AddLocation,
    MoveEntity,
    SetTrait,
    RewriteFromVisuals,
]


@dataclass(frozen=True)
class EditScope:
    """Character range to restrict the rewrite to; snaps to whole sentences."""

    start: int
    end: int


@dataclass(frozen=True)
class EditOutcome:
    new_text: str
    change_set: ChangeSet
    model_stale: bool


class EditFailedError(StoryloomError):
    """The gateway declined or failed; the old text is preserved."""


def serialize_event_order(model: StoryModel, order: list[str] | tuple[str, ...]) -> str:
    """One line per event, ``<source name> <action name> <target name>``."""
    if sorted(order) != sorted(e.id for e in model.events):
        raise ValidityError("order must be a permutation of the model's event ids")
    lines = []
    for event_id in order:
        event = model.event(event_id)
        source = model.entity(event.source)
        target = model.entity(event.target)
        lines.append(f"{source.name} {event.name} {target.name}")
    return "\n".join(lines)


def registers_only(intent: EditIntent) -> bool:
    """True for intents that change the model without touching the text."""
    return isinstance(intent, (AddEntity, AddLocation))


def recommended_refresh(intent: EditIntent) -> str:
    """Reordered stories are re-extracted fully; everything else incrementally."""
    return "full" if isinstance(intent, ReorderEvents) else "incremental"


def _narrated_order(model: StoryModel) -> list[str]:
    return [e.id for e in sorted(model.events, key=lambda e: e.narrated_index)]


def compile_intent(
    intent: EditIntent,
    scope: EditScope | None,
    model: StoryModel,
) -> PromptSpec | None:
    """Instantiate the intent's template; ``None`` for registration intents."""
    if registers_only(intent):
        # Adding an entity or location executes no prompt; the text only
        # changes once an action or a move involves it.
        return None

    story = model.text
    if isinstance(intent, ReorderEvents):
        text = render_template(
            "edit_reorder_events",
            {
                "<STORY TEXT>": story,
                "<CURRENT ORDER>": serialize_event_order(model, _narrated_order(model)),
                "<NEW ORDER>": serialize_event_order(model, intent.order),
            },
        )
        template = "edit_reorder_events"
    elif isinstance(intent, AddAction):
        source = model.entity(intent.source)
        target = model.entity(intent.target)
        if not intent.name.strip():
            raise ValidityError("action name must be non-empty")
        text = render_template(
            "edit_add_action",
            {
                "<STORY TEXT>": story,
                "<SOURCE ENTITY>": source.name,
                "<TARGET ENTITY>": target.name,
                "<ACTION NAME>": intent.name,
                "<ACTION>": intent.name,
            },
        )
        template = "edit_add_action"
    elif isinstance(intent, ChangeAction):
        event = model.event(intent.event_id)
        if not intent.new_name.strip():
            raise ValidityError("action name must be non-empty")
        text = render_template(
            "edit_change_action",
            {
                "<STORY TEXT>": story,
                "<SOURCE ENTITY>": model.entity(event.source).name,
                "<TARGET ENTITY>": model.entity(event.target).name,
                "<ACTION NAME>": event.name,
                "<NEW ACTION>": intent.new_name,
            },
        )
        template = "edit_change_action"
    elif isinstance(intent, RemoveAction):
        event = model.event(intent.event_id)
        text = render_template(
            "edit_remove_action",
            {
                "<STORY TEXT>": story,
                "<SOURCE ENTITY>": model.entity(event.source).name,
                "<TARGET ENTITY>": model.entity(event.target).name,
                "<ACTION NAME>": event.name,
            },
        )
        template = "edit_remove_action"
    elif isinstance(intent, RemoveEntity):
        entity = model.entity(intent.entity_id)
        text = render_template(
            "edit_remove_entity",
            {"<STORY TEXT>": story, "<ENTITY NAME>": entity.name},
        )
        template = "edit_remove_entity"
    elif isinstance(intent, MoveEntity):
        entity = model.entity(intent.entity_id)
        current = model.location(intent.from_location)
        new = model.location(intent.to_location)
        text = render_template(
            "edit_move_entity",
            {
                "<STORY TEXT>": story,
                "<ENTITY NAME>": entity.name,
                "<CURRENT LOCATION>": current.name,
                "<NEW LOCATION>": new.name,
            },
        )
        template = "edit_move_entity"
    elif isinstance(intent, SetTrait):
        entity = model.entity(intent.entity_id)
        old = next(
            (t for t in entity.traits if normalize_name(t.name) == normalize_name(intent.trait_name)),
            None,
        )
        if old is None:
            raise NotFoundError(
                f"entity {entity.name!r} has no trait named {intent.trait_name!r}"
            )
        if not 1 <= intent.new_value <= 10:
            raise ValidityError("trait value must be between 1 and 10")
        text = render_template(
            "edit_set_trait",
            {
                "<STORY TEXT>": story,
                "<ENTITY>": entity.name,
                "<TRAIT>": old.name,
                "<VALUE>": str(intent.new_value),
                "<OLD VALUE>": str(old.value),
            },
        )
        template = "edit_set_trait"
    elif isinstance(intent, RewriteFromVisuals):
        text = render_template(
            "edit_rewrite_from_visuals",
            {
                "<STORY TEXT>": story,
                "<ENTITIES>": ", ".join(e.name for e in model.entities),
                "<LOCATIONS>": ", ".join(l.name for l in model.locations),
                "<EVENT ORDER>": serialize_event_order(model, _narrated_order(model)),
            },
        )
        template = "edit_rewrite_from_visuals"
    else:
        raise ValidityError(f"unknown intent {intent!r}")

    prompt = PromptSpec(
        purpose="edit",
        text=text,
        response_schema=RESPONSE_SCHEMAS["edit"],
        template=template,
        body=text[len(story) + 1 :] if text.startswith(story + "\n") else None,
    )
    if scope is not None:
        prompt = scope_prompt(prompt, scope, model)
    return prompt


def snap_scope(model: StoryModel, scope: EditScope) -> tuple[int, int]:
    """Expand a range to whole sentences; a zero-length range selects its sentence."""
    if not 0 <= scope.start <= scope.end <= len(model.text):
        raise RangeError(
            f"scope [{scope.start}, {scope.end}) outside text of length {len(model.text)}"
        )
    hit = []
    for span in model.sentences:
        if scope.start == scope.end:
            if span.char_start <= scope.start < span.char_end:
                hit.append(span)
        elif span.char_start < scope.end and scope.start < span.char_end:
            hit.append(span)
    if not hit:
        raise ValidityError("scope does not touch any sentence")
    return hit[0].char_start, hit[-1].char_end


def scope_prompt(prompt: PromptSpec, scope: EditScope, model: StoryModel) -> PromptSpec:
    """Replace the scoped passage with TEXT_TO_REWRITE and bind the token.

    A scope covering every sentence leaves the prompt unscoped.
    """
    if prompt.body is None:
        raise ValidityError("prompt cannot be scoped: story body unavailable")
    start, end = snap_scope(model, scope)
    if model.sentences and (start, end) == (
        model.sentences[0].char_start,
        model.sentences[-1].char_end,
    ):
        return prompt
    passage = model.text[start:end]
    story_with_token = model.text[:start] + "TEXT_TO_REWRITE" + model.text[end:]
    text = render_template(
        "scoped_edit",
        {
            "<STORY TEXT>": story_with_token,
            "<PASSAGE>": passage,
            "<REST>": prompt.body,
        },
    )
    return replace(prompt, text=text, scope_span=(start, end))


def execute(
    intent: EditIntent,
    scope: EditScope | None,
    model: StoryModel,
    gateway,
) -> EditOutcome:
    """Run the intent through the gateway; never applies a partial edit."""
    prompt = compile_intent(intent, scope, model)
    if prompt is None:
        return EditOutcome(
            new_text=model.text,
            change_set=diff(model.text, model.text),
            model_stale=False,
        )
    try:
        payload = gateway.complete_structured(prompt)
    except GatewayError as exc:
        raise EditFailedError(f"edit failed, text unchanged: {exc}") from exc
    records, _ = validate_payload(payload, "edit")
    returned = records[0]
    if prompt.scope_span is not None:
        start, end = prompt.scope_span
        new_text = model.text[:start] + returned + model.text[end:]
    else:
        new_text = returned
    change_set = diff(model.text, new_text)
    return EditOutcome(
        new_text=new_text,
        change_set=change_set,
        model_stale=new_text != model.text,
    )


def apply_registration(intent: EditIntent, model: StoryModel) -> StoryModel:
    """Add an entity or location to the model without any text change."""
    if isinstance(intent, AddEntity):
        name = intent.name.strip()
        if not name:
            raise ValidityError("entity name must be non-empty")
        if model.entity_by_name(name) is not None:
            raise ValidityError(f"entity named {name!r} already exists")
        entity = Entity(id=f"ent-{len(model.entities) + 1}", name=name, emoji=PLACEHOLDER_EMOJI)
        return replace(model, entities=model.entities + (entity,))
    if isinstance(intent, AddLocation):
        name = intent.name.strip()
        if not name:
            raise ValidityError("location name must be non-empty")
        if normalize_name(name) == "unknown":
            raise ValidityError("'unknown' is reserved for the unresolved location")
        if model.location_by_name(name) is not None:
            raise ValidityError(f"location named {name!r} already exists")
        location = Location(id=f"loc-{len(model.locations) + 1}", name=name, emoji=PLACEHOLDER_EMOJI)
        return replace(model, locations=model.locations + (location,))
    raise ValidityError(f"{type(intent).__name__} is not a registration intent")


# --- Intent wire format ---

_INTENT_TYPES: dict[str, type] = {
    "reorder_events": ReorderEvents,
    "add_action": AddAction,
    "change_action": ChangeAction,
    "remove_action": RemoveAction,
    "add_entity": AddEntity,
    "remove_entity": RemoveEntity,
    "add_location": AddLocation,
    "move_entity": MoveEntity,
    "set_trait": SetTrait,
    "rewrite_from_visuals": RewriteFromVisuals,
}
_TYPE_NAMES = {cls: name for name, cls in _INTENT_TYPES.items()}


def intent_to_dict(intent: EditIntent) -> dict[str, Any]:
    data: dict[str, Any] = {"type": _TYPE_NAMES[type(intent)]}
    if isinstance(intent, ReorderEvents):
        data["order"] = list(intent.order)
    elif isinstance(intent, AddAction):
        data.update(source=intent.source, target=intent.target, name=intent.name)
    elif isinstance(intent, ChangeAction):
        data.update(eventId=intent.event_id, newName=intent.new_name)
    elif isinstance(intent, RemoveAction):
        data.update(eventId=intent.event_id)
    elif isinstance(intent, (AddEntity, AddLocation)):
        data.update(name=intent.name)
    elif isinstance(intent, RemoveEntity):
        data.update(entityId=intent.entity_id)
    elif isinstance(intent, MoveEntity):
        data.update(
            entityId=intent.entity_id,
            fromLocation=intent.from_location,
            toLocation=intent.to_location,
        )
    elif isinstance(intent, SetTrait):
        data.update(
            entityId=intent.entity_id, traitName=intent.trait_name, newValue=intent.new_value
        )
    return data


def intent_from_dict(data: dict[str, Any]) -> EditIntent:
    kind = data.get("type")
    cls = _INTENT_TYPES.get(kind)
    if cls is None:
        raise ValidityError(f"unknown intent type {kind!r}")
    try:
        if cls is ReorderEvents:
            return ReorderEvents(order=tuple(data["order"]))
        if cls is AddAction:
            return AddAction(source=data["source"], target=data["target"], name=data["name"])
        if cls is ChangeAction:
            return ChangeAction(event_id=data["eventId"], new_name=data["newName"])
        if cls is RemoveAction:
            return RemoveAction(event_id=data["eventId"])
        if cls is AddEntity:
            return AddEntity(name=data["name"])
        if cls is RemoveEntity:
            return RemoveEntity(entity_id=data["entityId"])
        if cls is AddLocation:
            return AddLocation(name=data["name"])
        if cls is MoveEntity:
            return MoveEntity(
                entity_id=data["entityId"],
                from_location=data["fromLocation"],
                to_location=data["toLocation"],
            )
        if cls is SetTrait:
            return SetTrait(
                entity_id=data["entityId"],
                trait_name=data["traitName"],
                new_value=int(data["newValue"]),
            )
        return RewriteFromVisuals()
    except KeyError as exc:
        raise ValidityError(f"intent {kind!r} is missing field {exc.args[0]!r}")


def describe_intent(intent: EditIntent) -> str:
    """Short human label for history snapshots."""
    return _TYPE_NAMES[type(intent)].replace("_", " ")
