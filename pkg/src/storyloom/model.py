"""The relational story model and the join queries built on it.

A :class:`StoryModel` is an immutable value: the story text, its sentence
spans, the entities and locations mentioned, and the action events that tie
them together. All queries here are pure reads; edits replace the whole model.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Any

from .errors import NotFoundError, RangeError

__all__ = [
    "UNKNOWN_LOCATION",
    "Trait",
    "Entity",
    "Location",
    "SentenceSpan",
    "ActionEvent",
    "StoryModel",
    "Violation",
    "validate_model",
    "events_for_entity",
    "locations_for_entity",
    "events_for_span",
    "sentence_for_event",
    "model_to_dict",
    "model_from_dict",
    "sentence_hash",
    "normalize_name",
]

#: Sentinel for an event whose location could not be resolved. It is a value,
#: never a Location record, and the name is reserved.
UNKNOWN_LOCATION = None

_RESERVED_LOCATION_NAME = "unknown"


def sentence_hash(text: str) -> str:
    """Content digest of a sentence span."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def normalize_name(name: str) -> str:
    """Key used for case-insensitive, whitespace-trimmed name comparison."""
    return name.strip().casefold()


@dataclass(frozen=True)
class Trait:
    """A short adjective with an intensity on a unit-less 1..10 scale."""

    name: str
    value: int


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    emoji: str
    traits: tuple[Trait, ...] = ()


@dataclass(frozen=True)
class Location:
    id: str
    name: str
    emoji: str


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open character span of one sentence. Offsets count Unicode scalars."""

    index: int
    char_start: int
    char_end: int
    text_hash: str


@dataclass(frozen=True)
class ActionEvent:
    """An extracted (source, action, target, location) tuple anchored to a sentence.

    ``location`` is a Location id or ``None`` for the unresolved sentinel.
    ``source`` may equal ``target`` (self-action).
    """

    id: str
    name: str
    source: str
    target: str
    location: str | None
    sentence_index: int
    ordinal_in_sentence: int
    narrated_index: int


@dataclass(frozen=True)
class StoryModel:
    text: str = ""
    sentences: tuple[SentenceSpan, ...] = ()
    entities: tuple[Entity, ...] = ()
    locations: tuple[Location, ...] = ()
    events: tuple[ActionEvent, ...] = ()
    stale: bool = False

    def entity(self, entity_id: str) -> Entity:
        for entity in self.entities:
            if entity.id == entity_id:
                return entity
        raise NotFoundError(f"unknown entity id: {entity_id}")

    def location(self, location_id: str) -> Location:
        for location in self.locations:
            if location.id == location_id:
                return location
        raise NotFoundError(f"unknown location id: {location_id}")

    def event(self, event_id: str) -> ActionEvent:
        for event in self.events:
            if event.id == event_id:
                return event
        raise NotFoundError(f"unknown event id: {event_id}")

    def entity_by_name(self, name: str) -> Entity | None:
        key = normalize_name(name)
        for entity in self.entities:
            if normalize_name(entity.name) == key:
                return entity
        return None

    def location_by_name(self, name: str) -> Location | None:
        key = normalize_name(name)
        for location in self.locations:
            if normalize_name(location.name) == key:
                return location
        return None

    def sentence_text(self, span: SentenceSpan) -> str:
        return self.text[span.char_start : span.char_end]

    def marked_stale(self) -> "StoryModel":
        return replace(self, stale=True)


@dataclass(frozen=True)
class Violation:
    """One broken invariant. Violations are data, not failures."""

    rule: str
    subject: str
    message: str


def validate_model(model: StoryModel) -> list[Violation]:
    """Check every type invariant jointly; an empty list means the model is valid."""
    out: list[Violation] = []

    seen_entity_ids: set[str] = set()
    seen_entity_names: dict[str, str] = {}
    for entity in model.entities:
        if entity.id in seen_entity_ids:
            out.append(Violation("entity.id.duplicate", entity.id, "duplicate entity id"))
        seen_entity_ids.add(entity.id)
        key = normalize_name(entity.name)
        if not key:
            out.append(Violation("entity.name.empty", entity.id, "entity name is empty"))
        elif key in seen_entity_names:
            out.append(
                Violation(
                    "entity.name.duplicate",
                    entity.id,
                    f"entity name {entity.name!r} collides with entity {seen_entity_names[key]}",
                )
            )
        else:
            seen_entity_names[key] = entity.id
        if not entity.emoji:
            out.append(Violation("entity.emoji.empty", entity.id, "entity emoji is empty"))
        for trait in entity.traits:
            if not trait.name.strip():
                out.append(Violation("trait.name.empty", entity.id, "trait name is empty"))
            if not 1 <= trait.value <= 10:
                out.append(
                    Violation(
                        "trait.value.range",
                        entity.id,
                        f"trait {trait.name!r} value {trait.value} outside 1..10",
                    )
                )

    seen_location_ids: set[str] = set()
    seen_location_names: dict[str, str] = {}
    for location in model.locations:
        if location.id in seen_location_ids:
            out.append(Violation("location.id.duplicate", location.id, "duplicate location id"))
        seen_location_ids.add(location.id)
        key = normalize_name(location.name)
        if not key:
            out.append(Violation("location.name.empty", location.id, "location name is empty"))
        elif key == _RESERVED_LOCATION_NAME:
            out.append(
                Violation(
                    "location.name.reserved",
                    location.id,
                    "'unknown' is the unresolved sentinel, never a stored location",
                )
            )
        elif key in seen_location_names:
            out.append(
                Violation(
                    "location.name.duplicate",
                    location.id,
                    f"location name {location.name!r} collides with location {seen_location_names[key]}",
                )
            )
        else:
            seen_location_names[key] = location.id
        if not location.emoji:
            out.append(Violation("location.emoji.empty", location.id, "location emoji is empty"))

    prev_end = None
    rebuilt: list[str] = []
    cursor = 0
    for i, span in enumerate(model.sentences):
        subject = f"sentence[{i}]"
        if span.index != i:
            out.append(Violation("span.index", subject, f"index {span.index} != position {i}"))
        if not 0 <= span.char_start < span.char_end <= len(model.text):
            out.append(
                Violation(
                    "span.bounds",
                    subject,
                    f"[{span.char_start}, {span.char_end}) outside text of length {len(model.text)}",
                )
            )
            continue
        if prev_end is not None and span.char_start < prev_end:
            out.append(Violation("span.overlap", subject, "spans overlap or are unsorted"))
        gap = model.text[cursor : span.char_start]
        if gap.strip():
            out.append(
                Violation("span.gap", subject, "non-whitespace text between sentence spans")
            )
        rebuilt.append(model.text[span.char_start : span.char_end])
        prev_end = span.char_end
        cursor = span.char_end
    if model.sentences and model.text[cursor:].strip():
        out.append(Violation("span.gap", "text", "non-whitespace text after the last span"))
    if not model.sentences and model.text.strip():
        out.append(Violation("span.missing", "text", "non-empty text but no sentence spans"))
    for i, span in enumerate(model.sentences):
        if 0 <= span.char_start < span.char_end <= len(model.text):
            if span.text_hash != sentence_hash(model.text[span.char_start : span.char_end]):
                out.append(Violation("span.hash", f"sentence[{i}]", "stale text hash"))

    seen_event_ids: set[str] = set()
    expected: list[tuple[int, int]] = []
    for event in model.events:
        subject = event.id
        if event.id in seen_event_ids:
            out.append(Violation("event.id.duplicate", subject, "duplicate event id"))
        seen_event_ids.add(event.id)
        if event.source not in seen_entity_ids:
            out.append(Violation("event.source.unresolved", subject, f"unresolved source {event.source!r}"))
        if event.target not in seen_entity_ids:
            out.append(Violation("event.target.unresolved", subject, f"unresolved target {event.target!r}"))
        if event.location is not None and event.location not in seen_location_ids:
            out.append(
                Violation("event.location.unresolved", subject, f"unresolved location {event.location!r}")
            )
        if not 0 <= event.sentence_index < len(model.sentences):
            out.append(
                Violation("event.sentence.unresolved", subject, f"sentence index {event.sentence_index} out of range")
            )
        expected.append((event.sentence_index, event.ordinal_in_sentence))

    narrated = [e.narrated_index for e in model.events]
    if sorted(narrated) != list(range(len(model.events))):
        out.append(Violation("event.order.dense", "events", "narrated indices are not dense 0..n-1"))
    else:
        by_narrated = sorted(model.events, key=lambda e: e.narrated_index)
        keys = [(e.sentence_index, e.ordinal_in_sentence) for e in by_narrated]
        if keys != sorted(keys):
            out.append(
                Violation(
                    "event.order.lexicographic",
                    "events",
                    "narrated order is not lexicographic in (sentence, ordinal)",
                )
            )

    return out


def events_for_entity(model: StoryModel, entity_id: str) -> list[ActionEvent]:
    """Events in which the entity is source or target, in narrated order."""
    model.entity(entity_id)
    hits = [e for e in model.events if entity_id in (e.source, e.target)]
    return sorted(hits, key=lambda e: e.narrated_index)


def locations_for_entity(model: StoryModel, entity_id: str) -> list[tuple[str | None, int]]:
    """Distinct locations of the entity's events, in order of first appearance.

    Yields ``(location_id_or_None, first_narrated_index)``. The ``None``
    element marks events whose location is unresolved.
    """
    out: list[tuple[str | None, int]] = []
    seen: set[str | None] = set()
    for event in events_for_entity(model, entity_id):
        if event.location not in seen:
            seen.add(event.location)
            out.append((event.location, event.narrated_index))
    return out


def events_for_span(model: StoryModel, char_start: int, char_end: int) -> list[ActionEvent]:
    """Events whose owning sentence overlaps the character range.

    A zero-length range behaves like a caret: it selects the sentence that
    contains it.
    """
    if not 0 <= char_start <= char_end <= len(model.text):
        raise RangeError(
            f"range [{char_start}, {char_end}) outside text of length {len(model.text)}"
        )
    hit_indices: set[int] = set()
    for span in model.sentences:
        if char_start == char_end:
            if span.char_start <= char_start < span.char_end:
                hit_indices.add(span.index)
        elif span.char_start < char_end and char_start < span.char_end:
            hit_indices.add(span.index)
    hits = [e for e in model.events if e.sentence_index in hit_indices]
    return sorted(hits, key=lambda e: e.narrated_index)


def sentence_for_event(model: StoryModel, event_id: str) -> SentenceSpan:
    """The sentence span that owns the event."""
    event = model.event(event_id)
    for span in model.sentences:
        if span.index == event.sentence_index:
            return span
    raise NotFoundError(f"event {event_id} points at missing sentence {event.sentence_index}")


# --- Canonical JSON serialization (project-file payload and wire format) ---


def model_to_dict(model: StoryModel) -> dict[str, Any]:
    return {
        "text": model.text,
        "sentences": [
            {
                "index": s.index,
                "charStart": s.char_start,
                "charEnd": s.char_end,
                "textHash": s.text_hash,
            }
            for s in model.sentences
        ],
        "entities": [
            {
                "id": e.id,
                "name": e.name,
                "emoji": e.emoji,
                "traits": [{"name": t.name, "value": t.value} for t in e.traits],
            }
            for e in model.entities
        ],
        "locations": [
            {"id": l.id, "name": l.name, "emoji": l.emoji} for l in model.locations
        ],
        "events": [
            {
                "id": e.id,
                "name": e.name,
                "source": e.source,
                "target": e.target,
                "location": e.location,
                "sentenceIndex": e.sentence_index,
                "ordinalInSentence": e.ordinal_in_sentence,
                "narratedIndex": e.narrated_index,
            }
            for e in model.events
        ],
        "stale": model.stale,
    }


def model_from_dict(data: dict[str, Any]) -> StoryModel:
    return StoryModel(
        text=data["text"],
        sentences=tuple(
            SentenceSpan(
                index=s["index"],
                char_start=s["charStart"],
                char_end=s["charEnd"],
                text_hash=s["textHash"],
            )
            for s in data["sentences"]
        ),
        entities=tuple(
            Entity(
                id=e["id"],
                name=e["name"],
                emoji=e["emoji"],
                traits=tuple(Trait(t["name"], t["value"]) for t in e.get("traits", [])),
            )
            for e in data["entities"]
        ),
        locations=tuple(
            Location(id=l["id"], name=l["name"], emoji=l["emoji"]) for l in data["locations"]
        ),
        events=tuple(
            ActionEvent(
                id=e["id"],
                name=e["name"],
                source=e["source"],
                target=e["target"],
                location=e["location"],
                sentence_index=e["sentenceIndex"],
                ordinal_in_sentence=e["ordinalInSentence"],
                narrated_index=e["narratedIndex"],
            )
            for e in data["events"]
        ),
        stale=data["stale"],
    )
