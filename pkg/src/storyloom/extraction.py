"""Turning story text into a story model.

The pipeline runs an entity pass, then a location pass, then one event
request per sentence with bounded parallelism; results are assembled in
sentence order no matter when they complete. A content-hash cache lets
re-extraction skip every unchanged sentence.
"""
from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import SchemaMismatchError, StoryloomError
from .gateway import Gateway
from .model import (
    ActionEvent,
    Entity,
    Location,
    StoryModel,
    Trait,
    normalize_name,
    sentence_hash,
)
from .prompts import (
    build_entities_prompt,
    build_events_prompt,
    build_locations_prompt,
)
from .segmentation import segment_sentences

__all__ = [
    "RawEntity",
    "RawLocation",
    "RawAction",
    "ExtractionCache",
    "ExtractionReport",
    "ExtractionResult",
    "ExtractionError",
    "ExtractionPipeline",
    "validate_payload",
    "run_full_extraction",
    "run_incremental_extraction",
    "cache_to_dict",
    "cache_from_dict",
]

logger = logging.getLogger(__name__)

PLACEHOLDER_EMOJI = "❓"  # used when a record is created without one

_UNKNOWN = "unknown"


@dataclass(frozen=True)
class RawEntity:
    name: str
    emoji: str
    traits: tuple[Trait, ...]


@dataclass(frozen=True)
class RawLocation:
    name: str
    emoji: str


@dataclass(frozen=True)
class RawAction:
    """An action exactly as returned for one sentence, names unresolved."""

    name: str
    source: str
    target: str
    location: str


class ExtractionError(StoryloomError):
    """Extraction aborted; carries which sentences had completed."""

    def __init__(self, message: str, completed: list[int]):
        super().__init__(f"{message} (completed sentences: {completed})")
        self.completed = completed


@dataclass
class ExtractionCache:
    """Per-sentence results keyed by content hash, plus the element passes.

    ``sentences`` maps a sentence's text hash to the exact action records
    previously returned for byte-identical sentence text. ``source_hash`` is
    the digest of the full text the entity/location passes ran on.
    """

    sentences: dict[str, tuple[RawAction, ...]] = field(default_factory=dict)
    entities: tuple[Entity, ...] = ()
    locations: tuple[Location, ...] = ()
    source_hash: str = ""


@dataclass
class ExtractionReport:
    requests: int = 0
    reused_sentences: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class ExtractionResult:
    model: StoryModel
    cache: ExtractionCache
    report: ExtractionReport


def _expect(value: Any, kind: type, path: str) -> Any:
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaMismatchError(path, "expected a number")
        return value
    if not isinstance(value, kind):
        raise SchemaMismatchError(path, f"expected {kind.__name__}")
    return value


def _expect_fields(obj: dict, allowed: set[str], required: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaMismatchError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    for name in sorted(required):
        if name not in obj:
            raise SchemaMismatchError(f"{path}.{name}", "missing field")


def validate_payload(payload: Any, purpose: str) -> tuple[list[Any], list[str]]:
    """Strictly validate a structured payload into typed records.

    Unknown fields are rejected, trait values are clamped into 1..10 with a
    warning, action names are trimmed. Returns ``(records, warnings)``.
    """
    warnings: list[str] = []
    root = _expect(payload, dict, "$")

    if purpose == "entities":
        _expect_fields(root, {"entities"}, {"entities"}, "$")
        records: list[RawEntity] = []
        for i, item in enumerate(_expect(root["entities"], list, "$.entities")):
            path = f"entities[{i}]"
            obj = _expect(item, dict, path)
            _expect_fields(obj, {"name", "emoji", "properties"}, {"name", "emoji"}, path)
            name = _expect(obj["name"], str, f"{path}.name").strip()
            emoji = _expect(obj["emoji"], str, f"{path}.emoji")
            traits: list[Trait] = []
            for j, prop in enumerate(_expect(obj.get("properties", []), list, f"{path}.properties")):
                prop_path = f"{path}.properties[{j}]"
                prop_obj = _expect(prop, dict, prop_path)
                _expect_fields(prop_obj, {"name", "value"}, {"name", "value"}, prop_path)
                trait_name = _expect(prop_obj["name"], str, f"{prop_path}.name").strip()
                value = _expect(prop_obj["value"], float, f"{prop_path}.value")
                clamped = min(10, max(1, round(value)))
                if clamped != value:
                    warnings.append(
                        f"{prop_path}.value: {value} clamped to {clamped} (scale is 1 to 10)"
                    )
                traits.append(Trait(name=trait_name, value=clamped))
            records.append(RawEntity(name=name, emoji=emoji, traits=tuple(traits)))
        return records, warnings

    if purpose == "locations":
        _expect_fields(root, {"locations"}, {"locations"}, "$")
        locations: list[RawLocation] = []
        for i, item in enumerate(_expect(root["locations"], list, "$.locations")):
            path = f"locations[{i}]"
            obj = _expect(item, dict, path)
            _expect_fields(obj, {"name", "emoji"}, {"name", "emoji"}, path)
            locations.append(
                RawLocation(
                    name=_expect(obj["name"], str, f"{path}.name").strip(),
                    emoji=_expect(obj["emoji"], str, f"{path}.emoji"),
                )
            )
        return locations, warnings

    if purpose == "events":
        _expect_fields(root, {"actions"}, {"actions"}, "$")
        actions: list[RawAction] = []
        for i, item in enumerate(_expect(root["actions"], list, "$.actions")):
            path = f"actions[{i}]"
            obj = _expect(item, dict, path)
            _expect_fields(obj, {"name", "source", "target", "location"},
                           {"name", "source", "target", "location"}, path)
            actions.append(
                RawAction(
                    name=_expect(obj["name"], str, f"{path}.name").strip(),
                    source=_expect(obj["source"], str, f"{path}.source").strip(),
                    target=_expect(obj["target"], str, f"{path}.target").strip(),
                    location=_expect(obj["location"], str, f"{path}.location").strip(),
                )
            )
        return actions, warnings

    if purpose == "edit":
        _expect_fields(root, {"text"}, {"text"}, "$")
        return [_expect(root["text"], str, "$.text")], warnings

    raise SchemaMismatchError("$", f"unknown payload purpose {purpose!r}")


class _Assembler:
    """Resolves raw records into a consistent model, minting stable ids."""

    def __init__(
        self,
        entities: tuple[Entity, ...],
        locations: tuple[Location, ...],
        warnings: list[str],
    ):
        self.entities = list(entities)
        self.locations = list(locations)
        self.warnings = warnings

    @classmethod
    def from_raw(
        cls,
        raw_entities: list[RawEntity],
        raw_locations: list[RawLocation],
        warnings: list[str],
    ) -> "_Assembler":
        assembler = cls((), (), warnings)
        seen: set[str] = set()
        for raw in raw_entities:
            key = normalize_name(raw.name)
            if not key:
                warnings.append("entity with empty name dropped")
                continue
            if key in seen:
                warnings.append(f"duplicate entity name {raw.name!r} dropped")
                continue
            seen.add(key)
            assembler.entities.append(
                Entity(
                    id=f"ent-{len(assembler.entities) + 1}",
                    name=raw.name,
                    emoji=raw.emoji or PLACEHOLDER_EMOJI,
                    traits=raw.traits[:],
                )
            )
        seen = set()
        for raw in raw_locations:
            key = normalize_name(raw.name)
            if not key:
                warnings.append("location with empty name dropped")
                continue
            if key == _UNKNOWN:
                warnings.append("location named 'unknown' is reserved and was dropped")
                continue
            if key in seen:
                warnings.append(f"duplicate location name {raw.name!r} dropped")
                continue
            seen.add(key)
            assembler.locations.append(
                Location(
                    id=f"loc-{len(assembler.locations) + 1}",
                    name=raw.name,
                    emoji=raw.emoji or PLACEHOLDER_EMOJI,
                )
            )
        return assembler

    def _entity_id(self, name: str) -> str:
        key = normalize_name(name)
        for entity in self.entities:
            if normalize_name(entity.name) == key:
                return entity.id
        entity = Entity(
            id=f"ent-{len(self.entities) + 1}",
            name=name,
            emoji=PLACEHOLDER_EMOJI,
        )
        self.entities.append(entity)
        self.warnings.append(
            f"unresolved entity name {name!r} in an action; created {entity.id}"
        )
        return entity.id

    def _location_id(self, name: str) -> str | None:
        key = normalize_name(name)
        if not key or key == _UNKNOWN:
            return None
        for location in self.locations:
            if normalize_name(location.name) == key:
                return location.id
        location = Location(
            id=f"loc-{len(self.locations) + 1}",
            name=name,
            emoji=PLACEHOLDER_EMOJI,
        )
        self.locations.append(location)
        self.warnings.append(
            f"unresolved location name {name!r} in an action; created {location.id}"
        )
        return location.id

    def assemble_events(
        self, per_sentence: list[tuple[RawAction, ...]]
    ) -> tuple[ActionEvent, ...]:
        events: list[ActionEvent] = []
        for sentence_index, actions in enumerate(per_sentence):
            for ordinal, raw in enumerate(actions):
                events.append(
                    ActionEvent(
                        id=f"evt-{len(events) + 1}",
                        name=raw.name,
                        source=self._entity_id(raw.source),
                        target=self._entity_id(raw.target),
                        location=self._location_id(raw.location),
                        sentence_index=sentence_index,
                        ordinal_in_sentence=ordinal,
                        narrated_index=len(events),
                    )
                )
        return tuple(events)


class ExtractionPipeline:
    def __init__(
        self,
        gateway: Gateway,
        max_parallel: int = 8,
        on_progress: Callable[[int, int], None] | None = None,
    ):
        self.gateway = gateway
        self.max_parallel = max_parallel
        self.on_progress = on_progress

    # -- request plumbing ---------------------------------------------------

    def _fetch_sentence_events(
        self, text: str, spans, index: int, entity_names: list[str], location_names: list[str]
    ) -> tuple[RawAction, ...]:
        span = spans[index]
        prompt = build_events_prompt(
            text_before=text[: span.char_start],
            sentence=text[span.char_start : span.char_end],
            entity_names=entity_names,
            location_names=location_names,
        )
        payload = self.gateway.complete_structured(prompt)
        records, warnings = validate_payload(payload, "events")
        for warning in warnings:
            logger.warning("sentence %d: %s", index, warning)
        return tuple(records)

    def _fetch_all_events(
        self,
        text: str,
        spans,
        indices: list[int],
        entity_names: list[str],
        location_names: list[str],
        progress_base: int,
        progress_total: int,
    ) -> dict[int, tuple[RawAction, ...]]:
        """Fan out event requests; deterministic merge by sentence index."""
        results: dict[int, tuple[RawAction, ...]] = {}
        failures: dict[int, Exception] = {}
        done_lock = threading.Lock()
        completed = 0

        def work(index: int) -> None:
            nonlocal completed
            try:
                records = self._fetch_sentence_events(
                    text, spans, index, entity_names, location_names
                )
            except Exception as exc:  # noqa: BLE001 - reported with partial progress
                with done_lock:
                    failures[index] = exc
                return
            with done_lock:
                results[index] = records
                completed += 1
                if self.on_progress is not None:
                    self.on_progress(progress_base + completed, progress_total)

        if indices:
            workers = min(self.max_parallel, len(indices))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(work, indices))

        if failures:
            first_index = min(failures)
            raise ExtractionError(
                f"event extraction failed for sentence {first_index}: {failures[first_index]}",
                completed=sorted(results),
            ) from failures[first_index]
        return results

    # -- passes ---------------------------------------------------------------

    def run_full(self, text: str) -> ExtractionResult:
        """Entity pass, location pass, then one event request per sentence."""
        report = ExtractionReport()
        spans = segment_sentences(text)

        entities_payload = self.gateway.complete_structured(build_entities_prompt(text))
        report.requests += 1
        raw_entities, warnings = validate_payload(entities_payload, "entities")
        report.warnings.extend(warnings)

        locations_payload = self.gateway.complete_structured(build_locations_prompt(text))
        report.requests += 1
        raw_locations, warnings = validate_payload(locations_payload, "locations")
        report.warnings.extend(warnings)

        assembler = _Assembler.from_raw(raw_entities, raw_locations, report.warnings)
        entity_names = [e.name for e in assembler.entities]
        location_names = [l.name for l in assembler.locations]

        results = self._fetch_all_events(
            text, spans, list(range(len(spans))), entity_names, location_names,
            progress_base=0, progress_total=len(spans),
        )
        report.requests += len(spans)

        per_sentence = [results[i] for i in range(len(spans))]
        events = assembler.assemble_events(per_sentence)
        model = StoryModel(
            text=text,
            sentences=spans,
            entities=tuple(assembler.entities),
            locations=tuple(assembler.locations),
            events=events,
            stale=False,
        )
        cache = ExtractionCache(
            sentences={
                spans[i].text_hash: per_sentence[i] for i in range(len(spans))
            },
            entities=model.entities,
            locations=model.locations,
            source_hash=sentence_hash(text),
        )
        return ExtractionResult(model=model, cache=cache, report=report)

    def run_incremental(
        self, old_model: StoryModel, cache: ExtractionCache, new_text: str
    ) -> ExtractionResult:
        """Re-extract only the sentences whose content hash is not cached.

        The entity and location passes are not re-run; a full refresh is the
        explicit escape hatch for refreshing those rosters.
        """
        report = ExtractionReport()
        spans = segment_sentences(new_text)

        entities = cache.entities or old_model.entities
        locations = cache.locations or old_model.locations
        assembler = _Assembler(entities, locations, report.warnings)
        entity_names = [e.name for e in entities]
        location_names = [l.name for l in locations]

        missing = [i for i, span in enumerate(spans) if span.text_hash not in cache.sentences]
        reused = {
            i: cache.sentences[span.text_hash]
            for i, span in enumerate(spans)
            if span.text_hash in cache.sentences
        }
        report.reused_sentences = len(reused)

        fetched = self._fetch_all_events(
            new_text, spans, missing, entity_names, location_names,
            progress_base=0, progress_total=len(missing),
        )
        report.requests += len(missing)

        per_sentence = [
            reused[i] if i in reused else fetched[i] for i in range(len(spans))
        ]
        events = assembler.assemble_events(per_sentence)
        model = StoryModel(
            text=new_text,
            sentences=spans,
            entities=tuple(assembler.entities),
            locations=tuple(assembler.locations),
            events=events,
            stale=False,
        )
        new_cache = ExtractionCache(
            sentences={
                spans[i].text_hash: per_sentence[i] for i in range(len(spans))
            },
            entities=model.entities,
            locations=model.locations,
            source_hash=cache.source_hash or sentence_hash(old_model.text),
        )
        return ExtractionResult(model=model, cache=new_cache, report=report)


def run_full_extraction(text: str, gateway: Gateway, max_parallel: int = 8) -> StoryModel:
    return ExtractionPipeline(gateway, max_parallel=max_parallel).run_full(text).model


def run_incremental_extraction(
    old_model: StoryModel,
    cache: ExtractionCache,
    new_text: str,
    gateway: Gateway,
    max_parallel: int = 8,
) -> StoryModel:
    pipeline = ExtractionPipeline(gateway, max_parallel=max_parallel)
    return pipeline.run_incremental(old_model, cache, new_text).model


# --- Cache persistence (stored inside the project file) ---


def cache_to_dict(cache: ExtractionCache) -> dict[str, Any]:
    return {
        "sentences": {
            text_hash: [
                {"name": a.name, "source": a.source, "target": a.target, "location": a.location}
                for a in actions
            ]
            for text_hash, actions in sorted(cache.sentences.items())
        },
        "entities": [
            {
                "id": e.id,
                "name": e.name,
                "emoji": e.emoji,
                "traits": [{"name": t.name, "value": t.value} for t in e.traits],
            }
            for e in cache.entities
        ],
        "locations": [
            {"id": l.id, "name": l.name, "emoji": l.emoji} for l in cache.locations
        ],
        "sourceHash": cache.source_hash,
    }


def cache_from_dict(data: dict[str, Any]) -> ExtractionCache:
    return ExtractionCache(
        sentences={
            text_hash: tuple(
                RawAction(
                    name=a["name"], source=a["source"], target=a["target"], location=a["location"]
                )
                for a in actions
            )
            for text_hash, actions in data["sentences"].items()
        },
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
        source_hash=data["sourceHash"],
    )
