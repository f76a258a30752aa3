"""Shared fixtures: hand-built models and offline replay fixtures."""
from __future__ import annotations

import pytest

from storyloom.constructs import AnnotationElement, StoryAnnotations
from storyloom.edits import MoveEntity, compile_intent
from storyloom.extraction import ExtractionPipeline
from storyloom.gateway import ReplayGateway
from storyloom.model import ActionEvent, Entity, Location, StoryModel
from storyloom.prompts import (
    build_entities_prompt,
    build_events_prompt,
    build_locations_prompt,
)
from storyloom.segmentation import segment_sentences


def make_model(text: str, entities, locations, per_sentence_events) -> StoryModel:
    """Assemble a model from terse specs: events as (name, src, dst, loc) per sentence."""
    spans = segment_sentences(text)
    assert len(spans) == len(per_sentence_events), "fixture sentence count mismatch"
    events = []
    for sentence_index, actions in enumerate(per_sentence_events):
        for ordinal, (name, source, target, location) in enumerate(actions):
            events.append(
                ActionEvent(
                    id=f"evt-{len(events) + 1}",
                    name=name,
                    source=source,
                    target=target,
                    location=location,
                    sentence_index=sentence_index,
                    ordinal_in_sentence=ordinal,
                    narrated_index=len(events),
                )
            )
    return StoryModel(
        text=text,
        sentences=spans,
        entities=tuple(entities),
        locations=tuple(locations),
        events=tuple(events),
        stale=False,
    )


@pytest.fixture
def mixed_model() -> StoryModel:
    """Five mixed events across four sentences, two locations, one self-action."""
    text = (
        "Mira waves at Tom near the mill. Tom waves back and follows her. "
        "Mira thinks quietly. At the lake, Tom splashes Mira and Mira laughs."
    )
    return make_model(
        text,
        entities=[
            Entity("ent-1", "Mira", "🧝"),
            Entity("ent-2", "Tom", "🧑"),
        ],
        locations=[
            Location("loc-1", "mill", "🌾"),
            Location("loc-2", "lake", "🌊"),
        ],
        per_sentence_events=[
            [("waves at", "ent-1", "ent-2", "loc-1")],
            [("waves back", "ent-2", "ent-1", "loc-1"), ("follows", "ent-2", "ent-1", "loc-1")],
            [("thinking", "ent-1", "ent-1", None)],
            [("splashes", "ent-2", "ent-1", "loc-2"), ("laughs", "ent-1", "ent-1", "loc-2")],
        ],
    )


@pytest.fixture
def annotated_model() -> tuple[StoryModel, StoryAnnotations]:
    """Six entities, ten events, three locations, plus manual annotations."""
    text = (
        "Ada meets Bo at the harbor. Cal watches Dee from the tower. "
        "Bo rows Ada across. Eve signals Fay at the tower. "
        "Dee follows Cal to the market. Fay pays Eve. "
        "Ada thanks Bo at the market. Cal warns Eve. "
        "Dee greets Fay at the harbor. Bo waves at Cal."
    )
    entities = [
        Entity("ent-1", "Ada", "🟥"),
        Entity("ent-2", "Bo", "🟧"),
        Entity("ent-3", "Cal", "🟨"),
        Entity("ent-4", "Dee", "🟩"),
        Entity("ent-5", "Eve", "🟦"),
        Entity("ent-6", "Fay", "🟪"),
    ]
    locations = [
        Location("loc-1", "harbor", "⚓"),
        Location("loc-2", "tower", "🗼"),
        Location("loc-3", "market", "🛒"),
    ]
    model = make_model(
        text,
        entities,
        locations,
        per_sentence_events=[
            [("meets", "ent-1", "ent-2", "loc-1")],
            [("watches", "ent-3", "ent-4", "loc-2")],
            [("rows", "ent-2", "ent-1", None)],
            [("signals", "ent-5", "ent-6", "loc-2")],
            [("follows", "ent-4", "ent-3", "loc-3")],
            [("pays", "ent-6", "ent-5", None)],
            [("thanks", "ent-1", "ent-2", "loc-3")],
            [("warns", "ent-3", "ent-5", None)],
            [("greets", "ent-4", "ent-6", "loc-1")],
            [("waves at", "ent-2", "ent-3", None)],
        ],
    )
    annotations = StoryAnnotations(
        actors=(
            AnnotationElement("act-1", "hero", "🛡️", members=("ent-1", "ent-2")),
            AnnotationElement("act-2", "rival", "⚔️", members=("ent-3", "ent-4")),
        ),
        spaces=(
            AnnotationElement("spc-1", "waterfront", "", members=("loc-1",)),
            AnnotationElement("spc-2", "town", "", members=("loc-2", "loc-3")),
        ),
        focalizations=(
            AnnotationElement("foc-1", "Ada's view", "", members=("evt-1", "evt-3", "evt-7")),
            AnnotationElement("foc-2", "Cal's view", "", members=("evt-2", "evt-5", "evt-8", "evt-10")),
        ),
        chronology=(
            "evt-2", "evt-1", "evt-3", "evt-4", "evt-5",
            "evt-6", "evt-7", "evt-8", "evt-9", "evt-10",
        ),
    )
    return model, annotations


# --- The Alice excerpt, fully scripted for offline replay ---

ALICE_TEXT = (
    "Alice was beginning to get very tired of sitting by her sister on the bank. "
    "Once or twice she had peeped into the book her sister was reading. "
    "The book had no pictures or conversations in it. "
    "Alice considered making a daisy-chain instead. "
    "Suddenly a White Rabbit with pink eyes ran close by her."
)

ALICE_ENTITIES_PAYLOAD = {
    "entities": [
        {"name": "Alice", "emoji": "👧", "properties": [{"name": "curious", "value": 7}]},
        {"name": "sister", "emoji": "👩", "properties": []},
        {"name": "book", "emoji": "📖", "properties": []},
        {"name": "White Rabbit", "emoji": "🐇", "properties": [{"name": "hurried", "value": 8}]},
    ]
}

ALICE_LOCATIONS_PAYLOAD = {
    "locations": [
        {"name": "bank", "emoji": "🏞️"},
        {"name": "field", "emoji": "🌾"},
    ]
}

ALICE_EVENTS_PAYLOADS = [
    {"actions": [{"name": "sitting by", "source": "Alice", "target": "sister", "location": "bank"}]},
    {"actions": [{"name": "peeped into", "source": "Alice", "target": "book", "location": "bank"}]},
    {"actions": [{"name": "lying open", "source": "book", "target": "book", "location": "bank"}]},
    {"actions": [{"name": "considering", "source": "Alice", "target": "Alice", "location": "unknown"}]},
    {"actions": [{"name": "ran by", "source": "White Rabbit", "target": "Alice", "location": "bank"}]},
]

ALICE_ENTITY_NAMES = ["Alice", "sister", "book", "White Rabbit"]
ALICE_LOCATION_NAMES = ["bank", "field"]

ALICE_MOVED_TEXT = (
    "Alice was beginning to get very tired of sitting by her sister on the bank. "
    "Once or twice she had walked to the field to peep into the book her sister had left there. "
    "The book lay in the field, with no pictures or conversations in it. "
    "Alice considered making a daisy-chain instead. "
    "Suddenly a White Rabbit with pink eyes ran close by her."
)

ALICE_MOVED_EVENTS = {
    1: {"actions": [{"name": "peeped into", "source": "Alice", "target": "book", "location": "field"}]},
    2: {"actions": [{"name": "lying open", "source": "book", "target": "book", "location": "field"}]},
}


def _events_prompt_digests(text: str, entity_names, location_names) -> list[str]:
    digests = []
    for span in segment_sentences(text):
        prompt = build_events_prompt(
            text_before=text[: span.char_start],
            sentence=text[span.char_start : span.char_end],
            entity_names=entity_names,
            location_names=location_names,
        )
        digests.append(prompt.digest)
    return digests


def build_alice_fixture() -> dict:
    """Replay responses for: full extraction, the move-book edit, the refresh."""
    responses: dict = {}
    responses[build_entities_prompt(ALICE_TEXT).digest] = ALICE_ENTITIES_PAYLOAD
    responses[build_locations_prompt(ALICE_TEXT).digest] = ALICE_LOCATIONS_PAYLOAD
    for digest, payload in zip(
        _events_prompt_digests(ALICE_TEXT, ALICE_ENTITY_NAMES, ALICE_LOCATION_NAMES),
        ALICE_EVENTS_PAYLOADS,
    ):
        responses[digest] = payload

    # The move edit compiles against the extracted model; replay what we have
    # so far to obtain it, then script the edit response.
    model = (
        ExtractionPipeline(ReplayGateway(dict(responses))).run_full(ALICE_TEXT).model
    )
    move = MoveEntity(
        entity_id=model.entity_by_name("book").id,
        from_location=model.location_by_name("bank").id,
        to_location=model.location_by_name("field").id,
    )
    move_prompt = compile_intent(move, None, model)
    responses[move_prompt.digest] = {"text": ALICE_MOVED_TEXT}

    moved_digests = _events_prompt_digests(
        ALICE_MOVED_TEXT, ALICE_ENTITY_NAMES, ALICE_LOCATION_NAMES
    )
    for index, payload in ALICE_MOVED_EVENTS.items():
        responses[moved_digests[index]] = payload
    return responses


@pytest.fixture(scope="session")
def alice_fixture() -> dict:
    return build_alice_fixture()


@pytest.fixture
def alice_model(alice_fixture) -> StoryModel:
    return ExtractionPipeline(ReplayGateway(dict(alice_fixture))).run_full(ALICE_TEXT).model
