"""Extraction pipeline: request-count laws, incremental reuse, determinism."""
from __future__ import annotations

import pytest

from storyloom.extraction import (
    ExtractionError,
    ExtractionPipeline,
    run_full_extraction,
)
from storyloom.gateway import MockGateway, ReplayGateway, ScriptError, TransportError
from storyloom.model import validate_model
from storyloom.prompts import (
    build_entities_prompt,
    build_events_prompt,
    build_locations_prompt,
)
from storyloom.segmentation import segment_sentences

from conftest import (
    ALICE_ENTITY_NAMES,
    ALICE_LOCATION_NAMES,
    ALICE_TEXT,
    _events_prompt_digests,
)

EMPTY_ACTIONS = {"actions": []}


def thirty_sentence_story() -> str:
    names = ["Ann", "Bob"]
    sentences = []
    for i in range(30):
        actor = names[i % 2]
        other = names[(i + 1) % 2]
        sentences.append(f"{actor} waves at {other} for the {i}th time.")
    return " ".join(sentences)


def scripted_gateway_for(text, entities_payload, locations_payload, per_sentence):
    """Replay gateway scripted from the same prompt builders the pipeline uses."""
    responses = {
        build_entities_prompt(text).digest: entities_payload,
        build_locations_prompt(text).digest: locations_payload,
    }
    entity_names = [e["name"] for e in entities_payload["entities"]]
    location_names = [l["name"] for l in locations_payload["locations"]]
    for digest, payload in zip(
        _events_prompt_digests(text, entity_names, location_names), per_sentence
    ):
        responses[digest] = payload
    return ReplayGateway(responses)


@pytest.fixture
def simple_two() -> tuple[str, ReplayGateway]:
    text = "Ann waves at Bob. Bob nods back."
    gateway = scripted_gateway_for(
        text,
        {"entities": [
            {"name": "Ann", "emoji": "🙂", "properties": []},
            {"name": "Bob", "emoji": "😎", "properties": []},
        ]},
        {"locations": [{"name": "yard", "emoji": "🌳"}]},
        [
            {"actions": [{"name": "waves at", "source": "Ann", "target": "Bob", "location": "yard"}]},
            {"actions": [{"name": "nods back", "source": "Bob", "target": "Ann", "location": "unknown"}]},
        ],
    )
    return text, gateway


class TestFullExtraction:
    def test_thirty_sentences_issue_thirty_two_requests(self):
        text = thirty_sentence_story()
        gateway = scripted_gateway_for(
            text,
            {"entities": [
                {"name": "Ann", "emoji": "🙂", "properties": []},
                {"name": "Bob", "emoji": "😎", "properties": []},
            ]},
            {"locations": []},
            [EMPTY_ACTIONS] * 30,
        )
        result = ExtractionPipeline(gateway).run_full(text)
        assert result.report.requests == 32
        assert len(gateway.history) == 32

    def test_zero_sentences_two_requests(self):
        gateway = scripted_gateway_for("", {"entities": []}, {"locations": []}, [])
        result = ExtractionPipeline(gateway).run_full("")
        assert result.report.requests == 2
        assert result.model.entities == () and result.model.events == ()
        assert result.model.stale is False

    def test_alice_fixture_model(self, alice_fixture):
        model = run_full_extraction(ALICE_TEXT, ReplayGateway(dict(alice_fixture)))
        assert [e.name for e in model.entities] == ALICE_ENTITY_NAMES
        assert [l.name for l in model.locations] == ALICE_LOCATION_NAMES
        assert validate_model(model) == []
        assert model.stale is False

    def test_unresolvable_names_create_entities_with_warning(self):
        text = "Ann waves."
        gateway = scripted_gateway_for(
            text,
            {"entities": [{"name": "Ann", "emoji": "🙂", "properties": []}]},
            {"locations": []},
            [{"actions": [{"name": "waves", "source": "Ann", "target": "Stranger",
                           "location": "alley"}]}],
        )
        result = ExtractionPipeline(gateway).run_full(text)
        stranger = result.model.entity_by_name("Stranger")
        assert stranger is not None and stranger.emoji == "❓"
        alley = result.model.location_by_name("alley")
        assert alley is not None
        assert any("Stranger" in w for w in result.report.warnings)
        assert validate_model(result.model) == []

    def test_case_insensitive_name_resolution(self):
        text = "Ann waves."
        gateway = scripted_gateway_for(
            text,
            {"entities": [{"name": "Ann", "emoji": "🙂", "properties": []}]},
            {"locations": []},
            [{"actions": [{"name": "waves", "source": "ANN", "target": "ann",
                           "location": "unknown"}]}],
        )
        result = ExtractionPipeline(gateway).run_full(text)
        assert len(result.model.entities) == 1
        (event,) = result.model.events
        assert event.source == event.target == "ent-1"

    def test_failure_reports_partial_progress(self, simple_two):
        text, _ = simple_two
        gateway = MockGateway()
        gateway.add(purpose="entities", payload={"entities": []})
        gateway.add(purpose="locations", payload={"locations": []})
        gateway.add(purpose="events", contains="TEXT: Ann waves at Bob.",
                    payload=EMPTY_ACTIONS)
        gateway.add(purpose="events", contains="TEXT: Bob nods back.",
                    error=TransportError("boom"))
        with pytest.raises(ExtractionError) as info:
            ExtractionPipeline(gateway).run_full(text)
        assert info.value.completed == [0]

    def test_determinism_across_parallelism(self, simple_two):
        text, gateway = simple_two
        sequential = ExtractionPipeline(ReplayGateway(gateway.responses), max_parallel=1)
        parallel = ExtractionPipeline(ReplayGateway(gateway.responses), max_parallel=8)
        assert sequential.run_full(text).model == parallel.run_full(text).model

    def test_sentence_index_matches_prompt(self, simple_two):
        text, gateway = simple_two
        model = ExtractionPipeline(gateway).run_full(text).model
        spans = segment_sentences(text)
        for event in model.events:
            span = spans[event.sentence_index]
            sentence = text[span.char_start : span.char_end]
            prompt = build_events_prompt(
                text[: span.char_start], sentence, ALICE_ENTITY_NAMES, ALICE_LOCATION_NAMES
            )
            assert sentence in prompt.text

    def test_progress_callback_counts(self, simple_two):
        text, gateway = simple_two
        seen = []
        ExtractionPipeline(gateway, on_progress=lambda done, total: seen.append((done, total)))\
            .run_full(text)
        assert sorted(seen) == [(1, 2), (2, 2)]


class TestIncrementalExtraction:
    def test_one_changed_sentence_one_request(self, simple_two):
        text, gateway = simple_two
        pipeline = ExtractionPipeline(gateway)
        first = pipeline.run_full(text)

        new_text = "Ann waves at Bob. Bob glares instead."
        responses = dict(gateway.responses)
        new_digests = _events_prompt_digests(new_text, ["Ann", "Bob"], ["yard"])
        responses[new_digests[1]] = {
            "actions": [{"name": "glares", "source": "Bob", "target": "Ann", "location": "yard"}]
        }
        incremental_gateway = ReplayGateway(responses)
        result = ExtractionPipeline(incremental_gateway).run_incremental(
            first.model, first.cache, new_text
        )
        assert result.report.requests == 1
        assert len(incremental_gateway.history) == 1
        assert result.report.reused_sentences == 1
        (glare,) = [e for e in result.model.events if e.name == "glares"]
        assert glare.sentence_index == 1

    def test_no_change_zero_requests_equal_model(self, simple_two):
        text, gateway = simple_two
        pipeline = ExtractionPipeline(gateway)
        first = pipeline.run_full(text)
        empty_gateway = ReplayGateway({})
        result = ExtractionPipeline(empty_gateway).run_incremental(
            first.model, first.cache, text
        )
        assert result.report.requests == 0
        assert empty_gateway.history == []
        assert result.model == first.model

    def test_cache_soundness_matches_full(self, simple_two):
        text, gateway = simple_two
        first = ExtractionPipeline(gateway).run_full(text)
        again = ExtractionPipeline(ReplayGateway({})).run_incremental(
            first.model, first.cache, text
        )
        assert again.model == first.model

    def test_deleted_sentence_redensifies_indices(self, simple_two):
        text, gateway = simple_two
        first = ExtractionPipeline(gateway).run_full(text)
        shorter = "Bob nods back."
        result = ExtractionPipeline(ReplayGateway({})).run_incremental(
            first.model, first.cache, shorter
        )
        assert result.report.requests == 0
        assert [e.name for e in result.model.events] == ["nods back"]
        # Oracle: recompute indices by scanning the surviving events.
        expected = list(range(len(result.model.events)))
        assert [e.narrated_index for e in result.model.events] == expected
        assert all(e.sentence_index == 0 for e in result.model.events)

    def test_entity_and_location_passes_not_rerun(self, simple_two):
        text, gateway = simple_two
        first = ExtractionPipeline(gateway).run_full(text)
        result = ExtractionPipeline(ReplayGateway({})).run_incremental(
            first.model, first.cache, text
        )
        assert result.model.entities == first.model.entities
        assert result.model.locations == first.model.locations


class TestMockDiscipline:
    def test_unmatched_request_fails_loudly(self):
        gateway = MockGateway()
        with pytest.raises(ScriptError):
            ExtractionPipeline(gateway).run_full("Ann waves.")

    def test_ambiguous_script_fails_loudly(self):
        gateway = MockGateway()
        gateway.add(purpose="entities", payload={"entities": []})
        gateway.add(contains="entities", payload={"entities": []})
        with pytest.raises(ScriptError, match="2 script rules"):
            gateway.complete_structured(build_entities_prompt("Ann waves."))
