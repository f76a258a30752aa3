"""Extract a story model from text, fully offline.

The gateway is scripted with the exact payloads a provider would return, so
the run is deterministic: an entity pass, a location pass, then one event
request per sentence.
"""
from storyloom import ExtractionPipeline, validate_model
from storyloom.gateway import ReplayGateway
from storyloom.prompts import (
    build_entities_prompt,
    build_events_prompt,
    build_locations_prompt,
)
from storyloom.segmentation import segment_sentences

TEXT = (
    "Nia finds a rusty key in the cellar. She shows it to Omar. "
    "Omar recognizes the crest at once. They hurry to the old gate."
)

ENTITIES = {"entities": [
    {"name": "Nia", "emoji": "🧭", "properties": [{"name": "curious", "value": 8}]},
    {"name": "Omar", "emoji": "🧣", "properties": []},
    {"name": "key", "emoji": "🗝️", "properties": [{"name": "rusty", "value": 6}]},
]}
LOCATIONS = {"locations": [
    {"name": "cellar", "emoji": "🕳️"},
    {"name": "old gate", "emoji": "🚪"},
]}
EVENTS = [
    {"actions": [{"name": "finds", "source": "Nia", "target": "key", "location": "cellar"}]},
    {"actions": [{"name": "shows", "source": "Nia", "target": "Omar", "location": "cellar"}]},
    {"actions": [{"name": "recognizes", "source": "Omar", "target": "key", "location": "unknown"}]},
    {"actions": [
        {"name": "hurries", "source": "Nia", "target": "Nia", "location": "old gate"},
        {"name": "hurries", "source": "Omar", "target": "Omar", "location": "old gate"},
    ]},
]


def scripted_gateway():
    names = [e["name"] for e in ENTITIES["entities"]]
    places = [l["name"] for l in LOCATIONS["locations"]]
    responses = {
        build_entities_prompt(TEXT).digest: ENTITIES,
        build_locations_prompt(TEXT).digest: LOCATIONS,
    }
    for span, payload in zip(segment_sentences(TEXT), EVENTS):
        prompt = build_events_prompt(
            TEXT[: span.char_start], TEXT[span.char_start : span.char_end], names, places
        )
        responses[prompt.digest] = payload
    return ReplayGateway(responses)


def main():
    gateway = scripted_gateway()
    result = ExtractionPipeline(gateway).run_full(TEXT)
    model = result.model

    print(f"requests issued: {result.report.requests} "
          f"(= 2 passes + {len(model.sentences)} sentences)")
    print(f"violations: {validate_model(model)}")
    print()
    for entity in model.entities:
        traits = ", ".join(f"{t.name} {t.value}/10" for t in entity.traits) or "no traits"
        print(f"  {entity.emoji} {entity.name:<6} {traits}")
    print()
    for event in model.events:
        source = model.entity(event.source).name
        target = model.entity(event.target).name
        where = model.location(event.location).name if event.location else "unknown"
        print(f"  [{event.narrated_index}] {source} --{event.name}--> {target}  @ {where}")


if __name__ == "__main__":
    main()
