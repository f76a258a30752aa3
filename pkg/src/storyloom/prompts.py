"""Prompt templates, their response schemas, and rendering.

Templates live as versioned text resources under ``storyloom/templates``;
``manifest.json`` records each template's purpose and whether it is part of
the canonical set or a local invention. Rendering is total: every
placeholder a template declares must be substituted, in one pass.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

from .errors import ValidityError

__all__ = [
    "PromptSpec",
    "RESPONSE_SCHEMAS",
    "load_template",
    "template_manifest",
    "render_template",
    "build_entities_prompt",
    "build_locations_prompt",
    "build_events_prompt",
]

_PLACEHOLDER = re.compile(r"<[A-Z][A-Z_ ]*>")

RESPONSE_SCHEMAS: dict[str, dict[str, Any]] = {
    "entities": {
        "type": "object",
        "properties": {
            "entities": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "name": {"type": "string"},
                        "emoji": {"type": "string"},
                        "properties": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "properties": {
                                    "name": {"type": "string"},
                                    "value": {"type": "number"},
                                },
                                "required": ["name", "value"],
                                "additionalProperties": False,
                            },
                        },
                    },
                    "required": ["name", "emoji", "properties"],
                    "additionalProperties": False,
                },
            }
        },
        "required": ["entities"],
        "additionalProperties": False,
    },
    "locations": {
        "type": "object",
        "properties": {
            "locations": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "name": {"type": "string"},
                        "emoji": {"type": "string"},
                    },
                    "required": ["name", "emoji"],
                    "additionalProperties": False,
                },
            }
        },
        "required": ["locations"],
        "additionalProperties": False,
    },
    "events": {
        "type": "object",
        "properties": {
            "actions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "name": {"type": "string"},
                        "source": {"type": "string"},
                        "target": {"type": "string"},
                        "location": {"type": "string"},
                    },
                    "required": ["name", "source", "target", "location"],
                    "additionalProperties": False,
                },
            }
        },
        "required": ["actions"],
        "additionalProperties": False,
    },
    "edit": {
        "type": "object",
        "properties": {"text": {"type": "string"}},
        "required": ["text"],
        "additionalProperties": False,
    },
}


@dataclass(frozen=True)
class PromptSpec:
    """A fully substituted prompt plus its structured-output schema.

    ``scope_span`` is set on scoped edit prompts: the half-open character
    range of the passage the response must be spliced back into. ``body`` is
    the template remainder after the story slot, kept so scoping can rebuild
    the prompt.
    """

    purpose: str  # entities | locations | events | edit
    text: str
    response_schema: Mapping[str, Any]
    template: str = ""
    body: str | None = None
    scope_span: tuple[int, int] | None = None

    @property
    def digest(self) -> str:
        payload = self.purpose + "\n" + self.text + "\n" + json.dumps(
            self.response_schema, sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Read a template resource verbatim."""
    return (
        resources.files("storyloom.templates").joinpath(f"{name}.txt").read_text("utf-8")
    )


@lru_cache(maxsize=None)
def template_manifest() -> dict[str, dict[str, str]]:
    raw = resources.files("storyloom.templates").joinpath("manifest.json").read_text("utf-8")
    return json.loads(raw)


def render_template(name: str, substitutions: Mapping[str, str]) -> str:
    """Substitute every placeholder of a template in a single pass."""
    template = load_template(name)
    declared = set(_PLACEHOLDER.findall(template))
    provided = set(substitutions)
    missing = declared - provided
    if missing:
        raise ValidityError(f"template {name!r}: unresolved placeholders {sorted(missing)}")
    unknown = provided - declared
    if unknown:
        raise ValidityError(f"template {name!r}: unknown placeholders {sorted(unknown)}")

    def _sub(match: re.Match[str]) -> str:
        return substitutions[match.group(0)]

    return _PLACEHOLDER.sub(_sub, template)


def build_entities_prompt(text: str) -> PromptSpec:
    rendered = render_template("extract_entities", {"<STORY TEXT>": text})
    return PromptSpec(
        purpose="entities",
        text=rendered,
        response_schema=RESPONSE_SCHEMAS["entities"],
        template="extract_entities",
    )


def build_locations_prompt(text: str) -> PromptSpec:
    rendered = render_template("extract_locations", {"<STORY TEXT>": text})
    return PromptSpec(
        purpose="locations",
        text=rendered,
        response_schema=RESPONSE_SCHEMAS["locations"],
        template="extract_locations",
    )


def build_events_prompt(
    text_before: str,
    sentence: str,
    entity_names: list[str],
    location_names: list[str],
) -> PromptSpec:
    if not sentence:
        raise ValidityError("events prompt needs a non-empty sentence")
    rendered = render_template(
        "extract_events",
        {
            "<TEXT BEFORE>": text_before,
            "<SENTENCE>": sentence,
            "<ENTITIES>": ", ".join(entity_names),
            "<LOCATIONS>": ", ".join(location_names),
        },
    )
    return PromptSpec(
        purpose="events",
        text=rendered,
        response_schema=RESPONSE_SCHEMAS["events"],
        template="extract_events",
    )
