"""Story-element kinds, the four construct operators, and their evaluator.

Constructs are built by chaining four operators over eight element kinds:

* ``position`` places elements onto anchors (only ``location``/``space``
  operands are valid);
* ``associate`` attaches linked elements as annotations;
* ``connect`` adds edges between linked elements;
* ``unfold`` duplicates elements into lanes (categorical operands) or onto
  an ordinal axis (``time``/``temporality``).

Every join goes through the action events: an entity is linked to the events
it participates in, a location to the events that happen there, and the
annotation-backed kinds (actor, space, focalization) link through their
member ids. Evaluation is pure and deterministic: structurally equal inputs
produce structurally equal view models.

The textual DSL chains operators left to right::

    time |> unfold(characters) |> connect(events)
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Mapping, Union

from .errors import StoryloomError, ValidityError
from .model import ActionEvent, StoryModel

__all__ = [
    "ElementKind",
    "Base",
    "Position",
    "Associate",
    "Connect",
    "Unfold",
    "ConstructExpr",
    "ExprError",
    "ExprSyntaxError",
    "UnknownKindError",
    "InvalidOperandError",
    "UnavailableKindError",
    "AnnotationElement",
    "StoryAnnotations",
    "Node",
    "Edge",
    "EdgeRef",
    "Anchor",
    "Lane",
    "AnnotationTag",
    "ViewModel",
    "parse_expr",
    "pretty_print",
    "base_elements",
    "evaluate",
    "builtin_view",
    "group_parallel_edges",
    "view_to_dict",
    "BUILTIN_VIEWS",
]


class ElementKind(Enum):
    ACTOR = "actor"
    CHARACTER = "character"
    LOCATION = "location"
    SPACE = "space"
    TIME = "time"
    TEMPORALITY = "temporality"
    EVENT = "event"
    FOCALIZATION = "focalization"

    @property
    def layer(self) -> str:
        """Classification: the factual layer or the narrated layer."""
        return "fabula" if self in _FABULA else "syuzhet"


_FABULA = {ElementKind.ACTOR, ElementKind.LOCATION, ElementKind.TIME, ElementKind.EVENT}

#: Kinds derivable from the story model alone.
MODEL_DERIVABLE = {
    ElementKind.CHARACTER,
    ElementKind.LOCATION,
    ElementKind.EVENT,
    ElementKind.TIME,
    ElementKind.TEMPORALITY,
}

#: Kinds backed only by optional manual annotations.
ANNOTATION_BACKED = {ElementKind.ACTOR, ElementKind.SPACE, ElementKind.FOCALIZATION}

_ORDINAL_KINDS = {ElementKind.TIME, ElementKind.TEMPORALITY}
_EVENTISH = {ElementKind.TIME, ElementKind.TEMPORALITY, ElementKind.EVENT}
_POSITION_OPERANDS = {ElementKind.LOCATION, ElementKind.SPACE}


@dataclass(frozen=True)
class Base:
    kind: ElementKind


@dataclass(frozen=True)
class Position:
    expr: "ConstructExpr"
    kind: ElementKind


@dataclass(frozen=True)
class Associate:
    expr: "ConstructExpr"
    kind: ElementKind


@dataclass(frozen=True)
class Connect:
    expr: "ConstructExpr"
    kind: ElementKind


@dataclass(frozen=True)
class Unfold:
    expr: "ConstructExpr"
    kind: ElementKind


ConstructExpr = Union[Base, Position, Associate, Connect, Unfold]


class ExprError(StoryloomError):
    """Base class for construct-expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownKindError(ExprSyntaxError):
    def __init__(self, name: str, position: int):
        ExprError.__init__(self, f"unknown element kind {name!r} (at position {position})")
        self.position = position


class InvalidOperandError(ExprError):
    """Operator applied to an operand kind it does not accept."""


class UnavailableKindError(ExprError):
    """An annotation-backed kind was requested with no annotations present."""


# --- DSL ---

_KIND_NAMES: dict[str, ElementKind] = {}
for _kind in ElementKind:
    _KIND_NAMES[_kind.value] = _kind
    _KIND_NAMES[_kind.value + "s"] = _kind
_KIND_NAMES["temporalities"] = ElementKind.TEMPORALITY

_OPERATORS = {"position": Position, "associate": Associate, "connect": Connect, "unfold": Unfold}

_TOKEN = re.compile(r"\s*(\|>|\(|\)|[A-Za-z_]+|\S)")

_PRETTY = {
    ElementKind.ACTOR: "actors",
    ElementKind.CHARACTER: "characters",
    ElementKind.LOCATION: "locations",
    ElementKind.SPACE: "spaces",
    ElementKind.TIME: "time",
    ElementKind.TEMPORALITY: "temporality",
    ElementKind.EVENT: "events",
    ElementKind.FOCALIZATION: "focalizations",
}


def _lex(source: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        if match is None:
            break
        token = match.group(1)
        tokens.append((token, match.start(1)))
        pos = match.end()
    return tokens


def parse_expr(source: str) -> ConstructExpr:
    """Parse the pipe-application DSL into an expression AST."""
    tokens = _lex(source)
    cursor = 0

    def peek() -> tuple[str, int] | None:
        return tokens[cursor] if cursor < len(tokens) else None

    def take(expected: str | None = None, what: str = "") -> tuple[str, int]:
        nonlocal cursor
        if cursor >= len(tokens):
            raise ExprSyntaxError(f"unexpected end of expression, expected {what or expected}", len(source))
        token, position = tokens[cursor]
        if expected is not None and token != expected:
            raise ExprSyntaxError(f"expected {what or expected!r}, found {token!r}", position)
        cursor += 1
        return token, position

    def take_kind() -> ElementKind:
        token, position = take(None, "an element kind")
        kind = _KIND_NAMES.get(token.casefold())
        if kind is None:
            raise UnknownKindError(token, position)
        return kind

    expr: ConstructExpr = Base(take_kind())
    while peek() is not None:
        token, position = peek()
        if token != "|>":
            raise ExprSyntaxError(f"expected '|>', found {token!r}", position)
        take("|>")
        op_token, op_position = take(None, "an operator name")
        op = _OPERATORS.get(op_token.casefold())
        if op is None:
            raise ExprSyntaxError(f"unknown operator {op_token!r}", op_position)
        take("(", "'('")
        kind = take_kind()
        take(")", "')'")
        if op is Position and kind not in _POSITION_OPERANDS:
            raise InvalidOperandError(
                f"position only accepts location or space operands, not {kind.value!r}"
            )
        expr = op(expr, kind)
    return expr


def pretty_print(expr: ConstructExpr) -> str:
    """Render an AST back to DSL text; ``parse_expr`` inverts it."""
    if isinstance(expr, Base):
        return _PRETTY[expr.kind]
    op_name = type(expr).__name__.lower()
    return f"{pretty_print(expr.expr)} |> {op_name}({_PRETTY[expr.kind]})"


def validate_expr(expr: ConstructExpr) -> None:
    if isinstance(expr, Base):
        return
    if isinstance(expr, Position) and expr.kind not in _POSITION_OPERANDS:
        raise InvalidOperandError(
            f"position only accepts location or space operands, not {expr.kind.value!r}"
        )
    validate_expr(expr.expr)


# --- Annotations sidecar (actor / space / focalization, optional chronology) ---


@dataclass(frozen=True)
class AnnotationElement:
    """A manually annotated element and the model ids it covers."""

    id: str
    name: str
    emoji: str = ""
    members: tuple[str, ...] = ()


@dataclass(frozen=True)
class StoryAnnotations:
    actors: tuple[AnnotationElement, ...] = ()
    spaces: tuple[AnnotationElement, ...] = ()
    focalizations: tuple[AnnotationElement, ...] = ()
    chronology: tuple[str, ...] = ()  # event ids in chronological order


# --- View model ---


@dataclass(frozen=True)
class Node:
    key: str
    kind: str
    ref_id: str
    label: str
    emoji: str
    lane_key: str | None = None
    anchor_key: str | None = None
    order: int | None = None


@dataclass(frozen=True)
class EdgeRef:
    label: str
    event_id: str | None
    src_key: str
    dst_key: str


@dataclass(frozen=True)
class Edge:
    key: str
    src_key: str
    dst_key: str
    label: str
    event_id: str | None
    count: int = 1
    members: tuple[EdgeRef, ...] = ()


@dataclass(frozen=True)
class Anchor:
    key: str
    ref_id: str
    label: str
    emoji: str


@dataclass(frozen=True)
class Lane:
    key: str
    ref_id: str
    label: str


@dataclass(frozen=True)
class AnnotationTag:
    kind: str
    ref_id: str
    label: str


@dataclass(frozen=True)
class ViewModel:
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    anchors: tuple[Anchor, ...] = ()
    lanes: tuple[Lane, ...] = ()
    annotations: Mapping[str, tuple[AnnotationTag, ...]] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.annotations is None:
            object.__setattr__(self, "annotations", {})


# --- Element sets and the event-backed link relation ---

_FAMILY = {
    ElementKind.CHARACTER: "entity",
    ElementKind.ACTOR: "actor",
    ElementKind.LOCATION: "location",
    ElementKind.SPACE: "space",
    ElementKind.EVENT: "event",
    ElementKind.TIME: "event",
    ElementKind.TEMPORALITY: "event",
    ElementKind.FOCALIZATION: "focalization",
}


@dataclass(frozen=True)
class _Element:
    kind: ElementKind
    family: str
    ref_id: str
    label: str
    emoji: str
    ordinal: int | None = None


def _time_order(model: StoryModel, annotations: StoryAnnotations | None) -> list[ActionEvent]:
    """Chronological event order: narrated order unless an explicit chronology is given."""
    events = sorted(model.events, key=lambda e: e.narrated_index)
    if annotations and annotations.chronology:
        by_id = {e.id: e for e in events}
        if sorted(annotations.chronology) == sorted(by_id):
            return [by_id[eid] for eid in annotations.chronology]
    return events


def base_elements(
    model: StoryModel,
    kind: ElementKind,
    annotations: StoryAnnotations | None = None,
) -> tuple[_Element, ...]:
    """The element set a kind denotes on this model, in canonical order."""
    if kind is ElementKind.CHARACTER:
        return tuple(
            _Element(kind, "entity", e.id, e.name, e.emoji) for e in model.entities
        )
    if kind is ElementKind.LOCATION:
        return tuple(
            _Element(kind, "location", l.id, l.name, l.emoji) for l in model.locations
        )
    if kind is ElementKind.EVENT or kind is ElementKind.TEMPORALITY:
        ordered = sorted(model.events, key=lambda e: e.narrated_index)
        return tuple(
            _Element(kind, "event", e.id, e.name, "", ordinal=e.narrated_index)
            for e in ordered
        )
    if kind is ElementKind.TIME:
        ordered = _time_order(model, annotations)
        return tuple(
            _Element(kind, "event", e.id, e.name, "", ordinal=i)
            for i, e in enumerate(ordered)
        )
    # annotation-backed kinds
    source = {
        ElementKind.ACTOR: annotations.actors if annotations else (),
        ElementKind.SPACE: annotations.spaces if annotations else (),
        ElementKind.FOCALIZATION: annotations.focalizations if annotations else (),
    }[kind]
    if not source:
        raise UnavailableKindError(
            f"{kind.value} elements need manual annotations, and none are present"
        )
    return tuple(_Element(kind, _FAMILY[kind], a.id, a.name, a.emoji) for a in source)


class _Joiner:
    """Precomputed link relation between element families, through events."""

    def __init__(self, model: StoryModel, annotations: StoryAnnotations | None):
        self.model = model
        self.annotations = annotations or StoryAnnotations()
        self._support: dict[tuple[str, str], frozenset[str]] = {}
        self._members: dict[tuple[str, str], frozenset[str]] = {}
        events = model.events
        for entity in model.entities:
            self._support[("entity", entity.id)] = frozenset(
                e.id for e in events if entity.id in (e.source, e.target)
            )
        for location in model.locations:
            self._support[("location", location.id)] = frozenset(
                e.id for e in events if e.location == location.id
            )
        for event in events:
            self._support[("event", event.id)] = frozenset({event.id})
        for actor in self.annotations.actors:
            members = frozenset(actor.members)
            self._members[("actor", actor.id)] = members
            self._support[("actor", actor.id)] = frozenset(
                e.id for e in events if e.source in members or e.target in members
            )
        for space in self.annotations.spaces:
            members = frozenset(space.members)
            self._members[("space", space.id)] = members
            self._support[("space", space.id)] = frozenset(
                e.id for e in events if e.location in members
            )
        for focal in self.annotations.focalizations:
            members = frozenset(focal.members)
            self._members[("focalization", focal.id)] = members
            self._support[("focalization", focal.id)] = members

    def _support_of(self, family: str, ref_id: str) -> frozenset[str]:
        return self._support.get((family, ref_id), frozenset())

    def linked(self, family_x: str, ref_x: str, family_y: str, ref_y: str) -> bool:
        if family_x == family_y:
            return ref_x == ref_y
        direct = {
            ("actor", "entity"),
            ("space", "location"),
            ("focalization", "event"),
        }
        if (family_x, family_y) in direct:
            return ref_y in self._members.get((family_x, ref_x), frozenset())
        if (family_y, family_x) in direct:
            return ref_x in self._members.get((family_y, ref_y), frozenset())
        return bool(self._support_of(family_x, ref_x) & self._support_of(family_y, ref_y))


# --- Operator application over a mutable construct state ---


class _Construct:
    def __init__(self, model: StoryModel, annotations: StoryAnnotations | None):
        self.model = model
        self.annotations = annotations
        self.join = _Joiner(model, annotations)
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.anchors: list[Anchor] = []
        self.lanes: list[Lane] = []
        self.tags: dict[str, list[AnnotationTag]] = {}
        self.node_family: str = ""

    def freeze(self) -> ViewModel:
        return ViewModel(
            nodes=tuple(self.nodes),
            edges=tuple(self.edges),
            anchors=tuple(self.anchors),
            lanes=tuple(self.lanes),
            annotations={key: tuple(tags) for key, tags in self.tags.items() if tags},
        )

    # node bookkeeping -----------------------------------------------------

    def replicas_of(self, ref_id: str) -> list[Node]:
        return [n for n in self.nodes if n.ref_id == ref_id]

    def _replace_nodes(self, mapping: dict[str, list[Node]]) -> None:
        """Swap each node for its replicas, remapping edges and annotations."""
        new_nodes: list[Node] = []
        for node in self.nodes:
            new_nodes.extend(mapping.get(node.key, []))
        new_tags: dict[str, list[AnnotationTag]] = {}
        for old_key, tags in self.tags.items():
            for replica in mapping.get(old_key, []):
                new_tags[replica.key] = list(tags)
        new_edges: list[Edge] = []
        by_key = {n.key: n for n in new_nodes}
        for edge in self.edges:
            src = self._remap_endpoint(edge, edge.src_key, mapping, side="source")
            dst = self._remap_endpoint(edge, edge.dst_key, mapping, side="target")
            if src is None or dst is None:
                continue
            new_edges.append(replace(edge, src_key=src.key, dst_key=dst.key))
        self.nodes = new_nodes
        self.tags = new_tags
        self.edges = new_edges

    def _remap_endpoint(
        self,
        edge: Edge,
        old_key: str,
        mapping: dict[str, list[Node]],
        side: str,
    ) -> Node | None:
        replicas = mapping.get(old_key, [])
        if not replicas:
            return None
        event = None
        if edge.event_id is not None:
            try:
                event = self.model.event(edge.event_id)
            except StoryloomError:
                event = None
        return _pick_replica(replicas, event, side)

    # operators ------------------------------------------------------------

    def base(self, kind: ElementKind) -> None:
        elements = base_elements(self.model, kind, self.annotations)
        self.node_family = _FAMILY[kind]
        self.nodes = [
            Node(
                key=f"{kind.value}:{el.ref_id}",
                kind=kind.value,
                ref_id=el.ref_id,
                label=el.label,
                emoji=el.emoji,
                order=el.ordinal,
            )
            for el in elements
        ]

    def apply_position(self, kind: ElementKind) -> None:
        if kind not in _POSITION_OPERANDS:
            raise InvalidOperandError(
                f"position only accepts location or space operands, not {kind.value!r}"
            )
        elements = base_elements(self.model, kind, self.annotations)
        self.anchors = [
            Anchor(key=f"anchor:{kind.value}:{el.ref_id}", ref_id=el.ref_id, label=el.label, emoji=el.emoji)
            for el in elements
        ]
        anchor_keys = {el.ref_id: f"anchor:{kind.value}:{el.ref_id}" for el in elements}
        mapping: dict[str, list[Node]] = {}
        for node in self.nodes:
            linked = [
                el for el in elements
                if self.join.linked(self.node_family, node.ref_id, el.family, el.ref_id)
            ]
            if not linked:
                mapping[node.key] = [node]  # kept, unanchored
                continue
            mapping[node.key] = [
                replace(
                    node,
                    key=f"{node.key}@{anchor_keys[el.ref_id]}",
                    anchor_key=anchor_keys[el.ref_id],
                )
                for el in linked
            ]
        self._replace_nodes(mapping)

    def apply_unfold(self, kind: ElementKind) -> None:
        elements = base_elements(self.model, kind, self.annotations)
        ordinal = kind in _ORDINAL_KINDS
        mapping: dict[str, list[Node]] = {}
        lane_members: dict[str, int] = {}
        for node in self.nodes:
            linked = [
                el for el in elements
                if self.join.linked(self.node_family, node.ref_id, el.family, el.ref_id)
            ]
            replicas: list[Node] = []
            for el in linked:
                if ordinal:
                    replicas.append(
                        replace(node, key=f"{node.key}@order:{el.ordinal}", order=el.ordinal)
                    )
                else:
                    lane_key = f"lane:{kind.value}:{el.ref_id}"
                    lane_members[lane_key] = lane_members.get(lane_key, 0) + 1
                    replicas.append(
                        replace(node, key=f"{node.key}@{lane_key}", lane_key=lane_key)
                    )
            mapping[node.key] = replicas  # nodes linked to nothing are dropped
        self._replace_nodes(mapping)
        if not ordinal:
            self.lanes = [
                Lane(key=f"lane:{kind.value}:{el.ref_id}", ref_id=el.ref_id, label=el.label)
                for el in elements
                if f"lane:{kind.value}:{el.ref_id}" in lane_members
            ]

    def apply_associate(self, kind: ElementKind) -> None:
        elements = base_elements(self.model, kind, self.annotations)
        for node in self.nodes:
            tags = self.tags.setdefault(node.key, [])
            for el in elements:
                if self.join.linked(self.node_family, node.ref_id, el.family, el.ref_id):
                    tags.append(AnnotationTag(kind=kind.value, ref_id=el.ref_id, label=el.label))

    def apply_connect(self, kind: ElementKind) -> None:
        elements = base_elements(self.model, kind, self.annotations)
        taken_keys = {e.key for e in self.edges}
        if _FAMILY[kind] == "event":
            for el in elements:
                event = self.model.event(el.ref_id)
                src = self._event_endpoint(event, side="source")
                dst = self._event_endpoint(event, side="target")
                if src is None or dst is None:
                    continue  # unlinkable: skipped
                key = _unique_key(f"edge:{event.id}", taken_keys)
                self.edges.append(
                    Edge(key=key, src_key=src.key, dst_key=dst.key, label=event.name, event_id=event.id)
                )
        else:
            # No single pair of endpoints exists for these operands; chain the
            # linked nodes consecutively per element instead.
            for el in elements:
                linked = [
                    n for n in self.nodes
                    if self.join.linked(self.node_family, n.ref_id, el.family, el.ref_id)
                ]
                linked.sort(key=lambda n: (n.order if n.order is not None else -1))
                for first, second in zip(linked, linked[1:]):
                    key = _unique_key(f"edge:{kind.value}:{el.ref_id}", taken_keys)
                    self.edges.append(
                        Edge(
                            key=key,
                            src_key=first.key,
                            dst_key=second.key,
                            label=el.label,
                            event_id=None,
                        )
                    )

    def _event_endpoint(self, event: ActionEvent, side: str) -> Node | None:
        if self.node_family == "entity":
            want = event.source if side == "source" else event.target
            candidates = self.replicas_of(want)
        elif self.node_family == "event":
            candidates = self.replicas_of(event.id)
        else:
            return None  # an event links at most one location: nothing to connect
        if not candidates:
            return None
        return _pick_replica(candidates, event, side)


def _unique_key(base: str, taken: set[str]) -> str:
    key = base
    n = 1
    while key in taken:
        n += 1
        key = f"{base}#{n}"
    taken.add(key)
    return key


def _pick_replica(candidates: list[Node], event: ActionEvent | None, side: str) -> Node:
    """Duplication-aware join: pick the replica that matches the event's context."""
    if len(candidates) == 1 or event is None:
        return candidates[0]

    endpoint_entity = event.source if side == "source" else event.target

    def score(node: Node) -> int:
        points = 0
        if node.anchor_key is not None and node.anchor_key.endswith(f":{event.location}"):
            points += 4
        if node.lane_key is not None:
            if node.lane_key.endswith(f":{event.id}"):
                points += 4
            elif node.lane_key.endswith(f":{endpoint_entity}"):
                points += 3
            elif event.location is not None and node.lane_key.endswith(f":{event.location}"):
                points += 2
        if node.lane_key is None and node.anchor_key is None:
            points += 1
        return points

    best = max(candidates, key=lambda n: (score(n), -candidates.index(n)))
    return best


def evaluate(
    expr: ConstructExpr,
    model: StoryModel,
    annotations: StoryAnnotations | None = None,
) -> ViewModel:
    """Fold the expression left to right into a renderable view model."""
    validate_expr(expr)

    chain: list[ConstructExpr] = []
    node: ConstructExpr = expr
    while not isinstance(node, Base):
        chain.append(node)
        node = node.expr
    chain.reverse()

    construct = _Construct(model, annotations)
    construct.base(node.kind)
    for step in chain:
        if isinstance(step, Position):
            construct.apply_position(step.kind)
        elif isinstance(step, Associate):
            construct.apply_associate(step.kind)
        elif isinstance(step, Connect):
            construct.apply_connect(step.kind)
        elif isinstance(step, Unfold):
            construct.apply_unfold(step.kind)
    return construct.freeze()


BUILTIN_VIEWS = {
    "entities_actions": "characters |> connect(events)",
    "locations_entities": "characters |> position(locations)",
    "timeline": "time |> unfold(characters) |> connect(events)",
}


def builtin_view(
    name: str,
    model: StoryModel,
    annotations: StoryAnnotations | None = None,
) -> ViewModel:
    """Evaluate one of the three built-in constructs."""
    if name not in BUILTIN_VIEWS:
        raise ValidityError(
            f"unknown builtin view {name!r}; expected one of {sorted(BUILTIN_VIEWS)}"
        )
    return evaluate(parse_expr(BUILTIN_VIEWS[name]), model, annotations)


def group_parallel_edges(view: ViewModel) -> ViewModel:
    """Merge edges that share an unordered endpoint pair.

    The merged edge keeps the first edge's label and direction, carries the
    total count, and lists every grouped edge so a renderer can cycle
    through them.
    """
    groups: dict[tuple[str, str], list[Edge]] = {}
    order: list[tuple[str, str]] = []
    for edge in view.edges:
        pair = (min(edge.src_key, edge.dst_key), max(edge.src_key, edge.dst_key))
        if pair not in groups:
            groups[pair] = []
            order.append(pair)
        groups[pair].append(edge)
    merged: list[Edge] = []
    for pair in order:
        edges = groups[pair]
        first = edges[0]
        merged.append(
            replace(
                first,
                count=len(edges),
                members=tuple(
                    EdgeRef(label=e.label, event_id=e.event_id, src_key=e.src_key, dst_key=e.dst_key)
                    for e in edges
                ),
            )
        )
    return replace(view, edges=tuple(merged))


def view_to_dict(view: ViewModel) -> dict[str, Any]:
    return {
        "nodes": [
            {
                "key": n.key,
                "kind": n.kind,
                "refId": n.ref_id,
                "label": n.label,
                "emoji": n.emoji,
                "laneKey": n.lane_key,
                "anchorKey": n.anchor_key,
                "order": n.order,
            }
            for n in view.nodes
        ],
        "edges": [
            {
                "key": e.key,
                "srcKey": e.src_key,
                "dstKey": e.dst_key,
                "label": e.label,
                "eventId": e.event_id,
                "count": e.count,
                "members": [
                    {
                        "label": m.label,
                        "eventId": m.event_id,
                        "srcKey": m.src_key,
                        "dstKey": m.dst_key,
                    }
                    for m in e.members
                ],
            }
            for e in view.edges
        ],
        "anchors": [
            {"key": a.key, "refId": a.ref_id, "label": a.label, "emoji": a.emoji}
            for a in view.anchors
        ],
        "lanes": [{"key": l.key, "refId": l.ref_id, "label": l.label} for l in view.lanes],
        "annotations": {
            key: [{"kind": t.kind, "refId": t.ref_id, "label": t.label} for t in tags]
            for key, tags in view.annotations.items()
        },
    }
