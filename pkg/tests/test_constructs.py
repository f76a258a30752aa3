"""Construct algebra: DSL, operators, builtins, grouping."""
from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from storyloom.constructs import (
    Associate,
    Base,
    Connect,
    ElementKind,
    ExprSyntaxError,
    InvalidOperandError,
    Position,
    UnavailableKindError,
    Unfold,
    UnknownKindError,
    builtin_view,
    evaluate,
    group_parallel_edges,
    parse_expr,
    pretty_print,
    view_to_dict,
)
from storyloom.model import Entity, Location, StoryModel, events_for_entity

from conftest import make_model


@pytest.fixture
def duo_model():
    """Two entities, three events (one self-loop, one parallel pair)."""
    return make_model(
        "Ann notices Bob. Ann follows Bob and Ann chases Bob.",
        entities=[Entity("ent-1", "Ann", "🙂"), Entity("ent-2", "Bob", "😎")],
        locations=[Location("loc-1", "yard", "🌳")],
        per_sentence_events=[
            [("notices", "ent-1", "ent-2", "loc-1")],
            [("follows", "ent-1", "ent-2", "loc-1"), ("chases", "ent-1", "ent-2", None)],
        ],
    )


class TestParse:
    def test_bare_kind(self):
        assert parse_expr("characters") == Base(ElementKind.CHARACTER)

    def test_chained_operators(self):
        expr = parse_expr("time |> unfold(characters) |> connect(events)")
        assert expr == Connect(
            Unfold(Base(ElementKind.TIME), ElementKind.CHARACTER), ElementKind.EVENT
        )

    def test_position_operand_constraint(self):
        with pytest.raises(InvalidOperandError, match="location or space"):
            parse_expr("characters |> position(events)")

    def test_unknown_kind_with_position(self):
        with pytest.raises(UnknownKindError) as info:
            parse_expr("characters |> connect(wizards)")
        assert info.value.position == len("characters |> connect(")

    def test_syntax_error_with_position(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("characters connect(events)")
        assert info.value.position == len("characters ")

    def test_singular_and_plural_names(self):
        assert parse_expr("character") == parse_expr("characters")
        assert parse_expr("locations |> position(location)") == parse_expr(
            "location |> position(locations)"
        )


_kinds = st.sampled_from(list(ElementKind))
_position_kinds = st.sampled_from([ElementKind.LOCATION, ElementKind.SPACE])


def _exprs():
    return st.recursive(
        _kinds.map(Base),
        lambda inner: st.one_of(
            st.tuples(inner, _position_kinds).map(lambda t: Position(*t)),
            st.tuples(inner, _kinds).map(lambda t: Associate(*t)),
            st.tuples(inner, _kinds).map(lambda t: Connect(*t)),
            st.tuples(inner, _kinds).map(lambda t: Unfold(*t)),
        ),
        max_leaves=4,
    )


@given(_exprs())
def test_parse_pretty_round_trip(expr):
    assert parse_expr(pretty_print(expr)) == expr


class TestBaseElements:
    def test_character_base(self, duo_model):
        view = evaluate(parse_expr("characters"), duo_model)
        assert [n.label for n in view.nodes] == ["Ann", "Bob"]
        assert [n.kind for n in view.nodes] == ["character", "character"]

    def test_time_on_empty_model(self):
        view = evaluate(parse_expr("time"), StoryModel())
        assert view.nodes == ()

    def test_focalization_without_annotations(self, duo_model):
        with pytest.raises(UnavailableKindError):
            evaluate(parse_expr("focalizations"), duo_model)

    def test_time_follows_explicit_chronology(self, annotated_model):
        model, annotations = annotated_model
        view = evaluate(parse_expr("time"), model, annotations)
        assert [n.ref_id for n in view.nodes][:2] == ["evt-2", "evt-1"]
        narrated = evaluate(parse_expr("temporality"), model, annotations)
        assert [n.ref_id for n in narrated.nodes][:2] == ["evt-1", "evt-2"]


class TestConnect:
    def test_directed_labeled_edge(self, duo_model):
        view = evaluate(parse_expr("characters |> connect(events)"), duo_model)
        notices = next(e for e in view.edges if e.label == "notices")
        assert notices.src_key == "character:ent-1"
        assert notices.dst_key == "character:ent-2"
        assert notices.event_id == "evt-1"

    def test_no_events_no_edges(self):
        model = make_model(
            "Quiet.",
            entities=[Entity("ent-1", "Ann", "🙂")],
            locations=[],
            per_sentence_events=[[]],
        )
        view = evaluate(parse_expr("characters |> connect(events)"), model)
        assert view.edges == ()

    def test_self_action_is_a_self_loop(self):
        model = make_model(
            "Ann thinks.",
            entities=[Entity("ent-1", "Ann", "🙂")],
            locations=[],
            per_sentence_events=[[("thinking", "ent-1", "ent-1", None)]],
        )
        view = evaluate(parse_expr("characters |> connect(events)"), model)
        (edge,) = view.edges
        assert edge.src_key == edge.dst_key == "character:ent-1"

    def test_one_edge_per_event_with_present_endpoints(self, annotated_model):
        model, _ = annotated_model
        view = evaluate(parse_expr("characters |> connect(events)"), model)
        assert len(view.edges) == len(model.events)
        assert sorted(e.event_id for e in view.edges) == sorted(e.id for e in model.events)


class TestUnfold:
    def test_locations_by_characters_lanes(self, mixed_model):
        view = evaluate(parse_expr("locations |> unfold(characters)"), mixed_model)
        lanes = {lane.ref_id: lane for lane in view.lanes}
        assert set(lanes) == {"ent-1", "ent-2"}
        mira_rows = [n for n in view.nodes if n.lane_key == lanes["ent-1"].key]
        # Mira acts at both the mill and the lake
        assert sorted(n.ref_id for n in mira_rows) == ["loc-1", "loc-2"]

    def test_single_element_single_lane(self, duo_model):
        view = evaluate(parse_expr("characters |> unfold(locations)"), duo_model)
        assert [lane.ref_id for lane in view.lanes] == ["loc-1"]
        # chases has no location, but both entities act at the yard via others
        assert {n.ref_id for n in view.nodes} == {"ent-1", "ent-2"}

    def test_unfold_matches_exhaustive_join(self):
        # Oracle: enumerate the (entity x linked-event) table by brute force.
        model = make_model(
            "Ann pokes Bob. Bob pokes Cid. Cid thinks.",
            entities=[
                Entity("ent-1", "Ann", "🙂"),
                Entity("ent-2", "Bob", "😎"),
                Entity("ent-3", "Cid", "🤖"),
            ],
            locations=[],
            per_sentence_events=[
                [("pokes", "ent-1", "ent-2", None)],
                [("pokes", "ent-2", "ent-3", None)],
                [("thinking", "ent-3", "ent-3", None)],
            ],
        )
        expected = set()
        for event in model.events:
            for entity in model.entities:
                if entity.id in (event.source, event.target):
                    expected.add((event.id, entity.id))
        view = evaluate(parse_expr("time |> unfold(characters)"), model)
        got = {
            (n.ref_id, n.lane_key.removeprefix("lane:character:"))
            for n in view.nodes
        }
        assert got == expected
        assert len(view.nodes) == len(expected)  # node count == sum of linked elements

    def test_nodes_without_links_are_dropped(self, duo_model):
        model = StoryModel(
            text=duo_model.text,
            sentences=duo_model.sentences,
            entities=duo_model.entities + (Entity("ent-9", "Hermit", "🗿"),),
            locations=duo_model.locations,
            events=duo_model.events,
        )
        view = evaluate(parse_expr("characters |> unfold(events)"), model)
        assert all(n.ref_id != "ent-9" for n in view.nodes)

    def test_ordinal_unfold_sets_order(self, duo_model):
        view = evaluate(parse_expr("characters |> unfold(time)"), duo_model)
        ann = [n for n in view.nodes if n.ref_id == "ent-1"]
        assert sorted(n.order for n in ann) == [0, 1, 2]
        assert view.lanes == ()


class TestPosition:
    def test_characters_by_locations(self, mixed_model):
        view = evaluate(parse_expr("characters |> position(locations)"), mixed_model)
        assert [a.ref_id for a in view.anchors] == ["loc-1", "loc-2"]
        mira = [n for n in view.nodes if n.ref_id == "ent-1"]
        assert sorted(n.anchor_key for n in mira) == [
            "anchor:location:loc-1",
            "anchor:location:loc-2",
        ]

    def test_multi_location_entity_replicated(self, mixed_model):
        view = evaluate(parse_expr("characters |> position(locations)"), mixed_model)
        for entity in mixed_model.entities:
            distinct = {
                e.location
                for e in events_for_entity(mixed_model, entity.id)
                if e.location is not None
            }
            replicas = [n for n in view.nodes if n.ref_id == entity.id]
            assert len(replicas) == max(len(distinct), 1)

    def test_time_by_locations_maps_movements(self, mixed_model):
        view = evaluate(parse_expr("time |> position(locations)"), mixed_model)
        anchored = {n.ref_id: n.anchor_key for n in view.nodes}
        assert anchored["evt-1"] == "anchor:location:loc-1"
        assert anchored["evt-5"] == "anchor:location:loc-2"
        assert anchored["evt-4"] is None  # unresolved location stays unanchored

    def test_zero_location_model_keeps_unanchored_nodes(self, duo_model):
        model = StoryModel(
            text=duo_model.text,
            sentences=duo_model.sentences,
            entities=duo_model.entities,
            locations=(),
            events=tuple(
                e.__class__(**{**e.__dict__, "location": None}) for e in duo_model.events
            ),
        )
        view = builtin_view("locations_entities", model)
        assert view.anchors == ()
        assert len(view.nodes) == 2
        assert all(n.anchor_key is None for n in view.nodes)

    def test_invalid_operand(self, duo_model):
        with pytest.raises(InvalidOperandError):
            evaluate(Position(Base(ElementKind.CHARACTER), ElementKind.EVENT), duo_model)


class TestAssociate:
    def test_timeline_of_point_of_view(self, annotated_model):
        model, annotations = annotated_model
        view = evaluate(parse_expr("time |> associate(focalizations)"), model, annotations)
        tagged = view.annotations["time:evt-1"]
        assert [(t.kind, t.ref_id) for t in tagged] == [("focalization", "foc-1")]

    def test_zero_links_leaves_annotations_empty(self, duo_model):
        view = evaluate(parse_expr("characters |> associate(locations)"), duo_model)
        # chases has no location; everything else happens at the yard
        assert set(view.annotations) == {"character:ent-1", "character:ent-2"}

    def test_annotation_counts_match_model_query(self, mixed_model):
        view = evaluate(parse_expr("characters |> associate(events)"), mixed_model)
        for entity in mixed_model.entities:
            expected = len(events_for_entity(mixed_model, entity.id))
            got = len(view.annotations.get(f"character:{entity.id}", ()))
            assert got == expected

    def test_nodes_and_edges_unchanged(self, mixed_model):
        bare = evaluate(parse_expr("characters |> connect(events)"), mixed_model)
        associated = evaluate(
            parse_expr("characters |> connect(events) |> associate(locations)"), mixed_model
        )
        assert associated.nodes == bare.nodes
        assert associated.edges == bare.edges


class TestEvaluate:
    def test_storyline_expression(self, mixed_model):
        view = evaluate(
            parse_expr("time |> unfold(characters) |> connect(events)"), mixed_model
        )
        assert {lane.ref_id for lane in view.lanes} == {"ent-1", "ent-2"}
        assert len(view.edges) == len(mixed_model.events)
        waves = next(e for e in view.edges if e.label == "waves at")
        assert waves.src_key.endswith("lane:character:ent-1")
        assert waves.dst_key.endswith("lane:character:ent-2")

    def test_empty_model_empty_view(self):
        view = evaluate(Base(ElementKind.CHARACTER), StoryModel())
        assert view == evaluate(Base(ElementKind.CHARACTER), StoryModel())
        assert view.nodes == () and view.edges == ()

    def test_story_curve_expression(self, annotated_model):
        model, annotations = annotated_model
        view = evaluate(
            parse_expr("time |> unfold(temporality) |> associate(locations) |> associate(events)"),
            model,
            annotations,
        )
        assert len(view.nodes) == len(model.events)
        assert all(n.order == model.event(n.ref_id).narrated_index for n in view.nodes)

    def test_deterministic(self, annotated_model):
        model, annotations = annotated_model
        expr = parse_expr("characters |> position(locations) |> connect(events)")
        assert evaluate(expr, model, annotations) == evaluate(expr, model, annotations)


class TestBuiltins:
    def test_entities_actions(self, alice_model):
        view = builtin_view("entities_actions", alice_model)
        labels = {n.label for n in view.nodes}
        assert {"Alice", "sister", "book", "White Rabbit"} <= labels
        assert len(view.edges) == len(alice_model.events)
        assert all(e.label and e.event_id for e in view.edges)

    def test_timeline_vertical_order(self, alice_model):
        view = builtin_view("timeline", alice_model)
        for node in view.nodes:
            assert node.order == alice_model.event(node.ref_id).narrated_index

    def test_unknown_name(self, alice_model):
        with pytest.raises(Exception, match="builtin"):
            builtin_view("nonsense", alice_model)


class TestGroupParallelEdges:
    def test_parallel_pair_grouped(self, duo_model):
        view = group_parallel_edges(
            evaluate(parse_expr("characters |> connect(events)"), duo_model)
        )
        grouped = next(e for e in view.edges if e.count > 1)
        # follows and chases share endpoints; notices groups with them too
        assert grouped.label == "notices"
        assert grouped.count == 3
        assert [m.label for m in grouped.members] == ["notices", "follows", "chases"]

    def test_single_edge_count_one(self):
        model = make_model(
            "Ann waves.",
            entities=[Entity("ent-1", "Ann", "🙂")],
            locations=[],
            per_sentence_events=[[("waves", "ent-1", "ent-1", None)]],
        )
        view = group_parallel_edges(
            evaluate(parse_expr("characters |> connect(events)"), model)
        )
        (edge,) = view.edges
        assert edge.count == 1 and edge.label == "waves"

    def test_opposite_directions_group_together(self, mixed_model):
        # Oracle: multimap on unordered {min,max} endpoint keys.
        view = evaluate(parse_expr("characters |> connect(events)"), mixed_model)
        buckets: dict[tuple[str, str], int] = {}
        for edge in view.edges:
            pair = (min(edge.src_key, edge.dst_key), max(edge.src_key, edge.dst_key))
            buckets[pair] = buckets.get(pair, 0) + 1
        grouped = group_parallel_edges(view)
        assert sorted(e.count for e in grouped.edges) == sorted(buckets.values())
        pair_of_interest = ("character:ent-1", "character:ent-2")
        merged = next(
            e
            for e in grouped.edges
            if (min(e.src_key, e.dst_key), max(e.src_key, e.dst_key)) == pair_of_interest
        )
        assert merged.count == buckets[pair_of_interest] == 4
        assert {m.label for m in merged.members} == {
            "waves at", "waves back", "follows", "splashes",
        }

    def test_multiplicity_preserved(self, mixed_model, alice_model):
        for model in (mixed_model, alice_model):
            view = evaluate(parse_expr("characters |> connect(events)"), model)
            grouped = group_parallel_edges(view)
            assert sum(e.count for e in grouped.edges) == len(view.edges)


def test_view_serialization_shape(self_model=None):
    model = make_model(
        "Ann waves.",
        entities=[Entity("ent-1", "Ann", "🙂")],
        locations=[],
        per_sentence_events=[[("waves", "ent-1", "ent-1", None)]],
    )
    data = view_to_dict(builtin_view("entities_actions", model))
    assert set(data) == {"nodes", "edges", "anchors", "lanes", "annotations"}
    assert set(data["nodes"][0]) == {
        "key", "kind", "refId", "label", "emoji", "laneKey", "anchorKey", "order",
    }
    assert set(data["edges"][0]) >= {"key", "srcKey", "dstKey", "label", "eventId"}
