"""Evaluate story constructs with the operator DSL.

Shows the three built-in views plus a couple of classic constructs written
as expressions: a storyline (lanes per character), a map of movements, and
an event chain per character.
"""
from storyloom import builtin_view, evaluate, parse_expr
from storyloom.constructs import group_parallel_edges
from storyloom.model import ActionEvent, Entity, Location, StoryModel
from storyloom.segmentation import segment_sentences

TEXT = (
    "Juno argues with Rex at the dock. Rex storms off to the tavern. "
    "Juno follows Rex. Rex apologizes to Juno at the tavern. They laugh."
)


def build_model() -> StoryModel:
    rows = [
        ("argues with", "ent-1", "ent-2", "loc-1", 0),
        ("storms off", "ent-2", "ent-2", "loc-2", 1),
        ("follows", "ent-1", "ent-2", None, 2),
        ("apologizes", "ent-2", "ent-1", "loc-2", 3),
        ("laugh", "ent-1", "ent-2", "loc-2", 4),
    ]
    return StoryModel(
        text=TEXT,
        sentences=segment_sentences(TEXT),
        entities=(Entity("ent-1", "Juno", "🦉"), Entity("ent-2", "Rex", "🦊")),
        locations=(Location("loc-1", "dock", "⚓"), Location("loc-2", "tavern", "🍺")),
        events=tuple(
            ActionEvent(f"evt-{i + 1}", name, src, dst, loc, i, 0, i)
            for i, (name, src, dst, loc, _) in enumerate(rows)
        ),
    )


def show(title: str, view) -> None:
    print(f"== {title}")
    for lane in view.lanes:
        members = [n.label for n in view.nodes if n.lane_key == lane.key]
        print(f"  lane {lane.label}: {members}")
    for anchor in view.anchors:
        members = [n.label for n in view.nodes if n.anchor_key == anchor.key]
        print(f"  at {anchor.emoji} {anchor.label}: {members}")
    for edge in view.edges:
        extra = f" x{edge.count}" if edge.count > 1 else ""
        print(f"  {edge.src_key} --{edge.label}{extra}--> {edge.dst_key}")
    print()


def main():
    model = build_model()

    show("entities and actions (grouped)", group_parallel_edges(
        builtin_view("entities_actions", model)
    ))
    show("locations and entities", builtin_view("locations_entities", model))
    show("timeline", builtin_view("timeline", model))

    show("map of movements: time |> position(locations)",
         evaluate(parse_expr("time |> position(locations)"), model))
    show("locations visited per character: locations |> unfold(characters)",
         evaluate(parse_expr("locations |> unfold(characters)"), model))


if __name__ == "__main__":
    main()
