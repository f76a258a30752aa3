"""Compile visual manipulations into prompts and review the tracked changes.

Each manipulation of a view becomes an edit intent; compiling one renders
its prompt template. Executing against a scripted gateway yields the new
text plus a word-level change set that can be accepted or rejected run by
run.
"""
from storyloom import compile_intent, execute
from storyloom.cli import render_track_changes
from storyloom.edits import EditScope, MoveEntity, RemoveEntity, SetTrait
from storyloom.gateway import MockGateway
from storyloom.model import ActionEvent, Entity, Location, StoryModel, Trait
from storyloom.revision import resolve
from storyloom.segmentation import segment_sentences

TEXT = "The cat naps in the barn. A farmer sweeps nearby. The cat ignores him."


def build_model() -> StoryModel:
    return StoryModel(
        text=TEXT,
        sentences=segment_sentences(TEXT),
        entities=(
            Entity("ent-1", "cat", "🐈", traits=(Trait("lazy", 9),)),
            Entity("ent-2", "farmer", "🧑‍🌾"),
        ),
        locations=(Location("loc-1", "barn", "🛖"), Location("loc-2", "lake", "🌊")),
        events=(
            ActionEvent("evt-1", "naps", "ent-1", "ent-1", "loc-1", 0, 0, 0),
            ActionEvent("evt-2", "sweeps", "ent-2", "ent-2", "loc-1", 1, 0, 1),
            ActionEvent("evt-3", "ignores", "ent-1", "ent-2", "loc-1", 2, 0, 2),
        ),
    )


def main():
    model = build_model()

    move = MoveEntity("ent-1", "loc-1", "loc-2")
    print("== the prompt a drag-to-location compiles to")
    print(compile_intent(move, None, model).text)
    print()

    scripted = MockGateway().add(
        purpose="edit",
        payload={"text": "The cat naps by the lake. A farmer sweeps nearby. "
                         "The cat ignores him."},
    )
    outcome = execute(move, None, model, scripted)
    print("== tracked changes")
    print(render_track_changes(outcome.change_set))
    print()

    decisions = {
        i: "accept"
        for i, run in enumerate(outcome.change_set.runs)
        if type(run).__name__ != "Keep"
    }
    print("== accepted text")
    print(resolve(outcome.change_set, decisions))
    print()

    print("== a scoped edit touches only its sentence")
    scope = EditScope(model.sentences[2].char_start, model.sentences[2].char_end)
    prompt = compile_intent(SetTrait("ent-1", "lazy", 3), scope, model)
    print(prompt.text)
    print()

    print("== removing an entity")
    print(compile_intent(RemoveEntity("ent-2"), None, model).text.splitlines()[-1])


if __name__ == "__main__":
    main()
