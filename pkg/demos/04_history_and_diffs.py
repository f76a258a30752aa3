"""Branching history and word-level diffs.

Every change commits a snapshot; checking out an older one and editing
again grows a new branch. Diffs align words, so accepting or rejecting
individual runs composes predictably.
"""
from storyloom import StoryModel, checkout, commit, diff, resolve
from storyloom.revision import HistoryTree, accept_all, reject_all
from storyloom.cli import render_track_changes


def show_tree(tree: HistoryTree) -> None:
    def walk(snapshot_id, depth):
        snap = tree.snapshot(snapshot_id)
        marker = "*" if snapshot_id == tree.current_id else " "
        print(f"  {marker} {'  ' * depth}{snap.id}: {snap.label!r} -> {snap.text!r}")
        for child in tree.children(snapshot_id):
            walk(child.id, depth + 1)

    roots = [s for s in tree.snapshots if s.parent_id is None]
    for root in roots:
        walk(root.id, 0)
    print()


def main():
    v0 = "The cat goes to the barn."
    v1 = "The cat goes to the barn at dusk."
    v2 = "The cat wanders about the lake."

    tree = commit(HistoryTree(), v0, StoryModel(text=v0), "first draft")
    tree = commit(tree, v1, StoryModel(text=v1), "add dusk")
    print("== linear history")
    show_tree(tree)

    tree, snap = checkout(tree, "snap-1")
    tree = commit(tree, v2, StoryModel(text=v2), "try the lake instead")
    print("== after checking out the root and editing again (a new branch)")
    show_tree(tree)

    print("== word-level diff of the two drafts")
    change_set = diff(v1, v2)
    print("  " + render_track_changes(change_set))
    print(f"  accept all -> {resolve(change_set, accept_all(change_set))!r}")
    print(f"  reject all -> {resolve(change_set, reject_all(change_set))!r}")


if __name__ == "__main__":
    main()
