import type { StoryModelDoc } from "../src/types.js";

/** Three sentences, two entities, two locations, three events. */
export function storyModel(): StoryModelDoc {
  const text = "Alice notices Rabbit at the bank. Alice follows Rabbit. Rabbit hides.";
  return {
    text,
    sentences: [
      { index: 0, charStart: 0, charEnd: 33, textHash: "h0" },
      { index: 1, charStart: 34, charEnd: 55, textHash: "h1" },
      { index: 2, charStart: 56, charEnd: 69, textHash: "h2" },
    ],
    entities: [
      { id: "ent-1", name: "Alice", emoji: "👧", traits: [{ name: "curious", value: 7 }] },
      { id: "ent-2", name: "Rabbit", emoji: "🐇", traits: [] },
    ],
    locations: [
      { id: "loc-1", name: "bank", emoji: "🏞️" },
      { id: "loc-2", name: "field", emoji: "🌾" },
    ],
    events: [
      {
        id: "evt-1", name: "notices", source: "ent-1", target: "ent-2",
        location: "loc-1", sentenceIndex: 0, ordinalInSentence: 0, narratedIndex: 0,
      },
      {
        id: "evt-2", name: "follows", source: "ent-1", target: "ent-2",
        location: "loc-1", sentenceIndex: 1, ordinalInSentence: 0, narratedIndex: 1,
      },
      {
        id: "evt-3", name: "hides", source: "ent-2", target: "ent-2",
        location: null, sentenceIndex: 2, ordinalInSentence: 0, narratedIndex: 2,
      },
    ],
    stale: false,
  };
}
