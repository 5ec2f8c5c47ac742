// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { countMatches, highlightParagraphs, TopicView } from "../src/views/topic.js";

describe("speech text search", () => {
  it("counts case-insensitive matches", () => {
    expect(countMatches("Security and security and SECURITY", "security")).toBe(3);
    expect(countMatches("nothing here", "security")).toBe(0);
    expect(countMatches("anything", "")).toBe(0);
  });

  it("wraps each match in a mark element and keeps the text intact", () => {
    const text = "First point.\n\nSecond point about points.";
    const nodes = highlightParagraphs(text, "point");
    expect(nodes).toHaveLength(2);
    const marks = nodes.flatMap((n) => [...n.querySelectorAll("mark")]);
    expect(marks).toHaveLength(3);
    expect(nodes.map((n) => n.textContent).join("\n\n")).toBe(text);
  });

  it("renders plain paragraphs when the term is empty", () => {
    const nodes = highlightParagraphs("One.\n\nTwo.", "");
    expect(nodes.flatMap((n) => [...n.querySelectorAll("mark")])).toHaveLength(0);
  });
});

/** Fetch stub whose responses are resolved manually, per URL, in test order. */
class DeferredFetch {
  private waiting = new Map<string, ((response: Response) => void)[]>();

  readonly fetchFn = (url: string): Promise<Response> =>
    new Promise((resolve) => {
      const queue = this.waiting.get(url) ?? [];
      queue.push(resolve);
      this.waiting.set(url, queue);
    });

  resolve(url: string, payload: unknown): void {
    const queue = this.waiting.get(url) ?? [];
    this.waiting.delete(url);
    for (const resolve of queue) {
      resolve(
        new Response(JSON.stringify(payload), {
          status: 200,
          headers: { "Content-Type": "application/json" },
        }),
      );
    }
  }
}

function speeches(ids: string[], threshold: number) {
  return {
    schema_version: 1,
    topic: "T0",
    threshold,
    speeches: ids.map((id) => ({
      id,
      score: 0.9,
      speaker_name: "Name",
      affiliation: "Land",
      date: "2001-01-01",
      year: 2001,
    })),
  };
}

const TOPICS = {
  schema_version: 1,
  topics: [{ id: "T0", index: 0, keywords: ["alpha", "beta"] }],
};

describe("stale responses", () => {
  it("drops a slow older response that arrives after a newer one", async () => {
    const deferred = new DeferredFetch();
    const view = new TopicView(new ApiClient("", deferred.fetchFn), 0.2);
    document.body.append(view.element);

    void view.load(0); // threshold 0.2
    const newer = view.setThreshold(0.6);

    deferred.resolve("/api/topics", TOPICS);
    deferred.resolve("/api/topics/0/speeches?threshold=0.6", speeches(["new#1"], 0.6));
    await newer;

    // the older request finally answers; it must not overwrite the list
    deferred.resolve("/api/topics/0/speeches?threshold=0.2", speeches(["old#1", "old#2"], 0.2));
    await new Promise((r) => setTimeout(r, 10));

    const ids = [...view.element.querySelectorAll(".speech-list li")].map((li) =>
      li.getAttribute("data-id"),
    );
    expect(ids).toEqual(["new#1"]);
    view.element.remove();
  });
});
