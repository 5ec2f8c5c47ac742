// @vitest-environment jsdom
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App, CHART_HEIGHT } from "../src/app.js";
import { communityColor, nodeRadius } from "../src/palette.js";
import { countMatches } from "../src/views/topic.js";
import type { GraphPayload, Manifest } from "../src/types.js";
import { RunningServer, startServer } from "./helpers/server.js";

let server: RunningServer;
let api: ApiClient;
let manifest: Manifest;
let busiestTopic = 0;

beforeAll(async () => {
  server = await startServer();
  api = new ApiClient(server.base);
  manifest = await api.meta();
  let most = -1;
  for (let t = 0; t < manifest.k; t += 1) {
    const payload = await api.topicSpeeches(t, manifest.default_threshold);
    if (payload.speeches.length > most) {
      most = payload.speeches.length;
      busiestTopic = t;
    }
  }
});

afterAll(() => {
  server.stop();
});

interface Mounted {
  root: HTMLElement;
  app: App;
  pushes: string[];
}

async function mountApp(query = ""): Promise<Mounted> {
  const root = document.createElement("div");
  document.body.append(root);
  const pushes: string[] = [];
  const app = new App(root, api, { pushUrl: (q) => pushes.push(q) });
  const { parseState } = await import("../src/urlstate.js");
  await app.start(parseState(query));
  return { root, app, pushes };
}

function attr(element: Element, name: string): number {
  return Number(element.getAttribute(name));
}

describe("landscape view against the served bundle", () => {
  it("stacks one band per topic per year, summing to the full chart height", async () => {
    const { root } = await mountApp();
    const landscape = await api.landscape();

    const rects = [...root.querySelectorAll("svg rect[data-band]")];
    expect(rects).toHaveLength(landscape.years.length * manifest.k);

    for (const year of landscape.years) {
      const bands = rects.filter((r) => r.getAttribute("data-year") === String(year));
      expect(bands).toHaveLength(manifest.k);
      const total = bands.reduce((sum, r) => sum + attr(r, "height"), 0);
      expect(Math.abs(total - CHART_HEIGHT)).toBeLessThan(1e-6);

      const spans = bands
        .map((r) => ({ y: attr(r, "y"), h: attr(r, "height") }))
        .sort((a, b) => a.y - b.y || a.h - b.h);
      let cursor = 0;
      for (const span of spans) {
        expect(Math.abs(span.y - cursor)).toBeLessThan(1e-6);
        cursor = span.y + span.h;
      }
      expect(Math.abs(cursor - CHART_HEIGHT)).toBeLessThan(1e-6);
    }

    const legendEntries = root.querySelectorAll(".legend .legend-entry");
    expect(legendEntries).toHaveLength(manifest.k);
    root.remove();
  });

  it("scales each band to its served share of the year", async () => {
    const { root } = await mountApp();
    const landscape = await api.landscape();
    for (const [column, year] of landscape.years.entries()) {
      for (let topic = 0; topic < manifest.k; topic += 1) {
        const rect = [...root.querySelectorAll("svg rect[data-band]")].find(
          (r) =>
            r.getAttribute("data-year") === String(year) &&
            r.getAttribute("data-topic") === String(topic),
        );
        expect(rect).toBeDefined();
        const share = landscape.shares[column]?.[topic] ?? 0;
        expect(attr(rect!, "height")).toBeCloseTo(share * CHART_HEIGHT, 6);
      }
    }
    root.remove();
  });
});

describe("topic drill-down against the served bundle", () => {
  it("clicking a band lists exactly the served ranking, in order", async () => {
    const { root, app, pushes } = await mountApp();
    const rect = [...root.querySelectorAll("svg rect[data-band]")].find(
      (r) => r.getAttribute("data-topic") === String(busiestTopic),
    );
    expect(rect).toBeDefined();
    rect!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await app.pending;

    const expected = await api.topicSpeeches(busiestTopic, manifest.default_threshold);
    expect(expected.speeches.length).toBeGreaterThan(0);
    const ids = [...root.querySelectorAll(".speech-list li")].map((li) =>
      li.getAttribute("data-id"),
    );
    expect(ids).toEqual(expected.speeches.map((s) => s.id));
    expect(pushes.at(-1)).toBe(`?view=topic&topic=${busiestTopic}`);
    root.remove();
  });

  it("tightening the threshold filters the list monotonically and matches the API", async () => {
    const { root, app } = await mountApp(`?view=topic&topic=${busiestTopic}`);
    const view = app.topicView!;
    const counts: number[] = [];
    for (const threshold of [0, 0.1, 0.2, 0.4, 0.6, 0.8]) {
      await view.setThreshold(threshold);
      const ids = [...root.querySelectorAll(".speech-list li")].map((li) =>
        li.getAttribute("data-id"),
      );
      const served = await api.topicSpeeches(busiestTopic, threshold);
      expect(ids).toEqual(served.speeches.map((s) => s.id));
      counts.push(ids.length);
    }
    expect(counts[0]).toBeGreaterThan(0);
    for (let i = 1; i < counts.length; i += 1) {
      expect(counts[i]!).toBeLessThanOrEqual(counts[i - 1]!);
    }

    const slider = root.querySelector('input[data-role="threshold"]') as HTMLInputElement;
    slider.value = "0.3";
    slider.dispatchEvent(new Event("input"));
    await view.pending;
    expect(root.querySelector('[data-role="count"]')?.textContent).toContain("30%");
    const served = await api.topicSpeeches(busiestTopic, 0.3);
    expect(root.querySelectorAll(".speech-list li")).toHaveLength(served.speeches.length);
    root.remove();
  });

  it("opens a speech and highlights search matches in its text", async () => {
    const { root, app } = await mountApp(`?view=topic&topic=${busiestTopic}`);
    const first = root.querySelector(".speech-list li") as HTMLElement;
    const id = first.getAttribute("data-id")!;
    first.click();
    await app.topicView!.pending;

    const record = await api.speech(id);
    const panel = root.querySelector(".speech-panel") as HTMLElement;
    expect(panel.querySelector("h3")?.textContent).toBe(
      `${record.speaker_name} (${record.affiliation})`,
    );
    expect(panel.querySelector(".speech-text")?.textContent).toContain(
      record.text.slice(0, 40).trim(),
    );

    const term = record.text.split(/\s+/).find((w) => /^[a-z]{4,}$/i.test(w))!;
    const search = panel.querySelector('input[data-role="speech-search"]') as HTMLInputElement;
    search.value = term;
    search.dispatchEvent(new Event("input"));

    const marks = panel.querySelectorAll("mark");
    const expectedMatches = countMatches(record.text, term);
    expect(marks.length).toBe(expectedMatches);
    expect(expectedMatches).toBeGreaterThan(0);
    expect(panel.querySelector('[data-role="match-count"]')?.textContent).toContain(
      String(expectedMatches),
    );
    for (const mark of marks) {
      expect(mark.textContent?.toLowerCase()).toBe(term.toLowerCase());
    }
    root.remove();
  });
});

describe("network view against the served bundle", () => {
  it("draws every served node sized by centrality and colored by community", async () => {
    const { root, app } = await mountApp("?view=network");
    await app.pending;

    const served = await api.network(
      manifest.modes[0]!,
      manifest.default_level,
      manifest.default_resolution,
    );
    const graph: GraphPayload = served.graph;
    const circles = [...root.querySelectorAll("svg circle")];
    expect(circles).toHaveLength(graph.nodes.length);
    expect(root.querySelectorAll("svg line")).toHaveLength(graph.edges.length);

    for (const node of graph.nodes) {
      const circle = circles.find((c) => c.getAttribute("data-node") === node.id);
      expect(circle, `circle for ${node.id}`).toBeDefined();
      expect(attr(circle!, "r")).toBeCloseTo(nodeRadius(node.centrality), 6);
      expect(circle!.getAttribute("fill")).toBe(communityColor(node.community));
      expect(circle!.getAttribute("data-community")).toBe(String(node.community));
      expect(circle!.getAttribute("data-category")).toBe(node.category);
    }
    root.remove();
  });

  it("changing the level select refetches, pushes the URL, and snaps odd requests", async () => {
    const { root, app, pushes } = await mountApp("?view=network");
    await app.pending;
    const view = app.networkView!;
    const otherLevel = manifest.levels.find((l) => l !== manifest.default_level)!;

    const select = root.querySelector('select[data-role="level"]') as HTMLSelectElement;
    select.value = String(otherLevel);
    select.dispatchEvent(new Event("change"));
    await view.pending;

    expect(pushes.at(-1)).toBe(
      `?view=network&level=${otherLevel}&resolution=${manifest.default_resolution}`,
    );
    const served = await api.network(manifest.modes[0]!, otherLevel, manifest.default_resolution);
    expect(root.querySelectorAll("svg circle")).toHaveLength(served.graph.nodes.length);
    const note = root.querySelector('[data-role="snap-note"]') as HTMLElement;
    expect(note.textContent).toContain(`Level ${otherLevel}`);

    await view.load({ level: 0.21 });
    const snapped = await api.network(manifest.modes[0]!, 0.21, manifest.default_resolution);
    expect(snapped.served.level).not.toBe(0.21);
    expect(note.textContent).toContain("serving nearest precomputed");
    expect(note.textContent).toContain(`${snapped.served.level}`);
    root.remove();
  });

  it("hiding isolates keeps exactly the connected nodes; one-mode shows only affiliations", async () => {
    const { root, app } = await mountApp("?view=network");
    await app.pending;
    const view = app.networkView!;

    const served = await api.network(
      manifest.modes[0]!,
      manifest.default_level,
      manifest.default_resolution,
    );
    const connected = new Set<string>();
    for (const edge of served.graph.edges) {
      connected.add(edge.source);
      connected.add(edge.target);
    }
    const checkbox = root.querySelector('input[data-role="isolates"]') as HTMLInputElement;
    checkbox.checked = true;
    checkbox.dispatchEvent(new Event("change"));
    await view.pending;
    expect(root.querySelectorAll("svg circle")).toHaveLength(connected.size);
    expect(connected.size).toBeLessThanOrEqual(served.graph.nodes.length);

    const modeSelect = root.querySelector('select[data-role="mode"]') as HTMLSelectElement;
    modeSelect.value = "one";
    modeSelect.dispatchEvent(new Event("change"));
    await view.pending;
    const categories = new Set(
      [...root.querySelectorAll("svg circle")].map((c) => c.getAttribute("data-category")),
    );
    expect(categories).toEqual(new Set(["affiliation"]));
    root.remove();
  });
});
