import { ApiClient, ApiError, RequestGate } from "../api.js";
import { clear, el, svgEl } from "../dom.js";
import { forceLayout } from "../layout.js";
import { communityColor, nodeRadius } from "../palette.js";
import type { GraphPayload, Manifest, NetworkResponse } from "../types.js";

export const LAYOUT_SEED = 42;
export const CANVAS_WIDTH = 720;
export const CANVAS_HEIGHT = 480;

export interface NetworkSettings {
  mode: string;
  level: number;
  resolution: number;
  hideIsolates: boolean;
}

export class NetworkView {
  readonly element: HTMLElement;
  pending: Promise<void> | null = null;
  settings: NetworkSettings;
  private readonly gate = new RequestGate();
  private readonly controlsEl: HTMLElement;
  private readonly noteEl: HTMLElement;
  private readonly canvasEl: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly manifest: Manifest,
    private readonly onSettingsChange: (settings: NetworkSettings) => void,
  ) {
    this.settings = {
      mode: manifest.modes[0] ?? "two",
      level: manifest.default_level,
      resolution: manifest.default_resolution,
      hideIsolates: false,
    };
    this.controlsEl = el("div", { class: "network-controls" });
    this.noteEl = el("p", { class: "hint", "data-role": "snap-note" });
    this.canvasEl = el("div", { class: "network-canvas" });
    this.element = el("section", { class: "view view-network" }, [
      el("h2", {}, ["Speaker-topic network"]),
      this.controlsEl,
      this.noteEl,
      this.canvasEl,
    ]);
    this.renderControls();
  }

  load(settings: Partial<NetworkSettings> = {}): Promise<void> {
    this.settings = { ...this.settings, ...settings };
    this.renderControls();
    const token = this.gate.issue();
    const { mode, level, resolution } = this.settings;
    this.pending = (async () => {
      try {
        const response = await this.api.network(mode, level, resolution);
        if (!this.gate.isCurrent(token)) return;
        this.renderGraph(response);
      } catch (error) {
        if (!this.gate.isCurrent(token)) return;
        this.renderError(error);
      }
    })();
    return this.pending;
  }

  private selectControl(
    label: string,
    role: string,
    values: (string | number)[],
    current: string | number,
    apply: (raw: string) => Partial<NetworkSettings>,
  ): HTMLElement {
    const select = el("select", { "data-role": role });
    for (const value of values) {
      const option = el("option", { value: String(value) }, [String(value)]);
      if (String(value) === String(current)) option.setAttribute("selected", "");
      select.append(option);
    }
    select.addEventListener("change", () => {
      const next = apply(select.value);
      void this.load(next);
      this.onSettingsChange({ ...this.settings, ...next });
    });
    return el("label", {}, [label + " ", select]);
  }

  private renderControls(): void {
    clear(this.controlsEl);
    const isolates = el("input", { type: "checkbox", "data-role": "isolates" });
    if (this.settings.hideIsolates) isolates.setAttribute("checked", "");
    isolates.addEventListener("change", () => {
      void this.load({ hideIsolates: isolates.checked });
    });
    this.controlsEl.append(
      this.selectControl("Mode", "mode", this.manifest.modes, this.settings.mode, (raw) => ({
        mode: raw,
      })),
      this.selectControl(
        "Filter level",
        "level",
        this.manifest.levels,
        this.settings.level,
        (raw) => ({ level: Number(raw) }),
      ),
      this.selectControl(
        "Resolution",
        "resolution",
        this.manifest.resolutions,
        this.settings.resolution,
        (raw) => ({ resolution: Number(raw) }),
      ),
      el("label", {}, [isolates, " hide isolated nodes"]),
    );
  }

  private renderGraph(response: NetworkResponse): void {
    const { requested, served, graph } = response;
    const snapped =
      requested.level !== served.level || requested.resolution !== served.resolution;
    this.noteEl.textContent = snapped
      ? `Requested level ${requested.level} / resolution ${requested.resolution}; serving nearest precomputed ${served.level} / ${served.resolution}.`
      : `Level ${served.level}, resolution ${served.resolution}, modularity ${graph.meta.modularity.toFixed(3)}.`;
    clear(this.canvasEl);
    this.canvasEl.append(this.drawGraph(graph));
  }

  private drawGraph(graph: GraphPayload): SVGElement {
    const connected = new Set<string>();
    for (const edge of graph.edges) {
      connected.add(edge.source);
      connected.add(edge.target);
    }
    const nodes = this.settings.hideIsolates
      ? graph.nodes.filter((n) => connected.has(n.id))
      : graph.nodes;
    const ids = nodes.map((n) => n.id);
    const placed = forceLayout(ids, graph.edges, CANVAS_WIDTH, CANVAS_HEIGHT, LAYOUT_SEED);

    const svg = svgEl("svg", {
      width: String(CANVAS_WIDTH),
      height: String(CANVAS_HEIGHT),
      role: "img",
      "aria-label": "speaker-topic network",
    });
    const maxWeight = graph.edges.reduce((top, e) => Math.max(top, e.weight), 0) || 1;
    for (const edge of graph.edges) {
      const a = placed.get(edge.source);
      const b = placed.get(edge.target);
      if (!a || !b) continue;
      svg.append(
        svgEl("line", {
          x1: String(a.x),
          y1: String(a.y),
          x2: String(b.x),
          y2: String(b.y),
          class: "edge",
          "stroke-width": String(0.5 + 2.5 * (edge.weight / maxWeight)),
          "data-edge": `${edge.source}|${edge.target}`,
        }),
      );
    }
    for (const node of nodes) {
      const point = placed.get(node.id);
      if (!point) continue;
      const circle = svgEl("circle", {
        cx: String(point.x),
        cy: String(point.y),
        r: String(nodeRadius(node.centrality)),
        fill: communityColor(node.community),
        class: `node node-${node.category}`,
        "data-node": node.id,
        "data-category": node.category,
        "data-community": String(node.community),
        "data-centrality": String(node.centrality),
      });
      const title = svgEl("title");
      title.textContent = `${node.id} · community ${node.community} · centrality ${node.centrality.toFixed(2)}`;
      circle.append(title);
      svg.append(circle);
      const label = svgEl("text", {
        x: String(point.x),
        y: String(point.y - nodeRadius(node.centrality) - 3),
        "text-anchor": "middle",
        class: `node-label node-label-${node.category}`,
      });
      label.textContent = node.id;
      svg.append(label);
    }
    return svg;
  }

  private renderError(error: unknown): void {
    clear(this.canvasEl);
    this.noteEl.textContent = "";
    const message =
      error instanceof ApiError ? error.message : "could not reach the bundle server";
    const retry = el("button", { type: "button" }, ["Retry"]);
    retry.addEventListener("click", () => {
      void this.load();
    });
    this.canvasEl.append(el("p", { class: "error" }, [message, " ", retry]));
  }
}
