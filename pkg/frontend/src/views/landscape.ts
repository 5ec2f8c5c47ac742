import { ApiClient, RequestGate } from "../api.js";
import { clear, el, svgEl } from "../dom.js";
import { topicColor } from "../palette.js";
import { stackColumns } from "../stack.js";
import type { LandscapePayload } from "../types.js";

export const CHART_HEIGHT = 320;
export const COLUMN_WIDTH = 64;
export const COLUMN_GAP = 18;
const AXIS_SPACE = 28;

export class LandscapeView {
  readonly element: HTMLElement;
  pending: Promise<void> | null = null;
  private readonly gate = new RequestGate();

  constructor(
    private readonly api: ApiClient,
    private readonly onTopicSelect: (topic: number) => void,
  ) {
    this.element = el("section", { class: "view view-landscape" });
  }

  load(): Promise<void> {
    const token = this.gate.issue();
    this.pending = (async () => {
      const payload = await this.api.landscape();
      if (!this.gate.isCurrent(token)) return;
      this.render(payload);
    })();
    return this.pending;
  }

  private render(payload: LandscapePayload): void {
    clear(this.element);
    this.element.append(
      el("h2", {}, ["Topic landscape"]),
      el("p", { class: "hint" }, [
        "Share of speeches per year by dominant topic. Click a band or a legend entry to drill into that topic.",
      ]),
      this.chart(payload),
      this.legend(payload),
      this.rankSummary(payload),
    );
  }

  private chart(payload: LandscapePayload): SVGElement {
    const width = payload.years.length * (COLUMN_WIDTH + COLUMN_GAP) + COLUMN_GAP;
    const svg = svgEl("svg", {
      width: String(width),
      height: String(CHART_HEIGHT + AXIS_SPACE),
      role: "img",
      "aria-label": "stacked topic shares per year",
    });
    const columns = stackColumns(payload.shares, CHART_HEIGHT);
    payload.years.forEach((year, column) => {
      const x = COLUMN_GAP + column * (COLUMN_WIDTH + COLUMN_GAP);
      for (const band of columns[column] ?? []) {
        const rect = svgEl("rect", {
          x: String(x),
          y: String(band.y0),
          width: String(COLUMN_WIDTH),
          height: String(band.y1 - band.y0),
          fill: topicColor(band.topic),
          "data-band": "",
          "data-year": String(year),
          "data-topic": String(band.topic),
        });
        rect.addEventListener("click", () => this.onTopicSelect(band.topic));
        const share = payload.shares[column]?.[band.topic] ?? 0;
        const title = svgEl("title");
        title.textContent = `${year} T${band.topic}: ${(share * 100).toFixed(1)}%`;
        rect.append(title);
        svg.append(rect);
      }
      const label = svgEl("text", {
        x: String(x + COLUMN_WIDTH / 2),
        y: String(CHART_HEIGHT + 18),
        "text-anchor": "middle",
        class: "axis-label",
      });
      const docs = payload.doc_counts[column] ?? 0;
      label.textContent = `${year} (${docs})`;
      svg.append(label);
    });
    return svg;
  }

  private legend(payload: LandscapePayload): HTMLElement {
    const entries = payload.topics.map((id, topic) => {
      const words = (payload.topic_keywords[id] ?? []).slice(0, 5).join(", ");
      const entry = el("li", { class: "legend-entry", "data-topic": String(topic) }, [
        el("span", {
          class: "swatch",
          style: `background:${topicColor(topic)}`,
        }),
        el("strong", {}, [id]),
        ` ${words}`,
      ]);
      entry.addEventListener("click", () => this.onTopicSelect(topic));
      return entry;
    });
    return el("ul", { class: "legend" }, entries);
  }

  private rankSummary(payload: LandscapePayload): HTMLElement {
    const rows = payload.years.map((year) => {
      const leaders = (payload.rank_table[String(year)] ?? [])
        .map((row) => `${row.topic} ${(row.share * 100).toFixed(0)}%`)
        .join(" · ");
      return el("tr", {}, [
        el("td", {}, [String(year)]),
        el("td", {}, [leaders]),
      ]);
    });
    return el("table", { class: "rank-table" }, [
      el("thead", {}, [
        el("tr", {}, [el("th", {}, ["Year"]), el("th", {}, ["Leading topics"])]),
      ]),
      el("tbody", {}, rows),
    ]);
  }
}
