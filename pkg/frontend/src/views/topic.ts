import { ApiClient, ApiError, RequestGate } from "../api.js";
import { clear, el } from "../dom.js";
import { topicColor } from "../palette.js";
import type { SpeechRecord, SpeechRef } from "../types.js";

export const THRESHOLD_MIN = 0;
export const THRESHOLD_MAX = 0.95;
export const THRESHOLD_STEP = 0.05;

/** Split into paragraphs and wrap matches of the search term in <mark>. */
export function highlightParagraphs(text: string, term: string): HTMLElement[] {
  const paragraphs = text.split(/\n{2,}/).filter((p) => p.trim().length > 0);
  return paragraphs.map((paragraph) => {
    const node = el("p", {});
    if (!term) {
      node.textContent = paragraph;
      return node;
    }
    const lower = paragraph.toLowerCase();
    const needle = term.toLowerCase();
    let from = 0;
    for (;;) {
      const at = lower.indexOf(needle, from);
      if (at < 0) break;
      node.append(paragraph.slice(from, at));
      node.append(el("mark", {}, [paragraph.slice(at, at + term.length)]));
      from = at + term.length;
    }
    node.append(paragraph.slice(from));
    return node;
  });
}

export function countMatches(text: string, term: string): number {
  if (!term) return 0;
  const lower = text.toLowerCase();
  const needle = term.toLowerCase();
  let count = 0;
  let from = 0;
  for (;;) {
    const at = lower.indexOf(needle, from);
    if (at < 0) break;
    count += 1;
    from = at + needle.length;
  }
  return count;
}

export class TopicView {
  readonly element: HTMLElement;
  pending: Promise<void> | null = null;
  threshold: number;
  topic = 0;
  private searchTerm = "";
  private speech: SpeechRecord | null = null;
  private readonly gate = new RequestGate();
  private readonly speechGate = new RequestGate();
  private readonly listEl: HTMLElement;
  private readonly headerEl: HTMLElement;
  private readonly countEl: HTMLElement;
  private readonly sliderEl: HTMLInputElement;
  private readonly sliderLabelEl: HTMLElement;
  private readonly speechEl: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    defaultThreshold: number,
  ) {
    this.threshold = defaultThreshold;
    this.headerEl = el("div", { class: "topic-header" });
    this.sliderEl = el("input", {
      type: "range",
      min: String(THRESHOLD_MIN),
      max: String(THRESHOLD_MAX),
      step: String(THRESHOLD_STEP),
      value: String(this.threshold),
      "data-role": "threshold",
    });
    this.sliderLabelEl = el("span", { class: "slider-value" });
    this.countEl = el("p", { class: "hint", "data-role": "count" });
    this.listEl = el("ol", { class: "speech-list" });
    this.speechEl = el("div", { class: "speech-panel" });
    this.sliderEl.addEventListener("input", () => {
      void this.setThreshold(Number(this.sliderEl.value));
    });
    this.element = el("section", { class: "view view-topic" }, [
      this.headerEl,
      el("label", { class: "slider" }, [
        "Prominence threshold ",
        this.sliderEl,
        this.sliderLabelEl,
      ]),
      this.countEl,
      this.listEl,
      this.speechEl,
    ]);
  }

  load(topic: number): Promise<void> {
    this.topic = topic;
    this.speech = null;
    clear(this.speechEl);
    return this.reload();
  }

  setThreshold(threshold: number): Promise<void> {
    this.threshold = threshold;
    return this.reload();
  }

  private reload(): Promise<void> {
    const token = this.gate.issue();
    this.pending = (async () => {
      try {
        const [topics, ranked] = await Promise.all([
          this.api.topics(),
          this.api.topicSpeeches(this.topic, this.threshold),
        ]);
        if (!this.gate.isCurrent(token)) return;
        const entry = topics.topics.find((t) => t.index === this.topic);
        this.renderHeader(entry ? entry.keywords : []);
        this.renderList(ranked.speeches);
      } catch (error) {
        if (!this.gate.isCurrent(token)) return;
        this.renderError(error);
      }
    })();
    return this.pending;
  }

  private renderHeader(keywords: string[]): void {
    clear(this.headerEl);
    this.headerEl.append(
      el("h2", {}, [
        el("span", {
          class: "swatch",
          style: `background:${topicColor(this.topic)}`,
        }),
        `Topic T${this.topic}`,
      ]),
      el("p", { class: "keywords" }, [keywords.slice(0, 12).join(", ")]),
    );
    this.sliderEl.value = String(this.threshold);
    this.sliderLabelEl.textContent = ` ${Math.round(this.threshold * 100)}%`;
  }

  private renderList(speeches: SpeechRef[]): void {
    this.countEl.textContent = `${speeches.length} speeches above ${Math.round(this.threshold * 100)}% attention to T${this.topic}`;
    clear(this.listEl);
    for (const ref of speeches) {
      const item = el(
        "li",
        { "data-id": ref.id, "data-score": String(ref.score) },
        [
          el("strong", {}, [ref.speaker_name]),
          ` (${ref.affiliation}, ${ref.year}) — ${(ref.score * 100).toFixed(1)}%`,
        ],
      );
      item.addEventListener("click", () => {
        void this.openSpeech(ref.id);
      });
      this.listEl.append(item);
    }
  }

  openSpeech(id: string): Promise<void> {
    const token = this.speechGate.issue();
    const request = (async () => {
      try {
        const record = await this.api.speech(id);
        if (!this.speechGate.isCurrent(token)) return;
        this.speech = record;
        this.renderSpeech();
      } catch (error) {
        if (!this.speechGate.isCurrent(token)) return;
        this.renderError(error);
      }
    })();
    this.pending = request;
    return request;
  }

  private renderSpeech(): void {
    const record = this.speech;
    if (!record) return;
    clear(this.speechEl);
    const search = el("input", {
      type: "search",
      placeholder: "find in speech",
      value: this.searchTerm,
      "data-role": "speech-search",
    });
    const matches = el("span", { class: "match-count", "data-role": "match-count" });
    const body = el("div", { class: "speech-text" });
    const renderBody = () => {
      clear(body);
      body.append(...highlightParagraphs(record.text, this.searchTerm));
      matches.textContent = this.searchTerm
        ? ` ${countMatches(record.text, this.searchTerm)} matches`
        : "";
    };
    search.addEventListener("input", () => {
      this.searchTerm = search.value;
      renderBody();
    });
    renderBody();
    this.speechEl.append(
      el("h3", {}, [`${record.speaker_name} (${record.affiliation})`]),
      el("p", { class: "hint" }, [`${record.id} · ${record.date}`]),
      el("label", { class: "speech-search" }, [search, matches]),
      body,
    );
  }

  private renderError(error: unknown): void {
    this.countEl.textContent = "";
    clear(this.listEl);
    const message =
      error instanceof ApiError ? error.message : "could not reach the bundle server";
    const retry = el("button", { type: "button" }, ["Retry"]);
    retry.addEventListener("click", () => {
      void this.reload();
    });
    this.listEl.append(el("li", { class: "error" }, [message, " ", retry]));
  }
}
