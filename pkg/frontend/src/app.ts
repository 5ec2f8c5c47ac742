import { ApiClient, ApiError, RequestGate, SUPPORTED_SCHEMA_VERSION } from "./api.js";
import { clear, el } from "./dom.js";
import type { Manifest } from "./types.js";
import { DEFAULT_STATE, serializeState, ViewState } from "./urlstate.js";
import { CHART_HEIGHT, LandscapeView } from "./views/landscape.js";
import { NetworkView } from "./views/network.js";
import { TopicView } from "./views/topic.js";

export { CHART_HEIGHT };

export interface AppOptions {
  /** Receives the serialized query string on every navigation; defaults to history.pushState. */
  pushUrl?: (queryString: string) => void;
}

export class App {
  manifest: Manifest | null = null;
  state: ViewState = { ...DEFAULT_STATE };
  landscapeView: LandscapeView | null = null;
  topicView: TopicView | null = null;
  networkView: NetworkView | null = null;
  pending: Promise<void> | null = null;

  private readonly gate = new RequestGate();
  private readonly bannerEl: HTMLElement;
  private readonly navEl: HTMLElement;
  private readonly contentEl: HTMLElement;
  private readonly pushUrl: (queryString: string) => void;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    options: AppOptions = {},
  ) {
    this.pushUrl =
      options.pushUrl ??
      ((queryString) => {
        window.history.pushState(null, "", queryString);
      });
    this.bannerEl = el("div", { class: "banner", "data-role": "banner" });
    this.navEl = el("nav", { class: "nav" });
    this.contentEl = el("main", { class: "content" });
    clear(this.root);
    this.root.append(
      el("header", {}, [el("h1", {}, ["Debate explorer"]), this.navEl]),
      this.bannerEl,
      this.contentEl,
    );
  }

  async start(initial: ViewState = { ...DEFAULT_STATE }): Promise<void> {
    this.clearBanner();
    let manifest: Manifest;
    try {
      manifest = await this.api.meta();
    } catch (error) {
      this.showBanner(describe(error), () => void this.start(initial));
      return;
    }
    if (manifest.schema_version !== SUPPORTED_SCHEMA_VERSION) {
      this.showBanner(
        `This bundle uses schema version ${manifest.schema_version}, but the explorer understands version ${SUPPORTED_SCHEMA_VERSION}. Rebuild the bundle or update the explorer.`,
      );
      return;
    }
    this.manifest = manifest;
    this.buildNav();
    await this.navigate(initial, { push: false });
  }

  private buildNav(): void {
    clear(this.navEl);
    const views: { name: ViewState["view"]; label: string }[] = [
      { name: "landscape", label: "Landscape" },
      { name: "topic", label: "Topic" },
      { name: "network", label: "Network" },
    ];
    for (const { name, label } of views) {
      const button = el("button", { type: "button", "data-nav": name }, [label]);
      button.addEventListener("click", () => {
        void this.navigate({ ...this.state, view: name });
      });
      this.navEl.append(button);
    }
  }

  /** Switch views; one navigation in flight at a time, stale loads dropped. */
  navigate(state: ViewState, options: { push?: boolean } = {}): Promise<void> {
    const manifest = this.manifest;
    if (!manifest) return Promise.resolve();
    const token = this.gate.issue();
    this.state = { ...state };
    if (options.push !== false) {
      this.pushUrl(serializeState(this.state));
    }
    this.markNav();
    this.clearBanner();
    this.pending = (async () => {
      try {
        const element = await this.loadView(this.state, manifest);
        if (!this.gate.isCurrent(token)) return;
        clear(this.contentEl);
        this.contentEl.append(element);
      } catch (error) {
        if (!this.gate.isCurrent(token)) return;
        this.showBanner(describe(error), () => void this.navigate(this.state));
      }
    })();
    return this.pending;
  }

  private async loadView(state: ViewState, manifest: Manifest): Promise<HTMLElement> {
    if (state.view === "topic") {
      if (!this.topicView) {
        this.topicView = new TopicView(this.api, manifest.default_threshold);
      }
      await this.topicView.load(state.topic ?? 0);
      return this.topicView.element;
    }
    if (state.view === "network") {
      if (!this.networkView) {
        this.networkView = new NetworkView(this.api, manifest, (settings) => {
          this.state = {
            ...this.state,
            level: settings.level,
            resolution: settings.resolution,
          };
          this.pushUrl(serializeState(this.state));
        });
      }
      await this.networkView.load({
        level: state.level ?? manifest.default_level,
        resolution: state.resolution ?? manifest.default_resolution,
      });
      return this.networkView.element;
    }
    if (!this.landscapeView) {
      this.landscapeView = new LandscapeView(this.api, (topic) => {
        void this.navigate({ ...this.state, view: "topic", topic });
      });
    }
    await this.landscapeView.load();
    return this.landscapeView.element;
  }

  private markNav(): void {
    for (const button of this.navEl.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset["nav"] === this.state.view);
    }
  }

  private showBanner(message: string, retry?: () => void): void {
    clear(this.bannerEl);
    this.bannerEl.append(el("span", {}, [message]));
    if (retry) {
      const button = el("button", { type: "button" }, ["Retry"]);
      button.addEventListener("click", retry);
      this.bannerEl.append(" ", button);
    }
    this.bannerEl.classList.add("visible");
  }

  private clearBanner(): void {
    clear(this.bannerEl);
    this.bannerEl.classList.remove("visible");
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `Server error: ${error.message}`;
  return "Could not reach the bundle server. Is `debatemap serve` running?";
}
