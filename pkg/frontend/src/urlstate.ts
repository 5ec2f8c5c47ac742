export type ViewName = "landscape" | "topic" | "network";

export interface ViewState {
  view: ViewName;
  topic: number | null;
  level: number | null;
  resolution: number | null;
}

export const DEFAULT_STATE: ViewState = {
  view: "landscape",
  topic: null,
  level: null,
  resolution: null,
};

function parseNumber(raw: string | null): number | null {
  if (raw === null || raw.trim() === "") return null;
  const value = Number(raw);
  return Number.isFinite(value) ? value : null;
}

/** Tolerant parse: junk falls back to the landscape defaults field by field. */
export function parseState(search: string): ViewState {
  const params = new URLSearchParams(search);
  const view = params.get("view");
  const state: ViewState = { ...DEFAULT_STATE };
  if (view === "landscape" || view === "topic" || view === "network") {
    state.view = view;
  }
  const topic = parseNumber(params.get("topic"));
  if (topic !== null && Number.isInteger(topic) && topic >= 0) {
    state.topic = topic;
  }
  state.level = parseNumber(params.get("level"));
  state.resolution = parseNumber(params.get("resolution"));
  return state;
}

export function serializeState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("view", state.view);
  if (state.topic !== null) params.set("topic", String(state.topic));
  if (state.level !== null) params.set("level", String(state.level));
  if (state.resolution !== null) params.set("resolution", String(state.resolution));
  return "?" + params.toString();
}
