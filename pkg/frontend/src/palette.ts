/** Deterministic color and size scales shared by the chart and network views. */

export const TOPIC_COLORS = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
];

export const COMMUNITY_COLORS = [
  "#1b9e77",
  "#d95f02",
  "#7570b3",
  "#e7298a",
  "#66a61e",
  "#e6ab02",
  "#a6761d",
  "#666666",
];

export function topicColor(topic: number): string {
  return TOPIC_COLORS[topic % TOPIC_COLORS.length] as string;
}

export function communityColor(community: number): string {
  return COMMUNITY_COLORS[community % COMMUNITY_COLORS.length] as string;
}

export const NODE_RADIUS_MIN = 4;
export const NODE_RADIUS_MAX = 18;

/** Linear radius scale over centrality in [0, 1]. */
export function nodeRadius(centrality: number): number {
  const clamped = Math.max(0, Math.min(1, centrality));
  return NODE_RADIUS_MIN + (NODE_RADIUS_MAX - NODE_RADIUS_MIN) * clamped;
}
