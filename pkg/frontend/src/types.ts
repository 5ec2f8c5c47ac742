/** Payload shapes served by the bundle API. */

export interface NetworkRef {
  mode: string;
  level: number;
  resolution: number;
  file: string;
}

export interface Manifest {
  schema_version: number;
  k: number;
  levels: number[];
  resolutions: number[];
  modes: string[];
  networks: NetworkRef[];
  default_level: number;
  default_resolution: number;
  default_threshold: number;
  n_speeches: number;
  n_documents: number;
}

export interface RankRow {
  topic: string;
  share: number;
}

export interface LandscapePayload {
  schema_version: number;
  k: number;
  topics: string[];
  years: number[];
  doc_counts: number[];
  shares: number[][];
  rank_table: Record<string, RankRow[]>;
  rank_threshold: number;
  topic_keywords: Record<string, string[]>;
}

export interface TopicEntry {
  id: string;
  index: number;
  keywords: string[];
}

export interface TopicsPayload {
  schema_version: number;
  topics: TopicEntry[];
}

export interface SpeechRef {
  id: string;
  score: number;
  speaker_name: string;
  affiliation: string;
  date: string;
  year: number;
}

export interface TopicSpeechesPayload {
  schema_version: number;
  topic: string;
  threshold: number;
  speeches: SpeechRef[];
}

export interface SpeechRecord {
  id: string;
  protocol_id: string;
  date: string;
  year: number;
  speaker_name: string;
  affiliation: string;
  text: string;
  excluded: boolean;
}

export interface GraphNode {
  id: string;
  category: string;
  strength: number;
  centrality: number;
  community: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  weight: number;
}

export interface GraphMeta {
  level: number;
  resolution: number;
  seed: number;
  modularity: number;
  mode: string;
}

export interface GraphPayload {
  schema_version: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
  meta: GraphMeta;
}

export interface NetworkPair {
  level: number;
  resolution: number;
  mode: string;
}

export interface NetworkResponse {
  schema_version: number;
  requested: NetworkPair;
  served: NetworkPair;
  graph: GraphPayload;
}
