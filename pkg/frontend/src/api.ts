import type {
  LandscapePayload,
  Manifest,
  NetworkResponse,
  SpeechRecord,
  TopicSpeechesPayload,
  TopicsPayload,
} from "./types.js";

/** Bundle schema this client understands; the server reports its own in /api/meta. */
export const SUPPORTED_SCHEMA_VERSION = 1;

export type FetchLike = (url: string) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  meta(): Promise<Manifest> {
    return this.getJson("/api/meta");
  }

  landscape(): Promise<LandscapePayload> {
    return this.getJson("/api/landscape");
  }

  topics(): Promise<TopicsPayload> {
    return this.getJson("/api/topics");
  }

  topicSpeeches(topic: number, threshold: number): Promise<TopicSpeechesPayload> {
    return this.getJson(`/api/topics/${topic}/speeches?threshold=${threshold}`);
  }

  /** Speech ids contain "/" and "#"; encode everything so both survive the path. */
  speech(id: string): Promise<SpeechRecord> {
    return this.getJson(`/api/speech/${encodeURIComponent(id)}`);
  }

  network(mode: string, level: number, resolution: number): Promise<NetworkResponse> {
    return this.getJson(`/api/network?mode=${mode}&level=${level}&resolution=${resolution}`);
  }
}

/**
 * One in-flight request per view: each load takes a fresh token and checks it
 * again after awaiting, so a response that lost the race is dropped instead of
 * clobbering newer content.
 */
export class RequestGate {
  private token = 0;

  issue(): number {
    return ++this.token;
  }

  isCurrent(token: number): boolean {
    return token === this.token;
  }
}
