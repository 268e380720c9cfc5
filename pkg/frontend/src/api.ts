// Typed client over the control service. The console performs no
// computation of its own: every number it shows came out of these calls.

import type {
  PermissionStatus,
  PromptDoc,
  RuleDoc,
  SimulationStateDoc,
  StepResultDoc,
} from "./types.js";

export interface PutRuleResult {
  status: number;
  rule?: RuleDoc;
  error?: string;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: typeof fetch = (...args) => fetch(...args),
  ) {}

  async getRules(appId?: string): Promise<RuleDoc[]> {
    const query = appId ? `?app=${encodeURIComponent(appId)}` : "";
    const response = await this.fetchImpl(`${this.base}/api/rules${query}`);
    if (!response.ok) throw new Error(`rules fetch failed: ${response.status}`);
    return (await response.json()) as RuleDoc[];
  }

  async putRule(
    appId: string,
    resource: string,
    status: PermissionStatus,
  ): Promise<PutRuleResult> {
    const response = await this.fetchImpl(
      `${this.base}/api/rules/${encodeURIComponent(appId)}/${encodeURIComponent(resource)}`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ status }),
      },
    );
    if (response.status === 200) {
      return { status: 200, rule: (await response.json()) as RuleDoc };
    }
    let error = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) error = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    return { status: response.status, error };
  }

  /** Returns the HTTP status: 200 applied, 409 too late, 404 unknown. */
  async answerPrompt(promptId: string, status: PermissionStatus): Promise<number> {
    const response = await this.fetchImpl(
      `${this.base}/api/prompts/${encodeURIComponent(promptId)}/answer`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ status }),
      },
    );
    return response.status;
  }

  async getState(): Promise<SimulationStateDoc> {
    const response = await this.fetchImpl(`${this.base}/api/simulation/state`);
    if (!response.ok) throw new Error(`state fetch failed: ${response.status}`);
    return (await response.json()) as SimulationStateDoc;
  }

  async step(): Promise<StepResultDoc> {
    const response = await this.fetchImpl(`${this.base}/api/simulation/step`, {
      method: "POST",
    });
    if (!response.ok) throw new Error(`step failed: ${response.status}`);
    return (await response.json()) as StepResultDoc;
  }
}

export interface PromptStreamHandlers {
  onPrompt(prompt: PromptDoc): void;
  onAnswered(promptId: string, status: PermissionStatus): void;
  onExpired(promptId: string, appliedStatus: PermissionStatus): void;
  onDrop?(attempt: number, delayMs: number): void;
}

interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageEvent) => void): void;
  close(): void;
  onerror: ((event: Event) => void) | null;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

/**
 * Subscription to /api/prompts/stream with automatic reconnect.
 * Backoff doubles from 500 ms up to 10 s and resets on any event.
 */
export class PromptStream {
  private source: EventSourceLike | null = null;
  private attempt = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: PromptStreamHandlers,
    private readonly factory: EventSourceFactory = (url) => new EventSource(url),
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.source?.close();
    this.source = null;
  }

  backoffMs(attempt: number): number {
    return Math.min(500 * 2 ** attempt, 10_000);
  }

  private connect(): void {
    this.source = this.factory(this.url);
    this.source.addEventListener("prompt", (event) => {
      this.attempt = 0;
      this.handlers.onPrompt(JSON.parse(event.data));
    });
    this.source.addEventListener("answered", (event) => {
      this.attempt = 0;
      const data = JSON.parse(event.data);
      this.handlers.onAnswered(data.prompt_id, data.status);
    });
    this.source.addEventListener("expired", (event) => {
      this.attempt = 0;
      const data = JSON.parse(event.data);
      this.handlers.onExpired(data.prompt_id, data.applied_status);
    });
    this.source.onerror = () => {
      if (this.stopped) return;
      this.source?.close();
      const delay = this.backoffMs(this.attempt);
      this.handlers.onDrop?.(this.attempt, delay);
      this.attempt += 1;
      this.timer = setTimeout(() => this.connect(), delay);
    };
  }
}
