// Console wiring: one event-stream subscription, one polling loop, and
// the step button. The server is the sole source of truth; nothing is
// persisted client-side.

import { ApiClient, PromptStream } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { PromptConsole } from "./promptConsole.js";
import {
  PromptQueueState,
  answeredOnStream,
  emptyQueue,
  expiredOnStream,
  promptArrived,
} from "./promptQueue.js";
import { emptyRules, RulesState } from "./rulesModel.js";
import { RulesTable } from "./rulesTable.js";

const POLL_MS = 1000;

function requireElement(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element;
}

function boot(): void {
  const api = new ApiClient("");
  let queue: PromptQueueState = emptyQueue();
  let rules: RulesState = emptyRules();
  let lastTick = 0;

  const dashboard = new Dashboard(requireElement("dashboard"));
  const prompts = new PromptConsole(
    requireElement("prompts"),
    api,
    () => lastTick,
    () => queue,
    (next) => {
      queue = next;
    },
  );
  const rulesTable = new RulesTable(
    requireElement("rules"),
    api,
    () => rules,
    (next) => {
      rules = next;
    },
  );

  const stream = new PromptStream("/api/prompts/stream", {
    onPrompt(prompt) {
      queue = promptArrived(queue, prompt);
      prompts.render();
      void rulesTable.refresh();
    },
    onAnswered(promptId, status) {
      queue = answeredOnStream(queue, promptId, status);
      prompts.render();
      void rulesTable.refresh();
    },
    onExpired(promptId, applied) {
      queue = expiredOnStream(queue, promptId, applied);
      prompts.render();
      void rulesTable.refresh();
    },
    onDrop(attempt, delayMs) {
      console.warn(`prompt stream dropped (attempt ${attempt}); retry in ${delayMs}ms`);
    },
  });
  stream.start();

  requireElement("step").addEventListener("click", async () => {
    const result = await api.step();
    requireElement("last-event").textContent =
      `last event: ${result.event}` +
      (result.resolved_prompt
        ? ` (prompt ${result.resolved_prompt.prompt_id} → ` +
          `${result.resolved_prompt.status}${result.resolved_prompt.expired ? ", expired" : ""})`
        : "");
    await pollOnce();
  });

  async function pollOnce(): Promise<void> {
    try {
      const state = await api.getState();
      lastTick = state.tick;
      dashboard.render(state);
      prompts.render(); // refreshes countdowns from the new tick
    } catch (error) {
      dashboard.renderDown(error instanceof Error ? error.message : String(error));
    }
  }

  void rulesTable.refresh();
  void pollOnce();
  setInterval(() => void pollOnce(), POLL_MS);
}

document.addEventListener("DOMContentLoaded", boot);
