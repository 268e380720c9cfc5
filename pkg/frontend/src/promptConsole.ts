// Prompt card rendering and answer dispatch.

import type { ApiClient } from "./api.js";
import type { PermissionStatus } from "./types.js";
import {
  PromptCard,
  PromptQueueState,
  answerResult,
  answerSent,
  buttonsEnabled,
  cardsInFifoOrder,
  countdownS,
} from "./promptQueue.js";

const ACTIONS: { status: PermissionStatus; label: string; cls: string }[] = [
  { status: "grant", label: "Grant", cls: "grant" },
  { status: "deny", label: "Deny", cls: "deny" },
  { status: "virtual_grant", label: "Grant virtually", cls: "virtual" },
];

const RESOURCE_ICONS: Record<string, string> = {
  camera: "\u{1F4F7}",
  microphone: "\u{1F3A4}",
  contacts: "\u{1F4C7}",
  messages: "\u{2709}",
  call_log: "\u{1F4DE}",
  location: "\u{1F4CD}",
  wifi_state: "\u{1F4F6}",
  storage: "\u{1F4BE}",
};

export class PromptConsole {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly getStateTick: () => number,
    private readonly getQueue: () => PromptQueueState,
    private readonly setQueue: (next: PromptQueueState) => void,
  ) {}

  render(): void {
    const queue = this.getQueue();
    this.root.replaceChildren();
    const cards = cardsInFifoOrder(queue);
    if (cards.length === 0) {
      const idle = document.createElement("p");
      idle.className = "muted";
      idle.textContent = "No permission prompts yet.";
      this.root.appendChild(idle);
      return;
    }
    for (const card of cards) {
      this.root.appendChild(this.renderCard(card));
    }
  }

  private renderCard(card: PromptCard): HTMLElement {
    const box = document.createElement("div");
    box.className = `prompt-card ${card.phase}`;
    box.dataset.promptId = card.prompt.prompt_id;

    const head = document.createElement("div");
    head.className = "prompt-head";
    const icon = RESOURCE_ICONS[card.prompt.resource] ?? "?";
    head.textContent =
      `${card.prompt.display_name} asks for ${icon} ${card.prompt.resource}`;
    const badge = document.createElement("span");
    badge.className = `badge ${card.prompt.criticality}`;
    badge.textContent = card.prompt.criticality;
    head.appendChild(badge);
    box.appendChild(head);

    const meta = document.createElement("div");
    meta.className = "prompt-meta";
    if (card.phase === "active") {
      const left = countdownS(card, this.getStateTick());
      meta.textContent =
        `${card.prompt.occasion} · expires in ${left}s of simulated time`;
    } else if (card.phase === "answering") {
      meta.textContent = "sending…";
    } else {
      meta.textContent =
        `${card.phase}${card.appliedStatus ? ` → ${card.appliedStatus}` : ""}` +
        (card.note ? ` (${card.note})` : "");
    }
    box.appendChild(meta);

    const actions = document.createElement("div");
    actions.className = "prompt-actions";
    for (const action of ACTIONS) {
      const button = document.createElement("button");
      button.textContent = action.label;
      button.className = action.cls;
      button.disabled = !buttonsEnabled(card);
      button.addEventListener("click", () =>
        this.answer(card.prompt.prompt_id, action.status),
      );
      actions.appendChild(button);
    }
    box.appendChild(actions);
    return box;
  }

  private async answer(promptId: string, status: PermissionStatus): Promise<void> {
    this.setQueue(answerSent(this.getQueue(), promptId, status));
    this.render();
    const httpStatus = await this.api.answerPrompt(promptId, status);
    this.setQueue(answerResult(this.getQueue(), promptId, httpStatus));
    this.render();
  }
}
