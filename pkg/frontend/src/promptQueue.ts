// FIFO prompt-card state machine. Pure: DOM code renders whatever this
// says, and tests drive it directly.
//
// The server guarantees at most one pending prompt, so at most one card is
// ever active here; earlier cards keep their final answered/expired state
// for the history list. Countdowns derive from server ticks only - the
// client clock never enters the math.

import type { PermissionStatus, PromptDoc } from "./types.js";

export type CardPhase = "active" | "answering" | "answered" | "expired";

export interface PromptCard {
  prompt: PromptDoc;
  phase: CardPhase;
  appliedStatus: PermissionStatus | null;
  note: string;
}

export interface PromptQueueState {
  cards: PromptCard[];
}

export function emptyQueue(): PromptQueueState {
  return { cards: [] };
}

export function activeCard(state: PromptQueueState): PromptCard | null {
  const card = state.cards.find(
    (c) => c.phase === "active" || c.phase === "answering",
  );
  return card ?? null;
}

/** Seconds left before the server expires the prompt, at the given tick. */
export function countdownS(card: PromptCard, currentTick: number): number {
  return Math.max(0, card.prompt.deadline - currentTick);
}

export function buttonsEnabled(card: PromptCard): boolean {
  return card.phase === "active";
}

function withCard(
  state: PromptQueueState,
  promptId: string,
  update: (card: PromptCard) => PromptCard,
): PromptQueueState {
  return {
    cards: state.cards.map((card) =>
      card.prompt.prompt_id === promptId ? update(card) : card,
    ),
  };
}

/** A new prompt arrived on the stream; any stale active card is closed. */
export function promptArrived(
  state: PromptQueueState,
  prompt: PromptDoc,
): PromptQueueState {
  if (state.cards.some((c) => c.prompt.prompt_id === prompt.prompt_id)) {
    return state; // replayed on reconnect
  }
  const cards = state.cards.map((card): PromptCard => {
    if (card.phase === "active" || card.phase === "answering") {
      return { ...card, phase: "expired", note: "superseded" };
    }
    return card;
  });
  return {
    cards: [
      ...cards,
      { prompt, phase: "active", appliedStatus: null, note: "" },
    ],
  };
}

/** The user clicked an action; the POST is in flight. */
export function answerSent(
  state: PromptQueueState,
  promptId: string,
  status: PermissionStatus,
): PromptQueueState {
  return withCard(state, promptId, (card) => ({
    ...card,
    phase: "answering",
    appliedStatus: status,
  }));
}

/** POST result arrived: 200 sticks, 409 means the prompt expired first. */
export function answerResult(
  state: PromptQueueState,
  promptId: string,
  httpStatus: number,
): PromptQueueState {
  return withCard(state, promptId, (card) => {
    if (httpStatus === 200) {
      return { ...card, phase: "answered", note: "" };
    }
    if (httpStatus === 409) {
      return { ...card, phase: "expired", note: "expired before the answer" };
    }
    return {
      ...card,
      phase: "active",
      appliedStatus: null,
      note: `answer failed (HTTP ${httpStatus})`,
    };
  });
}

/** Stream confirmation that an answer was accepted. */
export function answeredOnStream(
  state: PromptQueueState,
  promptId: string,
  status: PermissionStatus,
): PromptQueueState {
  return withCard(state, promptId, (card) => ({
    ...card,
    phase: "answered",
    appliedStatus: status,
  }));
}

/** Stream notice that the prompt expired to the server default. */
export function expiredOnStream(
  state: PromptQueueState,
  promptId: string,
  appliedStatus: PermissionStatus,
): PromptQueueState {
  return withCard(state, promptId, (card) => ({
    ...card,
    phase: "expired",
    appliedStatus,
    note: `expired -> ${appliedStatus}`,
  }));
}

/** Cards in arrival order; the visual list must preserve FIFO. */
export function cardsInFifoOrder(state: PromptQueueState): PromptCard[] {
  return state.cards;
}
