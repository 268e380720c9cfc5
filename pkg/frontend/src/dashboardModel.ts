// Dashboard view rows. Strictly a reshaping of the state document: the
// console computes no rules and no costs; both cost figures arrive
// server-computed and are displayed side by side as-is.

import type { SessionOutcomeDoc, SimulationStateDoc } from "./types.js";

export interface CounterRow {
  label: string;
  count: number;
  timeS: number;
}

export function counterRows(state: SimulationStateDoc): CounterRow[] {
  const m = state.metering;
  return [
    { label: "UI", count: m.ui_prompts, timeS: m.ui_time_s },
    { label: "PG", count: m.pg_invocations, timeS: m.pg_time_s },
    { label: "DBA", count: m.dba_lookups, timeS: m.dba_time_s },
    { label: "VP", count: m.vp_sessions, timeS: state.vp_active_time_s },
  ];
}

export interface CostComparison {
  measuredS: number;
  analyticS: number;
}

export function costComparison(state: SimulationStateDoc): CostComparison {
  return { measuredS: state.measured_cost_s, analyticS: state.analytic_cost_s };
}

export interface SessionRow {
  appId: string;
  outcome: string;
  handles: string;
  durationS: number;
}

export function sessionRows(sessions: SessionOutcomeDoc[]): SessionRow[] {
  return sessions.map((session) => ({
    appId: session.app_id,
    outcome:
      session.status === "completed"
        ? "completed"
        : `aborted (${session.denied_resource ?? "?"} denied)`,
    handles:
      `${session.handles_used.real}R / ` +
      `${session.handles_used.virtual}V / ` +
      `${session.handles_used.refused}X`,
    durationS: session.simulated_duration_s,
  }));
}

export function phaseLabel(state: SimulationStateDoc): string {
  return `${state.phase} @ tick ${state.tick}`;
}
