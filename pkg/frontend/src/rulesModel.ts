// Rules table state transitions. The server row is the only truth: an
// edit is reflected in the table exactly when the PUT returned 200 with
// the updated rule; 404 removes the row; 409 keeps the old row and
// surfaces the conflict inline.

import type { PutRuleResult } from "./api.js";
import type { RuleDoc } from "./types.js";

export interface RulesState {
  rules: RuleDoc[];
  filterApp: string;
  rowErrors: Record<string, string>;
}

export function emptyRules(): RulesState {
  return { rules: [], filterApp: "", rowErrors: {} };
}

export function rowKey(rule: Pick<RuleDoc, "app_id" | "resource">): string {
  return `${rule.app_id}/${rule.resource}`;
}

export function loaded(state: RulesState, rules: RuleDoc[]): RulesState {
  return { ...state, rules, rowErrors: {} };
}

export function withFilter(state: RulesState, filterApp: string): RulesState {
  return { ...state, filterApp };
}

export function visibleRules(state: RulesState): RuleDoc[] {
  if (!state.filterApp) return state.rules;
  return state.rules.filter((rule) => rule.app_id === state.filterApp);
}

export function editApplied(
  state: RulesState,
  appId: string,
  resource: string,
  result: PutRuleResult,
): RulesState {
  const key = rowKey({ app_id: appId, resource: resource as RuleDoc["resource"] });
  if (result.status === 200 && result.rule) {
    const updated = result.rule;
    return {
      ...state,
      rules: state.rules.map((rule) =>
        rowKey(rule) === key ? updated : rule,
      ),
      rowErrors: omit(state.rowErrors, key),
    };
  }
  if (result.status === 404) {
    return {
      ...state,
      rules: state.rules.filter((rule) => rowKey(rule) !== key),
      rowErrors: { ...state.rowErrors, [key]: result.error ?? "rule is gone" },
    };
  }
  return {
    ...state,
    rowErrors: {
      ...state.rowErrors,
      [key]: result.error ?? `edit failed (HTTP ${result.status})`,
    },
  };
}

function omit(errors: Record<string, string>, key: string): Record<string, string> {
  const { [key]: _, ...rest } = errors;
  return rest;
}
