// Rules table: list, filter, inline status edits over PUT.

import type { ApiClient } from "./api.js";
import type { PermissionStatus, RuleDoc } from "./types.js";
import {
  RulesState,
  editApplied,
  loaded,
  rowKey,
  visibleRules,
  withFilter,
} from "./rulesModel.js";

const STATUSES: PermissionStatus[] = ["grant", "deny", "virtual_grant"];

export class RulesTable {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly getState: () => RulesState,
    private readonly setState: (next: RulesState) => void,
  ) {}

  async refresh(): Promise<void> {
    const rules = await this.api.getRules();
    this.setState(loaded(this.getState(), rules));
    this.render();
  }

  render(): void {
    const state = this.getState();
    this.root.replaceChildren();

    const filter = document.createElement("input");
    filter.placeholder = "filter by app id";
    filter.value = state.filterApp;
    filter.addEventListener("input", () => {
      this.setState(withFilter(this.getState(), filter.value.trim()));
      this.render();
    });
    this.root.appendChild(filter);

    const table = document.createElement("table");
    table.className = "rules";
    const head = table.createTHead().insertRow();
    for (const title of ["app", "resource", "status", "origin", "tick", ""]) {
      const cell = document.createElement("th");
      cell.textContent = title;
      head.appendChild(cell);
    }
    const body = table.createTBody();
    for (const rule of visibleRules(state)) {
      body.appendChild(this.renderRow(rule, state));
    }
    this.root.appendChild(table);
  }

  private renderRow(rule: RuleDoc, state: RulesState): HTMLTableRowElement {
    const row = document.createElement("tr");
    row.dataset.key = rowKey(rule);
    for (const text of [rule.app_id, rule.resource]) {
      const cell = row.insertCell();
      cell.textContent = text;
    }

    const statusCell = row.insertCell();
    const select = document.createElement("select");
    for (const status of STATUSES) {
      const option = document.createElement("option");
      option.value = status;
      option.textContent = status;
      option.selected = status === rule.status;
      select.appendChild(option);
    }
    select.addEventListener("change", () =>
      this.edit(rule, select.value as PermissionStatus),
    );
    statusCell.appendChild(select);

    row.insertCell().textContent = rule.origin;
    row.insertCell().textContent = String(rule.decided_at);

    const errorCell = row.insertCell();
    errorCell.className = "row-error";
    errorCell.textContent = state.rowErrors[rowKey(rule)] ?? "";
    return row;
  }

  private async edit(rule: RuleDoc, status: PermissionStatus): Promise<void> {
    const result = await this.api.putRule(rule.app_id, rule.resource, status);
    this.setState(editApplied(this.getState(), rule.app_id, rule.resource, result));
    this.render();
  }
}
