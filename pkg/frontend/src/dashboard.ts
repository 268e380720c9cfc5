// Dashboard: metering counters, session outcomes, measured vs analytic cost.

import type { SimulationStateDoc } from "./types.js";
import {
  costComparison,
  counterRows,
  phaseLabel,
  sessionRows,
} from "./dashboardModel.js";

export class Dashboard {
  constructor(private readonly root: HTMLElement) {}

  renderDown(message: string): void {
    this.root.replaceChildren();
    const banner = document.createElement("div");
    banner.className = "banner error";
    banner.textContent = `service unreachable: ${message} (retrying)`;
    this.root.appendChild(banner);
  }

  render(state: SimulationStateDoc): void {
    this.root.replaceChildren();

    const phase = document.createElement("div");
    phase.className = "phase";
    phase.textContent = phaseLabel(state);
    this.root.appendChild(phase);

    const counters = document.createElement("div");
    counters.className = "counters";
    for (const row of counterRows(state)) {
      const box = document.createElement("div");
      box.className = "counter";
      const value = document.createElement("strong");
      value.textContent = String(row.count);
      const label = document.createElement("span");
      label.textContent = `${row.label} · ${row.timeS.toFixed(2)}s`;
      box.append(value, label);
      counters.appendChild(box);
    }
    this.root.appendChild(counters);

    const costs = costComparison(state);
    const costBox = document.createElement("div");
    costBox.className = "costs";
    costBox.textContent =
      `daily cost — measured: ${costs.measuredS.toFixed(2)}s, ` +
      `analytic: ${costs.analyticS.toFixed(2)}s`;
    this.root.appendChild(costBox);

    const table = document.createElement("table");
    table.className = "sessions";
    const head = table.createTHead().insertRow();
    for (const title of ["app", "outcome", "handles", "duration"]) {
      const cell = document.createElement("th");
      cell.textContent = title;
      head.appendChild(cell);
    }
    const body = table.createTBody();
    for (const row of sessionRows(state.sessions)) {
      const tr = body.insertRow();
      tr.insertCell().textContent = row.appId;
      tr.insertCell().textContent = row.outcome;
      tr.insertCell().textContent = row.handles;
      tr.insertCell().textContent = `${row.durationS}s`;
    }
    this.root.appendChild(table);
  }
}
