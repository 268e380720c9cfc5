import { describe, expect, it } from "vitest";

import {
  editApplied,
  emptyRules,
  loaded,
  rowKey,
  visibleRules,
  withFilter,
} from "../src/rulesModel.js";
import type { RuleDoc } from "../src/types.js";

function rule(appId: string, resource: RuleDoc["resource"], status: RuleDoc["status"]): RuleDoc {
  return { app_id: appId, resource, status, decided_at: 0, origin: "user_prompt" };
}

const BASE = loaded(emptyRules(), [
  rule("cam-app", "camera", "virtual_grant"),
  rule("contacts-app", "contacts", "grant"),
  rule("contacts-app", "location", "grant"),
]);

describe("rules table state", () => {
  it("filters by app id", () => {
    const filtered = withFilter(BASE, "contacts-app");
    expect(visibleRules(filtered)).toHaveLength(2);
    expect(visibleRules(BASE)).toHaveLength(3);
  });

  it("updates the row only from a 200 response body", () => {
    const updated: RuleDoc = {
      ...rule("contacts-app", "contacts", "deny"),
      decided_at: 42,
      origin: "user_edit",
    };
    const next = editApplied(BASE, "contacts-app", "contacts", {
      status: 200,
      rule: updated,
    });
    const row = next.rules.find((r) => rowKey(r) === "contacts-app/contacts");
    expect(row).toEqual(updated);
    expect(next.rowErrors).toEqual({});
  });

  it("removes the row and surfaces the error on 404", () => {
    const next = editApplied(BASE, "contacts-app", "contacts", {
      status: 404,
      error: "no rule for contacts-app/contacts",
    });
    expect(next.rules.find((r) => rowKey(r) === "contacts-app/contacts")).toBeUndefined();
    expect(next.rowErrors["contacts-app/contacts"]).toContain("no rule");
  });

  it("keeps the row and surfaces the conflict on 409", () => {
    const next = editApplied(BASE, "cam-app", "camera", {
      status: 409,
      error: "stale write",
    });
    const row = next.rules.find((r) => rowKey(r) === "cam-app/camera");
    expect(row?.status).toBe("virtual_grant"); // unchanged
    expect(next.rowErrors["cam-app/camera"]).toContain("stale");
  });

  it("clears a row error after a later successful edit", () => {
    const conflicted = editApplied(BASE, "cam-app", "camera", {
      status: 409,
      error: "stale write",
    });
    const fixed = editApplied(conflicted, "cam-app", "camera", {
      status: 200,
      rule: rule("cam-app", "camera", "deny"),
    });
    expect(fixed.rowErrors["cam-app/camera"]).toBeUndefined();
  });
});
