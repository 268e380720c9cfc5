// API document shapes, mirroring the service's JSON encodings.

export type PermissionStatus = "grant" | "deny" | "virtual_grant";

export type ResourceClass =
  | "camera"
  | "microphone"
  | "contacts"
  | "messages"
  | "call_log"
  | "location"
  | "wifi_state"
  | "storage";

export interface RuleDoc {
  app_id: string;
  resource: ResourceClass;
  status: PermissionStatus;
  decided_at: number;
  origin: string;
}

export interface PromptDoc {
  prompt_id: string;
  app_id: string;
  display_name: string;
  resource: ResourceClass;
  criticality: "required" | "optional";
  occasion: "install" | "first_use";
  issued_at: number;
  deadline: number;
}

export interface MeteringDoc {
  ui_prompts: number;
  pg_invocations: number;
  dba_lookups: number;
  vp_sessions: number;
  ui_time_s: number;
  pg_time_s: number;
  dba_time_s: number;
  vp_time_s: number;
}

export interface SessionOutcomeDoc {
  app_id: string;
  status: "completed" | "aborted_on_denial";
  denied_resource: ResourceClass | null;
  handles_used: { real: number; virtual: number; refused: number };
  simulated_duration_s: number;
}

export interface SimulationStateDoc {
  tick: number;
  phase: "ready" | "provisioning" | "running" | "completed" | "failed";
  metering: MeteringDoc;
  sessions: SessionOutcomeDoc[];
  vp_active_time_s: number;
  pending_prompt: PromptDoc | null;
  measured_cost_s: number;
  analytic_cost_s: number;
}

export interface StepResultDoc {
  event: string;
  detail: Record<string, unknown>;
  resolved_prompt?: {
    prompt_id: string;
    status: PermissionStatus;
    expired: boolean;
  } | null;
}
