"""Pydantic request/response models for the HTTP control service.

These mirror the canonical JSON encodings of the core types; the service
adds no fields of its own beyond operational state (phase, pending prompt,
cost comparison).
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

from ..core import Criticality, PermissionStatus, ResourceClass, RuleOrigin


class RuleOut(BaseModel):
    app_id: str
    resource: ResourceClass
    status: PermissionStatus
    decided_at: int
    origin: RuleOrigin


class RuleEditIn(BaseModel):
    status: PermissionStatus


class PromptOut(BaseModel):
    prompt_id: str
    app_id: str
    display_name: str
    resource: ResourceClass
    criticality: Criticality
    occasion: str
    issued_at: int
    deadline: int


class PromptAnswerIn(BaseModel):
    status: PermissionStatus


class PromptResolutionOut(BaseModel):
    prompt_id: str
    status: PermissionStatus
    expired: bool


class MeteringOut(BaseModel):
    ui_prompts: int
    pg_invocations: int
    dba_lookups: int
    vp_sessions: int
    ui_time_s: float
    pg_time_s: float
    dba_time_s: float
    vp_time_s: float


class HandleOut(BaseModel):
    kind: str
    resource: ResourceClass
    session_id: Optional[str] = None


class SessionOutcomeOut(BaseModel):
    app_id: str
    status: str
    denied_resource: Optional[ResourceClass] = None
    handles_used: dict[str, int]
    simulated_duration_s: int


class SimulationStateOut(BaseModel):
    tick: int
    phase: str
    metering: MeteringOut
    sessions: list[SessionOutcomeOut]
    vp_active_time_s: float
    pending_prompt: Optional[PromptOut] = None
    measured_cost_s: float
    analytic_cost_s: float


class StepOut(BaseModel):
    event: str
    detail: dict[str, Any] = Field(default_factory=dict)
    resolved_prompt: Optional[PromptResolutionOut] = None


class ErrorOut(BaseModel):
    detail: str
