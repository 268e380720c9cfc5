"""Step-driven simulation runner with live prompts.

The runner executes a day plan on a worker thread, pausing at every event
boundary (each prompt, each app install, each session end, day end).  The
HTTP layer advances it one boundary at a time via step(); a step always
returns the event that just happened.

When the simulation needs a user decision, the worker parks mid-step and
the pending prompt is published (to the step response and to every event
stream subscriber).  Answers arrive over HTTP and are buffered; the next
step applies the buffered answer, or, if none arrived, expires the prompt:
the clock jumps to the deadline and the configured default decision
(fail-closed Deny) is recorded.  At most one prompt is ever pending, so
prompts reach subscribers strictly in FIFO order and no prompt can be both
answered and expired.

All mutations are serialized: the worker only runs inside step() calls,
and every HTTP mutation takes the same state lock, so an HTTP sequence is
observationally identical to the same sequence issued through the library.
"""

from __future__ import annotations

import itertools
import queue
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Optional

from ..broker import Broker, Metering, PromptContext, UserDecision
from ..core import PermissionStatus, PmmgError, handle_to_json
from ..cost_model import DEFAULT_UNIT_COSTS, CostParams, pmmg_daily_closed
from ..workload import (
    DayMetrics,
    DayPlan,
    InvalidPlanError,
    WorkloadRecorder,
    measure_components,
    provision_resident_apps,
    run_session,
    validate_plan,
)


class RunnerStalledError(PmmgError):
    """The worker produced no event within the wall-clock safety window."""


class PromptNotFoundError(PmmgError):
    """No prompt with that id was ever issued."""


class PromptGoneError(PmmgError):
    """The prompt was already answered, applied, or expired."""


class Phase(str, Enum):
    READY = "ready"
    PROVISIONING = "provisioning"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class PromptState(str, Enum):
    PENDING = "pending"
    ANSWERED = "answered"  # buffered; applied on the next step
    RESOLVED = "resolved"
    EXPIRED = "expired"


@dataclass
class PendingPrompt:
    prompt_id: str
    context: PromptContext
    issued_at: int
    deadline: int
    state: PromptState = PromptState.PENDING
    answer: Optional[PermissionStatus] = None

    def to_json(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "app_id": self.context.app_id,
            "display_name": self.context.display_name,
            "resource": self.context.resource.value,
            "criticality": self.context.criticality.value,
            "occasion": self.context.occasion.value,
            "issued_at": self.issued_at,
            "deadline": self.deadline,
        }


class SimulationRunner:
    """Owns the broker exclusively; a single worker thread mutates state."""

    def __init__(
        self,
        plan: DayPlan,
        broker: Broker,
        default_decision: PermissionStatus = PermissionStatus.DENY,
        prompt_timeout_s: int = 60,
        unit_costs: CostParams = DEFAULT_UNIT_COSTS,
        on_complete: Optional[Callable[[DayMetrics], None]] = None,
        step_wall_timeout_s: float = 30.0,
    ) -> None:
        problems = validate_plan(plan)
        if problems:
            raise InvalidPlanError("; ".join(problems))
        self.plan = plan
        self.broker = broker
        self.default_decision = default_decision
        self.prompt_timeout_s = prompt_timeout_s
        self.unit_costs = unit_costs
        self.analytic_params = self._analytic_params(plan, unit_costs)
        self.step_wall_timeout_s = step_wall_timeout_s
        self._on_complete = on_complete

        self.phase = Phase.READY
        self.current_prompt: Optional[PendingPrompt] = None
        self.prompt_history: list[PendingPrompt] = []
        self.outcomes: list = []
        self.final_metrics: Optional[DayMetrics] = None
        self._baseline: Optional[Metering] = None
        self._prompt_ids = itertools.count(1)

        self._lock = threading.RLock()
        self._step_serial = threading.Lock()
        self._permit = threading.Semaphore(0)
        self._boundary: "queue.Queue[dict[str, Any]]" = queue.Queue()
        self._resume = threading.Event()
        self._resolution: Optional[tuple[PermissionStatus, bool]] = None
        self._subscribers: list["queue.Queue[tuple[str, dict]]"] = []

        self._worker = threading.Thread(
            target=self._run, name="pmmg-simulation", daemon=True
        )
        self._worker.start()

    @staticmethod
    def _analytic_params(plan: DayPlan, unit_costs: CostParams) -> CostParams:
        """Model inputs implied by the plan: n residents, mean session length."""
        n = len(plan.installed_apps)
        durations = [
            manifest.script.duration_s
            for session in plan.sessions
            for manifest in (*plan.installed_apps, *plan.new_installs)
            if manifest.app_id == session.app_id
        ]
        app_time = (
            Fraction(sum(durations), len(durations)) if durations else Fraction(0)
        )
        return CostParams(
            ui=unit_costs.ui, pg=unit_costs.pg, dba=unit_costs.dba,
            app_time=app_time, n=n,
        )

    # -- worker side -----------------------------------------------------------

    def prompt(self, context: PromptContext) -> UserDecision:
        """DecisionProvider implementation; runs on the worker thread."""
        clock = self.broker.clock
        with self._lock:
            pending = PendingPrompt(
                prompt_id=f"p{next(self._prompt_ids)}",
                context=context,
                issued_at=clock.now(),
                deadline=clock.now() + self.prompt_timeout_s,
            )
            self.current_prompt = pending
            self._broadcast_locked("prompt", pending.to_json())
        self._emit("prompt_pending", {"prompt": pending.to_json()})

        self._resume.wait()
        self._resume.clear()
        with self._lock:
            assert self._resolution is not None
            status, expired = self._resolution
            self._resolution = None
            # state was already finalized by the controller under this lock
            self.prompt_history.append(pending)
            self.current_prompt = None
        if expired:
            clock.advance_to(pending.deadline)
        return UserDecision(status=status)

    def _await_permit(self) -> None:
        self._permit.acquire()

    def _emit(self, event: str, detail: dict[str, Any]) -> None:
        self._boundary.put({"event": event, "detail": detail})

    def _run(self) -> None:
        try:
            self._await_permit()
            self.phase = Phase.PROVISIONING
            provision_resident_apps(self.plan, self.broker, self)
            with self._lock:
                self._baseline = self.broker.metering.copy()
            self._emit(
                "provisioned",
                {"resident_apps": [m.app_id for m in self.plan.installed_apps]},
            )

            self._await_permit()
            self.phase = Phase.RUNNING
            for manifest in self.plan.new_installs:
                report = self.broker.install_app(manifest, self)
                self._emit(
                    "app_installed",
                    {
                        "app_id": report.app_id,
                        "prompts_issued": report.prompts_issued,
                        "decisions": [
                            {"resource": r.value, "status": s.value}
                            for r, s in report.decisions
                        ],
                    },
                )
                self._await_permit()

            for planned in sorted(self.plan.sessions, key=lambda s: s.start_tick):
                self.broker.clock.advance_to(planned.start_tick)
                recorder = WorkloadRecorder()
                outcome = run_session(
                    self.broker.manifest(planned.app_id), self.broker, self, recorder
                )
                with self._lock:
                    self.outcomes.append(outcome)
                self._emit(
                    "session_completed",
                    {
                        "outcome": outcome.to_json(),
                        "handles": [handle_to_json(h) for _, h in recorder.handles],
                    },
                )
                self._await_permit()

            metrics = self._metrics_so_far()
            with self._lock:
                self.final_metrics = metrics
                self.phase = Phase.COMPLETED
            if self._on_complete is not None:
                self._on_complete(metrics)
            self._emit("day_completed", {"metrics": metrics.to_json()})
        except Exception as exc:  # surfaced to the stepping client
            with self._lock:
                self.phase = Phase.FAILED
            self._emit("error", {"message": f"{type(exc).__name__}: {exc}"})

    # -- controller side -----------------------------------------------------------

    def step(self) -> dict[str, Any]:
        """Advance to the next event boundary and return what happened."""
        with self._step_serial:
            if self.phase in (Phase.COMPLETED, Phase.FAILED):
                return {"event": "idle", "detail": {"phase": self.phase.value}}

            resolved: Optional[dict[str, Any]] = None
            with self._lock:
                pending = self.current_prompt
                if pending is not None and pending.state in (
                    PromptState.PENDING,
                    PromptState.ANSWERED,
                ):
                    if pending.state is PromptState.ANSWERED:
                        assert pending.answer is not None
                        status, expired = pending.answer, False
                        pending.state = PromptState.RESOLVED
                    else:
                        status, expired = self.default_decision, True
                        pending.state = PromptState.EXPIRED
                        pending.answer = status
                        self._broadcast_locked(
                            "expired",
                            {
                                "prompt_id": pending.prompt_id,
                                "applied_status": status.value,
                            },
                        )
                    resolved = {
                        "prompt_id": pending.prompt_id,
                        "status": status.value,
                        "expired": expired,
                    }
                    self._resolution = (status, expired)
                    self._resume.set()
                else:
                    self._permit.release()

            try:
                event = self._boundary.get(timeout=self.step_wall_timeout_s)
            except queue.Empty:
                raise RunnerStalledError(
                    f"no simulation event within {self.step_wall_timeout_s}s"
                ) from None
            if resolved is not None:
                event["resolved_prompt"] = resolved
            return event

    def answer_prompt(self, prompt_id: str, status: PermissionStatus) -> PendingPrompt:
        """Buffer the user's answer; it is applied by the next step."""
        with self._lock:
            pending = self.current_prompt
            if pending is None or pending.prompt_id != prompt_id:
                if any(p.prompt_id == prompt_id for p in self.prompt_history):
                    raise PromptGoneError(f"prompt {prompt_id} was already resolved")
                raise PromptNotFoundError(f"no prompt {prompt_id}")
            if pending.state is not PromptState.PENDING:
                raise PromptGoneError(f"prompt {prompt_id} was already answered")
            pending.state = PromptState.ANSWERED
            pending.answer = status
            self._broadcast_locked(
                "answered", {"prompt_id": prompt_id, "status": status.value}
            )
            return pending

    # -- rule access (serialized with the worker) ---------------------------------

    def list_rules(self, app_id: Optional[str] = None):
        with self._lock:
            return self.broker.store.list_rules(app_id)

    def edit_rule(self, app_id: str, resource, status: PermissionStatus):
        with self._lock:
            return self.broker.edit_rule(app_id, resource, status)

    def _metrics_so_far(self) -> DayMetrics:
        with self._lock:
            outcomes = tuple(self.outcomes)
            metering = (
                self.broker.metering.delta(self._baseline)
                if self._baseline is not None
                else Metering()
            )
        vp_active = sum(
            float(o.simulated_duration_s) for o in outcomes if o.handles_used.virtual > 0
        )
        return DayMetrics(
            metering=metering, sessions=outcomes, vp_active_time_s=vp_active
        )

    def state(self) -> dict[str, Any]:
        """Operational snapshot for the dashboard."""
        metrics = self._metrics_so_far()
        with self._lock:
            pending = self.current_prompt
            prompt_doc = (
                pending.to_json()
                if pending is not None
                and pending.state in (PromptState.PENDING, PromptState.ANSWERED)
                else None
            )
            phase = self.phase
            tick = self.broker.clock.now()
        measured = float(measure_components(metrics, self.unit_costs))
        analytic = float(pmmg_daily_closed(self.analytic_params))
        return {
            "tick": tick,
            "phase": phase.value,
            "metering": metrics.metering.to_json(),
            "sessions": [o.to_json() for o in metrics.sessions],
            "vp_active_time_s": metrics.vp_active_time_s,
            "pending_prompt": prompt_doc,
            "measured_cost_s": measured,
            "analytic_cost_s": analytic,
        }

    # -- event stream -----------------------------------------------------------

    def subscribe(self) -> "queue.Queue[tuple[str, dict]]":
        q: "queue.Queue[tuple[str, dict]]" = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
            pending = self.current_prompt
            if pending is not None and pending.state is PromptState.PENDING:
                q.put(("prompt", pending.to_json()))
        return q

    def unsubscribe(self, q: "queue.Queue[tuple[str, dict]]") -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _broadcast_locked(self, event: str, payload: dict[str, Any]) -> None:
        for q in self._subscribers:
            q.put((event, payload))
