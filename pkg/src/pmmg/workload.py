"""Discrete-event simulator of daily app usage driving the broker.

A day plan holds the apps in play and an ordered list of timed sessions.
Running a session requests one handle per distinct scripted resource at
session open (permissions travel when the app is opened), then executes
the scripted ops against whichever backend each handle names.  A Refused
handle for a Required resource aborts the session on the spot; a Refused
Optional resource just skips its ops.

The default plan mirrors typical daily usage: nine 20-minute sessions
(three hours total) over nine previously installed apps, plus exactly one
new install, with half of the ten apps destined to run at least one
resource virtually.

Everything runs on the broker's logical clock; a day is a pure function
of (plan, decision provider, registry seed).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .broker import (
    Broker,
    DecisionProvider,
    Metering,
    PromptContext,
    ScriptedProvider,
    UserDecision,
)
from .core import (
    AppManifest,
    CodecError,
    Criticality,
    PermissionRequirement,
    PermissionStatus,
    RealAccess,
    Refused,
    ResourceClass,
    ResourceOp,
    ScriptStep,
    SessionScript,
    VirtualAccess,
    PmmgError,
    validate_manifest,
)
from .cost_model import CostParams
from .virtual_profiles import canonical_op, invoke

DAY_SESSION_COUNT = 9
SESSION_DURATION_S = 1200  # 20 minutes per app session
DAY_USAGE_S = DAY_SESSION_COUNT * SESSION_DURATION_S  # 3 hours of daily usage
NEW_INSTALLS_PER_DAY = 1

#: Resources a privacy-conscious user would run virtually; an app counts as
#: virtual-profile-destined when it declares at least one of these.
VP_DESTINED_RESOURCES = (
    ResourceClass.CAMERA,
    ResourceClass.MICROPHONE,
    ResourceClass.CONTACTS,
    ResourceClass.MESSAGES,
)
NEUTRAL_RESOURCES = (
    ResourceClass.CALL_LOG,
    ResourceClass.LOCATION,
    ResourceClass.WIFI_STATE,
    ResourceClass.STORAGE,
)


class InvalidPlanError(PmmgError):
    """The day plan violates its invariants; message lists the problems."""


# ---------------------------------------------------------------------------
# Plan and outcome types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlannedSession:
    app_id: str
    start_tick: int

    def to_json(self) -> dict[str, Any]:
        return {"app_id": self.app_id, "start_tick": self.start_tick}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PlannedSession":
        return cls(app_id=data["app_id"], start_tick=data["start_tick"])


@dataclass(frozen=True)
class DayPlan:
    """One simulated day: resident apps, fresh installs, timed sessions."""

    installed_apps: tuple[AppManifest, ...]
    new_installs: tuple[AppManifest, ...]
    sessions: tuple[PlannedSession, ...]

    def app_ids(self) -> set[str]:
        return {m.app_id for m in self.installed_apps} | {
            m.app_id for m in self.new_installs
        }

    def to_json(self) -> dict[str, Any]:
        return {
            "installed_apps": [m.to_json() for m in self.installed_apps],
            "new_installs": [m.to_json() for m in self.new_installs],
            "sessions": [s.to_json() for s in self.sessions],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "DayPlan":
        try:
            return cls(
                installed_apps=tuple(
                    AppManifest.from_json(m) for m in data["installed_apps"]
                ),
                new_installs=tuple(AppManifest.from_json(m) for m in data["new_installs"]),
                sessions=tuple(PlannedSession.from_json(s) for s in data["sessions"]),
            )
        except CodecError:
            raise
        except (KeyError, TypeError) as exc:
            raise CodecError(f"invalid day plan document: {exc!r}") from exc

    def save(self, path: str | Path) -> None:
        from .rule_store import dumps_canonical

        Path(path).write_text(dumps_canonical(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DayPlan":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def validate_plan(plan: DayPlan) -> list[str]:
    problems: list[str] = []
    seen_ids: set[str] = set()
    for manifest in (*plan.installed_apps, *plan.new_installs):
        if manifest.app_id in seen_ids:
            problems.append(f"duplicate app_id {manifest.app_id}")
        seen_ids.add(manifest.app_id)
        for violation in validate_manifest(manifest):
            problems.append(f"{manifest.app_id}: {violation}")
    for session in plan.sessions:
        if session.app_id not in seen_ids:
            problems.append(f"session references unknown app {session.app_id}")
        if session.start_tick < 0:
            problems.append(f"negative session start {session.start_tick}")
    return problems


class SessionStatus(str, Enum):
    COMPLETED = "completed"
    ABORTED_ON_DENIAL = "aborted_on_denial"


@dataclass(frozen=True)
class HandleCounts:
    real: int = 0
    virtual: int = 0
    refused: int = 0

    def total(self) -> int:
        return self.real + self.virtual + self.refused

    def to_json(self) -> dict[str, int]:
        return {"real": self.real, "virtual": self.virtual, "refused": self.refused}

    @classmethod
    def from_json(cls, data: dict[str, int]) -> "HandleCounts":
        return cls(**data)


@dataclass(frozen=True)
class SessionOutcome:
    app_id: str
    status: SessionStatus
    denied_resource: Optional[ResourceClass]
    handles_used: HandleCounts
    simulated_duration_s: int

    def to_json(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "status": self.status.value,
            "denied_resource": self.denied_resource.value if self.denied_resource else None,
            "handles_used": self.handles_used.to_json(),
            "simulated_duration_s": self.simulated_duration_s,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SessionOutcome":
        return cls(
            app_id=data["app_id"],
            status=SessionStatus(data["status"]),
            denied_resource=(
                ResourceClass(data["denied_resource"]) if data["denied_resource"] else None
            ),
            handles_used=HandleCounts.from_json(data["handles_used"]),
            simulated_duration_s=data["simulated_duration_s"],
        )


@dataclass(frozen=True)
class DayMetrics:
    """Everything measured over one simulated day."""

    metering: Metering
    sessions: tuple[SessionOutcome, ...]
    vp_active_time_s: float

    def to_json(self) -> dict[str, Any]:
        return {
            "metering": self.metering.to_json(),
            "sessions": [s.to_json() for s in self.sessions],
            "vp_active_time_s": self.vp_active_time_s,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "DayMetrics":
        return cls(
            metering=Metering.from_json(data["metering"]),
            sessions=tuple(SessionOutcome.from_json(s) for s in data["sessions"]),
            vp_active_time_s=data["vp_active_time_s"],
        )

    def save(self, path: str | Path) -> None:
        from .rule_store import dumps_canonical

        Path(path).write_text(dumps_canonical(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DayMetrics":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


class WorkloadRecorder:
    """Optional transcript: handles acquired, backend and payload of every op."""

    def __init__(self) -> None:
        self.executed: list[tuple[str, ResourceClass, str, ResourceOp, Any]] = []
        self.handles: list[tuple[str, Any]] = []

    def record(
        self,
        app_id: str,
        resource: ResourceClass,
        backend: str,
        op: ResourceOp,
        response: Any = None,
    ) -> None:
        self.executed.append((app_id, resource, backend, op, response))

    def handle(self, app_id: str, handle: Any) -> None:
        self.handles.append((app_id, handle))


# ---------------------------------------------------------------------------
# Running sessions and days
# ---------------------------------------------------------------------------


def run_session(
    app: AppManifest,
    broker: Broker,
    provider: DecisionProvider,
    recorder: Optional[WorkloadRecorder] = None,
) -> SessionOutcome:
    """Run one scripted app session on the broker's clock.

    Handles are acquired at session open, one per distinct scripted
    resource in first-touch order; the first Refused handle for a Required
    resource aborts the session before any op executes.
    """
    clock = broker.clock
    start = clock.now()
    script = app.script

    handles: dict[ResourceClass, Any] = {}
    real = virtual = refused = 0
    aborted_on: Optional[ResourceClass] = None
    for resource in script.touched_resources():
        handle = broker.request_access(app.app_id, resource, provider)
        handles[resource] = handle
        if recorder:
            recorder.handle(app.app_id, handle)
        if isinstance(handle, RealAccess):
            real += 1
        elif isinstance(handle, VirtualAccess):
            virtual += 1
        else:
            refused += 1
            if app.criticality_of(resource) is Criticality.REQUIRED:
                aborted_on = resource
                break

    counts = HandleCounts(real=real, virtual=virtual, refused=refused)
    if aborted_on is not None:
        return SessionOutcome(
            app_id=app.app_id,
            status=SessionStatus.ABORTED_ON_DENIAL,
            denied_resource=aborted_on,
            handles_used=counts,
            simulated_duration_s=0,
        )

    for step in script.steps:
        clock.advance_to(start + step.at_offset_s)
        handle = handles[step.resource]
        if isinstance(handle, Refused):
            if recorder:
                recorder.record(app.app_id, step.resource, "skipped", step.op)
            continue
        if isinstance(handle, VirtualAccess):
            session = broker.registry.session(handle.session_id)
            response = invoke(broker.registry, session, step.op)
            if recorder:
                recorder.record(app.app_id, step.resource, "virtual", step.op, response)
        else:
            session = broker.real_provider.session(handle.session_id)
            response = broker.real_provider.invoke(session, step.op)
            if recorder:
                recorder.record(app.app_id, step.resource, "real", step.op, response)

    clock.advance_to(start + script.duration_s)
    if virtual > 0:
        # The virtual profile stays live from its grant at session open to
        # session end, i.e. for the whole session.
        broker.add_vp_active_time(float(script.duration_s))
    return SessionOutcome(
        app_id=app.app_id,
        status=SessionStatus.COMPLETED,
        denied_resource=None,
        handles_used=counts,
        simulated_duration_s=script.duration_s,
    )


def provision_resident_apps(
    plan: DayPlan, broker: Broker, provider: DecisionProvider
) -> None:
    """Install the plan's previously-installed apps if the broker lacks them.

    This models state built up on earlier days; the prompts it may issue
    belong to those days, so day metering is measured from after it.
    """
    for manifest in plan.installed_apps:
        if not broker.installed(manifest.app_id):
            broker.install_app(manifest, provider)


def run_day(
    plan: DayPlan,
    broker: Broker,
    provider: DecisionProvider,
    recorder: Optional[WorkloadRecorder] = None,
) -> DayMetrics:
    """Run one full day: fresh installs first, then sessions in start order."""
    problems = validate_plan(plan)
    if problems:
        raise InvalidPlanError("; ".join(problems))

    provision_resident_apps(plan, broker, provider)
    baseline = broker.metering.copy()

    for manifest in plan.new_installs:
        broker.install_app(manifest, provider)

    outcomes: list[SessionOutcome] = []
    for planned in sorted(plan.sessions, key=lambda s: s.start_tick):
        broker.clock.advance_to(planned.start_tick)
        outcomes.append(
            run_session(broker.manifest(planned.app_id), broker, provider, recorder)
        )

    vp_active = sum(
        float(o.simulated_duration_s)
        for o in outcomes
        if o.handles_used.virtual > 0
    )
    return DayMetrics(
        metering=broker.metering.delta(baseline),
        sessions=tuple(outcomes),
        vp_active_time_s=vp_active,
    )


def measure_components(metrics: DayMetrics, unit_costs: CostParams) -> Fraction:
    """Price a measured day: counts times unit costs plus virtual runtime."""
    m = metrics.metering
    return (
        unit_costs.ui * m.ui_prompts
        + unit_costs.pg * m.pg_invocations
        + unit_costs.dba * m.dba_lookups
        + Fraction(metrics.vp_active_time_s)
    )


# ---------------------------------------------------------------------------
# Plan generation
# ---------------------------------------------------------------------------


def is_vp_destined(manifest: AppManifest) -> bool:
    return any(req.resource in VP_DESTINED_RESOURCES for req in manifest.requirements)


def _build_script(resources: list[ResourceClass], duration_s: int, rng: random.Random) -> SessionScript:
    steps = []
    for resource in resources:
        for _ in range(rng.randrange(1, 3)):
            steps.append(
                ScriptStep(
                    resource=resource,
                    op=canonical_op(resource, rng),
                    at_offset_s=rng.randrange(0, duration_s),
                )
            )
    steps.sort(key=lambda s: s.at_offset_s)
    return SessionScript(steps=tuple(steps), duration_s=duration_s)


def _build_manifest(
    app_id: str, display_name: str, vp_destined: bool, duration_s: int, rng: random.Random
) -> AppManifest:
    resources: list[ResourceClass] = []
    if vp_destined:
        resources.append(rng.choice(VP_DESTINED_RESOURCES))
        resources.extend(rng.sample(NEUTRAL_RESOURCES, rng.randrange(0, 3)))
    else:
        resources.extend(rng.sample(NEUTRAL_RESOURCES, rng.randrange(1, 4)))
    requirements = tuple(
        PermissionRequirement(
            resource=resource,
            criticality=rng.choice((Criticality.REQUIRED, Criticality.OPTIONAL)),
        )
        for resource in resources
    )
    return AppManifest(
        app_id=app_id,
        display_name=display_name,
        requirements=requirements,
        script=_build_script(resources, duration_s, rng),
    )


def generate_default_plan(seed: int) -> DayPlan:
    """The statistically typical day: 9 x 20-minute sessions, 1 new install.

    Ten apps are in play (nine residents with one session each, one fresh
    install); exactly five of the ten declare at least one resource from
    the virtual-profile-destined set.
    """
    rng = random.Random(seed)
    total_apps = DAY_SESSION_COUNT + NEW_INSTALLS_PER_DAY
    vp_slots = set(rng.sample(range(total_apps), total_apps // 2))

    manifests = [
        _build_manifest(
            app_id=f"app-{index:02d}",
            display_name=f"Daily App {index:02d}",
            vp_destined=index in vp_slots,
            duration_s=SESSION_DURATION_S,
            rng=rng,
        )
        for index in range(DAY_SESSION_COUNT)
    ]
    new_app = _build_manifest(
        app_id="app-new",
        display_name="Fresh Install",
        vp_destined=DAY_SESSION_COUNT in vp_slots,
        duration_s=SESSION_DURATION_S,
        rng=rng,
    )

    order = list(range(DAY_SESSION_COUNT))
    rng.shuffle(order)
    sessions = tuple(
        PlannedSession(app_id=manifests[app_index].app_id, start_tick=slot * SESSION_DURATION_S)
        for slot, app_index in enumerate(order)
    )
    return DayPlan(
        installed_apps=tuple(manifests),
        new_installs=(new_app,),
        sessions=sessions,
    )


class VpDestinedProvider:
    """Virtualizes every vp-destined resource, answers the default otherwise."""

    def __init__(self, default: PermissionStatus = PermissionStatus.GRANT) -> None:
        self.default = default

    def prompt(self, context: PromptContext) -> UserDecision:
        if context.resource in VP_DESTINED_RESOURCES:
            return UserDecision(status=PermissionStatus.VIRTUAL_GRANT)
        return UserDecision(status=self.default)


def generate_demo_plan(seed: int = 7) -> DayPlan:
    """A small plan for interactive serve mode: few prompts, quick sessions."""
    rng = random.Random(seed)
    camera_app = AppManifest(
        app_id="cam-app",
        display_name="Snap Camera",
        requirements=(
            PermissionRequirement(ResourceClass.CAMERA, Criticality.REQUIRED),
        ),
        script=_build_script([ResourceClass.CAMERA], 60, rng),
    )
    contacts_app = AppManifest(
        app_id="contacts-app",
        display_name="People Sync",
        requirements=(
            PermissionRequirement(ResourceClass.CONTACTS, Criticality.OPTIONAL),
            PermissionRequirement(ResourceClass.LOCATION, Criticality.OPTIONAL),
        ),
        script=_build_script([ResourceClass.CONTACTS, ResourceClass.LOCATION], 60, rng),
    )
    fresh_app = AppManifest(
        app_id="fresh-app",
        display_name="New Arrival",
        requirements=(
            PermissionRequirement(ResourceClass.WIFI_STATE, Criticality.OPTIONAL),
        ),
        script=_build_script([ResourceClass.WIFI_STATE], 60, rng),
    )
    return DayPlan(
        installed_apps=(camera_app, contacts_app),
        new_installs=(fresh_app,),
        sessions=(
            PlannedSession(app_id="cam-app", start_tick=0),
            PlannedSession(app_id="contacts-app", start_tick=100),
            PlannedSession(app_id="contacts-app", start_tick=200),
        ),
    )
