"""Permission broker: receives app permission traffic, consults the rule
store, escalates unknown pairs to a decision provider, and hands back
Real/Virtual/Refused access handles.

Decision flow for one request: the granter is invoked (PG), the rule base
consulted (DBA); a hit maps Grant -> RealAccess, Deny -> Refused,
VirtualGrant -> VirtualAccess over a freshly opened virtual session.  A
miss prompts the decision provider exactly once (UI), stores the answer,
then proceeds as a hit.  Rules persist until edited, so a pair is never
prompted twice in a run without an intervening edit or purge.

Deny of a Required permission is recorded verbatim: the broker never
silently upgrades a denial to a virtual grant - choosing VirtualGrant is
the provider's (the user's) explicit call, which is why prompts carry the
requirement's criticality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Protocol

from .core import (
    AccessHandle,
    AppManifest,
    Criticality,
    PermissionStatus,
    PmmgError,
    RealAccess,
    Refused,
    ResourceClass,
    Rule,
    RuleOrigin,
    VirtualAccess,
    validate_manifest,
)
from .rule_store import RuleStore
from .virtual_profiles import ProfileRegistry, RealProvider


class UnknownAppError(PmmgError):
    """The app_id is not installed."""


class DuplicateAppError(PmmgError):
    """install_app was called for an app_id that is already installed."""


class InvalidManifestError(PmmgError):
    """The manifest violates its invariants; message lists the violations."""


class UndeclaredResourceError(PmmgError):
    """A request named a resource absent from the app's manifest."""


class RuleNotFoundError(PmmgError):
    """edit_rule targeted a pair with no existing rule."""


class ReplayExhaustedError(PmmgError):
    """A replay decision list ran out of recorded decisions."""


class Occasion(str, Enum):
    INSTALL = "install"
    FIRST_USE = "first_use"


@dataclass(frozen=True)
class PromptContext:
    """Everything the user sees when asked to decide a permission."""

    app_id: str
    display_name: str
    resource: ResourceClass
    criticality: Criticality
    occasion: Occasion


@dataclass(frozen=True)
class UserDecision:
    status: PermissionStatus


class DecisionProvider(Protocol):
    """The abstraction of "the user": must always terminate."""

    def prompt(self, context: PromptContext) -> UserDecision: ...


class ScriptedProvider:
    """Answers from a fixed (app, resource) -> status map with a default."""

    def __init__(
        self,
        decisions: Optional[dict[tuple[str, ResourceClass], PermissionStatus]] = None,
        default: PermissionStatus = PermissionStatus.DENY,
    ) -> None:
        self.decisions = dict(decisions or {})
        self.default = default

    def prompt(self, context: PromptContext) -> UserDecision:
        status = self.decisions.get((context.app_id, context.resource), self.default)
        return UserDecision(status=status)


class ReplayProvider:
    """Plays back a recorded decision list, in order, one per prompt."""

    def __init__(self, decisions: list[PermissionStatus]) -> None:
        self._remaining = list(decisions)
        self.consumed: list[tuple[PromptContext, PermissionStatus]] = []

    def prompt(self, context: PromptContext) -> UserDecision:
        if not self._remaining:
            raise ReplayExhaustedError(
                f"no recorded decision left for {context.app_id}/{context.resource.value}"
            )
        status = self._remaining.pop(0)
        self.consumed.append((context, status))
        return UserDecision(status=status)


@dataclass(frozen=True)
class InstallReport:
    """Outcome of installing one app: one decision per manifest requirement."""

    app_id: str
    decisions: tuple[tuple[ResourceClass, PermissionStatus], ...]
    prompts_issued: int


@dataclass(frozen=True)
class UnitCosts:
    """Simulated seconds accrued per invocation of each constant-cost step."""

    ui_s: float = 0.0
    pg_s: float = 0.0
    dba_s: float = 0.0


@dataclass
class Metering:
    """Per-component invocation counts and accumulated simulated time.

    Counters are monotone within a run; day-level reporting works on
    deltas between snapshots, never by resetting.
    """

    ui_prompts: int = 0
    pg_invocations: int = 0
    dba_lookups: int = 0
    vp_sessions: int = 0
    ui_time_s: float = 0.0
    pg_time_s: float = 0.0
    dba_time_s: float = 0.0
    vp_time_s: float = 0.0

    def copy(self) -> "Metering":
        return replace(self)

    def delta(self, baseline: "Metering") -> "Metering":
        return Metering(
            ui_prompts=self.ui_prompts - baseline.ui_prompts,
            pg_invocations=self.pg_invocations - baseline.pg_invocations,
            dba_lookups=self.dba_lookups - baseline.dba_lookups,
            vp_sessions=self.vp_sessions - baseline.vp_sessions,
            ui_time_s=self.ui_time_s - baseline.ui_time_s,
            pg_time_s=self.pg_time_s - baseline.pg_time_s,
            dba_time_s=self.dba_time_s - baseline.dba_time_s,
            vp_time_s=self.vp_time_s - baseline.vp_time_s,
        )

    def to_json(self) -> dict:
        return {
            "ui_prompts": self.ui_prompts,
            "pg_invocations": self.pg_invocations,
            "dba_lookups": self.dba_lookups,
            "vp_sessions": self.vp_sessions,
            "ui_time_s": self.ui_time_s,
            "pg_time_s": self.pg_time_s,
            "dba_time_s": self.dba_time_s,
            "vp_time_s": self.vp_time_s,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Metering":
        return cls(**data)


class SimClock:
    """Monotone logical clock; one tick is one simulated second."""

    def __init__(self, start: int = 0) -> None:
        self._now = start

    def now(self) -> int:
        return self._now

    def advance(self, dt: int) -> int:
        if dt < 0:
            raise ValueError("clock cannot move backwards")
        self._now += dt
        return self._now

    def advance_to(self, tick: int) -> int:
        self._now = max(self._now, tick)
        return self._now


@dataclass
class _InstalledApp:
    manifest: AppManifest


class Broker:
    """Single logical writer over the rule store, registry and fixture."""

    def __init__(
        self,
        store: RuleStore,
        registry: ProfileRegistry,
        real_provider: RealProvider,
        clock: Optional[SimClock] = None,
        unit_costs: UnitCosts = UnitCosts(),
    ) -> None:
        self.store = store
        self.registry = registry
        self.real_provider = real_provider
        self.clock = clock or SimClock()
        self.unit_costs = unit_costs
        self.metering = Metering()
        self.prompt_log: list[PromptContext] = []
        self._apps: dict[str, _InstalledApp] = {}

    # -- app lifecycle --------------------------------------------------------

    def installed(self, app_id: str) -> bool:
        return app_id in self._apps

    def manifest(self, app_id: str) -> AppManifest:
        try:
            return self._apps[app_id].manifest
        except KeyError:
            raise UnknownAppError(f"app {app_id!r} is not installed") from None

    def installed_apps(self) -> list[str]:
        return sorted(self._apps)

    def install_app(self, manifest: AppManifest, provider: DecisionProvider) -> InstallReport:
        """Install one app: decide every declared requirement, storing new rules.

        Requirements that already have a rule (e.g. imported, or retained
        from a previous non-purged install) are echoed without a prompt.
        """
        violations = validate_manifest(manifest)
        if violations:
            raise InvalidManifestError(
                f"manifest {manifest.app_id!r}: " + "; ".join(violations)
            )
        if manifest.app_id in self._apps:
            raise DuplicateAppError(f"app {manifest.app_id!r} is already installed")

        decisions: list[tuple[ResourceClass, PermissionStatus]] = []
        prompts = 0
        for req in manifest.requirements:
            self._meter_pg_dba()
            rule = self.store.lookup(manifest.app_id, req.resource)
            if rule is None:
                decision = self._prompt(
                    provider, manifest, req.resource, req.criticality, Occasion.INSTALL
                )
                prompts += 1
                rule = Rule(
                    app_id=manifest.app_id,
                    resource=req.resource,
                    status=decision.status,
                    decided_at=self.clock.now(),
                    origin=RuleOrigin.USER_PROMPT,
                )
                self.store.upsert(rule)
            decisions.append((req.resource, rule.status))

        self._apps[manifest.app_id] = _InstalledApp(manifest=manifest)
        return InstallReport(
            app_id=manifest.app_id,
            decisions=tuple(decisions),
            prompts_issued=prompts,
        )

    def uninstall_app(self, app_id: str, purge_rules: bool) -> None:
        if app_id not in self._apps:
            raise UnknownAppError(f"app {app_id!r} is not installed")
        del self._apps[app_id]
        if purge_rules:
            for rule in self.store.list_rules(app_id):
                self.store.delete(rule.app_id, rule.resource)

    # -- the decision path ------------------------------------------------------

    def request_access(
        self, app_id: str, resource: ResourceClass, provider: DecisionProvider
    ) -> AccessHandle:
        """Decide one runtime permission request and return its handle."""
        app = self._apps.get(app_id)
        if app is None:
            raise UnknownAppError(f"app {app_id!r} is not installed")
        criticality = app.manifest.criticality_of(resource)
        if criticality is None:
            raise UndeclaredResourceError(
                f"app {app_id!r} requested undeclared resource {resource.value}"
            )

        self._meter_pg_dba()
        rule = self.store.lookup(app_id, resource)
        if rule is None:
            decision = self._prompt(
                provider, app.manifest, resource, criticality, Occasion.FIRST_USE
            )
            rule = Rule(
                app_id=app_id,
                resource=resource,
                status=decision.status,
                decided_at=self.clock.now(),
                origin=RuleOrigin.USER_PROMPT,
            )
            self.store.upsert(rule)
        return self._handle_for(rule)

    def _handle_for(self, rule: Rule) -> AccessHandle:
        if rule.status is PermissionStatus.GRANT:
            session = self.real_provider.open_session(rule.resource)
            return RealAccess(resource=rule.resource, session_id=session.session_id)
        if rule.status is PermissionStatus.DENY:
            return Refused(resource=rule.resource)
        if rule.status is PermissionStatus.VIRTUAL_GRANT:
            session = self.registry.open_session(rule.resource)
            self.metering.vp_sessions += 1
            return VirtualAccess(resource=rule.resource, session_id=session.session_id)
        raise AssertionError(f"unhandled permission status {rule.status}")

    def edit_rule(
        self,
        app_id: str,
        resource: ResourceClass,
        new_status: PermissionStatus,
        at: Optional[int] = None,
    ) -> Rule:
        """Replace an existing rule with a user edit; applies from the next request."""
        existing = self.store.lookup(app_id, resource)
        if existing is None:
            raise RuleNotFoundError(f"no rule for {app_id!r}/{resource.value}")
        updated = Rule(
            app_id=app_id,
            resource=resource,
            status=new_status,
            decided_at=self.clock.now() if at is None else at,
            origin=RuleOrigin.USER_EDIT,
        )
        self.store.upsert(updated)  # raises StaleWriteError on an old tick
        return updated

    # -- metering helpers ---------------------------------------------------------

    def _meter_pg_dba(self) -> None:
        self.metering.pg_invocations += 1
        self.metering.pg_time_s += self.unit_costs.pg_s
        self.metering.dba_lookups += 1
        self.metering.dba_time_s += self.unit_costs.dba_s

    def _prompt(
        self,
        provider: DecisionProvider,
        manifest: AppManifest,
        resource: ResourceClass,
        criticality: Criticality,
        occasion: Occasion,
    ) -> UserDecision:
        context = PromptContext(
            app_id=manifest.app_id,
            display_name=manifest.display_name,
            resource=resource,
            criticality=criticality,
            occasion=occasion,
        )
        self.prompt_log.append(context)
        self.metering.ui_prompts += 1
        self.metering.ui_time_s += self.unit_costs.ui_s
        return provider.prompt(context)

    def add_vp_active_time(self, seconds: float) -> None:
        """Credit simulated time a virtual profile spent live (workload calls this)."""
        self.metering.vp_time_s += seconds
