"""Broker protocol conformance: install, request, edit, uninstall,
prompt-once, handle soundness, metering consistency and the privacy
invariant."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from pmmg.broker import (
    Broker,
    DuplicateAppError,
    Occasion,
    ReplayExhaustedError,
    ReplayProvider,
    RuleNotFoundError,
    ScriptedProvider,
    UndeclaredResourceError,
    UnknownAppError,
    UnitCosts,
)
from pmmg.core import (
    AppManifest,
    CameraCapture,
    Criticality,
    ImageFrame,
    PermissionRequirement,
    PermissionStatus,
    RealAccess,
    Refused,
    ResourceClass,
    Rule,
    RuleOrigin,
    VirtualAccess,
)
from pmmg.rule_store import RuleStore, StaleWriteError
from pmmg.virtual_profiles import RealProvider, build_profiles, default_fixture, invoke

from conftest import make_broker, make_manifest

GRANT = PermissionStatus.GRANT
DENY = PermissionStatus.DENY
VIRTUAL = PermissionStatus.VIRTUAL_GRANT


def manifest_for(*reqs: tuple[ResourceClass, Criticality], app_id="app-x") -> AppManifest:
    return AppManifest(
        app_id=app_id,
        display_name=f"App {app_id}",
        requirements=tuple(
            PermissionRequirement(resource=r, criticality=c) for r, c in reqs
        ),
    )


class TestInstall:
    def test_two_requirements_prompt_twice_and_store_two_rules(self, broker):
        manifest = manifest_for(
            (ResourceClass.CAMERA, Criticality.REQUIRED),
            (ResourceClass.CONTACTS, Criticality.OPTIONAL),
        )
        provider = ScriptedProvider(
            decisions={
                ("app-x", ResourceClass.CAMERA): GRANT,
                ("app-x", ResourceClass.CONTACTS): VIRTUAL,
            }
        )
        report = broker.install_app(manifest, provider)
        assert report.prompts_issued == 2
        assert report.decisions == (
            (ResourceClass.CAMERA, GRANT),
            (ResourceClass.CONTACTS, VIRTUAL),
        )
        assert len(broker.store.list_rules("app-x")) == 2
        assert broker.metering.ui_prompts == 2
        assert broker.metering.pg_invocations == 2
        assert broker.metering.dba_lookups == 2

    def test_existing_imported_rule_is_echoed_without_prompt(self, broker, deny_all):
        # protocol walk: the stored rule short-circuits the user entirely
        broker.store.upsert(
            Rule(
                app_id="app-x",
                resource=ResourceClass.CAMERA,
                status=GRANT,
                decided_at=0,
                origin=RuleOrigin.IMPORT,
            )
        )
        manifest = manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED))
        report = broker.install_app(manifest, deny_all)
        assert report.prompts_issued == 0
        assert report.decisions == ((ResourceClass.CAMERA, GRANT),)

    def test_empty_requirements_install_cleanly(self, broker, deny_all):
        report = broker.install_app(
            AppManifest(app_id="bare", display_name="Bare"), deny_all
        )
        assert report.prompts_issued == 0
        assert report.decisions == ()

    def test_duplicate_install_rejected(self, broker, grant_all):
        manifest = manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED))
        broker.install_app(manifest, grant_all)
        with pytest.raises(DuplicateAppError):
            broker.install_app(manifest, grant_all)

    def test_install_prompts_carry_install_occasion(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        assert [c.occasion for c in broker.prompt_log] == [Occasion.INSTALL]


class TestRequestAccess:
    def test_stored_grant_maps_to_real_access_without_prompt(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        prompts_before = broker.metering.ui_prompts
        handle = broker.request_access("app-x", ResourceClass.CAMERA, grant_all)
        assert isinstance(handle, RealAccess)
        assert broker.metering.ui_prompts == prompts_before

    def test_stored_virtual_grant_yields_working_fake_camera(self, broker):
        provider = ScriptedProvider(default=VIRTUAL)
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), provider
        )
        handle = broker.request_access("app-x", ResourceClass.CAMERA, provider)
        assert isinstance(handle, VirtualAccess)
        session = broker.registry.session(handle.session_id)
        frame = invoke(broker.registry, session, CameraCapture(width=3, height=2))
        assert isinstance(frame, ImageFrame) and len(frame.pixels) == 6

    def test_miss_prompts_once_then_replays_from_the_store(self, broker):
        """Two-call trace, hand-executed: the first call misses, prompts,
        stores Deny and refuses; the second hits the store and refuses
        without any further prompt."""
        manifest = manifest_for((ResourceClass.CONTACTS, Criticality.OPTIONAL))
        broker.install_app(manifest, ScriptedProvider(default=GRANT))
        # remove the install-time rule to force the first-use path
        broker.store.delete("app-x", ResourceClass.CONTACTS)

        provider = ScriptedProvider(default=DENY)
        first = broker.request_access("app-x", ResourceClass.CONTACTS, provider)
        assert isinstance(first, Refused)
        stored = broker.store.lookup("app-x", ResourceClass.CONTACTS)
        assert stored is not None and stored.status is DENY
        assert stored.origin is RuleOrigin.USER_PROMPT
        prompts_after_first = broker.metering.ui_prompts

        second = broker.request_access("app-x", ResourceClass.CONTACTS, provider)
        assert isinstance(second, Refused)
        assert broker.metering.ui_prompts == prompts_after_first

    def test_first_use_prompt_carries_first_use_occasion(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.LOCATION, Criticality.OPTIONAL)), grant_all
        )
        broker.store.delete("app-x", ResourceClass.LOCATION)
        broker.request_access("app-x", ResourceClass.LOCATION, grant_all)
        assert broker.prompt_log[-1].occasion is Occasion.FIRST_USE

    def test_unknown_app_rejected(self, broker, grant_all):
        with pytest.raises(UnknownAppError):
            broker.request_access("ghost", ResourceClass.CAMERA, grant_all)

    def test_undeclared_resource_is_a_hard_error(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        with pytest.raises(UndeclaredResourceError):
            broker.request_access("app-x", ResourceClass.CONTACTS, grant_all)

    def test_session_ids_unique_across_real_and_virtual(self, broker):
        provider = ScriptedProvider(
            decisions={
                ("app-x", ResourceClass.CAMERA): GRANT,
                ("app-x", ResourceClass.CONTACTS): VIRTUAL,
            }
        )
        broker.install_app(
            manifest_for(
                (ResourceClass.CAMERA, Criticality.REQUIRED),
                (ResourceClass.CONTACTS, Criticality.OPTIONAL),
            ),
            provider,
        )
        ids = set()
        for _ in range(3):
            for resource in (ResourceClass.CAMERA, ResourceClass.CONTACTS):
                handle = broker.request_access("app-x", resource, provider)
                ids.add(handle.session_id)
        assert len(ids) == 6


class TestEditRule:
    def test_grant_to_deny_takes_effect_immediately(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        broker.clock.advance(10)
        updated = broker.edit_rule("app-x", ResourceClass.CAMERA, DENY)
        assert updated.origin is RuleOrigin.USER_EDIT
        handle = broker.request_access("app-x", ResourceClass.CAMERA, grant_all)
        assert isinstance(handle, Refused)

    def test_deny_to_virtual_takes_effect_immediately(self, broker, deny_all):
        broker.install_app(
            manifest_for((ResourceClass.MICROPHONE, Criticality.REQUIRED)), deny_all
        )
        broker.clock.advance(10)
        broker.edit_rule("app-x", ResourceClass.MICROPHONE, VIRTUAL)
        handle = broker.request_access("app-x", ResourceClass.MICROPHONE, deny_all)
        assert isinstance(handle, VirtualAccess)

    def test_edit_on_absent_pair_rejected(self, broker):
        with pytest.raises(RuleNotFoundError):
            broker.edit_rule("app-x", ResourceClass.CAMERA, DENY)

    def test_stale_edit_tick_rejected(self, broker, grant_all):
        broker.clock.advance(100)
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        with pytest.raises(StaleWriteError):
            broker.edit_rule("app-x", ResourceClass.CAMERA, DENY, at=5)


class TestUninstall:
    def test_purge_removes_rules(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        broker.uninstall_app("app-x", purge_rules=True)
        assert broker.store.list_rules("app-x") == []

    def test_without_purge_rules_are_retained(self, broker, grant_all):
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), grant_all
        )
        broker.uninstall_app("app-x", purge_rules=False)
        assert len(broker.store.list_rules("app-x")) == 1

    def test_reinstall_prompts_only_for_missing_rules(self, broker):
        """Protocol trace: after a non-purged uninstall the camera rule
        survives, so a reinstall with one extra requirement prompts exactly
        once, for the new pair."""
        provider = ScriptedProvider(default=GRANT)
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), provider
        )
        broker.uninstall_app("app-x", purge_rules=False)
        bigger = manifest_for(
            (ResourceClass.CAMERA, Criticality.REQUIRED),
            (ResourceClass.LOCATION, Criticality.OPTIONAL),
        )
        report = broker.install_app(bigger, provider)
        assert report.prompts_issued == 1
        assert broker.prompt_log[-1].resource is ResourceClass.LOCATION

    def test_unknown_app_rejected(self, broker):
        with pytest.raises(UnknownAppError):
            broker.uninstall_app("ghost", purge_rules=True)


class TestProviders:
    def test_replay_provider_plays_in_order_then_exhausts(self, broker):
        provider = ReplayProvider([GRANT, VIRTUAL])
        manifest = manifest_for(
            (ResourceClass.CAMERA, Criticality.REQUIRED),
            (ResourceClass.CONTACTS, Criticality.OPTIONAL),
        )
        report = broker.install_app(manifest, provider)
        assert report.decisions == (
            (ResourceClass.CAMERA, GRANT),
            (ResourceClass.CONTACTS, VIRTUAL),
        )
        with pytest.raises(ReplayExhaustedError):
            provider.prompt(broker.prompt_log[-1])

    def test_scripted_provider_falls_back_to_default(self):
        provider = ScriptedProvider(default=VIRTUAL)
        from pmmg.broker import PromptContext

        context = PromptContext(
            app_id="a", display_name="A", resource=ResourceClass.CAMERA,
            criticality=Criticality.REQUIRED, occasion=Occasion.INSTALL,
        )
        assert provider.prompt(context).status is VIRTUAL


class TestRequiredDenySemantics:
    def test_deny_of_required_is_recorded_verbatim(self, broker, deny_all):
        """The broker never upgrades a denial to a virtual grant on its own."""
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), deny_all
        )
        stored = broker.store.lookup("app-x", ResourceClass.CAMERA)
        assert stored is not None and stored.status is DENY
        handle = broker.request_access("app-x", ResourceClass.CAMERA, deny_all)
        assert isinstance(handle, Refused)


# -- property-style sweeps ----------------------------------------------------------


def _random_traffic(seed: int, n_requests: int = 40):
    """Random install + request traffic; returns (broker, provider)."""
    rng = random.Random(seed)
    broker = make_broker(seed)
    provider = ScriptedProvider(default=rng.choice([GRANT, DENY, VIRTUAL]))
    apps = []
    for i in range(rng.randrange(1, 4)):
        manifest = make_manifest(rng, app_id=f"app-{i}")
        for req in manifest.requirements:
            provider.decisions[(manifest.app_id, req.resource)] = rng.choice(
                [GRANT, DENY, VIRTUAL]
            )
        broker.install_app(manifest, provider)
        apps.append(manifest)
    for _ in range(n_requests):
        manifest = rng.choice(apps)
        if not manifest.requirements:
            continue
        resource = rng.choice(manifest.requirements).resource
        broker.request_access(manifest.app_id, resource, provider)
        broker.clock.advance(rng.randrange(0, 5))
    return broker, provider


class TestInvariants:
    @settings(deadline=None, max_examples=60)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_prompt_once_per_pair(self, seed):
        broker, _ = _random_traffic(seed)
        pairs = [(c.app_id, c.resource) for c in broker.prompt_log]
        assert len(pairs) == len(set(pairs))

    @settings(deadline=None, max_examples=60)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_metering_consistency(self, seed):
        broker, _ = _random_traffic(seed)
        distinct_prompted = {(c.app_id, c.resource) for c in broker.prompt_log}
        assert broker.metering.ui_prompts == len(distinct_prompted)
        assert broker.metering.pg_invocations == broker.metering.dba_lookups

    @settings(deadline=None, max_examples=60)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_handle_soundness(self, seed):
        """The governing rule's status uniquely determines the handle kind."""
        rng = random.Random(seed)
        broker = make_broker(seed)
        provider = ScriptedProvider(default=GRANT)
        manifest = make_manifest(rng, app_id="app-0")
        broker.install_app(manifest, provider)
        for req in manifest.requirements:
            rule = broker.store.lookup("app-0", req.resource)
            handle = broker.request_access("app-0", req.resource, provider)
            expected = {
                GRANT: RealAccess,
                DENY: Refused,
                VIRTUAL: VirtualAccess,
            }[rule.status]
            assert type(handle) is expected

    @settings(deadline=None, max_examples=30)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_determinism_of_traffic(self, seed):
        first, _ = _random_traffic(seed)
        second, _ = _random_traffic(seed)
        assert first.metering == second.metering
        assert first.store.rule_map() == second.store.rule_map()
        assert [c for c in first.prompt_log] == [c for c in second.prompt_log]


class TestUnitCostAccrual:
    def test_times_accrue_with_configured_units(self):
        broker = Broker(
            store=RuleStore(),
            registry=build_profiles(0),
            real_provider=RealProvider(default_fixture()),
            unit_costs=UnitCosts(ui_s=2.0, pg_s=0.01, dba_s=0.05),
        )
        provider = ScriptedProvider(default=GRANT)
        broker.install_app(
            manifest_for((ResourceClass.CAMERA, Criticality.REQUIRED)), provider
        )
        broker.request_access("app-x", ResourceClass.CAMERA, provider)
        assert broker.metering.ui_time_s == pytest.approx(2.0)
        assert broker.metering.pg_time_s == pytest.approx(0.02)
        assert broker.metering.dba_time_s == pytest.approx(0.10)
