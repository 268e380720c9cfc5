"""Shared fixtures and random-value generators for the test suite."""

from __future__ import annotations

import random

import pytest

from pmmg.broker import Broker, ScriptedProvider
from pmmg.core import (
    AppManifest,
    Criticality,
    PermissionRequirement,
    PermissionStatus,
    ResourceClass,
    Rule,
    RuleOrigin,
    ScriptStep,
    SessionScript,
)
from pmmg.rule_store import RuleStore
from pmmg.virtual_profiles import RealProvider, build_profiles, canonical_op, default_fixture

RESOURCES = list(ResourceClass)
STATUSES = list(PermissionStatus)
ORIGINS = list(RuleOrigin)


def make_rule(rng: random.Random, app_id: str | None = None, decided_at: int | None = None) -> Rule:
    return Rule(
        app_id=app_id or f"app-{rng.randrange(100)}",
        resource=rng.choice(RESOURCES),
        status=rng.choice(STATUSES),
        decided_at=decided_at if decided_at is not None else rng.randrange(100_000),
        origin=rng.choice(ORIGINS),
    )


def make_manifest(
    rng: random.Random,
    app_id: str,
    n_resources: int | None = None,
    duration_s: int = 120,
) -> AppManifest:
    count = n_resources if n_resources is not None else rng.randrange(1, 5)
    resources = rng.sample(RESOURCES, count)
    requirements = tuple(
        PermissionRequirement(
            resource=r,
            criticality=rng.choice((Criticality.REQUIRED, Criticality.OPTIONAL)),
        )
        for r in resources
    )
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
    return AppManifest(
        app_id=app_id,
        display_name=f"App {app_id}",
        requirements=requirements,
        script=SessionScript(steps=tuple(steps), duration_s=duration_s),
    )


def make_broker(seed: int = 0) -> Broker:
    return Broker(
        store=RuleStore(),
        registry=build_profiles(seed),
        real_provider=RealProvider(default_fixture()),
    )


@pytest.fixture
def broker() -> Broker:
    return make_broker()


@pytest.fixture
def grant_all() -> ScriptedProvider:
    return ScriptedProvider(default=PermissionStatus.GRANT)


@pytest.fixture
def deny_all() -> ScriptedProvider:
    return ScriptedProvider(default=PermissionStatus.DENY)


@pytest.fixture
def virtualize_all() -> ScriptedProvider:
    return ScriptedProvider(default=PermissionStatus.VIRTUAL_GRANT)
