"""Virtual providers: determinism, interface parity, privacy disjointness."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from pmmg.core import (
    AudioBuffer,
    CameraCapture,
    ContactList,
    ContactsQuery,
    ImageFrame,
    LocationFix,
    LocationRead,
    MessagesQuery,
    MicrophoneRead,
    RESPONSE_TYPES,
    ResourceClass,
    StorageRead,
    response_to_json,
)
from pmmg.virtual_profiles import (
    FAKE_NUMBER_PREFIX,
    ProfileRegistry,
    RealProvider,
    SessionMismatchError,
    build_profiles,
    canonical_op,
    default_fixture,
    dump_profile,
    invoke,
    open_session,
    real_provider_invoke,
)

ALL_RESOURCES = list(ResourceClass)


def transcript(seed: int, resource: ResourceClass, ops) -> list[dict]:
    """Full-session transcript as canonical JSON for comparisons."""
    registry = build_profiles(seed)
    session = open_session(registry, resource)
    return [response_to_json(invoke(registry, session, op)) for op in ops]


class TestBuildProfiles:
    def test_registry_covers_all_eight_classes(self):
        registry = build_profiles(0)
        assert set(registry.profiles) == set(ALL_RESOURCES)

    def test_same_seed_yields_bit_identical_outputs(self):
        ops = [canonical_op(r, random.Random(3)) for r in ALL_RESOURCES]
        for resource, op in zip(ALL_RESOURCES, ops):
            assert transcript(42, resource, [op]) == transcript(42, resource, [op])

    def test_different_seeds_yield_different_contacts(self):
        one = transcript(1, ResourceClass.CONTACTS, [ContactsQuery(prefix="")])
        two = transcript(2, ResourceClass.CONTACTS, [ContactsQuery(prefix="")])
        assert one != two


class TestSessions:
    def test_fresh_session_starts_at_zero(self):
        registry = build_profiles(0)
        session = open_session(registry, ResourceClass.CAMERA)
        assert session.op_counter == 0

    def test_session_ids_are_unique(self):
        registry = build_profiles(0)
        a = open_session(registry, ResourceClass.CAMERA)
        b = open_session(registry, ResourceClass.CAMERA)
        assert a.session_id != b.session_id

    def test_one_session_per_class(self):
        registry = build_profiles(0)
        sessions = [open_session(registry, r) for r in ALL_RESOURCES]
        assert len({s.session_id for s in sessions}) == 8

    def test_op_counter_increments_by_one(self):
        registry = build_profiles(0)
        session = open_session(registry, ResourceClass.CAMERA)
        for expected in range(1, 4):
            invoke(registry, session, CameraCapture(width=1, height=1))
            assert session.op_counter == expected


class TestInvoke:
    def test_camera_frame_has_requested_shape(self):
        registry = build_profiles(5)
        session = open_session(registry, ResourceClass.CAMERA)
        frame = invoke(registry, session, CameraCapture(width=2, height=2))
        assert isinstance(frame, ImageFrame)
        assert len(frame.pixels) == 4
        # deterministic for the seed
        again = transcript(5, ResourceClass.CAMERA, [CameraCapture(width=2, height=2)])
        assert response_to_json(frame) == again[0]

    def test_contacts_query_filters_by_prefix(self):
        registry = build_profiles(5)
        session = open_session(registry, ResourceClass.CONTACTS)
        result = invoke(registry, session, ContactsQuery(prefix="A"))
        assert isinstance(result, ContactList)
        assert all(r.name.startswith("A") for r in result.records)

    def test_zero_duration_read_is_empty(self):
        registry = build_profiles(5)
        session = open_session(registry, ResourceClass.MICROPHONE)
        buf = invoke(registry, session, MicrophoneRead(duration_ms=0))
        assert isinstance(buf, AudioBuffer)
        assert buf.samples == b""

    def test_audio_length_matches_duration_at_declared_rate(self):
        registry = build_profiles(5)
        session = open_session(registry, ResourceClass.MICROPHONE)
        buf = invoke(registry, session, MicrophoneRead(duration_ms=250))
        assert buf.sample_rate_hz == 8000
        assert len(buf.samples) == 2000

    def test_class_mismatch_raises(self):
        registry = build_profiles(5)
        session = open_session(registry, ResourceClass.CONTACTS)
        with pytest.raises(SessionMismatchError):
            invoke(registry, session, CameraCapture(width=1, height=1))

    def test_location_fix_in_legal_range(self):
        registry = build_profiles(5)
        session = open_session(registry, ResourceClass.LOCATION)
        fix = invoke(registry, session, LocationRead())
        assert -90 <= fix.lat <= 90 and -180 <= fix.lon <= 180


class TestRealProvider:
    def test_contacts_echo_the_three_contact_fixture(self):
        fixture = default_fixture()
        provider = RealProvider(fixture)
        session = provider.open_session(ResourceClass.CONTACTS)
        result = provider.invoke(session, ContactsQuery(prefix=""))
        assert result.records == fixture.contacts
        assert len(result.records) == 3

    def test_location_echoes_the_fixture_fix(self):
        fixture = default_fixture()
        provider = RealProvider(fixture)
        session = provider.open_session(ResourceClass.LOCATION)
        fix = provider.invoke(session, LocationRead())
        assert (fix.lat, fix.lon) == (31.53, 35.09)

    def test_same_op_twice_is_identical(self):
        provider = RealProvider(default_fixture())
        session = provider.open_session(ResourceClass.MESSAGES)
        op = MessagesQuery(since_tick=0)
        assert provider.invoke(session, op) == provider.invoke(session, op)

    def test_invocations_are_logged(self):
        provider = RealProvider(default_fixture())
        session = provider.open_session(ResourceClass.STORAGE)
        provider.invoke(session, StorageRead(path="/photos/index"))
        assert [r for r, _ in provider.invocations] == [ResourceClass.STORAGE]

    def test_real_provider_invoke_checks_routing(self):
        fixture = default_fixture()
        provider = RealProvider(fixture)
        session = provider.open_session(ResourceClass.CAMERA)
        with pytest.raises(SessionMismatchError):
            real_provider_invoke(fixture, session, ContactsQuery(prefix=""))


class TestInterfaceParity:
    """Every op the real provider accepts, the virtual one must accept,
    answering with the identical tag and structural shape."""

    @settings(deadline=None, max_examples=80)
    @given(
        st.sampled_from(ALL_RESOURCES),
        st.integers(min_value=0, max_value=2**32),
    )
    def test_parity_across_the_op_catalog(self, resource, arg_seed):
        op = canonical_op(resource, random.Random(arg_seed))
        fixture = default_fixture()

        registry = build_profiles(11)
        virtual = invoke(registry, open_session(registry, resource), op)
        provider = RealProvider(fixture)
        real = real_provider_invoke(fixture, provider.open_session(resource), op)

        assert type(virtual) is type(real) is RESPONSE_TYPES[resource]
        if isinstance(virtual, ImageFrame):
            assert (virtual.width, virtual.height) == (real.width, real.height)
            assert len(virtual.pixels) == len(real.pixels) == op.width * op.height
        if isinstance(virtual, AudioBuffer):
            assert virtual.sample_rate_hz == real.sample_rate_hz == 8000
            assert len(virtual.samples) == len(real.samples)


class TestPrivacyDisjointness:
    @settings(deadline=None, max_examples=50)
    @given(st.integers(min_value=0, max_value=2**63 - 1))
    def test_fake_contacts_disjoint_from_fixture(self, seed):
        fixture = default_fixture()
        registry = build_profiles(seed)
        session = open_session(registry, ResourceClass.CONTACTS)
        fake = invoke(registry, session, ContactsQuery(prefix=""))
        real_names = {c.name for c in fixture.contacts}
        real_numbers = {c.number for c in fixture.contacts}
        assert {c.name for c in fake.records}.isdisjoint(real_names)
        assert {c.number for c in fake.records}.isdisjoint(real_numbers)
        assert all(c.number.startswith(FAKE_NUMBER_PREFIX) for c in fake.records)

    @settings(deadline=None, max_examples=50)
    @given(st.integers(min_value=0, max_value=2**63 - 1))
    def test_fake_location_never_near_fixture_fix(self, seed):
        fixture = default_fixture()
        registry = build_profiles(seed)
        session = open_session(registry, ResourceClass.LOCATION)
        for _ in range(5):
            fix = invoke(registry, session, LocationRead())
            assert max(
                abs(fix.lat - fixture.location.lat),
                abs(fix.lon - fixture.location.lon),
            ) >= 1.0


class TestDeterminism:
    @settings(deadline=None, max_examples=40)
    @given(
        st.sampled_from(ALL_RESOURCES),
        st.integers(min_value=0, max_value=2**32),
        st.lists(st.integers(min_value=0, max_value=2**32), min_size=1, max_size=6),
    )
    def test_transcript_pure_in_seed_resource_and_ops(self, resource, seed, arg_seeds):
        ops = [canonical_op(resource, random.Random(s)) for s in arg_seeds]
        assert transcript(seed, resource, ops) == transcript(seed, resource, ops)

    def test_storage_reads_stable_per_path(self):
        registry = build_profiles(9)
        session = open_session(registry, ResourceClass.STORAGE)
        first = invoke(registry, session, StorageRead(path="/a/b"))
        second = invoke(registry, session, StorageRead(path="/a/b"))
        assert first == second


class TestFixturePersistence:
    def test_fixture_round_trip(self, tmp_path):
        fixture = default_fixture()
        path = tmp_path / "real_fixture.json"
        fixture.save(path)
        loaded = type(fixture).load(path)
        assert loaded == fixture


def test_dump_profile_yields_requested_count():
    docs = dump_profile(3, ResourceClass.WIFI_STATE, 4)
    assert len(docs) == 4
    assert all(d["response"]["kind"] == "network_list" for d in docs)
