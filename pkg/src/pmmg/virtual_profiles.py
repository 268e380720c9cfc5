"""Seeded fake-resource providers with interface parity to the real ones.

A profile registry holds one virtual profile per resource class.  Every
response is a pure function of (registry seed, resource class, op index,
op arguments), produced from a counter-based stream keyed by those values,
so identical sessions replay bit-identically.

Fake payloads are structurally well-formed but deliberately disjoint from
the bundled real fixture: contact names and numbers come from invented
vocabularies the fixture never uses, and fake location fixes fall in a
far-away region.  Leakage of real data through a virtual session is
therefore detectable as a test failure.

Audio is fixed at 8000 Hz mono, one byte per sample; images are 8-bit
grayscale.  Realism is a non-goal; parity of tag and shape is the contract.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import json

from .core import (
    AudioBuffer,
    ByteBlob,
    CallLogQuery,
    CallList,
    CallRecord,
    CameraCapture,
    CodecError,
    ContactList,
    ContactRecord,
    ContactsQuery,
    ImageFrame,
    LocationFix,
    LocationRead,
    MessageList,
    MessageRecord,
    MessagesQuery,
    MicrophoneRead,
    NetworkInfo,
    NetworkList,
    PmmgError,
    ResourceClass,
    ResourceOp,
    ResourceResponse,
    StorageRead,
    WifiScan,
    _b64,
    _unb64,
)

SAMPLE_RATE_HZ = 8000

# Vocabulary for fake contact identities.  Kept disjoint by construction
# from anything in the default real fixture.
FAKE_FIRST_NAMES = (
    "Avisto", "Brelith", "Corvan", "Dathra", "Elvox", "Fenira", "Gorimund",
    "Hexley", "Ivarn", "Jorvika", "Kelvast", "Lumira", "Morvath", "Nexira",
    "Ostrella", "Pyxis", "Quorath", "Rivenna", "Sylvoro", "Tervalin",
)
FAKE_LAST_NAMES = (
    "Ardelane", "Bexworth", "Cryvalis", "Drothmere", "Evrandel", "Fyxton",
    "Gravenor", "Hollowick", "Ixhaven", "Jundrell", "Krystvane", "Lorvex",
)
FAKE_NUMBER_PREFIX = "+000-"

# Fake location fixes are confined to this empty-ocean box, far from any
# plausible fixture fix, so real/fake fixes can never be near-collisions.
FAKE_LAT_RANGE = (-55.0, -35.0)
FAKE_LON_RANGE = (-150.0, -90.0)

_CONTACT_BOOK_SIZE = 24
_MESSAGE_BOOK_SIZE = 30
_CALL_BOOK_SIZE = 20


class SessionMismatchError(PmmgError):
    """An op was routed to a session of a different resource class."""


class ProfileMissingError(PmmgError):
    """The registry has no profile for the requested resource class."""


# ---------------------------------------------------------------------------
# Keyed deterministic streams
# ---------------------------------------------------------------------------


def _derive_rng(seed: int, *parts: object) -> random.Random:
    """Deterministic RNG keyed by the seed plus arbitrary discriminators."""
    material = "|".join([str(seed), *(str(p) for p in parts)]).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _fake_contact_book(seed: int) -> tuple[ContactRecord, ...]:
    rng = _derive_rng(seed, ResourceClass.CONTACTS.value, "book")
    records = []
    for _ in range(_CONTACT_BOOK_SIZE):
        name = f"{rng.choice(FAKE_FIRST_NAMES)} {rng.choice(FAKE_LAST_NAMES)}"
        number = FAKE_NUMBER_PREFIX + "".join(str(rng.randrange(10)) for _ in range(7))
        records.append(ContactRecord(name=name, number=number))
    return tuple(records)


def _fake_message_book(seed: int) -> tuple[MessageRecord, ...]:
    rng = _derive_rng(seed, ResourceClass.MESSAGES.value, "book")
    contacts = _fake_contact_book(seed)
    words = ("ping", "later", "done", "soon", "call", "maybe", "sure", "sent")
    records = []
    for _ in range(_MESSAGE_BOOK_SIZE):
        body = " ".join(rng.choice(words) for _ in range(rng.randrange(2, 6)))
        records.append(
            MessageRecord(
                sender=rng.choice(contacts).name,
                body=body,
                at_tick=rng.randrange(0, 100_000),
            )
        )
    return tuple(sorted(records, key=lambda r: r.at_tick))


def _fake_call_book(seed: int) -> tuple[CallRecord, ...]:
    rng = _derive_rng(seed, ResourceClass.CALL_LOG.value, "book")
    contacts = _fake_contact_book(seed)
    records = []
    for _ in range(_CALL_BOOK_SIZE):
        records.append(
            CallRecord(
                number=rng.choice(contacts).number,
                duration_s=rng.randrange(5, 600),
                at_tick=rng.randrange(0, 100_000),
            )
        )
    return tuple(sorted(records, key=lambda r: r.at_tick))


# ---------------------------------------------------------------------------
# Sessions, profiles, registry
# ---------------------------------------------------------------------------


@dataclass
class VirtualSession:
    """Handle into one provider; op_counter increments by 1 per invoke."""

    session_id: str
    resource: ResourceClass
    op_counter: int = 0


@dataclass(frozen=True)
class VirtualProfile:
    """One fake provider; stream_key identifies its deterministic stream."""

    resource: ResourceClass
    stream_key: str


class ProfileRegistry:
    """All virtual profiles for one simulation, built from a single seed."""

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self.profiles: dict[ResourceClass, VirtualProfile] = {}
        self._ids = itertools.count()
        self._sessions: dict[str, VirtualSession] = {}

    def profile(self, resource: ResourceClass) -> VirtualProfile:
        try:
            return self.profiles[resource]
        except KeyError:
            raise ProfileMissingError(
                f"no virtual profile built for {resource.value}"
            ) from None

    def open_session(self, resource: ResourceClass) -> VirtualSession:
        self.profile(resource)
        session = VirtualSession(session_id=f"v{next(self._ids)}", resource=resource)
        self._sessions[session.session_id] = session
        return session

    def session(self, session_id: str) -> VirtualSession:
        return self._sessions[session_id]


def build_profiles(seed: int) -> ProfileRegistry:
    """Build one virtual profile per resource class (setup phase)."""
    registry = ProfileRegistry(seed)
    for resource in ResourceClass:
        key = hashlib.sha256(f"{seed}|{resource.value}".encode()).hexdigest()[:16]
        registry.profiles[resource] = VirtualProfile(resource=resource, stream_key=key)
    return registry


def open_session(registry: ProfileRegistry, resource: ResourceClass) -> VirtualSession:
    return registry.open_session(resource)


def invoke(
    registry: ProfileRegistry, session: VirtualSession, op: ResourceOp
) -> ResourceResponse:
    """Produce the fake response for one op and advance the session counter."""
    _check_routing(session, op)
    response = _generate(registry.seed, session.op_counter, op)
    session.op_counter += 1
    return response


def _check_routing(session: VirtualSession, op: ResourceOp) -> None:
    if op.resource is not session.resource:
        raise SessionMismatchError(
            f"{op.resource.value} op routed to a {session.resource.value} session "
            f"({session.session_id})"
        )


def _generate(seed: int, counter: int, op: ResourceOp) -> ResourceResponse:
    if isinstance(op, CameraCapture):
        rng = _derive_rng(seed, op.resource.value, counter)
        return ImageFrame(
            width=op.width,
            height=op.height,
            pixels=rng.randbytes(op.width * op.height),
        )
    if isinstance(op, MicrophoneRead):
        rng = _derive_rng(seed, op.resource.value, counter)
        n_samples = op.duration_ms * SAMPLE_RATE_HZ // 1000
        return AudioBuffer(sample_rate_hz=SAMPLE_RATE_HZ, samples=rng.randbytes(n_samples))
    if isinstance(op, ContactsQuery):
        book = _fake_contact_book(seed)
        return ContactList(
            records=tuple(r for r in book if r.name.startswith(op.prefix))
        )
    if isinstance(op, MessagesQuery):
        book = _fake_message_book(seed)
        return MessageList(
            records=tuple(r for r in book if r.at_tick >= op.since_tick)
        )
    if isinstance(op, CallLogQuery):
        book = _fake_call_book(seed)
        return CallList(records=tuple(r for r in book if r.at_tick >= op.since_tick))
    if isinstance(op, LocationRead):
        rng = _derive_rng(seed, op.resource.value, counter)
        return LocationFix(
            lat=round(rng.uniform(*FAKE_LAT_RANGE), 6),
            lon=round(rng.uniform(*FAKE_LON_RANGE), 6),
        )
    if isinstance(op, WifiScan):
        rng = _derive_rng(seed, op.resource.value, counter)
        networks = tuple(
            NetworkInfo(
                ssid=f"net-{rng.randrange(16**6):06x}",
                signal_dbm=-rng.randrange(30, 91),
            )
            for _ in range(rng.randrange(3, 7))
        )
        return NetworkList(networks=networks)
    if isinstance(op, StorageRead):
        # Keyed by path, not op index: the same file reads back identically.
        rng = _derive_rng(seed, op.resource.value, op.path)
        return ByteBlob(data=rng.randbytes(rng.randrange(64, 257)))
    raise SessionMismatchError(f"unsupported op type {type(op).__name__}")


# ---------------------------------------------------------------------------
# The simulated "real" provider, backed by a loaded fixture dataset
# ---------------------------------------------------------------------------


@dataclass
class RealFixture:
    """Static dataset the simulated real providers answer from."""

    contacts: tuple[ContactRecord, ...]
    messages: tuple[MessageRecord, ...]
    call_log: tuple[CallRecord, ...]
    location: LocationFix
    wifi_networks: tuple[NetworkInfo, ...]
    files: dict[str, bytes] = field(default_factory=dict)
    camera_pixel: int = 128
    microphone_sample: int = 96

    def to_json(self) -> dict[str, Any]:
        return {
            "contacts": [c.to_json() for c in self.contacts],
            "messages": [m.to_json() for m in self.messages],
            "call_log": [c.to_json() for c in self.call_log],
            "location": {"lat": self.location.lat, "lon": self.location.lon},
            "wifi_networks": [n.to_json() for n in self.wifi_networks],
            "files": {path: _b64(blob) for path, blob in sorted(self.files.items())},
            "camera_pixel": self.camera_pixel,
            "microphone_sample": self.microphone_sample,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RealFixture":
        try:
            return cls(
                contacts=tuple(
                    ContactRecord(name=c["name"], number=c["number"])
                    for c in data["contacts"]
                ),
                messages=tuple(
                    MessageRecord(sender=m["sender"], body=m["body"], at_tick=m["at_tick"])
                    for m in data["messages"]
                ),
                call_log=tuple(
                    CallRecord(
                        number=c["number"], duration_s=c["duration_s"], at_tick=c["at_tick"]
                    )
                    for c in data["call_log"]
                ),
                location=LocationFix(
                    lat=data["location"]["lat"], lon=data["location"]["lon"]
                ),
                wifi_networks=tuple(
                    NetworkInfo(ssid=n["ssid"], signal_dbm=n["signal_dbm"])
                    for n in data["wifi_networks"]
                ),
                files={path: _unb64(blob) for path, blob in data["files"].items()},
                camera_pixel=data["camera_pixel"],
                microphone_sample=data["microphone_sample"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CodecError(f"invalid fixture document: {exc!r}") from exc

    def save(self, path: str | Path) -> None:
        from .rule_store import dumps_canonical

        Path(path).write_text(dumps_canonical(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RealFixture":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def default_fixture() -> RealFixture:
    """The bundled device dataset used when no fixture file is supplied."""
    return RealFixture(
        contacts=(
            ContactRecord(name="Alice Hamdan", number="+970-2-2221001"),
            ContactRecord(name="Omar Khalil", number="+970-2-2221002"),
            ContactRecord(name="Lina Aburish", number="+970-59-8870045"),
        ),
        messages=(
            MessageRecord(sender="Alice Hamdan", body="meeting moved to 3pm", at_tick=1200),
            MessageRecord(sender="Omar Khalil", body="send me the report", at_tick=5400),
            MessageRecord(sender="Lina Aburish", body="happy birthday!", at_tick=9900),
        ),
        call_log=(
            CallRecord(number="+970-2-2221001", duration_s=145, at_tick=800),
            CallRecord(number="+970-59-8870045", duration_s=32, at_tick=7300),
        ),
        location=LocationFix(lat=31.53, lon=35.09),
        wifi_networks=(
            NetworkInfo(ssid="home-net", signal_dbm=-42),
            NetworkInfo(ssid="office-guest", signal_dbm=-68),
        ),
        files={
            "/documents/notes.txt": b"remember to renew the license\n",
            "/photos/index": b"IMG_0001,IMG_0002\n",
        },
    )


class RealProvider:
    """Session handling plus an invocation log over a RealFixture.

    The log exists so tests can assert the privacy invariant: no real
    invocation may ever occur for a pair governed by Deny or VirtualGrant.
    """

    def __init__(self, fixture: RealFixture) -> None:
        self.fixture = fixture
        self._ids = itertools.count()
        self._sessions: dict[str, VirtualSession] = {}
        self.invocations: list[tuple[ResourceClass, ResourceOp]] = []

    def open_session(self, resource: ResourceClass) -> VirtualSession:
        session = VirtualSession(session_id=f"r{next(self._ids)}", resource=resource)
        self._sessions[session.session_id] = session
        return session

    def session(self, session_id: str) -> VirtualSession:
        return self._sessions[session_id]

    def invoke(self, session: VirtualSession, op: ResourceOp) -> ResourceResponse:
        self.invocations.append((session.resource, op))
        return real_provider_invoke(self.fixture, session, op)


def real_provider_invoke(
    fixture: RealFixture, session: VirtualSession, op: ResourceOp
) -> ResourceResponse:
    """Answer one op from the fixture dataset; same contract as invoke()."""
    _check_routing(session, op)
    response = _answer_from_fixture(fixture, op)
    session.op_counter += 1
    return response


def _answer_from_fixture(fixture: RealFixture, op: ResourceOp) -> ResourceResponse:
    if isinstance(op, CameraCapture):
        return ImageFrame(
            width=op.width,
            height=op.height,
            pixels=bytes([fixture.camera_pixel]) * (op.width * op.height),
        )
    if isinstance(op, MicrophoneRead):
        n_samples = op.duration_ms * SAMPLE_RATE_HZ // 1000
        return AudioBuffer(
            sample_rate_hz=SAMPLE_RATE_HZ,
            samples=bytes([fixture.microphone_sample]) * n_samples,
        )
    if isinstance(op, ContactsQuery):
        return ContactList(
            records=tuple(r for r in fixture.contacts if r.name.startswith(op.prefix))
        )
    if isinstance(op, MessagesQuery):
        return MessageList(
            records=tuple(r for r in fixture.messages if r.at_tick >= op.since_tick)
        )
    if isinstance(op, CallLogQuery):
        return CallList(
            records=tuple(r for r in fixture.call_log if r.at_tick >= op.since_tick)
        )
    if isinstance(op, LocationRead):
        return fixture.location
    if isinstance(op, WifiScan):
        return NetworkList(networks=fixture.wifi_networks)
    if isinstance(op, StorageRead):
        return ByteBlob(data=fixture.files.get(op.path, b""))
    raise SessionMismatchError(f"unsupported op type {type(op).__name__}")


# ---------------------------------------------------------------------------
# Op catalog helpers (used by tests and the profile dump CLI)
# ---------------------------------------------------------------------------


def canonical_op(resource: ResourceClass, rng: Optional[random.Random] = None) -> ResourceOp:
    """A representative op for the class, optionally with randomized args."""
    rng = rng or random.Random(0)
    if resource is ResourceClass.CAMERA:
        return CameraCapture(width=rng.randrange(1, 9), height=rng.randrange(1, 9))
    if resource is ResourceClass.MICROPHONE:
        return MicrophoneRead(duration_ms=rng.randrange(0, 500))
    if resource is ResourceClass.CONTACTS:
        return ContactsQuery(prefix=rng.choice(["", "A", "B", "L"]))
    if resource is ResourceClass.MESSAGES:
        return MessagesQuery(since_tick=rng.randrange(0, 10_000))
    if resource is ResourceClass.CALL_LOG:
        return CallLogQuery(since_tick=rng.randrange(0, 10_000))
    if resource is ResourceClass.LOCATION:
        return LocationRead()
    if resource is ResourceClass.WIFI_STATE:
        return WifiScan()
    if resource is ResourceClass.STORAGE:
        return StorageRead(path=rng.choice(["/", "/documents/notes.txt", "/tmp/x"]))
    raise ProfileMissingError(f"no canonical op for {resource}")


def dump_profile(seed: int, resource: ResourceClass, count: int) -> list[dict[str, Any]]:
    """First ``count`` responses of a profile, as canonical JSON documents."""
    from .core import op_to_json, response_to_json

    registry = build_profiles(seed)
    session = registry.open_session(resource)
    docs = []
    for index in range(count):
        op = canonical_op(resource, random.Random(index))
        docs.append(
            {
                "op": op_to_json(op),
                "response": response_to_json(invoke(registry, session, op)),
            }
        )
    return docs
