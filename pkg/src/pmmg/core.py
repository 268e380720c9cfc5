"""Shared domain vocabulary for the permission mediation broker.

Resources, permission statuses, rules, app manifests, session scripts and
access handles, together with their canonical JSON encodings.  Every other
module builds on these types; the JSON encodings (lower_snake_case field
names, enumerations as strings) are the persistence and wire format of the
whole system.

All types here are immutable values: safe to copy, hash and share freely.
Timestamps are logical simulation ticks (monotone integers), never wall
clock, so that full runs replay deterministically.
"""

from __future__ import annotations

import base64
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, ClassVar, Union


class PmmgError(Exception):
    """Base class for all errors raised by this package."""


class CodecError(PmmgError, ValueError):
    """A JSON document does not match the canonical encoding."""


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


class ResourceClass(str, Enum):
    """The closed set of mediated resources.

    Camera/Microphone/Contacts/Messages/CallLog/WifiState are the classic
    sensitive mobile resources; Location and Storage are added as plumbing
    to round out the catalog.  Extending the set is a code change.
    """

    CAMERA = "camera"
    MICROPHONE = "microphone"
    CONTACTS = "contacts"
    MESSAGES = "messages"
    CALL_LOG = "call_log"
    LOCATION = "location"
    WIFI_STATE = "wifi_state"
    STORAGE = "storage"


class PermissionStatus(str, Enum):
    """Three-valued permission decision: no partial or scoped grants."""

    GRANT = "grant"
    DENY = "deny"
    VIRTUAL_GRANT = "virtual_grant"


class RuleOrigin(str, Enum):
    """How a rule entered the rule base."""

    USER_PROMPT = "user_prompt"
    USER_EDIT = "user_edit"
    IMPORT = "import"


class Criticality(str, Enum):
    """Whether an app can keep running when the resource is refused."""

    REQUIRED = "required"
    OPTIONAL = "optional"


# ---------------------------------------------------------------------------
# Rules and requirements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """One learned (app, resource) -> status entry with provenance.

    (app_id, resource) is the unique key; decided_at must never decrease
    across updates to the same key.
    """

    app_id: str
    resource: ResourceClass
    status: PermissionStatus
    decided_at: int
    origin: RuleOrigin

    def key(self) -> tuple[str, ResourceClass]:
        return (self.app_id, self.resource)

    def to_json(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "resource": self.resource.value,
            "status": self.status.value,
            "decided_at": self.decided_at,
            "origin": self.origin.value,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Rule":
        try:
            return cls(
                app_id=_expect_str(data, "app_id"),
                resource=ResourceClass(data["resource"]),
                status=PermissionStatus(data["status"]),
                decided_at=_expect_int(data, "decided_at"),
                origin=RuleOrigin(data["origin"]),
            )
        except (KeyError, ValueError) as exc:
            raise CodecError(f"invalid rule document: {exc!r}") from exc


@dataclass(frozen=True)
class PermissionRequirement:
    """One declared permission need of an app manifest."""

    resource: ResourceClass
    criticality: Criticality

    def to_json(self) -> dict[str, Any]:
        return {"resource": self.resource.value, "criticality": self.criticality.value}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PermissionRequirement":
        try:
            return cls(
                resource=ResourceClass(data["resource"]),
                criticality=Criticality(data["criticality"]),
            )
        except (KeyError, ValueError) as exc:
            raise CodecError(f"invalid requirement document: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Resource operations (requests an app issues against a resource)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CameraCapture:
    resource: ClassVar[ResourceClass] = ResourceClass.CAMERA
    kind: ClassVar[str] = "capture"
    width: int
    height: int


@dataclass(frozen=True)
class MicrophoneRead:
    resource: ClassVar[ResourceClass] = ResourceClass.MICROPHONE
    kind: ClassVar[str] = "read"
    duration_ms: int


@dataclass(frozen=True)
class ContactsQuery:
    resource: ClassVar[ResourceClass] = ResourceClass.CONTACTS
    kind: ClassVar[str] = "query"
    prefix: str = ""


@dataclass(frozen=True)
class MessagesQuery:
    resource: ClassVar[ResourceClass] = ResourceClass.MESSAGES
    kind: ClassVar[str] = "query"
    since_tick: int = 0


@dataclass(frozen=True)
class CallLogQuery:
    resource: ClassVar[ResourceClass] = ResourceClass.CALL_LOG
    kind: ClassVar[str] = "query"
    since_tick: int = 0


@dataclass(frozen=True)
class LocationRead:
    resource: ClassVar[ResourceClass] = ResourceClass.LOCATION
    kind: ClassVar[str] = "read"


@dataclass(frozen=True)
class WifiScan:
    resource: ClassVar[ResourceClass] = ResourceClass.WIFI_STATE
    kind: ClassVar[str] = "scan"


@dataclass(frozen=True)
class StorageRead:
    resource: ClassVar[ResourceClass] = ResourceClass.STORAGE
    kind: ClassVar[str] = "read"
    path: str = "/"


ResourceOp = Union[
    CameraCapture,
    MicrophoneRead,
    ContactsQuery,
    MessagesQuery,
    CallLogQuery,
    LocationRead,
    WifiScan,
    StorageRead,
]

_OP_TYPES: dict[ResourceClass, type] = {
    ResourceClass.CAMERA: CameraCapture,
    ResourceClass.MICROPHONE: MicrophoneRead,
    ResourceClass.CONTACTS: ContactsQuery,
    ResourceClass.MESSAGES: MessagesQuery,
    ResourceClass.CALL_LOG: CallLogQuery,
    ResourceClass.LOCATION: LocationRead,
    ResourceClass.WIFI_STATE: WifiScan,
    ResourceClass.STORAGE: StorageRead,
}


def op_to_json(op: ResourceOp) -> dict[str, Any]:
    doc: dict[str, Any] = {"resource": op.resource.value, "kind": op.kind}
    for f in dataclasses.fields(op):
        doc[f.name] = getattr(op, f.name)
    return doc


def op_from_json(data: dict[str, Any]) -> ResourceOp:
    try:
        resource = ResourceClass(data["resource"])
        op_type = _OP_TYPES[resource]
        if data.get("kind") != op_type.kind:
            raise CodecError(
                f"op kind {data.get('kind')!r} does not belong to resource {resource.value!r}"
            )
        kwargs = {
            f.name: data[f.name] for f in dataclasses.fields(op_type) if f.name in data
        }
        return op_type(**kwargs)
    except CodecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CodecError(f"invalid resource op document: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Resource responses (what a provider, real or virtual, hands back)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImageFrame:
    kind: ClassVar[str] = "image_frame"
    width: int
    height: int
    pixels: bytes  # 8-bit grayscale, width*height bytes


@dataclass(frozen=True)
class AudioBuffer:
    kind: ClassVar[str] = "audio_buffer"
    sample_rate_hz: int
    samples: bytes  # one byte per sample, mono


@dataclass(frozen=True)
class ContactRecord:
    name: str
    number: str

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "number": self.number}


@dataclass(frozen=True)
class ContactList:
    kind: ClassVar[str] = "contact_list"
    records: tuple[ContactRecord, ...]


@dataclass(frozen=True)
class MessageRecord:
    sender: str
    body: str
    at_tick: int

    def to_json(self) -> dict[str, Any]:
        return {"sender": self.sender, "body": self.body, "at_tick": self.at_tick}


@dataclass(frozen=True)
class MessageList:
    kind: ClassVar[str] = "message_list"
    records: tuple[MessageRecord, ...]


@dataclass(frozen=True)
class CallRecord:
    number: str
    duration_s: int
    at_tick: int

    def to_json(self) -> dict[str, Any]:
        return {
            "number": self.number,
            "duration_s": self.duration_s,
            "at_tick": self.at_tick,
        }


@dataclass(frozen=True)
class CallList:
    kind: ClassVar[str] = "call_list"
    records: tuple[CallRecord, ...]


@dataclass(frozen=True)
class LocationFix:
    kind: ClassVar[str] = "location_fix"
    lat: float  # [-90, 90]
    lon: float  # [-180, 180]


@dataclass(frozen=True)
class NetworkInfo:
    ssid: str
    signal_dbm: int

    def to_json(self) -> dict[str, Any]:
        return {"ssid": self.ssid, "signal_dbm": self.signal_dbm}


@dataclass(frozen=True)
class NetworkList:
    kind: ClassVar[str] = "network_list"
    networks: tuple[NetworkInfo, ...]


@dataclass(frozen=True)
class ByteBlob:
    kind: ClassVar[str] = "byte_blob"
    data: bytes


ResourceResponse = Union[
    ImageFrame,
    AudioBuffer,
    ContactList,
    MessageList,
    CallList,
    LocationFix,
    NetworkList,
    ByteBlob,
]

#: Response type each resource class must produce (interface parity contract).
RESPONSE_TYPES: dict[ResourceClass, type] = {
    ResourceClass.CAMERA: ImageFrame,
    ResourceClass.MICROPHONE: AudioBuffer,
    ResourceClass.CONTACTS: ContactList,
    ResourceClass.MESSAGES: MessageList,
    ResourceClass.CALL_LOG: CallList,
    ResourceClass.LOCATION: LocationFix,
    ResourceClass.WIFI_STATE: NetworkList,
    ResourceClass.STORAGE: ByteBlob,
}


def response_to_json(resp: ResourceResponse) -> dict[str, Any]:
    if isinstance(resp, ImageFrame):
        return {
            "kind": resp.kind,
            "width": resp.width,
            "height": resp.height,
            "pixels": _b64(resp.pixels),
        }
    if isinstance(resp, AudioBuffer):
        return {
            "kind": resp.kind,
            "sample_rate_hz": resp.sample_rate_hz,
            "samples": _b64(resp.samples),
        }
    if isinstance(resp, ContactList):
        return {"kind": resp.kind, "records": [r.to_json() for r in resp.records]}
    if isinstance(resp, MessageList):
        return {"kind": resp.kind, "records": [r.to_json() for r in resp.records]}
    if isinstance(resp, CallList):
        return {"kind": resp.kind, "records": [r.to_json() for r in resp.records]}
    if isinstance(resp, LocationFix):
        return {"kind": resp.kind, "lat": resp.lat, "lon": resp.lon}
    if isinstance(resp, NetworkList):
        return {"kind": resp.kind, "networks": [n.to_json() for n in resp.networks]}
    if isinstance(resp, ByteBlob):
        return {"kind": resp.kind, "data": _b64(resp.data)}
    raise CodecError(f"unknown response type {type(resp).__name__}")


def response_from_json(data: dict[str, Any]) -> ResourceResponse:
    try:
        kind = data["kind"]
        if kind == ImageFrame.kind:
            return ImageFrame(
                width=data["width"], height=data["height"], pixels=_unb64(data["pixels"])
            )
        if kind == AudioBuffer.kind:
            return AudioBuffer(
                sample_rate_hz=data["sample_rate_hz"], samples=_unb64(data["samples"])
            )
        if kind == ContactList.kind:
            return ContactList(
                records=tuple(
                    ContactRecord(name=r["name"], number=r["number"])
                    for r in data["records"]
                )
            )
        if kind == MessageList.kind:
            return MessageList(
                records=tuple(
                    MessageRecord(sender=r["sender"], body=r["body"], at_tick=r["at_tick"])
                    for r in data["records"]
                )
            )
        if kind == CallList.kind:
            return CallList(
                records=tuple(
                    CallRecord(
                        number=r["number"],
                        duration_s=r["duration_s"],
                        at_tick=r["at_tick"],
                    )
                    for r in data["records"]
                )
            )
        if kind == LocationFix.kind:
            return LocationFix(lat=data["lat"], lon=data["lon"])
        if kind == NetworkList.kind:
            return NetworkList(
                networks=tuple(
                    NetworkInfo(ssid=n["ssid"], signal_dbm=n["signal_dbm"])
                    for n in data["networks"]
                )
            )
        if kind == ByteBlob.kind:
            return ByteBlob(data=_unb64(data["data"]))
        raise CodecError(f"unknown response kind {kind!r}")
    except CodecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CodecError(f"invalid response document: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Session scripts and app manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptStep:
    """One timed resource operation inside an app session."""

    resource: ResourceClass
    op: ResourceOp
    at_offset_s: int

    def to_json(self) -> dict[str, Any]:
        return {
            "resource": self.resource.value,
            "op": op_to_json(self.op),
            "at_offset_s": self.at_offset_s,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ScriptStep":
        try:
            return cls(
                resource=ResourceClass(data["resource"]),
                op=op_from_json(data["op"]),
                at_offset_s=_expect_int(data, "at_offset_s"),
            )
        except CodecError:
            raise
        except (KeyError, ValueError) as exc:
            raise CodecError(f"invalid script step document: {exc!r}") from exc


@dataclass(frozen=True)
class SessionScript:
    """Scripted sequence of timed resource operations for one app session.

    Offsets are non-decreasing and never exceed duration_s.
    """

    steps: tuple[ScriptStep, ...] = ()
    duration_s: int = 0

    def touched_resources(self) -> list[ResourceClass]:
        """Distinct resources the script touches, in first-touch order."""
        seen: list[ResourceClass] = []
        for step in self.steps:
            if step.resource not in seen:
                seen.append(step.resource)
        return seen

    def to_json(self) -> dict[str, Any]:
        return {
            "steps": [s.to_json() for s in self.steps],
            "duration_s": self.duration_s,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SessionScript":
        try:
            return cls(
                steps=tuple(ScriptStep.from_json(s) for s in data["steps"]),
                duration_s=_expect_int(data, "duration_s"),
            )
        except CodecError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CodecError(f"invalid session script document: {exc!r}") from exc


@dataclass(frozen=True)
class AppManifest:
    """A synthetic app: declared permission needs plus a scripted session."""

    app_id: str
    display_name: str
    requirements: tuple[PermissionRequirement, ...] = ()
    script: SessionScript = field(default_factory=SessionScript)

    def declared_resources(self) -> set[ResourceClass]:
        return {req.resource for req in self.requirements}

    def criticality_of(self, resource: ResourceClass) -> Criticality | None:
        for req in self.requirements:
            if req.resource == resource:
                return req.criticality
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "display_name": self.display_name,
            "requirements": [r.to_json() for r in self.requirements],
            "script": self.script.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "AppManifest":
        try:
            return cls(
                app_id=_expect_str(data, "app_id"),
                display_name=_expect_str(data, "display_name"),
                requirements=tuple(
                    PermissionRequirement.from_json(r) for r in data["requirements"]
                ),
                script=SessionScript.from_json(data["script"]),
            )
        except CodecError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CodecError(f"invalid manifest document: {exc!r}") from exc


def validate_manifest(manifest: AppManifest) -> list[str]:
    """Check every manifest invariant; returns the list of violations.

    An empty list means the manifest is valid.  Violations are data, not
    errors: callers decide whether to refuse the manifest.
    """
    violations: list[str] = []
    if not manifest.app_id:
        violations.append("empty app_id")

    seen: set[ResourceClass] = set()
    for req in manifest.requirements:
        if req.resource in seen:
            violations.append(f"duplicate requirement {req.resource.value}")
        seen.add(req.resource)

    declared = manifest.declared_resources()
    reported_undeclared: set[ResourceClass] = set()
    for step in manifest.script.steps:
        if step.resource not in declared and step.resource not in reported_undeclared:
            violations.append(f"undeclared resource {step.resource.value}")
            reported_undeclared.add(step.resource)
        if step.op.resource is not step.resource:
            violations.append(
                f"step op targets {step.op.resource.value}, step declares {step.resource.value}"
            )

    last_offset = 0
    for step in manifest.script.steps:
        if step.at_offset_s < last_offset:
            violations.append(f"step offsets decrease at {step.at_offset_s}")
        last_offset = max(last_offset, step.at_offset_s)
        if step.at_offset_s > manifest.script.duration_s:
            violations.append(
                f"step offset {step.at_offset_s} exceeds duration {manifest.script.duration_s}"
            )
        if step.at_offset_s < 0:
            violations.append(f"negative step offset {step.at_offset_s}")
    return violations


# ---------------------------------------------------------------------------
# Access handles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealAccess:
    kind: ClassVar[str] = "real_access"
    resource: ResourceClass
    session_id: str


@dataclass(frozen=True)
class VirtualAccess:
    kind: ClassVar[str] = "virtual_access"
    resource: ResourceClass
    session_id: str


@dataclass(frozen=True)
class Refused:
    kind: ClassVar[str] = "refused"
    resource: ResourceClass


AccessHandle = Union[RealAccess, VirtualAccess, Refused]


def handle_to_json(handle: AccessHandle) -> dict[str, Any]:
    doc: dict[str, Any] = {"kind": handle.kind, "resource": handle.resource.value}
    if isinstance(handle, (RealAccess, VirtualAccess)):
        doc["session_id"] = handle.session_id
    return doc


def handle_from_json(data: dict[str, Any]) -> AccessHandle:
    try:
        kind = data["kind"]
        resource = ResourceClass(data["resource"])
        if kind == RealAccess.kind:
            return RealAccess(resource=resource, session_id=data["session_id"])
        if kind == VirtualAccess.kind:
            return VirtualAccess(resource=resource, session_id=data["session_id"])
        if kind == Refused.kind:
            return Refused(resource=resource)
        raise CodecError(f"unknown handle kind {kind!r}")
    except CodecError:
        raise
    except (KeyError, ValueError) as exc:
        raise CodecError(f"invalid handle document: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------


def _b64(raw: bytes) -> str:
    return base64.b64encode(raw).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"), validate=True)


def _expect_str(data: dict[str, Any], key: str) -> str:
    value = data[key]
    if not isinstance(value, str):
        raise CodecError(f"field {key!r} must be a string, got {type(value).__name__}")
    return value


def _expect_int(data: dict[str, Any], key: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise CodecError(f"field {key!r} must be an integer, got {type(value).__name__}")
    return value
