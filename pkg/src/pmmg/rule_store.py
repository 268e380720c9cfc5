"""Persistent, keyed store of permission rules with an append-only audit log.

Rules are keyed by (app_id, resource); every mutation appends exactly one
audit event, so replaying the audit log from an empty store reproduces the
final rule map.  Stale writes (a decided_at older than the stored rule's)
are rejected rather than silently ignored - that surfaces simulator bugs
early.

Persistence is a single JSON document ``{"rules": [...], "audit": [...]}``
using the canonical encodings from :mod:`pmmg.core`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional

from .core import CodecError, PmmgError, ResourceClass, Rule


class StaleWriteError(PmmgError):
    """An upsert carried a decided_at older than the stored rule's."""


class StoreFormatError(PmmgError):
    """A rules file failed to parse; the message carries diagnostics."""


class EventKind(str, Enum):
    INSERTED = "inserted"
    UPDATED = "updated"
    DELETED = "deleted"


@dataclass(frozen=True)
class RuleEvent:
    """One audit record: Inserted has no before, Deleted has no after."""

    at: int
    kind: EventKind
    before: Optional[Rule]
    after: Optional[Rule]

    def to_json(self) -> dict[str, Any]:
        return {
            "at": self.at,
            "kind": self.kind.value,
            "before": self.before.to_json() if self.before else None,
            "after": self.after.to_json() if self.after else None,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RuleEvent":
        try:
            return cls(
                at=data["at"],
                kind=EventKind(data["kind"]),
                before=Rule.from_json(data["before"]) if data.get("before") else None,
                after=Rule.from_json(data["after"]) if data.get("after") else None,
            )
        except CodecError:
            raise
        except (KeyError, ValueError) as exc:
            raise CodecError(f"invalid rule event document: {exc!r}") from exc


class RuleStore:
    """In-memory rule map plus audit trail.

    Not internally synchronized: callers hold exclusive access for
    mutation (the owning broker serializes writes).
    """

    def __init__(self) -> None:
        self._rules: dict[tuple[str, ResourceClass], Rule] = {}
        self._audit: list[RuleEvent] = []

    # -- queries ------------------------------------------------------------

    def lookup(self, app_id: str, resource: ResourceClass) -> Optional[Rule]:
        return self._rules.get((app_id, resource))

    def list_rules(self, app_id: Optional[str] = None) -> list[Rule]:
        """All rules in canonical (app_id, resource) order, optionally one app's."""
        rules = [
            rule
            for rule in self._rules.values()
            if app_id is None or rule.app_id == app_id
        ]
        rules.sort(key=lambda r: (r.app_id, r.resource.value))
        return rules

    @property
    def audit(self) -> tuple[RuleEvent, ...]:
        return tuple(self._audit)

    def rule_map(self) -> dict[tuple[str, ResourceClass], Rule]:
        return dict(self._rules)

    def __len__(self) -> int:
        return len(self._rules)

    # -- mutations ----------------------------------------------------------

    def upsert(self, rule: Rule) -> Optional[Rule]:
        """Insert or replace the rule under its key; returns the displaced rule.

        Raises StaleWriteError when rule.decided_at is older than the stored
        entry's, leaving the store untouched.
        """
        previous = self._rules.get(rule.key())
        if previous is not None and rule.decided_at < previous.decided_at:
            raise StaleWriteError(
                f"stale write for {rule.app_id}/{rule.resource.value}: "
                f"decided_at {rule.decided_at} < stored {previous.decided_at}"
            )
        self._rules[rule.key()] = rule
        kind = EventKind.INSERTED if previous is None else EventKind.UPDATED
        self._audit.append(
            RuleEvent(at=rule.decided_at, kind=kind, before=previous, after=rule)
        )
        return previous

    def delete(self, app_id: str, resource: ResourceClass) -> Optional[Rule]:
        """Remove the rule for the pair; appends a Deleted event iff one existed."""
        removed = self._rules.pop((app_id, resource), None)
        if removed is not None:
            self._audit.append(
                RuleEvent(
                    at=removed.decided_at,
                    kind=EventKind.DELETED,
                    before=removed,
                    after=None,
                )
            )
        return removed

    # -- replay and persistence ----------------------------------------------

    @staticmethod
    def replay(events: Iterable[RuleEvent]) -> dict[tuple[str, ResourceClass], Rule]:
        """Rebuild the rule map an audit log describes, from an empty store."""
        rules: dict[tuple[str, ResourceClass], Rule] = {}
        for event in events:
            if event.kind is EventKind.DELETED:
                assert event.before is not None
                rules.pop(event.before.key(), None)
            else:
                assert event.after is not None
                rules[event.after.key()] = event.after
        return rules

    def to_json(self) -> dict[str, Any]:
        return {
            "rules": [r.to_json() for r in self.list_rules()],
            "audit": [e.to_json() for e in self._audit],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RuleStore":
        store = cls()
        try:
            for doc in data["rules"]:
                rule = Rule.from_json(doc)
                store._rules[rule.key()] = rule
            store._audit = [RuleEvent.from_json(doc) for doc in data["audit"]]
        except CodecError:
            raise
        except (KeyError, TypeError) as exc:
            raise CodecError(f"invalid rule store document: {exc!r}") from exc
        return store

    def save(self, path: str | Path) -> None:
        Path(path).write_text(dumps_canonical(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RuleStore":
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StoreFormatError(
                f"{path}: malformed JSON at line {exc.lineno} column {exc.colno} "
                f"(offset {exc.pos})"
            ) from exc
        try:
            return cls.from_json(data)
        except CodecError as exc:
            raise StoreFormatError(f"{path}: {exc}") from exc

    def equal_state(self, other: "RuleStore") -> bool:
        """Field-wise equality of rules and audit, the round-trip oracle."""
        return self._rules == other._rules and self._audit == other._audit


def dumps_canonical(doc: Any) -> str:
    """Canonical file rendering: 2-space indent, stable key order, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
