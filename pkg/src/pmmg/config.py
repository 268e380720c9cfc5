"""Runtime configuration for the CLI and the HTTP service.

Resolution order: explicit --config flag, then the PMMG_CONFIG environment
variable, then built-in defaults.  The file is a flat JSON object; every
field is optional and falls back to its default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .core import PermissionStatus, PmmgError

ENV_VAR = "PMMG_CONFIG"

DEFAULT_RULES_PATH = "rules.json"
DEFAULT_FIXTURE_PATH = "real_fixture.json"
DEFAULT_LISTEN = "127.0.0.1:8321"
DEFAULT_PROMPT_TIMEOUT_S = 60


class ConfigError(PmmgError):
    """The configuration file is missing, malformed, or invalid."""


@dataclass(frozen=True)
class Config:
    rules_path: str = DEFAULT_RULES_PATH
    fixture_path: str = DEFAULT_FIXTURE_PATH
    seed: int = 0
    prompt_timeout_s: int = DEFAULT_PROMPT_TIMEOUT_S
    listen_address: str = DEFAULT_LISTEN
    default_decision: PermissionStatus = PermissionStatus.DENY

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"listen_address {self.listen_address!r} is not host:port")
        return host, int(port)

    def to_json(self) -> dict[str, Any]:
        return {
            "rules_path": self.rules_path,
            "fixture_path": self.fixture_path,
            "seed": self.seed,
            "prompt_timeout_s": self.prompt_timeout_s,
            "listen_address": self.listen_address,
            "default_decision": self.default_decision.value,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Config":
        try:
            config = cls(
                rules_path=data.get("rules_path", DEFAULT_RULES_PATH),
                fixture_path=data.get("fixture_path", DEFAULT_FIXTURE_PATH),
                seed=int(data.get("seed", 0)),
                prompt_timeout_s=int(data.get("prompt_timeout_s", DEFAULT_PROMPT_TIMEOUT_S)),
                listen_address=data.get("listen_address", DEFAULT_LISTEN),
                default_decision=PermissionStatus(data.get("default_decision", "deny")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        problems = config.validate()
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))
        return config

    def validate(self) -> list[str]:
        problems = []
        if not self.rules_path:
            problems.append("rules_path must be non-empty")
        if not self.fixture_path:
            problems.append("fixture_path must be non-empty")
        if self.prompt_timeout_s <= 0:
            problems.append("prompt_timeout_s must be positive")
        return problems


def load_config(path: Optional[str] = None) -> Config:
    """Load configuration from the flag path, the env var, or defaults."""
    chosen = path or os.environ.get(ENV_VAR)
    if chosen is None:
        return Config()
    file_path = Path(chosen)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {file_path}")
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{file_path}: malformed JSON at line {exc.lineno} column {exc.colno}"
        ) from exc
    return Config.from_json(data)
