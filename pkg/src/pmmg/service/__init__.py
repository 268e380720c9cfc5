"""HTTP control service wrapping the broker and simulator."""

from .app import build_runner, create_app
from .runner import SimulationRunner

__all__ = ["build_runner", "create_app", "SimulationRunner"]
