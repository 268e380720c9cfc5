"""HTTP control service: rules CRUD, live prompt stream, stepped simulation.

The service owns one broker and one step-driven day simulation.  Prompts
flow out over a server-sent-event stream; answers flow back over plain
POSTs; the simulation advances only via explicit /step calls (or the
real-time auto pacer).  The HTTP layer adds no semantics of its own: every
mutation delegates to the same library calls the CLI uses.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Iterator, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse

from ..broker import Broker, RuleNotFoundError
from ..config import Config
from ..core import ResourceClass
from ..rule_store import RuleStore, StaleWriteError
from ..virtual_profiles import RealFixture, RealProvider, build_profiles, default_fixture
from ..workload import DayPlan
from .runner import (
    Phase,
    PromptGoneError,
    PromptNotFoundError,
    PromptState,
    RunnerStalledError,
    SimulationRunner,
)
from .schemas import (
    PromptAnswerIn,
    RuleEditIn,
    RuleOut,
    SimulationStateOut,
    StepOut,
)


def build_runner(config: Config, plan: DayPlan) -> SimulationRunner:
    """Assemble store, profiles, fixture and broker per the configuration."""
    rules_path = Path(config.rules_path)
    store = RuleStore.load(rules_path) if rules_path.exists() else RuleStore()
    fixture_path = Path(config.fixture_path)
    fixture = (
        RealFixture.load(fixture_path) if fixture_path.exists() else default_fixture()
    )
    broker = Broker(
        store=store,
        registry=build_profiles(config.seed),
        real_provider=RealProvider(fixture),
    )

    def persist_rules(_metrics) -> None:
        store.save(rules_path)

    return SimulationRunner(
        plan=plan,
        broker=broker,
        default_decision=config.default_decision,
        prompt_timeout_s=config.prompt_timeout_s,
        on_complete=persist_rules,
    )


def auto_pacer(runner: SimulationRunner, pace_s: float = 0.5) -> None:
    """Real-time pacing loop: steps continuously, waiting out pending
    prompts for the configured timeout (one simulated second per wall
    second) before letting a step expire them."""
    last_prompt_id: Optional[str] = None
    prompt_wall_start = 0.0
    while runner.phase not in (Phase.COMPLETED, Phase.FAILED):
        pending = runner.current_prompt
        if pending is not None and pending.state is PromptState.PENDING:
            if pending.prompt_id != last_prompt_id:
                last_prompt_id = pending.prompt_id
                prompt_wall_start = time.monotonic()
            if time.monotonic() - prompt_wall_start < runner.prompt_timeout_s:
                time.sleep(0.1)
                continue
        try:
            runner.step()
        except RunnerStalledError:
            return
        time.sleep(pace_s)


def locate_console() -> Optional[Path]:
    """The built browser console, when running from a source checkout."""
    candidate = Path(__file__).resolve().parents[3] / "frontend"
    if (candidate / "index.html").exists():
        return candidate
    return None


def create_app(
    config: Config,
    plan: DayPlan,
    auto: bool = False,
    console_dir: Optional[Path] = None,
) -> FastAPI:
    runner = build_runner(config, plan)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if auto:
            threading.Thread(target=auto_pacer, args=(runner,), daemon=True).start()
        yield

    app = FastAPI(title="pmmg control service", lifespan=lifespan)
    app.state.runner = runner

    @app.exception_handler(RequestValidationError)
    async def malformed_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    def parse_resource(value: str) -> ResourceClass:
        try:
            return ResourceClass(value)
        except ValueError:
            raise HTTPException(status_code=404, detail=f"unknown resource {value!r}")

    # -- rules ------------------------------------------------------------------

    @app.get("/api/rules", response_model=list[RuleOut])
    def list_rules(app_id: Optional[str] = None, app: Optional[str] = None):
        wanted = app_id or app
        return [r.to_json() for r in runner.list_rules(wanted)]

    @app.put("/api/rules/{app_id}/{resource}", response_model=RuleOut)
    def edit_rule(app_id: str, resource: str, body: RuleEditIn):
        try:
            rule = runner.edit_rule(app_id, parse_resource(resource), body.status)
        except RuleNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except StaleWriteError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return rule.to_json()

    # -- prompts ----------------------------------------------------------------

    @app.get("/api/prompts/stream")
    def prompt_stream() -> StreamingResponse:
        def events() -> Iterator[str]:
            subscription = runner.subscribe()
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        event, payload = subscription.get(timeout=0.25)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"event: {event}\ndata: {json.dumps(payload)}\n\n"
            finally:
                runner.unsubscribe(subscription)

        return StreamingResponse(events(), media_type="text/event-stream")

    @app.post("/api/prompts/{prompt_id}/answer")
    def answer_prompt(prompt_id: str, body: PromptAnswerIn):
        try:
            pending = runner.answer_prompt(prompt_id, body.status)
        except PromptNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except PromptGoneError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "prompt_id": pending.prompt_id,
            "status": body.status.value,
            "state": pending.state.value,
        }

    # -- simulation ----------------------------------------------------------------

    @app.get("/api/simulation/state", response_model=SimulationStateOut)
    def simulation_state():
        return runner.state()

    @app.post("/api/simulation/step", response_model=StepOut)
    def simulation_step():
        try:
            return runner.step()
        except RunnerStalledError as exc:
            raise HTTPException(status_code=503, detail=str(exc))

    console = console_dir if console_dir is not None else locate_console()
    if console is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=console, html=True), name="console")

    return app
