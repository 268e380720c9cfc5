"""Command-line interface.

Subcommands:
  setup      build virtual profiles, write the initial rules and fixture files
  simulate   run one simulated day against a plan and a decisions file
  rules      list / set / rm entries of a rules file
  cost       eval | sweep | calibrate the analytic model
  profiles   dump a virtual profile's first responses for inspection
  serve      start the HTTP control service with live prompts

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .broker import Broker, ReplayProvider, ScriptedProvider
from .config import Config, load_config
from .core import PermissionStatus, PmmgError, ResourceClass, Rule, RuleOrigin
from .cost_model import CostParams, calibrate, pmmg_daily_composed, sweep
from .rule_store import RuleStore, dumps_canonical
from .virtual_profiles import (
    RealFixture,
    RealProvider,
    build_profiles,
    default_fixture,
    dump_profile,
)
from .workload import (
    DayMetrics,
    DayPlan,
    generate_default_plan,
    generate_demo_plan,
    run_day,
)

PROFILE_MANIFEST_NAME = "profiles.json"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that signals usage problems instead of exiting(2)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="pmmg", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="configuration file (overrides PMMG_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_sub(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        # accepted after the subcommand too; SUPPRESS keeps a root-level
        # --config from being clobbered by the subparser default
        p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        return p

    p_setup = add_sub("setup", "create rules, fixture and profile files")
    p_setup.add_argument("--seed", type=int, help="profile seed (overrides config)")
    p_setup.add_argument("--force", action="store_true", help="overwrite existing files")

    p_sim = add_sub("simulate", "run one simulated day")
    p_sim.add_argument("--plan", help="day plan file (default: generated plan)")
    p_sim.add_argument("--decisions", help="decisions file (default: deny everything)")
    p_sim.add_argument("--seed", type=int, help="seed (overrides config)")
    p_sim.add_argument("--out", default="metrics.json", help="metrics output path")

    p_rules = add_sub("rules", "inspect or edit a rules file")
    rules_sub = p_rules.add_subparsers(dest="rules_command", required=True)
    p_list = rules_sub.add_parser("list", help="list rules")
    p_list.add_argument("app_id", nargs="?", help="restrict to one app")
    p_set = rules_sub.add_parser("set", help="set one rule")
    p_set.add_argument("app_id")
    p_set.add_argument("resource")
    p_set.add_argument("status")
    p_set.add_argument("--at", type=int, help="logical tick of the decision")
    p_rm = rules_sub.add_parser("rm", help="remove one rule")
    p_rm.add_argument("app_id")
    p_rm.add_argument("resource")

    p_cost = add_sub("cost", "analytic cost model")
    cost_sub = p_cost.add_subparsers(dest="cost_command", required=True)
    p_eval = cost_sub.add_parser("eval", help="evaluate the model once")
    for flag in ("--ui", "--pg", "--dba", "--app-time"):
        p_eval.add_argument(flag, required=True)
    p_eval.add_argument("--n", required=True, type=int)
    p_sweep = cost_sub.add_parser("sweep", help="evaluate over a range of n")
    for flag in ("--ui", "--pg", "--dba", "--app-time"):
        p_sweep.add_argument(flag, required=True)
    p_sweep.add_argument("--n", required=True, help="range as A..B (inclusive)")
    p_sweep.add_argument("--csv", required=True, help="output CSV path")
    p_cal = cost_sub.add_parser("calibrate", help="fit unit costs from metrics files")
    p_cal.add_argument("--metrics", nargs="+", required=True, help="DayMetrics files")

    p_prof = add_sub("profiles", "virtual profile inspection")
    prof_sub = p_prof.add_subparsers(dest="profiles_command", required=True)
    p_dump = prof_sub.add_parser("dump", help="dump a profile's first responses")
    p_dump.add_argument("--resource", required=True)
    p_dump.add_argument("-n", "--count", type=int, default=3)
    p_dump.add_argument("--seed", type=int, help="seed (overrides config)")

    p_serve = add_sub("serve", "start the HTTP control service")
    p_serve.add_argument("--plan", help="day plan file (default: small demo plan)")
    p_serve.add_argument("--auto", action="store_true", help="advance in real time")

    return parser


# -- decisions files -------------------------------------------------------------


def load_decisions(path: Optional[str], default: PermissionStatus):
    """Build a decision provider from a decisions file.

    Two layouts: {"kind": "scripted", "default": ..., "decisions": [
    {"app_id", "resource", "status"}, ...]} or {"kind": "replay",
    "decisions": ["grant", "deny", ...]}.
    """
    if path is None:
        return ScriptedProvider(default=default)
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = data.get("kind", "scripted")
    if kind == "replay":
        return ReplayProvider([PermissionStatus(s) for s in data["decisions"]])
    if kind == "scripted":
        decisions = {
            (entry["app_id"], ResourceClass(entry["resource"])): PermissionStatus(
                entry["status"]
            )
            for entry in data.get("decisions", [])
        }
        return ScriptedProvider(
            decisions=decisions,
            default=PermissionStatus(data.get("default", default.value)),
        )
    raise PmmgError(f"unknown decisions kind {kind!r}")


# -- subcommand bodies -------------------------------------------------------------


def _cmd_setup(args, config: Config) -> int:
    seed = args.seed if args.seed is not None else config.seed
    rules_path = Path(config.rules_path)
    fixture_path = Path(config.fixture_path)

    if not rules_path.exists() or args.force:
        RuleStore().save(rules_path)
    if not fixture_path.exists() or args.force:
        default_fixture().save(fixture_path)

    registry = build_profiles(seed)
    manifest = {
        "seed": seed,
        "profiles": [
            {
                "resource": resource.value,
                "stream_key": registry.profiles[resource].stream_key,
            }
            for resource in ResourceClass
        ],
    }
    Path(PROFILE_MANIFEST_NAME).write_text(dumps_canonical(manifest), encoding="utf-8")
    print(f"wrote {rules_path}, {fixture_path}, {PROFILE_MANIFEST_NAME} (seed {seed})")
    return 0


def _cmd_simulate(args, config: Config) -> int:
    seed = args.seed if args.seed is not None else config.seed
    plan = DayPlan.load(args.plan) if args.plan else generate_default_plan(seed)
    provider = load_decisions(args.decisions, config.default_decision)

    rules_path = Path(config.rules_path)
    store = RuleStore.load(rules_path) if rules_path.exists() else RuleStore()
    fixture_path = Path(config.fixture_path)
    fixture = (
        RealFixture.load(fixture_path) if fixture_path.exists() else default_fixture()
    )
    broker = Broker(
        store=store, registry=build_profiles(seed), real_provider=RealProvider(fixture)
    )

    metrics = run_day(plan, broker, provider)
    metrics.save(args.out)
    store.save(rules_path)
    completed = sum(1 for s in metrics.sessions if s.status.value == "completed")
    print(
        f"day complete: {len(metrics.sessions)} sessions ({completed} completed), "
        f"ui={metrics.metering.ui_prompts} pg={metrics.metering.pg_invocations} "
        f"dba={metrics.metering.dba_lookups} vp_active={metrics.vp_active_time_s:.0f}s "
        f"-> {args.out}"
    )
    return 0


def _cmd_rules(args, config: Config) -> int:
    rules_path = Path(config.rules_path)
    store = RuleStore.load(rules_path) if rules_path.exists() else RuleStore()

    if args.rules_command == "list":
        for rule in store.list_rules(args.app_id):
            print(
                f"{rule.app_id}\t{rule.resource.value}\t{rule.status.value}"
                f"\t{rule.origin.value}\t{rule.decided_at}"
            )
        return 0

    resource = ResourceClass(args.resource)
    if args.rules_command == "set":
        status = PermissionStatus(args.status)
        existing = store.lookup(args.app_id, resource)
        decided_at = (
            args.at
            if args.at is not None
            else (existing.decided_at + 1 if existing else 0)
        )
        origin = RuleOrigin.USER_EDIT if existing else RuleOrigin.IMPORT
        store.upsert(
            Rule(
                app_id=args.app_id,
                resource=resource,
                status=status,
                decided_at=decided_at,
                origin=origin,
            )
        )
        store.save(rules_path)
        print(f"{args.app_id}/{resource.value} -> {status.value}")
        return 0

    if args.rules_command == "rm":
        removed = store.delete(args.app_id, resource)
        store.save(rules_path)
        print("removed" if removed else "no such rule")
        return 0
    raise _UsageError(f"unknown rules command {args.rules_command}")


def _parse_n_range(text: str) -> range:
    if ".." in text:
        low, _, high = text.partition("..")
        return range(int(low), int(high) + 1)
    value = int(text)
    return range(value, value + 1)


def _cmd_cost(args, config: Config) -> int:
    if args.cost_command == "eval":
        params = CostParams.of(
            ui=args.ui, pg=args.pg, dba=args.dba, app_time=args.app_time, n=args.n
        )
        breakdown = pmmg_daily_composed(params)
        print(json.dumps(breakdown.to_json(), indent=2))
        return 0

    if args.cost_command == "sweep":
        params = CostParams.of(
            ui=args.ui, pg=args.pg, dba=args.dba, app_time=args.app_time, n=0
        )
        rows = sweep(params, _parse_n_range(args.n))
        with open(args.csv, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(
                handle, fieldnames=["n", "new_app", "old_app", "vp", "daily"]
            )
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.csv}")
        return 0

    if args.cost_command == "calibrate":
        metrics = [DayMetrics.load(path) for path in args.metrics]
        result = calibrate(metrics)
        print(
            json.dumps(
                {
                    "ui": result.ui,
                    "pg": result.pg,
                    "dba": result.dba,
                    "residual": result.residual,
                    "rank": result.rank,
                },
                indent=2,
            )
        )
        return 0
    raise _UsageError(f"unknown cost command {args.cost_command}")


def _cmd_profiles(args, config: Config) -> int:
    seed = args.seed if args.seed is not None else config.seed
    resource = ResourceClass(args.resource)
    docs = dump_profile(seed, resource, args.count)
    print(json.dumps(docs, indent=2))
    return 0


def _cmd_serve(args, config: Config) -> int:
    import uvicorn

    from .service.app import create_app

    plan = DayPlan.load(args.plan) if args.plan else generate_demo_plan(config.seed)
    app = create_app(config, plan, auto=args.auto)
    host, port = config.host_port()
    print(f"serving on http://{host}:{port} (plan: {len(plan.sessions)} sessions)")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


_COMMANDS = {
    "setup": _cmd_setup,
    "simulate": _cmd_simulate,
    "rules": _cmd_rules,
    "cost": _cmd_cost,
    "profiles": _cmd_profiles,
    "serve": _cmd_serve,
}


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except _UsageError:
        return 1
    except (PmmgError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
