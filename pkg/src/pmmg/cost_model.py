"""Analytic daily-overhead model of the broker, plus calibration.

The model prices a day of mediated app usage from five inputs: the
constant per-invocation costs of a user interaction (ui), a permit-granter
call (pg) and a rule-base access (dba); the per-app usage time
(app_time); and the number of previously installed apps used per day (n).

The virtual-profile term is n/2 * app_time (half the apps are assumed to
run on virtual resources).  A newly installed app costs ui + pg + dba +
vp; a previously installed one costs pg + dba + vp; the daily total is
new + n * old, which simplifies to the closed form

    daily = ui + (n + 1) * (pg + dba + n/2 * app_time)

making the total quadratic in n with leading coefficient app_time / 2.
The composed and closed routes are kept separate so their equivalence is
checkable exactly; all arithmetic is on rationals, floats appear only at
reporting boundaries.

Note the modeling quirk inherited as-is: the vp term depends on n yet is
charged once per app, which is what produces the quadratic growth.  The
workload simulator's measure_components() is the empirically grounded
alternative; this module reproduces the formulas verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .core import PmmgError

Rational = Union[int, float, str, Fraction]


class CalibrationError(PmmgError):
    """The calibration system is degenerate (too few or identical runs)."""


def as_fraction(value: Rational) -> Fraction:
    """Coerce to an exact rational; floats are read as their decimal literal."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a cost value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


@dataclass(frozen=True)
class CostParams:
    """Model inputs; all non-negative, n a non-negative integer."""

    ui: Fraction
    pg: Fraction
    dba: Fraction
    app_time: Fraction
    n: int

    @classmethod
    def of(
        cls,
        ui: Rational,
        pg: Rational,
        dba: Rational,
        app_time: Rational,
        n: int,
    ) -> "CostParams":
        params = cls(
            ui=as_fraction(ui),
            pg=as_fraction(pg),
            dba=as_fraction(dba),
            app_time=as_fraction(app_time),
            n=int(n),
        )
        if min(params.ui, params.pg, params.dba, params.app_time) < 0 or params.n < 0:
            raise ValueError("cost parameters must be non-negative")
        return params

    def with_n(self, n: int) -> "CostParams":
        return CostParams(ui=self.ui, pg=self.pg, dba=self.dba, app_time=self.app_time, n=n)

    def to_json(self) -> dict[str, Any]:
        return {
            "ui": str(self.ui),
            "pg": str(self.pg),
            "dba": str(self.dba),
            "app_time": str(self.app_time),
            "n": self.n,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "CostParams":
        return cls.of(
            ui=data["ui"], pg=data["pg"], dba=data["dba"],
            app_time=data["app_time"], n=data["n"],
        )


@dataclass(frozen=True)
class CostBreakdown:
    """Per-component daily cost, all in seconds."""

    new_app: Fraction
    old_app: Fraction
    vp: Fraction
    daily: Fraction

    def to_json(self) -> dict[str, float]:
        return {
            "new_app": float(self.new_app),
            "old_app": float(self.old_app),
            "vp": float(self.vp),
            "daily": float(self.daily),
        }


def vp_time(n: int, app_time: Rational) -> Fraction:
    """Virtual-profile runtime: half the apps, each for app_time seconds."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return Fraction(n, 2) * as_fraction(app_time)


def cost_new_app(p: CostParams, vp: Rational) -> Fraction:
    """Cost of one newly installed app: prompt, grant, store, profile."""
    vp = as_fraction(vp)
    if vp < 0:
        raise ValueError("vp must be non-negative")
    return p.ui + p.pg + p.dba + vp


def cost_old_app(p: CostParams, vp: Rational) -> Fraction:
    """Cost of one previously installed app: no user interaction."""
    vp = as_fraction(vp)
    if vp < 0:
        raise ValueError("vp must be non-negative")
    return p.pg + p.dba + vp


def pmmg_daily_composed(p: CostParams) -> CostBreakdown:
    """Daily cost built from the per-app pieces: new + n * old."""
    vp = vp_time(p.n, p.app_time)
    new_app = cost_new_app(p, vp)
    old_app = cost_old_app(p, vp)
    return CostBreakdown(
        new_app=new_app,
        old_app=old_app,
        vp=vp,
        daily=new_app + p.n * old_app,
    )


def pmmg_daily_closed(p: CostParams) -> Fraction:
    """Daily cost in closed form: ui + (n+1) * (pg + dba + n/2 * app_time)."""
    return p.ui + (p.n + 1) * (p.pg + p.dba + Fraction(p.n, 2) * p.app_time)


# ---------------------------------------------------------------------------
# Growth-shape report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticReport:
    """Checks of the quadratic-growth shape of the closed form over n."""

    n_values: tuple[int, ...]
    daily: tuple[Fraction, ...]
    second_differences: tuple[Fraction, ...]  # over unit-spaced triples only
    second_difference_constant: bool
    second_difference_equals_app_time: bool
    monotone_increasing: bool
    tail_n: int
    tail_ratio: Fraction  # daily(tail_n) / tail_n^2
    tail_target: Fraction  # app_time / 2
    tail_within_one_percent: bool


def asymptotic_check(p_base: CostParams, n_range: Iterable[int]) -> AsymptoticReport:
    """Evaluate the closed form over n_range and report its growth shape.

    Second finite differences are taken wherever three consecutive entries
    are unit-spaced; the tail ratio daily/n^2 is taken at the largest n.
    """
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        raise ValueError("n_range must be non-empty")
    daily = [pmmg_daily_closed(p_base.with_n(n)) for n in ns]

    second_diffs: list[Fraction] = []
    for i in range(len(ns) - 2):
        if ns[i + 1] - ns[i] == 1 and ns[i + 2] - ns[i + 1] == 1:
            second_diffs.append(daily[i + 2] - 2 * daily[i + 1] + daily[i])

    constant = len(set(second_diffs)) <= 1
    equals_app_time = constant and bool(second_diffs) and second_diffs[0] == p_base.app_time
    monotone = all(b > a for a, b in zip(daily, daily[1:]))

    tail_n = ns[-1]
    if tail_n > 0:
        tail_ratio = daily[-1] / Fraction(tail_n * tail_n)
    else:
        tail_ratio = Fraction(0)
    tail_target = p_base.app_time / 2
    if tail_target == 0:
        tail_ok = tail_ratio == 0
    else:
        tail_ok = abs(tail_ratio / tail_target - 1) < Fraction(1, 100)

    return AsymptoticReport(
        n_values=tuple(ns),
        daily=tuple(daily),
        second_differences=tuple(second_diffs),
        second_difference_constant=constant,
        second_difference_equals_app_time=equals_app_time,
        monotone_increasing=monotone,
        tail_n=tail_n,
        tail_ratio=tail_ratio,
        tail_target=tail_target,
        tail_within_one_percent=tail_ok,
    )


def sweep(p_base: CostParams, n_values: Sequence[int]) -> list[dict[str, float]]:
    """Breakdown rows over a range of n, for CSV reporting."""
    rows = []
    for n in n_values:
        breakdown = pmmg_daily_composed(p_base.with_n(n))
        row: dict[str, float] = {"n": n}
        row.update(breakdown.to_json())
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Calibration against simulator measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    """Least-squares estimates of the constant unit costs."""

    ui: float
    pg: float
    dba: float
    residual: float
    rank: int

    def as_params(self, app_time: Rational, n: int) -> CostParams:
        return CostParams.of(
            ui=self.ui, pg=self.pg, dba=self.dba, app_time=app_time, n=n
        )


def calibrate(metrics_list: Sequence[Any]) -> CalibrationResult:
    """Fit ui, pg, dba from measured runs.

    Each entry must expose a ``metering`` with invocation counts and
    accrued component times (as DayMetrics does).  The model per run is

        constant_time = ui * ui_prompts + pg * pg_invocations + dba * dba_lookups

    where constant_time is the run's total minus its virtual-profile time.
    Needs at least two runs that are not all identical in their counts;
    full recovery of all three parameters needs three independent runs.
    """
    if len(metrics_list) < 2:
        raise CalibrationError("calibration needs at least two runs")

    rows = []
    targets = []
    for metrics in metrics_list:
        m = metrics.metering
        rows.append([m.ui_prompts, m.pg_invocations, m.dba_lookups])
        targets.append(m.ui_time_s + m.pg_time_s + m.dba_time_s)

    if all(row == rows[0] for row in rows[1:]):
        raise CalibrationError("degenerate system: every run has identical counts")

    a = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)
    solution, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
    residual = float(np.linalg.norm(a @ solution - y))
    ui, pg, dba = (float(v) for v in solution)
    return CalibrationResult(ui=ui, pg=pg, dba=dba, residual=residual, rank=int(rank))


#: Placeholder unit costs for reporting; configuration, not ground truth.
DEFAULT_UNIT_COSTS = CostParams.of(ui=2, pg="0.01", dba="0.05", app_time=1200, n=9)
