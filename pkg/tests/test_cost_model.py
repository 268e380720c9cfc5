"""Analytic cost model: exact arithmetic, the closed-form identity,
quadratic growth, and calibration round trips."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pmmg.broker import Metering
from pmmg.cost_model import (
    CalibrationError,
    CostParams,
    asymptotic_check,
    calibrate,
    cost_new_app,
    cost_old_app,
    pmmg_daily_closed,
    pmmg_daily_composed,
    sweep,
    vp_time,
)
from pmmg.workload import DayMetrics


def params(ui=0, pg=0, dba=0, app_time=0, n=0) -> CostParams:
    return CostParams.of(ui=ui, pg=pg, dba=dba, app_time=app_time, n=n)


rationals = st.fractions(min_value=0, max_value=10**6)
small_ints = st.integers(min_value=0, max_value=500)


@st.composite
def cost_params(draw):
    return CostParams(
        ui=draw(rationals),
        pg=draw(rationals),
        dba=draw(rationals),
        app_time=draw(rationals),
        n=draw(small_ints),
    )


class TestVpTime:
    def test_zero_apps_cost_nothing(self):
        assert vp_time(0, 1200) == 0

    def test_nine_apps_twenty_minutes(self):
        # hand evaluation: 9/2 * 1200 s = 5400 s (90 min)
        assert vp_time(9, 1200) == 5400

    def test_odd_n_is_not_truncated(self):
        assert vp_time(1, 2) == 1
        assert vp_time(1, 1) == Fraction(1, 2)

    @given(small_ints, rationals)
    def test_linearity_in_n(self, n, app_time):
        assert vp_time(2 * n, app_time) == 2 * vp_time(n, app_time)

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError):
            vp_time(-1, 10)


class TestPerAppCosts:
    def test_all_zero_inputs(self):
        assert cost_new_app(params(), 0) == 0
        assert cost_old_app(params(), 0) == 0

    def test_new_app_sums_all_terms(self):
        p = params(ui=2, pg="0.01", dba="0.05")
        assert cost_new_app(p, 0) == Fraction("2.06")

    def test_old_app_drops_the_interaction_term(self):
        p = params(pg="0.01", dba="0.05")
        assert cost_old_app(p, 10) == Fraction("10.06")

    def test_old_app_independent_of_ui(self):
        low = params(ui=0, pg=1, dba=2)
        high = params(ui=99, pg=1, dba=2)
        assert cost_old_app(low, 5) == cost_old_app(high, 5)

    @given(cost_params(), rationals)
    def test_new_minus_old_is_exactly_ui(self, p, vp):
        assert cost_new_app(p, vp) - cost_old_app(p, vp) == p.ui


class TestDailyCost:
    def test_no_old_apps_reduces_to_new_app(self):
        p = params(ui=5)
        breakdown = pmmg_daily_composed(p)
        assert breakdown.daily == 5
        assert pmmg_daily_closed(p) == 5

    def test_reference_parameters(self):
        # hand evaluation of the closed form: 2 + 10 * (0.06 + 5400) = 54002.6
        p = params(ui=2, pg="0.01", dba="0.05", app_time=1200, n=9)
        breakdown = pmmg_daily_composed(p)
        assert breakdown.daily == Fraction("54002.6")
        assert pmmg_daily_closed(p) == Fraction("54002.6")
        assert breakdown.vp == 5400

    def test_zero_constant_costs_reference(self):
        # hand evaluation: (9 + 1) * (4.5 * 1200) = 54000
        p = params(app_time=1200, n=9)
        assert pmmg_daily_closed(p) == 54000

    def test_tiny_case(self):
        assert pmmg_daily_closed(params(app_time=2, n=1)) == 2

    def test_linear_in_pg_and_dba(self):
        p = params(ui=1, pg=2, dba=3, app_time=100, n=7)
        doubled = params(ui=1, pg=4, dba=6, app_time=100, n=7)
        delta = pmmg_daily_closed(doubled) - pmmg_daily_closed(p)
        assert delta == (p.n + 1) * (2 + 3)

    @settings(max_examples=300)
    @given(cost_params())
    def test_composed_equals_closed_exactly(self, p):
        assert pmmg_daily_composed(p).daily == pmmg_daily_closed(p)

    @given(cost_params())
    def test_second_difference_over_n_equals_app_time(self, p):
        f = [pmmg_daily_closed(p.with_n(n)) for n in (p.n, p.n + 1, p.n + 2)]
        assert f[2] - 2 * f[1] + f[0] == p.app_time

    @given(cost_params())
    def test_daily_never_below_new_app(self, p):
        breakdown = pmmg_daily_composed(p)
        assert breakdown.daily >= breakdown.new_app


class TestAsymptotics:
    def test_tail_ratio_near_app_time_over_two(self):
        report = asymptotic_check(params(app_time=1200), [*range(0, 101), 10_000])
        assert report.tail_n == 10_000
        assert report.tail_target == 600
        assert abs(report.tail_ratio / report.tail_target - 1) < Fraction(1, 100)
        assert report.tail_within_one_percent
        assert report.second_difference_constant
        assert report.second_difference_equals_app_time
        assert report.monotone_increasing

    def test_strictly_increasing_from_zero(self):
        report = asymptotic_check(params(ui=1, pg=1, dba=1, app_time=10), [0, 1])
        assert report.monotone_increasing
        assert report.daily[1] > report.daily[0]

    def test_all_zero_params_ratio_zero(self):
        report = asymptotic_check(params(), [0, 1, 2, 10])
        assert report.tail_ratio == 0
        assert all(v == 0 for v in report.daily)
        assert not report.monotone_increasing

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            asymptotic_check(params(), [])


class TestSweep:
    def test_rows_cover_requested_range(self):
        rows = sweep(params(ui=1, app_time=2), range(0, 4))
        assert [row["n"] for row in rows] == [0, 1, 2, 3]
        assert set(rows[0]) == {"n", "new_app", "old_app", "vp", "daily"}


# -- calibration -----------------------------------------------------------------


def synthesize(ui: float, pg: float, dba: float, counts: list[tuple[int, int, int]]) -> list[DayMetrics]:
    """Build metrics whose accrued times follow the given unit costs exactly."""
    runs = []
    for u, p, d in counts:
        metering = Metering(
            ui_prompts=u, pg_invocations=p, dba_lookups=d,
            ui_time_s=ui * u, pg_time_s=pg * p, dba_time_s=dba * d,
        )
        runs.append(DayMetrics(metering=metering, sessions=(), vp_active_time_s=0.0))
    return runs


class TestCalibration:
    def test_known_params_recovered(self):
        # count columns must be independent to separate pg from dba; a broker
        # day always has pg == dba, so recovery synthesis varies them freely
        truth = (2.0, 0.01, 0.05)
        runs = synthesize(*truth, counts=[(3, 20, 26), (1, 9, 12), (5, 40, 31), (2, 31, 44)])
        result = calibrate(runs)
        for fitted, true in zip((result.ui, result.pg, result.dba), truth):
            assert abs(fitted - true) / true < 1e-6
        assert result.residual < 1e-9

    def test_single_run_is_degenerate(self):
        runs = synthesize(1, 1, 1, counts=[(1, 2, 2)])
        with pytest.raises(CalibrationError):
            calibrate(runs)

    def test_identical_runs_are_degenerate(self):
        runs = synthesize(1, 1, 1, counts=[(2, 5, 5), (2, 5, 5), (2, 5, 5)])
        with pytest.raises(CalibrationError):
            calibrate(runs)

    def test_two_distinct_runs_fit_exactly(self):
        runs = synthesize(2.0, 0.01, 0.05, counts=[(1, 10, 10), (3, 25, 25)])
        result = calibrate(runs)
        assert result.residual < 1e-9
