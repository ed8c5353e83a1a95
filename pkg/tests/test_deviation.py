"""Large-deviation scans on the circle grid, Wegner measures, flatness."""

import math

import numpy as np
import pytest

from qpspec import (
    CocycleParams,
    Constants,
    DegenerateFit,
    DomainError,
    amo_potential,
    default_wegner_k,
    deviation_set_f,
    deviation_set_u,
    flatness,
    golden_frequency,
    ldt_trend,
    wegner_measure,
    zero_potential,
)
from qpspec.deviation import build_grid_set
from qpspec._grid import GRID_SHIFT


def _free_params():
    return CocycleParams(potential=zero_potential(), lam=1.0,
                         omega=golden_frequency(), E=0.0)


class TestGridSet:
    def test_simple_runs(self):
        mask = np.zeros(12, dtype=bool)
        mask[[2, 3, 4, 7]] = True
        gs = build_grid_set(mask, 12)
        assert gs.intervals == ((2, 4), (7, 7))
        assert gs.measure_est == pytest.approx(4.0 / 12.0)
        assert gs.count == 2
        assert gs.contains_index(3)
        assert not gs.contains_index(5)

    def test_wrap_merge(self):
        mask = np.zeros(10, dtype=bool)
        mask[[9, 0, 1, 4]] = True
        gs = build_grid_set(mask, 10)
        assert gs.intervals == ((9, 1), (4, 4))

    def test_all_bad(self):
        gs = build_grid_set(np.ones(8, dtype=bool), 8)
        assert gs.intervals == ((0, 7),)
        assert gs.measure_est == 1.0

    def test_empty(self):
        gs = build_grid_set(np.zeros(8, dtype=bool), 8)
        assert gs.intervals == ()
        assert gs.refined == ()
        assert gs.measure_est == 0.0

    def test_phase_formula(self):
        gs = build_grid_set(np.zeros(10, dtype=bool), 10, x0=0.125)
        assert gs.phase(3) == pytest.approx((0.125 + (3 + GRID_SHIFT) / 10) % 1.0)

    def test_mask_length_checked(self):
        with pytest.raises(DomainError):
            build_grid_set(np.zeros(5, dtype=bool), 6)

    def test_refinement_quarter_cells(self):
        mask = np.zeros(10, dtype=bool)
        mask[3] = True

        def phase(i):
            return ((i + GRID_SHIFT) / 10) % 1.0

        # boundary midpoints declared good: run shrinks to quarter cells
        gs = build_grid_set(mask, 10, predicate=lambda ph: False)
        lo, hi = gs.refined[0]
        assert lo == pytest.approx(phase(2.75))
        assert hi == pytest.approx(phase(3.25))
        # boundary midpoints declared bad: run grows to three-quarter cells
        gs = build_grid_set(mask, 10, predicate=lambda ph: True)
        lo, hi = gs.refined[0]
        assert lo == pytest.approx(phase(2.25))
        assert hi == pytest.approx(phase(3.75))

    def test_refined_covers_bad_points_amo(self, amo_params):
        gs = deviation_set_u(amo_params, 30, 0.15, 1000)
        assert gs.count == len(gs.refined)
        for (s, e), (lo, hi) in zip(gs.intervals, gs.refined):
            width = (hi - lo) % 1.0
            cells = (e - s) % gs.G + 1
            assert width <= (cells + 1.5) / gs.G + 1e-12


class TestDeviationScans:
    def test_free_case_empty(self):
        gs = deviation_set_u(_free_params(), 16, 1e-6, 1000)
        assert gs.measure_est == 0.0
        assert gs.count == 0

    def test_measures_decrease_with_scale(self, amo_params):
        m = [deviation_set_u(amo_params, n, 0.05, 2000, refine=False).measure_est
             for n in (25, 50, 100)]
        assert m[0] > m[1] > m[2] > 0.0

    def test_f_statistic_close_to_u_statistic(self, amo_params):
        mu = deviation_set_u(amo_params, 40, 0.1, 2000, refine=False)
        mf = deviation_set_f(amo_params, 40, 0.1, 2000, refine=False)
        assert mf.measure_est == pytest.approx(mu.measure_est, abs=0.1)

    def test_scan_args_validated(self, amo_params):
        with pytest.raises(DomainError):
            deviation_set_u(amo_params, 10, 0.0, 2000)
        with pytest.raises(DomainError):
            deviation_set_u(amo_params, 10, 0.1, 999)

    def test_thread_invariance(self, amo_params):
        a = deviation_set_u(amo_params, 30, 0.1, 1500, threads=1)
        b = deviation_set_u(amo_params, 30, 0.1, 1500, threads=4)
        assert np.array_equal(a.bad, b.bad)
        assert a.intervals == b.intervals
        assert a.refined == b.refined


class TestLdtTrend:
    def test_trend_at_moderate_delta(self, amo_params):
        trend = ldt_trend(amo_params, (25, 50, 100), 0.02, 2000)
        assert trend.monotone_nonincreasing
        assert trend.c_fit > 0.0
        assert len(trend.rows) == 3
        assert trend.rows[0].rhs == pytest.approx(
            math.exp(-1.0 * 0.02 * 25 ** 0.25))
        assert all(r.interval_count >= 1 for r in trend.rows)
        assert trend.count_exponent > 0.0

    def test_degenerate_fit_carries_measures(self, amo_params):
        with pytest.raises(DegenerateFit) as info:
            ldt_trend(amo_params, (10, 20, 30), 8.0, 1000)
        assert set(info.value.measures) == {10, 20, 30}
        assert all(v == 0.0 for v in info.value.measures.values())

    def test_n_list_validated(self, amo_params):
        with pytest.raises(DomainError):
            ldt_trend(amo_params, (10, 20), 0.1, 1000)
        with pytest.raises(DomainError):
            ldt_trend(amo_params, (10, 10, 20), 0.1, 1000)


class TestWegner:
    def test_zero_epsilon_empty(self, amo_params):
        rep = wegner_measure(amo_params, 30, 0.0, 1000)
        assert rep.measure_est == 0.0
        assert rep.count == 0
        assert rep.rhs == pytest.approx(math.exp(-float(rep.k) ** (0.25 / 4.0)))

    def test_monotone_in_epsilon(self, amo_params):
        m = [wegner_measure(amo_params, 40, eps, 1500,
                            refine=False).measure_est
             for eps in (1e-3, 1e-2, 1e-1)]
        assert m[0] <= m[1] <= m[2]
        assert m[2] > 0.0

    def test_csv_row_fields(self, amo_params):
        rep = wegner_measure(amo_params, 20, 1e-2, 1000, refine=False)
        row = rep.csv_row(seed=7)
        assert set(row) == {"n", "delta_or_epsilon", "G", "measure_est",
                            "interval_count", "rhs_comparison", "seed"}
        assert row["seed"] == 7
        assert row["n"] == 20

    def test_args_validated(self, amo_params):
        with pytest.raises(DomainError):
            wegner_measure(amo_params, 20, -1e-3, 1000)
        with pytest.raises(DomainError):
            wegner_measure(amo_params, 20, 1e-3, 500)

    def test_default_k_clamp(self):
        assert default_wegner_k(10) == 10
        assert default_wegner_k(200) == 200
        # raw value only drops below n at astronomically large n
        assert default_wegner_k(50, Constants(A=1.0, nu=0.5)) == 50
        with pytest.raises(DomainError):
            default_wegner_k(0)


class TestFlatness:
    def test_free_branch_is_flat(self):
        r = flatness(_free_params(), 20, 7, (0.0, 1.0), 100)
        assert r <= 1e-9

    def test_amo_branch_moves(self, amo_params):
        r = flatness(amo_params, 20, 7, (0.0, 1.0), 200)
        assert r > 0.1

    def test_subinterval_range_smaller(self, amo_params):
        full = flatness(amo_params, 16, 5, (0.0, 1.0), 400)
        sub = flatness(amo_params, 16, 5, (0.2, 0.21), 50)
        assert sub < full

    def test_args_validated(self, amo_params):
        with pytest.raises(DomainError):
            flatness(amo_params, 16, 5, (0.4, 0.4), 100)
        with pytest.raises(DomainError):
            flatness(amo_params, 16, 5, (0.0, 1.0), 1)
        with pytest.raises(DomainError):
            flatness(amo_params, 16, 17, (0.0, 1.0), 100)
