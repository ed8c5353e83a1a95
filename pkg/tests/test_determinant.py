"""Dirichlet determinants: signed logs, recurrence, transfer identity."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpspec import (
    CocycleParams,
    DomainError,
    SignedLog,
    amo_potential,
    det_transfer_identity,
    dirichlet_det,
    dirichlet_det_grid,
    dirichlet_det_sequence,
    golden_frequency,
    product,
    shifted_det,
)
from qpspec._grid import phase_grid

from _oracles import det_oracle

finite = st.floats(min_value=1e-150, max_value=1e150,
                   allow_nan=False, allow_infinity=False)
signed = st.builds(lambda m, s: m * s, finite, st.sampled_from((-1.0, 1.0)))


def _params(lam, E, pot=None, omega=None):
    return CocycleParams(
        potential=pot if pot is not None else amo_potential(),
        lam=lam,
        omega=omega if omega is not None else golden_frequency(),
        E=E,
    )


def _window_diag(params, x, a, b):
    return [params.step_value(x, k) for k in range(a, b + 1)]


class TestSignedLog:
    def test_from_float_round_trip(self):
        s = SignedLog.from_float(-2.5)
        assert s.sign == -1
        assert s.value() == pytest.approx(-2.5, rel=1e-15)
        assert SignedLog.from_float(0.0).sign == 0
        assert SignedLog.from_float(0.0).logmag == -math.inf

    def test_zero_sign_forces_logmag(self):
        assert SignedLog(0, 5.0).logmag == -math.inf

    def test_bad_sign_rejected(self):
        with pytest.raises(DomainError):
            SignedLog(2, 0.0)

    @given(signed, signed)
    def test_mul_matches_mpmath(self, a, b):
        r = SignedLog.from_float(a) * SignedLog.from_float(b)
        exact = mp.mpf(a) * mp.mpf(b)
        assert r.sign == mp.sign(exact)
        assert abs(r.logmag - float(mp.log(abs(exact)))) < 1e-12

    @given(signed, signed)
    def test_div_matches_mpmath(self, a, b):
        r = SignedLog.from_float(a) / SignedLog.from_float(b)
        exact = mp.mpf(a) / mp.mpf(b)
        assert r.sign == mp.sign(exact)
        assert abs(r.logmag - float(mp.log(abs(exact)))) < 1e-12

    @given(signed, signed)
    def test_add_matches_mpmath(self, a, b):
        r = SignedLog.from_float(a) + SignedLog.from_float(b)
        exact = mp.mpf(a) + mp.mpf(b)
        if exact == 0:
            assert r.sign == 0 or r.cancelled
            return
        if r.cancelled:
            return  # flagged as untrustworthy, no accuracy contract
        assert r.sign == mp.sign(exact)
        # relative error of the 1 + exp(lo - hi) path grows like exp(drop)
        drop = max(SignedLog.from_float(a).logmag,
                   SignedLog.from_float(b).logmag) - r.logmag
        tol = 1e-13 * (1.0 + math.exp(min(drop, 60.0)))
        assert abs(r.logmag - float(mp.log(abs(exact)))) < tol

    def test_div_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            SignedLog.from_float(1.0) / SignedLog(0, 0.0)

    def test_exact_cancellation(self):
        r = SignedLog.from_float(3.0) + SignedLog.from_float(-3.0)
        assert r.sign == 0
        assert r.cancelled

    def test_huge_magnitudes_no_overflow(self):
        a = SignedLog(1, 5000.0)
        b = SignedLog(1, 5000.0)
        r = a + b
        assert r.sign == 1
        assert r.logmag == pytest.approx(5000.0 + math.log(2.0), abs=1e-12)

    def test_cancel_flag_on_thirty_decade_drop(self):
        a = SignedLog(1, 0.0)
        eps = 1e-31
        b = SignedLog(-1, math.log(1.0 - eps))
        r = a + b
        assert r.cancelled
        assert not (a + SignedLog(-1, math.log(0.5))).cancelled

    def test_flag_propagates(self):
        tainted = SignedLog(1, 1.0, cancelled=True)
        assert (tainted * SignedLog.from_float(2.0)).cancelled
        assert (tainted + SignedLog.from_float(2.0)).cancelled
        assert (SignedLog.from_float(2.0) - tainted).cancelled
        assert (-tainted).cancelled
        assert (tainted / SignedLog.from_float(2.0)).cancelled

    def test_add_zero_identity(self):
        z = SignedLog(0, -math.inf)
        a = SignedLog.from_float(-7.0)
        assert (z + a).sign == a.sign
        assert (z + a).logmag == a.logmag
        assert (a + z).logmag == a.logmag

    def test_repr_mentions_cancelled(self):
        assert "cancelled" in repr(SignedLog(1, 0.0, cancelled=True))
        assert "cancelled" not in repr(SignedLog(1, 0.0))


class TestDirichletOracle:
    @pytest.mark.parametrize("lam", [2.0, 10.0, math.exp(6.0)])
    def test_matches_exact_determinant(self, lam, rng):
        params = _params(lam, 0.3)
        for _ in range(40):
            n = int(rng.integers(1, 13))
            x = float(rng.random())
            got = dirichlet_det(params, x, n)
            sign, logmag = det_oracle(_window_diag(params, x, 1, n))
            assert got.sign == sign
            assert abs(got.logmag - logmag) <= 1e-10 * max(1.0, abs(logmag))

    def test_shifted_window_matches_oracle(self, amo_params, rng):
        for _ in range(25):
            a = int(rng.integers(-10, 10))
            b = a + int(rng.integers(0, 8))
            x = float(rng.random())
            got = shifted_det(amo_params, x, a, b)
            sign, logmag = det_oracle(_window_diag(amo_params, x, a, b))
            assert got.sign == sign
            assert abs(got.logmag - logmag) <= 1e-10 * max(1.0, abs(logmag))

    def test_zero_length(self, amo_params):
        f0 = dirichlet_det(amo_params, 0.2, 0)
        assert (f0.sign, f0.logmag) == (1, 0.0)

    def test_empty_window_is_one(self, amo_params):
        f = shifted_det(amo_params, 0.2, 5, 4)
        assert (f.sign, f.logmag) == (1, 0.0)

    def test_window_below_empty_rejected(self, amo_params):
        with pytest.raises(DomainError):
            shifted_det(amo_params, 0.2, 5, 3)

    def test_negative_length_rejected(self, amo_params):
        with pytest.raises(DomainError):
            dirichlet_det_sequence(amo_params, 0.2, -1)

    def test_bad_step_rejected(self, amo_params):
        with pytest.raises(DomainError):
            dirichlet_det_sequence(amo_params, 0.2, 4, step=2)


class TestSequence:
    def test_prefixes_agree_with_single_calls(self, amo_params):
        n = 9
        signs, logmags, _ = dirichlet_det_sequence(amo_params, 0.37, n)
        for j in range(n + 1):
            f = dirichlet_det(amo_params, 0.37, j)
            assert signs[j] == f.sign
            assert logmags[j] == pytest.approx(f.logmag, abs=1e-12)

    def test_backward_pass_gives_suffix_windows(self, amo_params, rng):
        # tridiagonal windows read the same determinant from either end:
        # step=-1 starting at b yields f_[b-m+1, b] at index m
        b = 11
        signs, logmags, _ = dirichlet_det_sequence(amo_params, 0.52, b,
                                                   k0=b, step=-1)
        for m in range(1, b + 1):
            f = shifted_det(amo_params, 0.52, b - m + 1, b)
            assert signs[m] == f.sign
            assert logmags[m] == pytest.approx(f.logmag, rel=1e-10)

    def test_cancelled_flag_on_exact_zero_crossing(self):
        from qpspec import zero_potential

        # constant diagonal 1: f follows 1, 1, 0, -1, ... and the j=2
        # subtraction 1*1 - 1 cancels exactly
        params = _params(1.0, -1.0, pot=zero_potential())
        signs, logmags, cancelled = dirichlet_det_sequence(params, 0.3, 2)
        assert cancelled
        assert signs[2] == 0
        assert logmags[2] == -math.inf


class TestGrid:
    def test_grid_matches_scalar(self, amo_params):
        G, n = 17, 21
        signs, logmags = dirichlet_det_grid(amo_params, n, G)
        xs = phase_grid(G)
        for i in range(G):
            f = dirichlet_det(amo_params, float(xs[i]), n)
            assert int(signs[i]) == f.sign
            assert logmags[i] == pytest.approx(f.logmag, rel=1e-10)

    def test_grid_thread_invariance(self, amo_params):
        s1, l1 = dirichlet_det_grid(amo_params, 40, 3000, threads=1)
        s4, l4 = dirichlet_det_grid(amo_params, 40, 3000, threads=4)
        assert np.array_equal(s1, s4)
        assert np.array_equal(l1, l4)

    def test_grid_rejects_zero_length(self, amo_params):
        with pytest.raises(DomainError):
            dirichlet_det_grid(amo_params, 0, 8)


class TestTransferIdentity:
    @pytest.mark.parametrize("lam", [2.0, 10.0, math.exp(6.0)])
    def test_random_draws(self, lam, rng):
        params = _params(lam, 0.7)
        for _ in range(30):
            n = int(rng.integers(1, 51))
            x = float(rng.random())
            report = det_transfer_identity(params, x, n)
            assert report.max_log_discrepancy <= 1e-8 * n
            assert report.signs_ok

    def test_report_fields(self, amo_params):
        report = det_transfer_identity(amo_params, 0.12, 7,
                                       raise_on_violation=False)
        assert report.n == 7
        assert report.tolerance == pytest.approx(7e-8)
        assert report.max_log_discrepancy >= 0.0

    def test_rejects_zero_steps(self, amo_params):
        with pytest.raises(DomainError):
            det_transfer_identity(amo_params, 0.12, 0)

    def test_entries_against_product(self, amo_params):
        # the identity the checker enforces, reproduced by hand
        x, n = 0.81, 13
        mat = product(amo_params, x, n)
        top = dirichlet_det(amo_params, x, n)
        sign, logmag = mat.entry(0, 0)
        assert sign == top.sign
        assert logmag == pytest.approx(top.logmag, rel=1e-10)


@given(st.integers(min_value=1, max_value=16),
       st.floats(min_value=0.0, max_value=1.0, exclude_max=True))
def test_window_identity_property(n, x):
    """f_[a,b](x) equals the length determinant at the shifted phase set."""
    params = _params(3.0, 1.1)
    a = 4
    lhs = shifted_det(params, x, a, a + n - 1)
    sign, logmag = det_oracle(_window_diag(params, x, a, a + n - 1))
    assert lhs.sign == sign
    assert abs(lhs.logmag - logmag) <= 1e-10 * max(1.0, abs(logmag))
