"""Finite windows: Sturm eigenvalues, Green entries, pairing, grid scans."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpspec import (
    CocycleParams,
    Constants,
    BoundViolated,
    ConvergenceFailure,
    DomainError,
    FiniteOperator,
    PairingFailed,
    PreconditionNotMet,
    SingularEnergy,
    amo_potential,
    correlated_eigenpair,
    dirichlet_det,
    dist_spec,
    dist_spec_grid,
    eigenpair,
    eigensystem,
    eigenvalue_branch,
    eigenvalues,
    golden_frequency,
    green_decay_check,
    green_entry,
    poisson_residual,
    spectra_on_grid,
    sturm_count,
    zero_potential,
)
from qpspec._grid import phase_grid

from _oracles import dense_green_entry, jacobi_eigenvalues, tridiag_dense


def _amo(lam, E=0.0):
    return CocycleParams(potential=amo_potential(), lam=lam,
                         omega=golden_frequency(), E=E)


def _free_op(n):
    params = CocycleParams(potential=zero_potential(), lam=1.0,
                           omega=golden_frequency(), E=0.0)
    return FiniteOperator(params, 0.0, (1, n))


class TestFiniteOperator:
    def test_diag_and_apply_match_dense(self, amo_params, rng):
        op = FiniteOperator(amo_params, 0.17, (3, 11))
        dense = tridiag_dense(op.diag)
        for _ in range(5):
            v = rng.standard_normal(op.size)
            assert np.allclose(op.apply(v, E=0.4), dense @ v - 0.4 * v,
                               atol=1e-12)

    def test_site_index(self, amo_params):
        op = FiniteOperator(amo_params, 0.0, (-2, 4))
        assert op.size == 7
        assert op.site_index(-2) == 0
        assert op.site_index(4) == 6
        with pytest.raises(DomainError):
            op.site_index(5)

    def test_empty_window_rejected(self, amo_params):
        with pytest.raises(DomainError):
            FiniteOperator(amo_params, 0.0, (3, 2))

    def test_norm_bound_dominates_spectrum(self, amo_params):
        op = FiniteOperator(amo_params, 0.4, (1, 15))
        vals = eigenvalues(op, 1e-10)
        assert np.max(np.abs(vals)) <= op.norm_bound


class TestEigenvalues:
    def test_free_laplacian_exact(self):
        n = 25
        op = _free_op(n)
        vals = eigenvalues(op, 1e-12)
        exact = np.sort(2.0 * np.cos(np.arange(1, n + 1) * math.pi / (n + 1)))
        assert np.max(np.abs(vals - exact)) <= 1e-9

    @pytest.mark.parametrize("x", [0.05, 0.37, 0.81])
    def test_matches_rotation_oracle(self, x):
        op = FiniteOperator(_amo(10.0), x, (1, 14))
        vals = eigenvalues(op, 1e-11)
        ref = jacobi_eigenvalues(tridiag_dense(op.diag))
        assert np.max(np.abs(vals - ref)) <= 1e-9

    def test_cauchy_interlacing(self, rng):
        params = _amo(10.0)
        for _ in range(8):
            n = int(rng.integers(3, 30))
            x = float(rng.random())
            full = eigenvalues(FiniteOperator(params, x, (1, n)), 1e-11)
            sub = eigenvalues(FiniteOperator(params, x, (1, n - 1)), 1e-11)
            assert np.all(sub >= full[:-1] - 1e-9)
            assert np.all(sub <= full[1:] + 1e-9)

    def test_bad_tol_rejected(self, amo_params):
        op = FiniteOperator(amo_params, 0.1, (1, 4))
        with pytest.raises(DomainError):
            eigenvalues(op, 0.0)


class TestSturm:
    def test_extremes(self, amo_params):
        op = FiniteOperator(amo_params, 0.23, (1, 20))
        B = op.norm_bound + 1.0
        assert sturm_count(op, -B) == 0
        assert sturm_count(op, B) == 20

    def test_counts_match_eigenvalues(self, amo_params):
        op = FiniteOperator(amo_params, 0.61, (1, 18))
        vals = eigenvalues(op, 1e-12)
        mids = (vals[:-1] + vals[1:]) / 2.0
        for j, E in enumerate(mids, start=1):
            assert sturm_count(op, float(E)) == j
        assert sturm_count(op, float(vals[-1]) + 1e-6) == 18

    @given(st.floats(min_value=-25.0, max_value=25.0),
           st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=40)
    def test_monotone_in_energy(self, E, dE):
        op = FiniteOperator(_amo(10.0), 0.44, (1, 12))
        assert sturm_count(op, E) <= sturm_count(op, E + dE)


class TestEigenpair:
    def test_residual_and_value(self, amo_params):
        op = FiniteOperator(amo_params, 0.29, (1, 24))
        vals = eigenvalues(op, 1e-12)
        for j in (1, 9, 24):
            pair = eigenpair(op, j)
            assert pair.residual <= 1e-10 * (op.norm_bound + 1.0)
            assert abs(pair.value - vals[j - 1]) <= 1e-8
            assert abs(np.linalg.norm(pair.vector) - 1.0) <= 1e-12

    def test_sign_convention(self, amo_params):
        op = FiniteOperator(amo_params, 0.29, (1, 24))
        pair = eigenpair(op, 5)
        peak = np.max(np.abs(pair.vector))
        lead = pair.vector[np.abs(pair.vector) > 1e-8 * peak][0]
        assert lead > 0

    def test_orthogonality(self, amo_params):
        op = FiniteOperator(amo_params, 0.29, (1, 24))
        a = eigenpair(op, 7).vector
        b = eigenpair(op, 8).vector
        assert abs(float(a @ b)) <= 1e-8

    def test_index_bounds(self, amo_params):
        op = FiniteOperator(amo_params, 0.29, (1, 6))
        with pytest.raises(DomainError):
            eigenpair(op, 0)
        with pytest.raises(DomainError):
            eigenpair(op, 7)


class TestEigensystem:
    def test_full_system(self, amo_params):
        op = FiniteOperator(amo_params, 0.73, (1, 16))
        sys = eigensystem(op, want_vectors=True)
        assert np.all(np.diff(sys.values) >= 0.0)
        gram = sys.vectors.T @ sys.vectors
        assert np.max(np.abs(gram - np.eye(16))) <= 1e-7
        assert np.max(sys.residuals) <= 1e-9 * (op.norm_bound + 1.0)

    def test_values_only(self, amo_params):
        op = FiniteOperator(amo_params, 0.73, (1, 16))
        sys = eigensystem(op)
        assert sys.vectors is None
        assert sys.residuals is None
        assert len(sys.values) == 16


class TestDistSpec:
    def test_matches_min_distance(self, amo_params, rng):
        op = FiniteOperator(amo_params, 0.52, (1, 22))
        vals = eigenvalues(op, 1e-13)
        B = op.norm_bound + 1.0
        for _ in range(25):
            E = float(rng.uniform(-B, B))
            want = float(np.min(np.abs(vals - E)))
            assert dist_spec(op, E) == pytest.approx(want, abs=1e-8 * B)

    def test_outside_gershgorin(self, amo_params):
        op = FiniteOperator(amo_params, 0.52, (1, 10))
        vals = eigenvalues(op, 1e-13)
        E = op.norm_bound + 5.0
        assert dist_spec(op, E) == pytest.approx(E - vals[-1], abs=1e-8)
        assert dist_spec(op, -E) == pytest.approx(vals[0] + E, abs=1e-8)

    def test_zero_at_eigenvalue(self, amo_params):
        op = FiniteOperator(amo_params, 0.52, (1, 10))
        E = float(eigenvalues(op, 1e-13)[4])
        assert dist_spec(op, E) <= 1e-9 * (op.norm_bound + 1.0)


class TestGreenEntry:
    def test_matches_dense_solve(self, rng):
        params = _amo(2.0)
        op = FiniteOperator(params, 0.33, (1, 12))
        vals = eigenvalues(op, 1e-13)
        done = 0
        while done < 20:
            E = float(rng.uniform(-op.norm_bound, op.norm_bound))
            if np.min(np.abs(vals - E)) < 1e-3:
                continue
            j = int(rng.integers(1, 13))
            k = int(rng.integers(1, 13))
            got = green_entry(op, E, j, k)
            want = dense_green_entry(op.diag, E, j - 1, k - 1)
            if want == 0.0:
                assert got.sign == 0 or got.logmag < -30
            else:
                assert got.sign == (1 if want > 0 else -1)
                assert got.logmag == pytest.approx(math.log(abs(want)),
                                                   abs=1e-8)
            done += 1

    def test_symmetry(self):
        op = FiniteOperator(_amo(10.0), 0.71, (2, 15))
        a = green_entry(op, 0.37, 4, 12)
        b = green_entry(op, 0.37, 12, 4)
        assert (a.sign, a.logmag) == (b.sign, b.logmag)

    def test_singular_at_eigenvalue(self):
        op = FiniteOperator(_amo(10.0), 0.71, (1, 9))
        E = float(eigenvalues(op, 1e-14)[3])
        with pytest.raises(SingularEnergy):
            green_entry(op, E, 2, 5)

    def test_site_outside_window(self):
        op = FiniteOperator(_amo(10.0), 0.71, (1, 9))
        with pytest.raises(DomainError):
            green_entry(op, 0.1, 0, 5)


class TestPoisson:
    def test_free_chain_closed_form(self):
        params = CocycleParams(potential=zero_potential(), lam=1.0,
                               omega=golden_frequency(), E=0.0)
        outer = FiniteOperator(params, 0.0, (1, 5))
        # 5-site free chain: E_k = 2cos(k pi/6), psi_k(j) = sin(jk pi/6)
        E = 2.0 * math.cos(math.pi / 6.0)
        psi = np.sin(np.arange(1, 6) * math.pi / 6.0)
        psi /= np.linalg.norm(psi)
        assert poisson_residual(outer, (2, 4), psi, E, 3) <= 1e-10

    def test_reconstruction_defect_small(self):
        params = _amo(10.0)
        outer = FiniteOperator(params, 0.31, (1, 40))
        checked = 0
        for j in range(3, 39, 3):
            pair = eigenpair(outer, j)
            for window, m in (((5, 35), 20), ((12, 30), 21), ((8, 33), 19)):
                try:
                    r = poisson_residual(outer, window, pair.vector,
                                         pair.value, m)
                except SingularEnergy:
                    # value resonates with the window, identity unresolvable
                    continue
                assert r <= 1e-8
                checked += 1
        assert checked >= 10

    def test_junk_vector_rejected(self, rng):
        outer = FiniteOperator(_amo(10.0), 0.31, (1, 30))
        psi = rng.standard_normal(30)
        psi /= np.linalg.norm(psi)
        with pytest.raises(PreconditionNotMet):
            poisson_residual(outer, (5, 25), psi, 0.3, 15)

    def test_window_must_be_inside(self):
        outer = FiniteOperator(_amo(10.0), 0.31, (1, 30))
        pair = eigenpair(outer, 15)
        with pytest.raises(DomainError):
            poisson_residual(outer, (0, 25), pair.vector, pair.value, 10)

    def test_site_must_be_interior_to_window(self):
        outer = FiniteOperator(_amo(10.0), 0.31, (1, 30))
        pair = eigenpair(outer, 15)
        with pytest.raises(DomainError):
            poisson_residual(outer, (5, 25), pair.vector, pair.value, 26)


class TestGreenDecay:
    def _gap_energy(self, op):
        vals = eigenvalues(op, 1e-12)
        gaps = np.diff(vals)
        i = int(np.argmax(gaps))
        return float((vals[i] + vals[i + 1]) / 2.0)

    def test_large_coupling_passes(self):
        params = _amo(math.exp(6.0))
        op = FiniteOperator(params, 0.23, (1, 14))
        E = self._gap_energy(op)
        ln = math.log(params.lam)
        logdet = dirichlet_det(params.with_energy(E), 0.23, 14).logmag
        J = max(2.0, 14 * ln - logdet + 2.0)
        report = green_decay_check(op, E, J, ln)
        assert report.ok
        assert report.min_slack >= 0.0
        assert report.rate == pytest.approx(ln / 2.0)
        assert report.dist_value >= report.dist_floor
        assert all(op.a <= w <= op.b for w in report.witness)

    def test_small_determinant_precondition(self):
        params = _amo(math.exp(6.0))
        op = FiniteOperator(params, 0.23, (1, 10))
        E = float(eigenvalues(op, 1e-14)[5]) + 1e-13
        with pytest.raises(PreconditionNotMet):
            green_decay_check(op, E, 5.0, math.log(params.lam))

    def test_violation_near_spectrum(self):
        # generous ln makes the determinant precondition vacuous, so the
        # entry bound itself must catch the resolvent blowup
        params = _amo(math.exp(6.0))
        op = FiniteOperator(params, 0.23, (1, 10))
        E = float(eigenvalues(op, 1e-14)[5]) + 1e-10
        loose = Constants(C_decay=0.5)
        with pytest.raises(BoundViolated) as info:
            green_decay_check(op, E, 0.2, -50.0, constants=loose)
        assert info.value.slack < 0.0


class TestCorrelatedPair:
    def test_recovers_exact_pair(self):
        op = FiniteOperator(_amo(10.0), 0.57, (1, 16))
        pair = eigenpair(op, 8)
        found, overlap = correlated_eigenpair(op, pair.value + 1e-9,
                                              pair.vector)
        assert found.index == 8
        assert overlap >= 0.99
        assert abs(found.value - pair.value) <= 1e-8

    def test_pairing_failure_in_gap(self, rng):
        op = FiniteOperator(_amo(10.0), 0.57, (1, 16))
        vals = eigenvalues(op, 1e-12)
        gaps = np.diff(vals)
        i = int(np.argmax(gaps))
        E = float((vals[i] + vals[i + 1]) / 2.0)
        phi = rng.standard_normal(16)
        phi /= np.linalg.norm(phi)
        with pytest.raises(PairingFailed):
            correlated_eigenpair(op, E, phi, eps=1e-15)

    def test_requires_unit_vector(self):
        op = FiniteOperator(_amo(10.0), 0.57, (1, 8))
        with pytest.raises(DomainError):
            correlated_eigenpair(op, 0.0, np.ones(8))


class TestGridScans:
    def test_spectra_rows_sorted_and_match_scalar(self, amo_params):
        G, window = 13, (1, 9)
        table = spectra_on_grid(amo_params, window, G)
        assert table.shape == (G, 9)
        assert np.all(np.diff(table, axis=1) >= 0.0)
        xs = phase_grid(G)
        for i in (0, 6, 12):
            op = FiniteOperator(amo_params, float(xs[i]), window)
            ref = eigenvalues(op, 1e-12)
            assert np.max(np.abs(table[i] - ref)) <= 2e-8 * op.norm_bound

    def test_spectra_thread_invariance(self, amo_params):
        a = spectra_on_grid(amo_params, (1, 12), 900, threads=1)
        b = spectra_on_grid(amo_params, (1, 12), 900, threads=5)
        assert np.array_equal(a, b)

    def test_dist_grid_matches_scalar(self, amo_params):
        G, window, E = 11, (1, 10), 0.65
        d = dist_spec_grid(amo_params, window, G, E)
        xs = phase_grid(G)
        for i in range(G):
            op = FiniteOperator(amo_params, float(xs[i]), window)
            assert d[i] == pytest.approx(dist_spec(op, E), abs=1e-7)

    def test_branch_continuity_and_order(self, amo_params):
        phases = np.linspace(0.2, 0.21, 40)
        lo = eigenvalue_branch(amo_params, (1, 8), phases, 3)
        hi = eigenvalue_branch(amo_params, (1, 8), phases, 4)
        assert np.all(hi >= lo - 1e-9)
        # Lipschitz in x: |dE| <= lam * sup|v'| * dx plus bisection slack
        step = 10.0 * 4.0 * math.pi * (0.01 / 39) + 1e-6
        assert np.max(np.abs(np.diff(lo))) <= step

    def test_branch_index_validated(self, amo_params):
        with pytest.raises(DomainError):
            eigenvalue_branch(amo_params, (1, 8), np.array([0.1]), 9)
