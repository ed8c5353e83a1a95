"""Finite Dirichlet restrictions of the quasi-periodic Schrodinger operator.

H_[a,b](x) is the real symmetric tridiagonal matrix with diagonal
lam*v(x + j*omega), j = a..b, unit off-diagonals, and Dirichlet boundary
(psi(a-1) = psi(b+1) = 0).  Eigenvalues come from Sturm-sequence bisection,
eigenvectors from shifted inverse iteration, Green's functions from window
determinants via Cramer's rule.

The Sturm and bisection kernels are written over a lane axis so that scans
across thousands of phases (or eigenvalue indices) run as single numpy
recurrences; the scalar API wraps one-lane calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._grid import run_chunked, step_values
from .cocycle import CocycleParams
from .config import Constants, DEFAULT_CONSTANTS
from .determinant import SignedLog, dirichlet_det_sequence, shifted_det
from .errors import (BoundViolated, ConvergenceFailure, DomainError,
                     PairingFailed, PreconditionNotMet, SingularEnergy)

_MAX_BISECT_ITERS = 200


class FiniteOperator:
    """One window H_[a,b](x); immutable, diagonal computed on construction."""

    __slots__ = ("params", "x", "a", "b", "diag", "norm_bound",
                 "_diag_list", "_tiny")

    def __init__(self, params: CocycleParams, x: float, window):
        a, b = int(window[0]), int(window[1])
        if b < a:
            raise DomainError(f"window [{a}, {b}] is empty")
        self.params = params
        self.x = float(x)
        self.a = a
        self.b = b
        sites = np.arange(a, b + 1)
        phases = np.array([(self.x + params.omega.shift(int(j))) % 1.0
                           for j in sites])
        self.diag = params.lam * params.potential.evaluate(phases)
        # Gershgorin: every eigenvalue within max|diag| + 2
        self.norm_bound = float(np.max(np.abs(self.diag))) + 2.0
        self._diag_list = [float(d) for d in self.diag]
        self._tiny = 1e-300 * self.norm_bound  # same clamp as _sturm_counts

    @property
    def size(self) -> int:
        return self.b - self.a + 1

    def site_index(self, j: int) -> int:
        """Array position of absolute site j."""
        if not self.a <= j <= self.b:
            raise DomainError(f"site {j} outside window [{self.a}, {self.b}]")
        return j - self.a

    def apply(self, vec: np.ndarray, E: float = 0.0) -> np.ndarray:
        """(H - E) vec."""
        out = (self.diag - E) * vec
        out[:-1] += vec[1:]
        out[1:] += vec[:-1]
        return out

    def __repr__(self):
        return (f"FiniteOperator(window=[{self.a}, {self.b}], x={self.x:.6g}, "
                f"lam={self.params.lam:.6g})")


# ---------------------------------------------------------------------------
# Sturm kernels over a lane axis.

def _sturm_counts(diag: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below E, per lane.

    diag has shape (L, n); E is (L,) or (L, m) and the result matches E.
    Pivot recurrence p_j = d_j - E - 1/p_{j-1}; zero or subnormal pivots are
    clamped to +-mu_tiny (exact zeros count as negative, so an eigenvalue
    hit exactly is counted as below E).
    """
    diag = np.atleast_2d(np.asarray(diag, dtype=np.float64))
    E = np.asarray(E, dtype=np.float64)
    n = diag.shape[1]
    tiny = 1e-300 * (np.max(np.abs(diag)) + 2.0)
    count = np.zeros(E.shape, dtype=np.int64)
    p = np.zeros(E.shape)
    for j in range(n):
        d = diag[:, j] if E.ndim == 1 else diag[:, j:j + 1]
        if j == 0:
            p = d - E
        else:
            p = d - E - 1.0 / p
        sgn = np.where(p > 0, 1.0, -1.0)  # exact zero counted negative
        p = np.where(np.abs(p) < tiny, sgn * tiny, p)
        count += (p < 0)
    return count


def _bisect_targets(diag: np.ndarray, targets: np.ndarray,
                    lo: float, hi: float, tol: float) -> np.ndarray:
    """Per-lane bisection for the targets-th smallest eigenvalue (1-based).

    Bracket invariant E_t in [lo, hi); on count(mid) < t the left endpoint
    moves.  Returns bracket midpoints once the width is <= tol.
    """
    diag = np.atleast_2d(np.asarray(diag, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.int64)
    if tol <= 0:
        raise DomainError("tol must be > 0")
    shape = np.broadcast_shapes(targets.shape,
                                (diag.shape[0],) if targets.ndim == 1
                                else (diag.shape[0], targets.shape[-1]))
    lo_a = np.full(shape, float(lo))
    hi_a = np.full(shape, float(hi))
    width = float(hi) - float(lo)
    iters = max(1, math.ceil(math.log2(max(width, tol) / tol)))
    iters = min(iters, _MAX_BISECT_ITERS)
    for _ in range(iters):
        mid = 0.5 * (lo_a + hi_a)
        ge = _sturm_counts(diag, mid) >= targets
        hi_a = np.where(ge, mid, hi_a)
        lo_a = np.where(ge, lo_a, mid)
    return 0.5 * (lo_a + hi_a)


def _sturm_count_scalar(diag_list, E: float, tiny: float) -> int:
    """Single-energy twin of _sturm_counts; arithmetic matches it exactly.

    Plain floats are an order of magnitude faster than one-lane arrays in
    the bisection loops, and the results agree bit for bit because the
    operations are the same IEEE doubles in the same order.
    """
    count = 0
    p = 0.0
    first = True
    for d in diag_list:
        if first:
            p = d - E
            first = False
        else:
            p = d - E - 1.0 / p
        if abs(p) < tiny:
            p = tiny if p > 0 else -tiny
        if p < 0:
            count += 1
    return count


def _bisect_target_scalar(diag_list, target: int, lo: float, hi: float,
                          tol: float, tiny: float) -> float:
    """One-lane, one-index twin of _bisect_targets (same fixed schedule)."""
    if tol <= 0:
        raise DomainError("tol must be > 0")
    width = hi - lo
    iters = max(1, math.ceil(math.log2(max(width, tol) / tol)))
    iters = min(iters, _MAX_BISECT_ITERS)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _sturm_count_scalar(diag_list, mid, tiny) >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sturm_count(op: FiniteOperator, E: float) -> int:
    """#{eigenvalues of op strictly below E}."""
    return _sturm_count_scalar(op._diag_list, float(E), op._tiny)


def eigenvalues(op: FiniteOperator, tol: float) -> np.ndarray:
    """All eigenvalues, each from a bisection bracket of width <= tol."""
    if tol <= 0:
        raise DomainError("tol must be > 0")
    n = op.size
    B = op.norm_bound + 1.0
    ends = _sturm_counts(op.diag[None, :], np.array([-B, B]))
    if ends[0] != 0 or ends[1] != n:
        raise DomainError("Sturm bracket certificate failed at +-(|H|+1)")
    vals = _bisect_targets(op.diag[None, :],
                           np.arange(1, n + 1, dtype=np.int64)[None, :],
                           -B, B, tol)
    return vals[0]


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float
    index: int
    iterations: int


def _tridiag_solve(dd: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve T y = rhs where T is tridiagonal with diagonal dd and unit
    off-diagonals, by elimination with partial pivoting.

    Near-singular T produces a huge solution rather than an error; inverse
    iteration relies on exactly that.
    """
    n = len(dd)
    bb = np.array(dd, dtype=np.float64)
    cc = np.ones(n - 1) if n > 1 else np.zeros(0)
    ee = np.zeros(n - 2) if n > 2 else np.zeros(0)
    y = np.array(rhs, dtype=np.float64)
    tiny = 1e-300 * (np.max(np.abs(dd)) + 2.0)
    for i in range(n - 1):
        if abs(bb[i]) >= 1.0:
            m = 1.0 / bb[i]
            bb[i + 1] -= m * cc[i]
            y[i + 1] -= m * y[i]
        else:
            # swap rows i, i+1 (sub-diagonal entry 1 becomes the pivot)
            p, q = bb[i], cc[i]
            r = bb[i + 1]
            s = cc[i + 1] if i + 1 < n - 1 else 0.0
            bb[i] = 1.0
            cc[i] = r
            if i < n - 2:
                ee[i] = s
            y[i], y[i + 1] = y[i + 1], y[i]
            bb[i + 1] = q - p * r
            if i + 1 < n - 1:
                cc[i + 1] = -p * s
    if abs(bb[n - 1]) < tiny:
        bb[n - 1] = tiny if bb[n - 1] >= 0 else -tiny
    y[n - 1] /= bb[n - 1]
    if n > 1:
        y[n - 2] = (y[n - 2] - cc[n - 2] * y[n - 1]) / bb[n - 2]
    for i in range(n - 3, -1, -1):
        y[i] = (y[i] - cc[i] * y[i + 1] - ee[i] * y[i + 2]) / bb[i]
    return y


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(vec))
    for vi in vec:
        if abs(vi) > 1e-8 * peak:
            return vec if vi > 0 else -vec
    return vec


def _start_vector(n: int, j: int, a: int, seed: int) -> np.ndarray:
    key = (seed * 0x9E3779B97F4A7C15 + j * 1000003 + (a & 0xFFFF) * 7919 + n)
    rng = np.random.default_rng(key & ((1 << 63) - 1))
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def eigenpair(op: FiniteOperator, j: int, tol: Optional[float] = None,
              seed: int = 0, max_iter: int = 50) -> EigenPair:
    """j-th eigenpair (1-based), by bisection plus shifted inverse iteration.

    Residual target is 1e-10*(|H|+1); the shift stays at the bisection
    value so iteration cannot wander to a neighbouring index.  Vector sign:
    first entry above 1e-8 of the peak is positive.
    """
    n = op.size
    if not 1 <= j <= n:
        raise DomainError(f"index {j} outside 1..{n}")
    B = op.norm_bound + 1.0
    if tol is None:
        tol = 16.0 * np.finfo(np.float64).eps * B
    E0 = _bisect_target_scalar(op._diag_list, j, -B, B, tol, op._tiny)
    target = 1e-10 * (op.norm_bound + 1.0)
    shifted = op.diag - E0
    best = None
    vec = _start_vector(n, j, op.a, seed)
    for it in range(1, max_iter + 1):
        y = _tridiag_solve(shifted, vec)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0.0:
            # exactly singular shift: nudge by one bracket width
            shifted = op.diag - (E0 + tol)
            vec = _start_vector(n, j, op.a, seed + it)
            continue
        vec = y / norm
        mu = float(vec @ op.apply(vec))
        resid = float(np.linalg.norm(op.apply(vec, E=mu)))
        if best is None or resid < best[2]:
            best = (mu, vec.copy(), resid, it)
        if resid <= target:
            return EigenPair(mu, _fix_sign(vec), resid, j, it)
    mu, vec, resid, it = best
    raise ConvergenceFailure(
        f"inverse iteration residual {resid:.3e} > {target:.3e} "
        f"after {max_iter} iterations (index {j})",
        best=EigenPair(mu, _fix_sign(vec), resid, j, it))


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray
    vectors: Optional[np.ndarray]  # columns, aligned with values
    residuals: Optional[np.ndarray]


def eigensystem(op: FiniteOperator, tol: Optional[float] = None,
                want_vectors: bool = False, seed: int = 0) -> EigenSystem:
    """All eigenvalues, optionally with inverse-iteration eigenvectors.

    Eigenvalues of these windows are simple, but pairs can sit closer than
    float resolution; vectors in any cluster tighter than 1e-9*(|H|+1) are
    re-orthogonalized and their residuals recomputed.
    """
    B = op.norm_bound + 1.0
    if tol is None:
        tol = 16.0 * np.finfo(np.float64).eps * B
    vals = eigenvalues(op, tol)
    if not want_vectors:
        return EigenSystem(vals, None, None)
    n = op.size
    vecs = np.empty((n, n))
    resids = np.empty(n)
    for j in range(1, n + 1):
        pair = eigenpair(op, j, tol=tol, seed=seed)
        vecs[:, j - 1] = pair.vector
        resids[j - 1] = pair.residual
        vals[j - 1] = pair.value
    gap_tol = 1e-9 * B
    start = 0
    for jj in range(1, n + 1):
        if jj == n or vals[jj] - vals[jj - 1] > gap_tol:
            if jj - start > 1:
                block = vecs[:, start:jj]
                q, _ = np.linalg.qr(block)
                q = q * np.sign(np.sum(q * block, axis=0))
                vecs[:, start:jj] = q
                for c in range(start, jj):
                    vecs[:, c] = _fix_sign(vecs[:, c])
                    resids[c] = np.linalg.norm(op.apply(vecs[:, c], E=vals[c]))
            start = jj
    return EigenSystem(vals, vecs, resids)


def dist_spec(op: FiniteOperator, E: float) -> float:
    """min_j |E - E_j|, via two index-targeted bisections."""
    n = op.size
    B = op.norm_bound + 1.0
    dl, tiny = op._diag_list, op._tiny
    if abs(E) >= B:
        # outside the Gershgorin disc: nearest eigenvalue is the extreme one
        edge = 1 if E < 0 else n
        val = _bisect_target_scalar(dl, edge, -B, B, 1e-13 * B, tiny)
        return abs(E - val)
    m = _sturm_count_scalar(dl, float(E), tiny)
    dist = math.inf
    if m >= 1:          # nearest below
        v = _bisect_target_scalar(dl, m, -B, B, 1e-13 * B, tiny)
        dist = min(dist, abs(E - v))
    if m < n:           # nearest at-or-above
        v = _bisect_target_scalar(dl, m + 1, -B, B, 1e-13 * B, tiny)
        dist = min(dist, abs(E - v))
    return dist


# ---------------------------------------------------------------------------
# Green's functions via window determinants.

def _window_log_tables(params: CocycleParams, x: float, a: int, b: int):
    """Prefix and suffix window determinants of [a,b] in signed-log form.

    pref[m] = f_[a, a+m-1], suf[m] = f_[b-m+1, b] for m = 0..n (length-m
    windows anchored at the left resp. right edge).  The suffix runs the
    recurrence site-reversed, which leaves window determinants unchanged.
    """
    n = b - a + 1
    ps, pl, pc = dirichlet_det_sequence(params, x, n, k0=a)
    ss, sl, sc = dirichlet_det_sequence(params, x, n, k0=b, step=-1)
    return ps, pl, ss, sl, (pc or sc)


def green_entry(op: FiniteOperator, E: float, j: int, k: int,
                check_spectrum: bool = True) -> SignedLog:
    """(H_[a,b](x) - E)^{-1}(j, k) as a SignedLog, via Cramer's rule.

    For j <= k this is (-1)^{j+k} f_[a,j-1] f_[k+1,b] / f_[a,b]; symmetric
    otherwise.  SingularEnergy when the window determinant is zero or has
    lost all significant digits, or (with check_spectrum) when E sits
    within bisection resolution of an eigenvalue.
    """
    a, b = op.a, op.b
    op.site_index(j), op.site_index(k)
    if j > k:
        j, k = k, j
    if check_spectrum:
        # dist_spec resolves eigenvalues to ~1e-13*(|H|+1); below 10x that
        # the quotient has no certifiable digits
        floor = 1e-12 * (op.norm_bound + 1.0)
        if dist_spec(op, E) < floor:
            raise SingularEnergy(f"E={E} within {floor:.3e} of the window spectrum")
    pe = op.params.with_energy(E)
    den = shifted_det(pe, op.x, a, b)
    if den.sign == 0 or den.cancelled:
        raise SingularEnergy(
            f"window determinant has no significant digits at E={E}")
    out = (shifted_det(pe, op.x, a, j - 1) *
           shifted_det(pe, op.x, k + 1, b)) / den
    if (j + k) & 1:
        out = -out
    return out


def poisson_residual(op_outer: FiniteOperator, window, psi: np.ndarray,
                     value: float, m: int) -> float:
    """Defect of reconstructing psi(m) from the window's Green function.

    psi is an eigenvector of op_outer with eigenvalue `value`; for any
    sub-window [a,b] and interior site m, exactness of the resolvent gives
    psi(m) = -G(m,a) psi(a-1) - G(m,b) psi(b+1).  Returns the absolute
    defect; boundary values outside the outer window are zero by the
    Dirichlet convention.
    """
    a, b = int(window[0]), int(window[1])
    if not (op_outer.a <= a and b <= op_outer.b):
        raise DomainError("window must sit inside the outer operator")
    if not a <= m <= b:
        raise DomainError(f"site {m} outside window [{a}, {b}]")
    hnorm = op_outer.norm_bound + 1.0
    defect = float(np.linalg.norm(op_outer.apply(np.asarray(psi), E=value)))
    if defect > 1e-6 * hnorm:
        raise PreconditionNotMet(
            f"psi is not an eigenvector: residual {defect:.3e}")

    def outer_val(site):
        if op_outer.a <= site <= op_outer.b:
            return float(psi[site - op_outer.a])
        return 0.0

    inner = FiniteOperator(op_outer.params, op_outer.x, (a, b))
    # the identity amplifies the eigenpair defect (and the Green solve's own
    # rounding, ~eps*|H|) by 1/dist(value, spec inner); keeping the quotient
    # below ~1e-9 needs dist at least 1e9 times that error scale
    eps = np.finfo(np.float64).eps
    floor = 1e9 * (defect + 16.0 * eps * (inner.norm_bound + 1.0))
    if dist_spec(inner, value) < floor:
        raise SingularEnergy(
            f"value is within {floor:.3e} of the inner window spectrum; "
            "the reconstruction has no certifiable digits there")
    g_left = green_entry(inner, value, m, a, check_spectrum=False)
    g_right = green_entry(inner, value, m, b, check_spectrum=False)
    total = (SignedLog.from_float(outer_val(m)) +
             g_left * SignedLog.from_float(outer_val(a - 1)) +
             g_right * SignedLog.from_float(outer_val(b + 1)))
    return abs(total.value())


@dataclass(frozen=True)
class GreenDecayReport:
    n: int
    J: float
    rate: float              # log(lam)/2
    offset: float            # J + C*n^(1-nu)
    min_slack: float         # min over entries of bound - log|G|
    witness: tuple           # (j, k) attaining min_slack
    dist_value: float
    dist_floor: float
    ok: bool


def green_decay_check(op: FiniteOperator, E: float, J: float,
                      ln_value: float,
                      constants: Constants = DEFAULT_CONSTANTS) -> GreenDecayReport:
    """Off-diagonal Green decay at rate log(lam)/2, with offset J + C n^(1-nu).

    Requires the window determinant to be large: log|f_n| > n*ln_value - J
    (ln_value is the finite-scale Lyapunov average; PreconditionNotMet
    otherwise).  Asserts log|G(j,k)| <= -(log lam/2)|k-j| + J + C n^(1-nu)
    for all entries and dist(E, spec) >= exp(-J - C n^(1-nu)).
    """
    a, b = op.a, op.b
    n = op.size
    pe = op.params.with_energy(E)
    ps, pl, ss, sl, cancelled = _window_log_tables(pe, op.x, a, b)
    log_den = pl[n]
    if ps[n] == 0 or cancelled:
        raise PreconditionNotMet("window determinant lost all digits")
    if not log_den > n * ln_value - J:
        raise PreconditionNotMet(
            f"log|f_n| = {log_den:.6g} <= n*ln - J = {n * ln_value - J:.6g}")
    C = constants.C_decay
    nu = constants.nu
    offset = J + C * n ** (1.0 - nu)
    rate = math.log(op.params.lam) / 2.0
    # log|G| for j <= k: pref[p] + suf[q] - den with p = j-a, q = b-k,
    # valid where p + q <= n-1; |k-j| = n-1-p-q
    logg = pl[:n, None] + sl[None, :n] - log_den
    p_idx, q_idx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    sep = (n - 1) - p_idx - q_idx
    valid = sep >= 0
    bound = -rate * sep + offset
    slack = np.where(valid, bound - logg, np.inf)
    amin = np.unravel_index(np.argmin(slack), slack.shape)
    min_slack = float(slack[amin])
    witness = (a + int(amin[0]), b - int(amin[1]))
    dist = dist_spec(op, E)
    dist_floor = math.exp(-offset)
    ok = min_slack >= 0.0 and dist >= dist_floor
    report = GreenDecayReport(n=n, J=J, rate=rate, offset=offset,
                              min_slack=min_slack, witness=witness,
                              dist_value=dist, dist_floor=dist_floor, ok=ok)
    if min_slack < 0.0:
        raise BoundViolated(
            f"Green entry {witness} exceeds the decay bound by "
            f"{-min_slack:.3e} in log scale", witness=witness, slack=min_slack)
    if dist < dist_floor:
        raise BoundViolated(
            f"dist(E, spec) = {dist:.3e} below the floor {dist_floor:.3e}",
            witness="dist_spec", slack=dist - dist_floor)
    return report


def correlated_eigenpair(op: FiniteOperator, E: float, phi: np.ndarray,
                         eps: Optional[float] = None, seed: int = 0):
    """Eigenpair near E carrying weight of the trial vector phi.

    With eps = |(H-E)phi| and phi unit, some eigenvalue lies within
    sqrt(2)*eps of E with eigenvector overlap at least (2n)^{-1/2}.
    Returns (EigenPair, overlap) for the candidate of maximal overlap;
    PairingFailed if no candidate clears the overlap floor.  eps is clamped
    below at the eigensolver noise floor.
    """
    n = op.size
    phi = np.asarray(phi, dtype=np.float64)
    if abs(np.linalg.norm(phi) - 1.0) > 1e-8:
        raise DomainError("phi must be unit norm")
    if eps is None:
        eps = float(np.linalg.norm(op.apply(phi, E=E)))
    floor = 64.0 * np.finfo(np.float64).eps * (op.norm_bound + 1.0)
    eps_eff = max(float(eps), floor)
    half = math.sqrt(2.0) * eps_eff
    m_lo = sturm_count(op, E - half)
    m_hi = sturm_count(op, E + half)
    overlap_floor = 1.0 / math.sqrt(2.0 * n)
    best = None
    for j in range(m_lo + 1, m_hi + 1):
        pair = eigenpair(op, j, seed=seed)
        ov = abs(float(phi @ pair.vector))
        if best is None or ov > best[1]:
            best = (pair, ov)
    if best is None or best[1] < overlap_floor:
        got = 0.0 if best is None else best[1]
        raise PairingFailed(
            f"no eigenvalue within {half:.3e} of E={E} has overlap >= "
            f"{overlap_floor:.3e} (best {got:.3e}, "
            f"{m_hi - m_lo} candidates)")
    return best


# ---------------------------------------------------------------------------
# Vectorized scans used by the deviation and spectrum modules.

def diag_for_phases(params: CocycleParams, window, phases: np.ndarray) -> np.ndarray:
    """(len(phases), n) diagonal matrix entries lam*v(x_i + j*omega)."""
    a, b = int(window[0]), int(window[1])
    phases = np.asarray(phases, dtype=np.float64)
    n = b - a + 1
    out = np.empty((len(phases), n))
    for jj, site in enumerate(range(a, b + 1)):
        out[:, jj] = params.lam * params.potential.evaluate(
            (phases + params.omega.shift(site)) % 1.0)
    return out


def _grid_diag(params: CocycleParams, window, G: int, x0: float) -> np.ndarray:
    """(G, n) diagonals over the shifted uniform grid, FFT-evaluated."""
    a, b = int(window[0]), int(window[1])
    n = b - a + 1
    mat = step_values(params.potential, params.lam, params.omega, n, G,
                      x0=x0, E=0.0, k0=a)
    return np.ascontiguousarray(mat.T)


def spectra_on_grid(params: CocycleParams, window, G: int, x0: float = 0.0,
                    tol: Optional[float] = None, threads: int = 1) -> np.ndarray:
    """(G, n) sorted eigenvalues of H_window(x_i) over the phase grid."""
    diag = _grid_diag(params, window, G, x0)
    n = diag.shape[1]
    B = float(np.max(np.abs(diag))) + 3.0
    if tol is None:
        tol = 1e-9 * B
    targets = np.arange(1, n + 1, dtype=np.int64)[None, :]

    def work(i0, i1):
        return _bisect_targets(diag[i0:i1], targets, -B, B, tol)

    return run_chunked(work, G, threads=threads)


def dist_spec_grid(params: CocycleParams, window, G: int, E: float,
                   x0: float = 0.0, threads: int = 1) -> np.ndarray:
    """dist(E, spec H_window(x_i)) over the phase grid."""
    diag = _grid_diag(params, window, G, x0)
    return dist_spec_for_diag(diag, E, threads=threads)


def dist_spec_for_diag(diag: np.ndarray, E: float, threads: int = 1) -> np.ndarray:
    """Per-lane dist(E, spec) for precomputed diagonals (L, n)."""
    n = diag.shape[1]
    B = float(np.max(np.abs(diag))) + 3.0
    tol = 1e-13 * B

    def work(i0, i1):
        sub = diag[i0:i1]
        m = _sturm_counts(sub, np.full(i1 - i0, float(E)))
        below = np.clip(m, 1, n)
        above = np.clip(m + 1, 1, n)
        vals = _bisect_targets(sub, np.stack([below, above], axis=1),
                               -B, B, tol)
        d = np.full(i1 - i0, np.inf)
        has_below = m >= 1
        has_above = m < n
        d[has_below] = np.abs(E - vals[has_below, 0])
        d[has_above] = np.minimum(d[has_above],
                                  np.abs(E - vals[has_above, 1]))
        return d

    return run_chunked(work, diag.shape[0], threads=threads)


def eigenvalue_branch(params: CocycleParams, window, phases: np.ndarray,
                      j: int, tol: Optional[float] = None,
                      threads: int = 1) -> np.ndarray:
    """E_j(x) over an arbitrary phase array (1-based branch index j)."""
    a, b = int(window[0]), int(window[1])
    n = b - a + 1
    if not 1 <= j <= n:
        raise DomainError(f"index {j} outside 1..{n}")
    diag = diag_for_phases(params, window, phases)
    B = float(np.max(np.abs(diag))) + 3.0
    if tol is None:
        tol = 1e-11 * B

    def work(i0, i1):
        return _bisect_targets(diag[i0:i1],
                               np.full(i1 - i0, j, dtype=np.int64),
                               -B, B, tol)

    return run_chunked(work, len(phases), threads=threads)
