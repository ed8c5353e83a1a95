"""Transfer-matrix cocycles, finite-scale Lyapunov averages, block products.

The one-step matrix at phase x is [[lam*v(x) - E, -1], [1, 0]]; the n-step
product multiplies steps at phases x + k*omega, k = n..1.  At the coupling
sizes of interest raw products overflow doubles within a few dozen steps,
so every product is carried as a unit-scale matrix plus a log scale factor,
renormalized at each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._grid import GRID_SHIFT, phase_grid, run_chunked, step_values
from .errors import DomainError, HypothesisFailed
from .numtheory import Frequency
from .potential import GevreyPotential, truncate


def spectral_norm_2x2(m) -> float:
    """Largest singular value, closed form; branch-free, overflow-safe for
    unit-scale matrices."""
    a, b, c, d = float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])
    t = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = max(t * t - 4.0 * det * det, 0.0)
    return math.sqrt(0.5 * (t + math.sqrt(disc)))


def _spectral_norm_arrays(a, b, c, d):
    t = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = np.maximum(t * t - 4.0 * det * det, 0.0)
    return np.sqrt(0.5 * (t + np.sqrt(disc)))


class ScaledMatrix:
    """A 2x2 matrix stored as exp(logscale) * m with norm(m) in [1, 2].

    Renormalization factors out the largest entry magnitude, which pins the
    spectral norm of the stored part to [1, 2].
    """

    __slots__ = ("m", "logscale")

    def __init__(self, m, logscale: float = 0.0):
        m = np.asarray(m, dtype=np.float64)
        peak = np.max(np.abs(m))
        if peak == 0.0:
            raise DomainError("zero matrix cannot be scale-normalized")
        self.m = m / peak
        self.logscale = float(logscale) + math.log(peak)

    @classmethod
    def identity(cls) -> "ScaledMatrix":
        return cls(np.eye(2), 0.0)

    def compose_left(self, t) -> "ScaledMatrix":
        """Multiply by a plain matrix on the left: returns scaled(t @ self)."""
        return ScaledMatrix(np.asarray(t, dtype=np.float64) @ self.m,
                            self.logscale)

    def matmul(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return ScaledMatrix(self.m @ other.m, self.logscale + other.logscale)

    def norm_log(self) -> float:
        """log of the spectral norm of the represented matrix."""
        return self.logscale + math.log(spectral_norm_2x2(self.m))

    def entry(self, i: int, j: int):
        """(sign, logmag) of the represented entry."""
        e = float(self.m[i, j])
        if e == 0.0:
            return 0, -math.inf
        return (1 if e > 0 else -1), self.logscale + math.log(abs(e))

    def det_log_error(self) -> float:
        """|log|det|| of the represented matrix; 0 for a true cocycle product."""
        det = float(self.m[0, 0] * self.m[1, 1] - self.m[0, 1] * self.m[1, 0])
        if det == 0.0:
            return math.inf
        return abs(math.log(abs(det)) + 2.0 * self.logscale)


@dataclass(frozen=True)
class CocycleParams:
    """Potential, coupling, frequency, and energy of one cocycle.

    The standing energy window is [-lam*sup|v| - 2, lam*sup|v| + 2] with
    sup|v| bounded by the coefficient sum; energies outside are legal (free
    propagation tests live there) but flagged.
    """

    potential: GevreyPotential
    lam: float
    omega: Frequency
    E: float
    energy_window: tuple = field(init=False)
    in_window: bool = field(init=False)

    def __post_init__(self):
        if self.lam <= 0:
            raise DomainError("coupling lam must be positive")
        v_sup = self.potential.coeff_abs_sum()
        lo, hi = -self.lam * v_sup - 2.0, self.lam * v_sup + 2.0
        object.__setattr__(self, "energy_window", (lo, hi))
        object.__setattr__(self, "in_window", lo <= self.E <= hi)

    def with_potential(self, pot: GevreyPotential) -> "CocycleParams":
        return CocycleParams(pot, self.lam, self.omega, self.E)

    def with_energy(self, E: float) -> "CocycleParams":
        return CocycleParams(self.potential, self.lam, self.omega, E)

    def step_value(self, x: float, k: int) -> float:
        """lam*v(x + k*omega) - E with the orbit offset computed exactly."""
        phase = (x + self.omega.shift(k)) % 1.0
        return self.lam * self.potential.evaluate(phase) - self.E


def one_step(params: CocycleParams, x: float) -> np.ndarray:
    """[[lam*v(x) - E, -1], [1, 0]] at the given phase."""
    t = params.lam * params.potential.evaluate(x % 1.0) - params.E
    return np.array([[t, -1.0], [1.0, 0.0]])


def _orbit_step_values(params: CocycleParams, x: float, n: int) -> np.ndarray:
    """lam*v(x + k*omega) - E for k = 1..n, orbit offsets exact."""
    offs = np.asarray(params.omega.shifts(n))
    vals = params.potential.evaluate((x + offs) % 1.0)
    return params.lam * vals - params.E


def product(params: CocycleParams, x: float, n: int) -> ScaledMatrix:
    """n-step product over phases x + k*omega, k = n..1, renormalized each step."""
    if n < 1:
        raise DomainError("n must be >= 1")
    # left-composition [[t, -1], [1, 0]] @ acc on plain floats; entries are
    # divided by the peak each step exactly as ScaledMatrix would
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    logs = 0.0
    for t in _orbit_step_values(params, x, n).tolist():
        a, c = t * a - c, a
        b, d = t * b - d, b
        peak = max(abs(a), abs(b), abs(c), abs(d))
        if peak == 0.0:
            raise DomainError("zero matrix cannot be scale-normalized")
        logs += math.log(peak)
        a /= peak
        b /= peak
        c /= peak
        d /= peak
    return ScaledMatrix(np.array([[a, b], [c, d]]), logs)


def u_n(params: CocycleParams, x: float, n: int) -> float:
    """(1/n) log ||M_n(x)||; nonnegative since det M_n = 1."""
    return max(product(params, x, n).norm_log() / n, 0.0)


def _product_lane(tcol) -> tuple:
    """One lane of _product_grid on plain floats."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    logs = 0.0
    for t in tcol:
        a, c = t * a - c, a
        b, d = t * b - d, b
        peak = max(abs(a), abs(b), abs(c), abs(d))
        logs += math.log(peak)
        inv = 1.0 / peak
        a *= inv
        b *= inv
        c *= inv
        d *= inv
    return a, b, c, d, logs


def _product_grid(tmat: np.ndarray, threads: int = 1):
    """Per-lane renormalized products for a (steps, lanes) step-value matrix.

    Returns unit-scale entries (a, b, c, d) and the per-lane log scale;
    the represented product is exp(logs) * [[a, b], [c, d]].
    """
    steps, lanes = tmat.shape
    if lanes <= 8:
        # numpy per-op overhead dominates tiny grids; run plain float lanes
        cols = [_product_lane(tmat[:, i].tolist()) for i in range(lanes)]
        return tuple(np.array([col[f] for col in cols]) for f in range(5))

    def work(i0, i1):
        a = np.ones(i1 - i0)
        b = np.zeros(i1 - i0)
        c = np.zeros(i1 - i0)
        d = np.ones(i1 - i0)
        logs = np.zeros(i1 - i0)
        for k in range(steps):
            t = tmat[k, i0:i1]
            a, c = t * a - c, a
            b, d = t * b - d, b
            peak = np.maximum(np.maximum(np.abs(a), np.abs(b)),
                              np.maximum(np.abs(c), np.abs(d)))
            logs += np.log(peak)
            inv = 1.0 / peak
            a *= inv
            b *= inv
            c *= inv
            d *= inv
        return a, b, c, d, logs

    return run_chunked(work, lanes, threads=threads)


def u_n_grid(params: CocycleParams, n: int, Nx: int, x0: float = 0.0,
             threads: int = 1):
    """u_n at the shifted uniform grid x0 + (i + shift)/Nx; returns (phases, u)."""
    tmat = step_values(params.potential, params.lam, params.omega, n, Nx,
                       x0=x0, E=params.E)
    a, b, c, d, logs = _product_grid(tmat, threads=threads)
    u = (logs + np.log(_spectral_norm_arrays(a, b, c, d))) / n
    return phase_grid(Nx, x0), np.maximum(u, 0.0)


def L_n(params: CocycleParams, n: int, Nx: int = 2048, threads: int = 1) -> float:
    """Grid average of u_n over Nx phases (uniform grid = trapezoid rule on
    the circle)."""
    if Nx < 2:
        raise DomainError("Nx must be >= 2")
    _, u = u_n_grid(params, n, Nx, threads=threads)
    return float(np.mean(u))


def L_n_refined(params: CocycleParams, n: int, Nx: int = 2048,
                threads: int = 1):
    """(value at 2*Nx, Richardson-style error estimate |L(2Nx) - L(Nx)|)."""
    coarse = L_n(params, n, Nx, threads=threads)
    fine = L_n(params, n, 2 * Nx, threads=threads)
    return fine, abs(fine - coarse)


@dataclass(frozen=True)
class LyapunovEstimate:
    """Finite-scale Lyapunov data along a schedule of lengths."""

    value: float
    sequence: tuple  # ((n, L_n), ...)
    converged: bool
    max_increase: float  # monotonicity diagnostic: largest upward jump


def lyapunov(params: CocycleParams, n_schedule, Nx: int = 2048,
             tol: float = 1e-3, threads: int = 1) -> LyapunovEstimate:
    """L_n along an increasing schedule; converged if the last two agree to tol."""
    ns = [int(n) for n in n_schedule]
    if len(ns) < 2 or any(n2 <= n1 for n1, n2 in zip(ns, ns[1:])):
        raise DomainError("schedule must be increasing with >= 2 entries")
    seq = [(n, L_n(params, n, Nx, threads=threads)) for n in ns]
    vals = [v for _, v in seq]
    increases = [v2 - v1 for v1, v2 in zip(vals, vals[1:])]
    return LyapunovEstimate(value=vals[-1], sequence=tuple(seq),
                            converged=abs(vals[-1] - vals[-2]) <= tol,
                            max_increase=max(0.0, max(increases)))


# --- block products --------------------------------------------------------

@dataclass(frozen=True)
class AvalancheReport:
    """Residual of the block-product expansion against its C*n/mu budget."""

    n: int
    mu: float
    residual: float
    bound: float
    ok: bool
    min_norm: float
    max_diff_defect: float


def avalanche_residual(blocks, mu: float,
                       C: float = 20.0) -> AvalancheReport:
    """Check the product expansion over unimodular-ish blocks.

    Hypotheses (raised as HypothesisFailed with the condition name):
      large: every ||A_j|| >= mu and mu > n
      diff:  log||A_{j+1}|| + log||A_j|| - log||A_{j+1} A_j|| < (1/2) log mu
    Conclusion (reported, ok flag):
      | log||A_n...A_1|| + sum_{j=2}^{n-1} log||A_j||
        - sum_{j=1}^{n-1} log||A_{j+1} A_j|| |  <=  C * n / mu.
    """
    mats = [np.asarray(a, dtype=np.float64) for a in blocks]
    n = len(mats)
    if n < 2:
        raise DomainError("need at least two blocks")
    for j, a in enumerate(mats):
        det = abs(float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))
        # det of a float unimodular block carries cancellation error of
        # order ||A||^2 * eps, so the tolerance must scale with it
        fro2 = float(np.sum(a * a))
        if det > 1.0 + 1e-9 + 16.0 * np.finfo(np.float64).eps * fro2:
            raise DomainError(f"block {j} has |det| = {det} > 1")
    norms = [spectral_norm_2x2(a) for a in mats]
    if mu <= n:
        raise HypothesisFailed("large", detail=f"mu = {mu} <= n = {n}")
    for j, nj in enumerate(norms):
        if nj < mu:
            raise HypothesisFailed("large", index=j,
                                   detail=f"||A_{j}|| = {nj:.6g} < mu = {mu:.6g}")
    half_log_mu = 0.5 * math.log(mu)
    pair_lognorms = []
    max_defect = -math.inf
    for j in range(n - 1):
        pair = spectral_norm_2x2(mats[j + 1] @ mats[j])
        defect = math.log(norms[j + 1]) + math.log(norms[j]) - math.log(pair)
        max_defect = max(max_defect, defect)
        if defect >= half_log_mu:
            raise HypothesisFailed(
                "diff", index=j,
                detail=f"defect {defect:.6g} >= (1/2) log mu = {half_log_mu:.6g}")
        pair_lognorms.append(math.log(pair))
    total = ScaledMatrix(mats[0])
    for a in mats[1:]:
        total = total.compose_left(a)
    residual = abs(total.norm_log()
                   + sum(math.log(v) for v in norms[1:-1])
                   - sum(pair_lognorms))
    bound = C * n / mu
    return AvalancheReport(n=n, mu=float(mu), residual=residual, bound=bound,
                           ok=residual <= bound, min_norm=min(norms),
                           max_diff_defect=max_defect)


def truncation_gap(params: CocycleParams, x: float, n: int) -> float:
    """|u_n with full potential - u_n with the scale-n truncation|."""
    tp = truncate(params.potential, n)
    return abs(u_n(params, x, n) - u_n(params.with_potential(tp.potential), x, n))
