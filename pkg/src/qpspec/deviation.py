"""Empirical large-deviation statistics on the phase circle.

The objects here are measured sets {x : |u_n(x) - L_n| > delta} and their
determinant analogue, Wegner-style sets {x : dist(E, spec H_n(x)) < eps},
and eigenvalue-branch flatness.  Everything is grid-sampled: measure
estimates are grid counts divided by G, interval structure is the circular
run structure of the bad indices, and endpoints get one extra bisection
level of refinement so reported intervals do not jitter with grid phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._grid import GRID_SHIFT
from .cocycle import CocycleParams, u_n, u_n_grid
from .config import Constants, DEFAULT_CONSTANTS, fmt17
from .determinant import dirichlet_det, dirichlet_det_grid
from .errors import DegenerateFit, DomainError
from .operator import FiniteOperator, dist_spec, dist_spec_grid, eigenvalue_branch

CSV_FIELDS = ("n", "delta_or_epsilon", "G", "measure_est", "interval_count",
              "rhs_comparison", "seed")


@dataclass(frozen=True)
class CircleGridSet:
    """Bad-point set of a circle scan: indices, circular runs, refined ends.

    Grid convention: index i sits at phase (x0 + (i + shift)/G) mod 1.
    intervals are (start, end) inclusive index runs; a run with start > end
    wraps through index 0.  refined holds one (lo, hi) phase pair per run
    after a single bisection level at each boundary.
    """

    G: int
    bad: np.ndarray
    intervals: tuple
    refined: tuple
    x0: float = 0.0
    shift: float = GRID_SHIFT

    @property
    def measure_est(self) -> float:
        return len(self.bad) / self.G

    @property
    def count(self) -> int:
        return len(self.intervals)

    def phase(self, i: float) -> float:
        return (self.x0 + (i + self.shift) / self.G) % 1.0

    def contains_index(self, i: int) -> bool:
        pos = np.searchsorted(self.bad, i)
        return pos < len(self.bad) and self.bad[pos] == i


def _circular_runs(mask: np.ndarray):
    """Maximal runs of True in circular order, as (start, end) inclusive."""
    idx = np.nonzero(mask)[0]
    G = len(mask)
    if len(idx) == 0:
        return idx, ()
    if len(idx) == G:
        return idx, ((0, G - 1),)
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = [int(idx[0])] + [int(idx[b + 1]) for b in breaks]
    ends = [int(idx[b]) for b in breaks] + [int(idx[-1])]
    runs = list(zip(starts, ends))
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == G - 1:
        first = runs.pop(0)
        last = runs.pop()
        runs.insert(0, (last[0], first[1]))  # wrapping run
    return idx, tuple(runs)


def build_grid_set(mask: np.ndarray, G: int, x0: float = 0.0,
                   predicate: Optional[Callable[[float], bool]] = None,
                   shift: float = GRID_SHIFT) -> CircleGridSet:
    """Assemble a CircleGridSet from a bad-point mask.

    predicate(phase) -> bad? drives the one-level endpoint bisection; when
    omitted, endpoints sit at the midpoints of the boundary grid cells.
    """
    if len(mask) != G:
        raise DomainError("mask length must equal G")
    bad, runs = _circular_runs(np.asarray(mask, dtype=bool))

    def phase(i: float) -> float:
        return (x0 + (i + shift) / G) % 1.0

    cell = 1.0 / G
    refined = []
    for (s, e) in runs:
        if len(bad) == G:
            refined.append((phase(0), phase(G - 1)))
            break
        lo_mid = phase(s - 0.5)
        hi_mid = phase(e + 0.5)
        if predicate is None:
            refined.append((lo_mid, hi_mid))
            continue
        lo = phase(s - 0.75) if predicate(lo_mid) else phase(s - 0.25)
        hi = phase(e + 0.75) if predicate(hi_mid) else phase(e + 0.25)
        refined.append((lo % 1.0, hi % 1.0))
    return CircleGridSet(G=G, bad=bad, intervals=runs, refined=tuple(refined),
                         x0=x0, shift=shift)


def _check_scan_args(delta: float, G: int):
    if delta <= 0:
        raise DomainError("delta must be > 0")
    if G < 1000:
        raise DomainError("G must be >= 1000 for a stable measure estimate")


def deviation_set_u(params: CocycleParams, n: int, delta: float, G: int,
                    x0: float = 0.0, threads: int = 1,
                    refine: bool = True) -> CircleGridSet:
    """{x : |u_n(x) - L_n| > delta} on the G-grid.

    L_n is the mean of the same u_n samples, so the statistic is centered
    with zero quadrature bias by construction.
    """
    _check_scan_args(delta, G)
    _, u = u_n_grid(params, n, G, x0=x0, threads=threads)
    center = float(np.mean(u))
    mask = np.abs(u - center) > delta
    pred = None
    if refine:
        pred = lambda ph: abs(u_n(params, ph, n) - center) > delta
    return build_grid_set(mask, G, x0=x0, predicate=pred)


def deviation_set_f(params: CocycleParams, n: int, delta: float, G: int,
                    x0: float = 0.0, threads: int = 1,
                    refine: bool = True) -> CircleGridSet:
    """{x : |(1/n) log|f_n(x)| - L_n| > delta} on the G-grid.

    Centering uses the transfer-matrix average from the same grid.  Grid
    points where f_n vanishes exactly count as bad for every delta.
    """
    _check_scan_args(delta, G)
    _, u = u_n_grid(params, n, G, x0=x0, threads=threads)
    center = float(np.mean(u))
    _, logmag = dirichlet_det_grid(params, n, G, x0=x0, threads=threads)
    with np.errstate(invalid="ignore"):
        dev = np.abs(logmag / n - center)
    mask = np.where(np.isnan(dev), True, dev > delta)
    pred = None
    if refine:
        def pred(ph):
            d = dirichlet_det(params, ph, n)
            if d.sign == 0:
                return True
            return abs(d.logmag / n - center) > delta
    return build_grid_set(mask, G, x0=x0, predicate=pred)


@dataclass(frozen=True)
class LdtRow:
    n: int
    delta: float
    G: int
    measure_est: float
    interval_count: int
    rhs: float

    def csv_row(self, seed: int) -> dict:
        return {"n": self.n, "delta_or_epsilon": fmt17(self.delta),
                "G": self.G, "measure_est": fmt17(self.measure_est),
                "interval_count": self.interval_count,
                "rhs_comparison": fmt17(self.rhs), "seed": seed}


@dataclass(frozen=True)
class LdtTrend:
    """Scaling of deviation-set measures across n.

    c_fit solves log(measure) ~ intercept - c_fit * delta * n^nu by least
    squares; count_exponent is the smallest p with every interval count
    <= n^(p*s).
    """

    delta: float
    G: int
    nu: float
    rows: tuple
    c_fit: float
    intercept: float
    fit_residual: float
    monotone_nonincreasing: bool
    count_exponent: float

    def measures(self):
        return [r.measure_est for r in self.rows]


def ldt_trend(params: CocycleParams, n_list, delta: float, G: int,
              constants: Constants = DEFAULT_CONSTANTS, x0: float = 0.0,
              threads: int = 1, refine: bool = False) -> LdtTrend:
    """Deviation-set measures of the determinant statistic across scales.

    DegenerateFit carries the per-n measures when any scan comes back
    empty; an empty scan only says the measure is below 1/G.
    """
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be increasing with >= 3 entries")
    nu = constants.nu
    rows = []
    for n in n_list:
        gs = deviation_set_f(params, n, delta, G, x0=x0, threads=threads,
                             refine=refine)
        rhs = math.exp(-constants.c_ldt * delta * n ** nu)
        rows.append(LdtRow(n=n, delta=delta, G=G,
                           measure_est=gs.measure_est,
                           interval_count=gs.count, rhs=rhs))
    measures = {r.n: r.measure_est for r in rows}
    if any(m == 0.0 for m in measures.values()):
        raise DegenerateFit(
            f"zero measure at delta={delta}, G={G} (zero means <= {1.0 / G:.2e})",
            measures=measures, rows=tuple(rows))
    t = np.array([n ** nu for n in n_list])
    y = np.log(np.array([r.measure_est for r in rows]))
    slope, intercept = np.polyfit(t, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * t + intercept)) ** 2)))
    mono = all(b.measure_est <= a.measure_est for a, b in zip(rows, rows[1:]))
    s_exp = params.potential.s
    p = 0.0
    for r in rows:
        if r.interval_count > 0 and r.n > 1:
            p = max(p, math.log(r.interval_count) / (s_exp * math.log(r.n)))
    return LdtTrend(delta=delta, G=G, nu=nu, rows=tuple(rows),
                    c_fit=float(-slope / delta), intercept=float(intercept),
                    fit_residual=resid, monotone_nonincreasing=mono,
                    count_exponent=p)


@dataclass(frozen=True)
class WegnerReport:
    """Wegner-style scan {x : dist(E, spec H_[1,n](x)) < epsilon}."""

    set: CircleGridSet
    n: int
    epsilon: float
    G: int
    E: float
    k: int
    rhs: float

    @property
    def measure_est(self) -> float:
        return self.set.measure_est

    @property
    def count(self) -> int:
        return self.set.count

    def csv_row(self, seed: int) -> dict:
        return {"n": self.n, "delta_or_epsilon": fmt17(self.epsilon),
                "G": self.G, "measure_est": fmt17(self.measure_est),
                "interval_count": self.count,
                "rhs_comparison": fmt17(self.rhs), "seed": seed}


def default_wegner_k(n: int, constants: Constants = DEFAULT_CONSTANTS) -> int:
    """ceil((log n)^(4/nu)) clamped to [10, n].

    At desk scales the clamp is active almost always; the unclamped value
    belongs to the asymptotic hypothesis range.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    raw = math.ceil(math.log(max(n, 2)) ** (4.0 / constants.nu))
    return max(10, min(raw, n))


def wegner_measure(params: CocycleParams, n: int, epsilon: float, G: int,
                   k: Optional[int] = None,
                   constants: Constants = DEFAULT_CONSTANTS,
                   x0: float = 0.0, threads: int = 1,
                   refine: bool = True) -> WegnerReport:
    """Measure of {x : dist(params.E, spec H_[1,n](x)) < epsilon}.

    epsilon = 0 gives the empty set.  The rhs comparison value
    exp(-k^(nu/4)) is attached for the supplied (or default) k; nothing is
    asserted about it here.
    """
    if epsilon < 0:
        raise DomainError("epsilon must be >= 0")
    if G < 1000:
        raise DomainError("G must be >= 1000")
    if k is None:
        k = default_wegner_k(n, constants)
    E = params.E
    if epsilon == 0.0:
        mask = np.zeros(G, dtype=bool)
        gs = build_grid_set(mask, G, x0=x0)
    else:
        d = dist_spec_grid(params, (1, n), G, E, x0=x0, threads=threads)
        mask = d < epsilon
        pred = None
        if refine:
            def pred(ph):
                return dist_spec(FiniteOperator(params, ph, (1, n)), E) < epsilon
        gs = build_grid_set(mask, G, x0=x0, predicate=pred)
    rhs = math.exp(-float(k) ** (constants.nu / 4.0))
    return WegnerReport(set=gs, n=n, epsilon=epsilon, G=G, E=E, k=int(k),
                        rhs=rhs)


def flatness(params: CocycleParams, n: int, j: int, S, G: int,
             threads: int = 1) -> float:
    """Range (max - min) of the eigenvalue branch E_j of H_[1,n] over S.

    S = (x_lo, x_hi) with x_hi > x_lo; the branch is sampled at G midpoint
    phases.  Branches are continuous in x, so for an interval S the range
    equals the measure of the image.
    """
    x_lo, x_hi = float(S[0]), float(S[1])
    if not x_hi > x_lo:
        raise DomainError("S must be a nondegenerate interval")
    if G < 2:
        raise DomainError("G must be >= 2")
    phases = (x_lo + (np.arange(G) + 0.5) * (x_hi - x_lo) / G) % 1.0
    branch = eigenvalue_branch(params, (1, n), phases, j, threads=threads)
    return float(np.max(branch) - np.min(branch))
