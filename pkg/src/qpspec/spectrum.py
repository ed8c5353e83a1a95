"""Finite-volume spectra, exclusion certificates, segments, homogeneity.

The spectrum of the infinite-volume operator is approximated by unions of
fattened finite-window eigenvalues over a phase grid.  On top of that sit
an exclusion certificate (energies provably away from the spectrum at grid
resolution), spectral segments (one eigenvalue branch over a phase
interval, with a windowed eigenvector witnessing its quality), a single
stabilization step to a larger window, and the homogeneity profile tau of
an interval union.

IntervalSet arithmetic is pure Python over untyped endpoints: floats in
production, Fractions in exactness tests.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cocycle import CocycleParams
from .config import Constants, DEFAULT_CONSTANTS
from .errors import (DomainError, EmptySet, NotNearSpectrum, PairingFailed,
                     Refusal)
from .operator import (FiniteOperator, correlated_eigenpair, eigenpair,
                       dist_spec_for_diag, spectra_on_grid, _grid_diag)
from ._grid import phase_grid


class IntervalSet:
    """Finite union of closed intervals, kept sorted, disjoint, merged.

    Touching intervals merge, so the representation satisfies
    r_i < l_{i+1} strictly.  Endpoint arithmetic is only comparison,
    max/min, and subtraction, so exact types (Fraction, Decimal) pass
    through unharmed.
    """

    __slots__ = ("intervals", "_starts", "_ends", "_prefix")

    def __init__(self, intervals=()):
        merged = []
        for l, r in sorted(intervals, key=lambda p: (p[0], p[1])):
            if r < l:
                raise DomainError(f"interval [{l}, {r}] is reversed")
            if merged and l <= merged[-1][1]:
                if r > merged[-1][1]:
                    merged[-1] = (merged[-1][0], r)
            else:
                merged.append((l, r))
        self.intervals = tuple(merged)
        self._starts = None
        self._ends = None
        self._prefix = None

    def _index(self):
        if self._starts is None:
            self._starts = [l for l, _ in self.intervals]
            self._ends = [r for _, r in self.intervals]
            acc = [0]
            for l, r in self.intervals:
                acc.append(acc[-1] + (r - l))
            self._prefix = acc
        return self._starts, self._ends, self._prefix

    @classmethod
    def from_points(cls, points, fatten):
        if fatten < 0:
            raise DomainError("fatten must be >= 0")
        return cls((p - fatten, p + fatten) for p in points)

    @classmethod
    def from_json(cls, obj):
        return cls((float(l), float(r)) for l, r in obj)

    def to_json(self):
        return [[l, r] for l, r in self.intervals]

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        if self.is_empty:
            return "IntervalSet()"
        return f"IntervalSet({len(self.intervals)} intervals, measure={self.measure})"

    @property
    def measure(self):
        return sum((r - l for l, r in self.intervals), start=0)

    @property
    def hull(self):
        if self.is_empty:
            raise EmptySet("hull of the empty set")
        return (self.intervals[0][0], self.intervals[-1][1])

    @property
    def diam(self):
        lo, hi = self.hull
        return hi - lo

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def clip(self, lo, hi) -> "IntervalSet":
        """Intersection with the single interval [lo, hi]."""
        if hi < lo:
            return IntervalSet()
        return self.intersect(IntervalSet([(lo, hi)]))

    def clip_measure(self, lo, hi):
        """measure(S intersect [lo, hi]) in O(log n) via prefix sums."""
        if hi < lo or not self.intervals:
            return 0
        starts, ends, prefix = self._index()
        j1 = bisect_left(ends, lo)        # first interval ending at/after lo
        j2 = bisect_right(starts, hi)     # intervals starting at/before hi
        if j1 >= j2:
            return 0
        total = prefix[j2] - prefix[j1]
        if self.intervals[j1][0] < lo:
            total = total - (lo - self.intervals[j1][0])
        if self.intervals[j2 - 1][1] > hi:
            total = total - (self.intervals[j2 - 1][1] - hi)
        return total

    def contains(self, x) -> bool:
        idx = bisect_right([l for l, _ in self.intervals], x)
        return idx > 0 and x <= self.intervals[idx - 1][1]

    def distance_to(self, x):
        """dist(x, S); 0 if x in S, EmptySet if S is empty."""
        if self.is_empty:
            raise EmptySet("distance to the empty set")
        best = None
        for l, r in self.intervals:
            if l <= x <= r:
                return x - x  # typed zero
            d = l - x if x < l else x - r
            if best is None or d < best:
                best = d
        return best

    def gaps(self) -> tuple:
        """Open complementary intervals inside the hull."""
        out = []
        for (l1, r1), (l2, r2) in zip(self.intervals, self.intervals[1:]):
            out.append((r1, l2))
        return tuple(out)


def approx_spectrum(params: CocycleParams, n: int, Gx: int, fatten,
                    tol: Optional[float] = None, threads: int = 1) -> IntervalSet:
    """Union over the phase grid of fattened eigenvalues of H_[1,n](x)."""
    if Gx < 64:
        raise DomainError("Gx must be >= 64")
    if fatten < 0:
        raise DomainError("fatten must be >= 0")
    vals = spectra_on_grid(params, (1, n), Gx, tol=tol, threads=threads)
    return IntervalSet.from_points(vals.ravel().tolist(), fatten)


def gap_report(S: IntervalSet) -> tuple:
    """Inner gaps of S as (lo, hi, length), longest first."""
    if S.is_empty:
        raise EmptySet("gap report of the empty set")
    gaps = [(lo, hi, hi - lo) for lo, hi in S.gaps()]
    return tuple(sorted(gaps, key=lambda g: (-g[2], g[0])))


@dataclass(frozen=True)
class CriterionCertificate:
    """Grid-qualified exclusion certificate for one energy.

    For every phase on the Gx-grid some window shift r in [-n/2, n/2] put
    the spectrum of H_{r+[-n,n]}(x) at distance >= threshold from E0; the
    implied bound is dist(E0, S_omega) >= threshold/2 at the resolution of
    this grid and scale, nothing stronger.
    """

    E0: float
    n: int
    Gx: int
    threshold: float
    lower_bound: float
    r_witness: tuple  # per grid phase, the first working shift

    def to_dict(self) -> dict:
        rs = np.array(self.r_witness)
        return {"E0": self.E0, "n": self.n, "Gx": self.Gx,
                "threshold": self.threshold,
                "lower_bound": self.lower_bound,
                "r_min": int(rs.min()), "r_max": int(rs.max()),
                "r_zero_fraction": float(np.mean(rs == 0)),
                "r_witness": [int(r) for r in self.r_witness]}


def _outward_shifts(rmax: int):
    yield 0
    for r in range(1, rmax + 1):
        yield r
        yield -r


def criterion_check(params: CocycleParams, E0: float, n: int, Gx: int,
                    threshold: Optional[float] = None,
                    constants: Constants = DEFAULT_CONSTANTS,
                    threads: int = 1) -> CriterionCertificate:
    """Certify dist(E0, spectrum) at grid scale by shifted-window distances.

    Searches r = 0, +1, -1, ... for each phase until
    dist(E0, spec H_{r+[-n,n]}(x)) >= threshold; Refusal carries the first
    phase where every shift fails.  Threshold defaults to exp(-n^(nu/4)).
    """
    if Gx < 64:
        raise DomainError("Gx must be >= 64")
    if n < 2:
        raise DomainError("n must be >= 2")
    if threshold is None:
        threshold = math.exp(-float(n) ** (constants.nu / 4.0))
    rmax = n // 2
    # one diagonal table covering every shifted window
    table = _grid_diag(params, (-n - rmax, n + rmax), Gx, 0.0)
    width = 2 * n + 1
    r_witness = np.zeros(Gx, dtype=np.int64)
    active = np.ones(Gx, dtype=bool)
    for r in _outward_shifts(rmax):
        if not active.any():
            break
        col0 = r + rmax  # window sites r-n .. r+n inside the table
        sub = table[active, col0:col0 + width]
        d = dist_spec_for_diag(sub, E0, threads=threads)
        ok = d >= threshold
        idx = np.nonzero(active)[0][ok]
        r_witness[idx] = r
        active[idx] = False
    if active.any():
        bad = int(np.nonzero(active)[0][0])
        x_bad = float(phase_grid(Gx)[bad])
        raise Refusal(
            f"no window shift certifies E0={E0} at phase x={x_bad:.8f} "
            f"(threshold {threshold:.3e}, n={n})", x=x_bad)
    return CriterionCertificate(E0=float(E0), n=n, Gx=Gx,
                                threshold=float(threshold),
                                lower_bound=float(threshold) / 2.0,
                                r_witness=tuple(int(r) for r in r_witness))


@dataclass(frozen=True)
class SegmentConfig:
    Gx: int = 256
    dx: float = 1.0 / 2048.0
    max_steps: int = 256
    max_detune: float = 1.0
    seed: int = 0
    threads: int = 1
    constants: Constants = field(default_factory=lambda: DEFAULT_CONSTANTS)


@dataclass(frozen=True)
class SpectralSegment:
    """One eigenvalue branch over a phase interval.

    residual is the sup over sampled phases of |(H - E_j(x)) xi(x)| for
    the boundary-zeroed unit eigenvector restriction xi, floored at the
    eigensolver noise level (residuals below it are not certifiable in
    double precision).
    """

    x0: float
    j: int
    n: int
    I: tuple              # (x_lo, x_hi)
    image: IntervalSet    # single interval
    residual: float
    threshold: float
    samples: tuple        # (x, E_j(x), residual(x)) sorted by x
    hit_step_cap: bool

    @property
    def measure(self):
        return self.image.measure

    def to_dict(self) -> dict:
        return {"x0": self.x0, "j": self.j, "n": self.n,
                "I": list(self.I), "image": self.image.to_json(),
                "residual": self.residual, "threshold": self.threshold,
                "hit_step_cap": self.hit_step_cap,
                "n_samples": len(self.samples)}


def _windowed_residual(op: FiniteOperator, j: int, seed: int):
    """Eigenpair j with its boundary-zeroed restriction and defect."""
    pair = eigenpair(op, j, seed=seed)
    xi = pair.vector.copy()
    xi[0] = 0.0
    xi[-1] = 0.0
    nrm = float(np.linalg.norm(xi))
    if nrm == 0.0:
        return pair, None, math.inf
    xi /= nrm
    resid = float(np.linalg.norm(op.apply(xi, E=pair.value)))
    return pair, xi, resid


def _solver_floor(op: FiniteOperator) -> float:
    return 64.0 * float(np.finfo(np.float64).eps) * (op.norm_bound + 1.0)


def spectral_segment(params: CocycleParams, E: float, n: int,
                     config: Optional[SegmentConfig] = None) -> SpectralSegment:
    """Branch segment through the eigenvalue nearest E on the [-n, n] window.

    Scans the phase grid for the best (x0, j), then widens the phase
    interval in dx steps while the windowed-eigenvector residual stays
    below exp(-c_seg * n^nu).
    """
    cfg = config or SegmentConfig()
    cst = cfg.constants
    window = (-n, n)
    vals = spectra_on_grid(params, window, cfg.Gx, threads=cfg.threads)
    detune = np.abs(vals - E)
    i0, j0 = np.unravel_index(np.argmin(detune), detune.shape)
    best = float(detune[i0, j0])
    if best > cfg.max_detune:
        raise NotNearSpectrum(
            f"nearest branch energy is {best:.3e} from E={E} "
            f"(> {cfg.max_detune})")
    x0 = float(phase_grid(cfg.Gx)[int(i0)])
    j = int(j0) + 1
    threshold = math.exp(-cst.c_seg * float(n) ** cst.nu)

    samples = {}

    def probe(x: float):
        op = FiniteOperator(params, x % 1.0, window)
        pair, xi, resid = _windowed_residual(op, j, cfg.seed)
        samples[x] = (pair.value, resid)
        return resid <= threshold

    if not probe(x0):
        e0, r0 = samples[x0]
        img = IntervalSet([(e0, e0)])
        return SpectralSegment(x0=x0, j=j, n=n, I=(x0, x0), image=img,
                               residual=max(r0, 0.0), threshold=threshold,
                               samples=((x0, e0, r0),), hit_step_cap=False)
    hit_cap = False
    lo = hi = x0
    for step in range(1, cfg.max_steps + 1):
        x = x0 + step * cfg.dx
        if not probe(x):
            break
        hi = x
    else:
        hit_cap = True
    for step in range(1, cfg.max_steps + 1):
        x = x0 - step * cfg.dx
        if not probe(x):
            break
        lo = x
    else:
        hit_cap = True
    kept = sorted((x, ev, rs) for x, (ev, rs) in samples.items()
                  if lo <= x <= hi)
    energies = [ev for _, ev, _ in kept]
    floor = _solver_floor(FiniteOperator(params, x0, window))
    resid = max(max(rs for _, _, rs in kept), floor)
    image = IntervalSet([(min(energies), max(energies))])
    return SpectralSegment(x0=x0, j=j, n=n, I=(lo, hi), image=image,
                           residual=resid, threshold=threshold,
                           samples=tuple(kept), hit_step_cap=hit_cap)


@dataclass(frozen=True)
class SegmentPiece:
    x_lo: float
    x_hi: float
    j1: int
    max_discrepancy: float
    min_overlap: float
    new_residual: float
    n_samples: int


@dataclass(frozen=True)
class StabilizedSegment:
    """One laddering step of a segment to a larger window.

    Every sample phase is re-paired on the [-n1, n1] window with the
    eigenvalue of maximal eigenvector overlap among those within
    sqrt(2)*residual of the branch energy; pieces are maximal runs of
    samples sharing the paired index j1.
    """

    n: int
    n1: int
    pieces: tuple
    max_discrepancy: float
    min_overlap: float
    overlap_floor: float

    def to_dict(self) -> dict:
        return {"n": self.n, "n1": self.n1,
                "max_discrepancy": self.max_discrepancy,
                "min_overlap": self.min_overlap,
                "overlap_floor": self.overlap_floor,
                "pieces": [{"x_lo": p.x_lo, "x_hi": p.x_hi, "j1": p.j1,
                            "max_discrepancy": p.max_discrepancy,
                            "min_overlap": p.min_overlap,
                            "new_residual": p.new_residual,
                            "n_samples": p.n_samples} for p in self.pieces]}


def stabilize_segment(params: CocycleParams, seg: SpectralSegment,
                      n1: Optional[int] = None, seed: int = 0,
                      max_samples: Optional[int] = None) -> StabilizedSegment:
    """Pair the segment branch with eigenvalues of the 4x (default) window.

    PairingFailed propagates from any sample where no candidate inside the
    sqrt(2)*residual window reaches overlap (2(2n1+1))^{-1/2}.  max_samples
    thins the segment's sample list evenly (endpoints always kept) before
    the large-window solves; pairing is still checked at every kept phase.
    """
    if n1 is None:
        n1 = 4 * seg.n
    if n1 <= seg.n:
        raise DomainError("n1 must exceed the segment scale")
    n = seg.n
    N1 = 2 * n1 + 1
    overlap_floor = 1.0 / math.sqrt(2.0 * N1)
    pad = n1 - n
    samples = list(seg.samples)
    if max_samples is not None and max_samples >= 2 and len(samples) > max_samples:
        idx = sorted({round(i * (len(samples) - 1) / (max_samples - 1))
                      for i in range(max_samples)})
        samples = [samples[i] for i in idx]
    rows = []
    for (x, e_small, _) in samples:
        small = FiniteOperator(params, x % 1.0, (-n, n))
        pair, xi, resid = _windowed_residual(small, seg.j, seed)
        if xi is None:
            raise PairingFailed(f"windowed vector vanished at x={x}")
        phi = np.zeros(N1)
        phi[pad:pad + 2 * n + 1] = xi
        big = FiniteOperator(params, x % 1.0, (-n1, n1))
        eps = max(resid, _solver_floor(big))
        big_pair, overlap = correlated_eigenpair(big, pair.value, phi,
                                                 eps=eps, seed=seed)
        psi1 = big_pair.vector.copy()
        psi1[0] = 0.0
        psi1[-1] = 0.0
        nrm = float(np.linalg.norm(psi1))
        new_resid = math.inf
        if nrm > 0:
            psi1 /= nrm
            new_resid = float(np.linalg.norm(big.apply(psi1, E=big_pair.value)))
        rows.append((x, big_pair.index, abs(big_pair.value - pair.value),
                     overlap, new_resid))
    pieces = []
    start = 0
    for i in range(1, len(rows) + 1):
        if i == len(rows) or rows[i][1] != rows[start][1]:
            chunk = rows[start:i]
            pieces.append(SegmentPiece(
                x_lo=chunk[0][0], x_hi=chunk[-1][0], j1=chunk[0][1],
                max_discrepancy=max(c[2] for c in chunk),
                min_overlap=min(c[3] for c in chunk),
                new_residual=max(c[4] for c in chunk),
                n_samples=len(chunk)))
            start = i
    return StabilizedSegment(
        n=n, n1=n1, pieces=tuple(pieces),
        max_discrepancy=max(p.max_discrepancy for p in pieces),
        min_overlap=min(p.min_overlap for p in pieces),
        overlap_floor=overlap_floor)


@dataclass(frozen=True)
class HomogeneityProfile:
    sigmas: tuple
    taus: tuple
    worst_E: tuple
    tau_min: float
    e_count: int

    def rows(self):
        return list(zip(self.sigmas, self.taus, self.worst_E))


def homogeneity_profile(S: IntervalSet, e_samples: int, sigmas) -> HomogeneityProfile:
    """tau(sigma) = min over sampled E in S of |S cap (E-s, E+s)| / s.

    E candidates are every interval endpoint of S plus e_samples uniform
    points over the hull, kept only when they land in S.  For an interval
    union the minimizer sits at endpoints up to sampling resolution, so
    the fill mainly guards against plateau interiors.
    """
    if S.is_empty:
        raise EmptySet("homogeneity of the empty set")
    if e_samples < 0:
        raise DomainError("e_samples must be >= 0")
    lo, hi = S.hull
    diam = hi - lo
    sigmas = list(sigmas)
    if not sigmas:
        raise DomainError("sigmas must be nonempty")
    for s in sigmas:
        if not (0 < s <= diam or (diam == 0 and s > 0)):
            raise DomainError(f"sigma {s} outside (0, diam={diam}]")
    cand = []
    for l, r in S.intervals:
        cand.append(l)
        cand.append(r)
    if e_samples > 0 and diam > 0:
        for i in range(e_samples):
            e = lo + (i + 0.5) * diam / e_samples
            if S.contains(e):
                cand.append(e)
    taus, worst = [], []
    for s in sigmas:
        best_tau, best_e = None, None
        for e in cand:
            t = S.clip_measure(e - s, e + s) / s
            if best_tau is None or t < best_tau:
                best_tau, best_e = t, e
        taus.append(best_tau)
        worst.append(best_e)
    return HomogeneityProfile(sigmas=tuple(sigmas), taus=tuple(taus),
                              worst_E=tuple(worst),
                              tau_min=min(taus), e_count=len(cand))
