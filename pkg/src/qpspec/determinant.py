"""Dirichlet determinants of finite windows, carried in signed-log form.

f_n(x, E) = det(H_[1,n](x) - E) obeys the three-term recurrence
f_j = (lam*v(x + j*omega) - E) f_{j-1} - f_{j-2}, f_0 = 1, f_{-1} = 0.
Magnitudes reach exp(n log lam) and overflow doubles almost immediately at
the couplings of interest, so determinants are (sign, log magnitude) pairs;
the recurrence itself runs on float pairs under a shared running scale.

Signed-log addition flags catastrophic cancellation: a result that lands
more than thirty decades below its operands carries no trustworthy digits,
and cancellation is precisely where deviation sets live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._grid import run_chunked, step_values
from .cocycle import CocycleParams, product
from .errors import DomainError, IdentityViolated

_CANCEL_DROP = 30.0 * math.log(10.0)
_CANCEL_RATIO = 1e-30


class SignedLog:
    """A real number as (sign, log|value|) with a cancellation-trust flag."""

    __slots__ = ("sign", "logmag", "cancelled")

    def __init__(self, sign: int, logmag: float, cancelled: bool = False):
        if sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0, or +1, got {sign}")
        if sign == 0:
            logmag = -math.inf
        self.sign = sign
        self.logmag = float(logmag)
        self.cancelled = bool(cancelled)

    @classmethod
    def from_float(cls, v: float) -> "SignedLog":
        if v == 0.0:
            return cls(0, -math.inf)
        return cls(1 if v > 0 else -1, math.log(abs(v)))

    def value(self) -> float:
        """May overflow to +-inf for large logmag; intended for small results."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.logmag)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        s = self.sign * other.sign
        if s == 0:
            return SignedLog(0, -math.inf, self.cancelled or other.cancelled)
        return SignedLog(s, self.logmag + other.logmag,
                         self.cancelled or other.cancelled)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("signed-log division by exact zero")
        return SignedLog(self.sign * other.sign, self.logmag - other.logmag,
                         self.cancelled or other.cancelled)

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.logmag, self.cancelled)

    def __add__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0:
            return SignedLog(other.sign, other.logmag,
                             self.cancelled or other.cancelled)
        if other.sign == 0:
            return SignedLog(self.sign, self.logmag,
                             self.cancelled or other.cancelled)
        # anchor at the larger magnitude
        hi, lo = (self, other) if self.logmag >= other.logmag else (other, self)
        r = 1.0 + (hi.sign * lo.sign) * math.exp(lo.logmag - hi.logmag)
        flags = self.cancelled or other.cancelled
        if r == 0.0:
            return SignedLog(0, -math.inf, True)
        logmag = hi.logmag + math.log(abs(r))
        dropped = logmag < hi.logmag - _CANCEL_DROP
        return SignedLog(hi.sign if r > 0 else -hi.sign, logmag,
                         flags or dropped)

    def __sub__(self, other: "SignedLog") -> "SignedLog":
        return self + (-other)

    def __repr__(self):
        tag = ", cancelled" if self.cancelled else ""
        return f"SignedLog({self.sign:+d}, {self.logmag:.6g}{tag})"


def dirichlet_det(params: CocycleParams, x: float, n: int,
                  k0: int = 1) -> SignedLog:
    """f_n at phase x: det of the window [k0, k0+n-1] minus E.

    k0 shifts the window; the orbit offsets frac(k*omega) stay exact, so
    f_[a,b](x) == dirichlet_det(params, x, b-a+1, k0=a) identically.
    """
    signs, logmags, cancelled = dirichlet_det_sequence(params, x, n, k0=k0)
    return SignedLog(int(signs[n]), float(logmags[n]), bool(cancelled))


def dirichlet_det_sequence(params: CocycleParams, x: float, n: int,
                           k0: int = 1, step: int = 1):
    """All of f_0 .. f_n at phase x in one recurrence pass.

    Returns (signs, logmags, cancelled): integer signs and log magnitudes
    indexed by window length, plus a flag set if any addition along the way
    lost more than thirty decades.

    step = -1 consumes sites k0, k0-1, ... instead; a symmetric tridiagonal
    window has the same determinant read from either end, so this yields
    suffix window determinants from one backward pass.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if step not in (1, -1):
        raise DomainError("step must be +1 or -1")
    signs = np.zeros(n + 1, dtype=np.int64)
    logmags = np.full(n + 1, -math.inf)
    signs[0], logmags[0] = 1, 0.0
    c_prev, c_cur = 0.0, 1.0  # f_{j-1}, f_j at shared scale
    scale = 0.0
    cancelled = False
    for j in range(1, n + 1):
        d = params.step_value(x, k0 + (j - 1) * step)
        new = d * c_cur - c_prev
        ref = max(abs(d * c_cur), abs(c_prev))
        if ref > 0.0 and abs(new) < ref * _CANCEL_RATIO:
            cancelled = True
        c_prev, c_cur = c_cur, new
        peak = max(abs(c_prev), abs(c_cur))
        if peak == 0.0:
            raise DomainError("degenerate recurrence state (both minors zero)")
        scale += math.log(peak)
        c_prev /= peak
        c_cur /= peak
        if c_cur != 0.0:
            signs[j] = 1 if c_cur > 0 else -1
            logmags[j] = scale + math.log(abs(c_cur))
    return signs, logmags, cancelled


def dirichlet_det_grid(params: CocycleParams, n: int, G: int,
                       x0: float = 0.0, threads: int = 1):
    """f_n over the shifted uniform phase grid; returns (signs, logmags)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    tmat = step_values(params.potential, params.lam, params.omega, n, G,
                       x0=x0, E=params.E)

    def work(i0, i1):
        c_prev = np.zeros(i1 - i0)
        c_cur = np.ones(i1 - i0)
        scale = np.zeros(i1 - i0)
        for j in range(n):
            t = tmat[j, i0:i1]
            c_prev, c_cur = c_cur, t * c_cur - c_prev
            peak = np.maximum(np.abs(c_prev), np.abs(c_cur))
            scale += np.log(peak)
            inv = 1.0 / peak
            c_prev *= inv
            c_cur *= inv
        with np.errstate(divide="ignore"):
            logmag = scale + np.log(np.abs(c_cur))
        return np.sign(c_cur), logmag

    return run_chunked(work, G, threads=threads)


def shifted_det(params: CocycleParams, x: float, a: int, b: int) -> SignedLog:
    """Window determinant f_[a,b](x) = f_{b-a+1}(x + (a-1)omega)."""
    if b < a - 1:
        raise DomainError(f"empty-beyond window [{a}, {b}]")
    return dirichlet_det(params, x, b - a + 1, k0=a)


@dataclass(frozen=True)
class TransferIdentityReport:
    """Entrywise match of the n-step product against window determinants."""

    n: int
    max_log_discrepancy: float
    signs_ok: bool
    tolerance: float


def det_transfer_identity(params: CocycleParams, x: float, n: int,
                          raise_on_violation: bool = True) -> TransferIdentityReport:
    """Check M_n(x) == [[f_n(x), -f_{n-1}(x+w)], [f_{n-1}(x), -f_{n-2}(x+w)]].

    Comparison runs on signs and log magnitudes entry by entry; entries more
    than 37 decades below the product scale are treated as zero on both
    sides.  Tolerance is 1e-8 * n on the log discrepancy.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    mat = product(params, x, n)
    dets = [
        dirichlet_det(params, x, n),                 # (0,0)  f_n(x)
        -dirichlet_det(params, x, n - 1, k0=2),      # (0,1) -f_{n-1}(x+w)
        dirichlet_det(params, x, n - 1),             # (1,0)  f_{n-1}(x)
        -dirichlet_det(params, x, n - 2, k0=2),      # (1,1) -f_{n-2}(x+w)
    ]
    entries = [mat.entry(0, 0), mat.entry(0, 1), mat.entry(1, 0), mat.entry(1, 1)]
    floor = max(l for _, l in entries) - 37.0 * math.log(10.0)
    worst = 0.0
    signs_ok = True
    for (es, el), d in zip(entries, dets):
        both_negligible = (es == 0 or el < floor) and (d.sign == 0 or d.logmag < floor)
        if both_negligible:
            continue
        if es != d.sign:
            signs_ok = False
            continue
        worst = max(worst, abs(el - d.logmag))
    tol = 1e-8 * n
    report = TransferIdentityReport(n=n, max_log_discrepancy=worst,
                                    signs_ok=signs_ok, tolerance=tol)
    if raise_on_violation and (not signs_ok or worst > tol):
        raise IdentityViolated(
            f"transfer/determinant identity off by {worst:.3e} "
            f"(tol {tol:.3e}, signs_ok={signs_ok}) at x={x}, n={n}")
    return report
