"""Continued fractions and Diophantine diagnostics for circle frequencies.

The frequency of a quasi-periodic operator enters every downstream bound
through how well rationals approximate it.  This module expands a frequency
into certified continued-fraction quotients, measures distances n*omega to
the integers exactly, and fits empirical Diophantine constants.

All exact arithmetic runs on stdlib Fractions; a quotient is emitted only
if it is stable under a one-ulp perturbation of the input at the declared
bit budget, so the stored expansion never reflects float artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, InsufficientDepth, PrecisionExhausted


@dataclass(frozen=True)
class Frequency:
    """A circle frequency with its certified continued-fraction data.

    omega           -- exact rational stand-in used for downstream arithmetic
    quotients       -- certified partial quotients a_1, a_2, ...
    p, q            -- convergent numerators/denominators p_s/q_s, s >= 1
    precision_bits  -- bit budget the quotients were certified at
    rational_detected -- expansion terminated exactly within precision
    """

    omega: Fraction
    quotients: tuple
    p: tuple
    q: tuple
    precision_bits: int
    rational_detected: bool = False

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def convergent(self, s: int) -> Fraction:
        """s-th convergent p_s/q_s, 1-indexed."""
        if not (1 <= s <= self.depth):
            raise InsufficientDepth(f"convergent {s} of {self.depth} stored")
        return Fraction(self.p[s - 1], self.q[s - 1])

    def __float__(self) -> float:
        return float(self.omega)

    def shift(self, k: int) -> float:
        """frac(k*omega) computed exactly, then rounded once to float."""
        num, den = self.omega.numerator, self.omega.denominator
        return ((k * num) % den) / den

    def shifts(self, n: int):
        """[frac(k*omega) for k in 1..n], one exact mod per step."""
        num, den = self.omega.numerator, self.omega.denominator
        out = []
        r = 0
        for _ in range(n):
            r = (r + num) % den
            out.append(r / den)
        return out


def _convergents(quotients):
    p_prev, p_cur = 1, 0  # p_{-1}, p_0
    q_prev, q_cur = 0, 1
    ps, qs = [], []
    for a in quotients:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        ps.append(p_cur)
        qs.append(q_cur)
    return tuple(ps), tuple(qs)


def frequency_from_quotients(quotients, omega=None, precision_bits=None,
                             rational_detected=False) -> Frequency:
    """Build a Frequency directly from partial quotients.

    When omega is omitted the finite continued-fraction value is used and
    the result is flagged rational_detected (it really is rational).
    """
    quotients = tuple(int(a) for a in quotients)
    if not quotients:
        raise DomainError("at least one quotient required")
    if any(a < 1 for a in quotients):
        raise DomainError("partial quotients must be positive")
    ps, qs = _convergents(quotients)
    if omega is None:
        omega = Fraction(ps[-1], qs[-1])
        rational_detected = True
    else:
        omega = Fraction(omega)
    if precision_bits is None:
        precision_bits = 2 * qs[-1].bit_length() + 8
    return Frequency(omega=omega, quotients=quotients, p=ps, q=qs,
                     precision_bits=precision_bits,
                     rational_detected=rational_detected)


def continued_fraction(omega, depth: int, precision_bits: int = 53) -> Frequency:
    """Certified continued-fraction expansion of omega in (0,1).

    Runs the floor algorithm simultaneously on the exact value and on the
    endpoints of a one-ulp interval [omega - 2^-bits, omega + 2^-bits];
    a quotient is emitted only while both endpoints agree.  If the exact
    remainder vanishes first, the expansion stops with rational_detected.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if precision_bits < 4:
        raise DomainError("precision_bits must be >= 4")
    try:
        c = Fraction(omega)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"omega not convertible to a rational: {omega!r}") from exc
    if not (0 < c < 1):
        raise DomainError(f"omega must lie strictly in (0,1), got {float(c)}")

    eps = Fraction(1, 2 ** precision_bits)
    lo = max(c - eps, Fraction(0))
    hi = min(c + eps, Fraction(1))

    quotients = []
    rational = False
    while len(quotients) < depth:
        if c == 0:
            rational = True
            break
        inv = 1 / c
        if inv.denominator == 1:
            # remainder vanishes after this quotient: rational within
            # precision, expansion terminates (canonical form, last a >= 2)
            quotients.append(int(inv))
            rational = True
            break
        if lo <= 0:
            raise PrecisionExhausted(
                f"quotient {len(quotients) + 1} of {depth} not certified at "
                f"{precision_bits} bits (remainder interval touches 0)")
        a_from_hi = int(1 / hi) if hi > 0 else None
        a_from_lo = int(1 / lo)
        if a_from_hi != a_from_lo:
            raise PrecisionExhausted(
                f"quotient {len(quotients) + 1} of {depth} not certified at "
                f"{precision_bits} bits (candidates {a_from_hi}..{a_from_lo})")
        a = a_from_lo
        quotients.append(a)
        # reciprocal reverses the endpoints
        c, lo, hi = 1 / c - a, 1 / hi - a, 1 / lo - a

    ps, qs = _convergents(quotients)
    return Frequency(omega=Fraction(omega), quotients=tuple(quotients),
                     p=ps, q=qs, precision_bits=precision_bits,
                     rational_detected=rational)


def golden_frequency(depth: int = 40) -> Frequency:
    """The inverse golden ratio (sqrt(5)-1)/2 with `depth` stored quotients.

    The exact stand-in is a deep Fibonacci ratio F_K/F_{K+1} with K well
    beyond the stored depth, so every stored convergent satisfies the
    two-sided approximation inequalities strictly.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    K = depth + 60
    f_prev, f_cur = 1, 1  # F_1, F_2
    for _ in range(K - 1):
        f_prev, f_cur = f_cur, f_prev + f_cur
    omega = Fraction(f_prev, f_cur)
    freq = frequency_from_quotients([1] * depth, omega=omega,
                                    precision_bits=2 * f_cur.bit_length())
    return freq


def circle_norm(omega, n: int) -> float:
    """Distance from n*omega to the nearest integer, exact until the final rounding."""
    if n == 0:
        raise DomainError("n must be nonzero")
    if isinstance(omega, Frequency):
        w = omega.omega
    else:
        w = Fraction(omega)
    t = (n * w) % 1
    return float(min(t, 1 - t))


@dataclass(frozen=True)
class DiophantineReport:
    """Empirical Diophantine fit c_est = min_{1<=n<=N} n^A * ||n omega||."""

    A: float
    N: int
    c_est: float
    n_witness: int
    dist_witness: float


def diophantine_fit(freq: Frequency, A: float, N: int) -> DiophantineReport:
    """Exhaustive scan of n^A * ||n omega|| over 1 <= n <= N."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if A < 0:
        raise DomainError("A must be >= 0")
    num, den = freq.omega.numerator, freq.omega.denominator
    best = math.inf
    witness = 1
    wdist = 1.0
    r = 0
    for n in range(1, N + 1):
        r = (r + num) % den
        dist = min(r, den - r) / den
        val = math.pow(n, A) * dist
        if val < best:
            best = val
            witness = n
            wdist = dist
    return DiophantineReport(A=float(A), N=N, c_est=best,
                             n_witness=witness, dist_witness=wdist)


def beta_estimate(freq: Frequency) -> float:
    """Finite-depth proxy for limsup log(q_{s+1})/q_s over stored convergents.

    Small for Diophantine-like expansions, large when some quotient jumps
    super-exponentially.  Needs at least three stored convergents.
    """
    if freq.depth < 3:
        raise InsufficientDepth("beta estimate needs >= 3 convergents")
    return max(math.log(freq.q[s + 1]) / freq.q[s] for s in range(freq.depth - 1))
