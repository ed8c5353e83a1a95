"""Real trigonometric potentials with Gevrey-class Fourier decay.

A potential is a finite list of Fourier coefficients v^(k) for |k| <= cutoff
together with declared Gevrey data (s, K, norm_sK) certifying the envelope

    |v^(k)| <= norm_sK * exp(-rho * |k|^(1/s)),   rho = 1/K.

Evaluation uses the convention v(x) = sum_k v^(k) exp(2*pi*i*k*x) with the
phase x on [0,1).  Truncation to scale n keeps modes up to n^(2s) and ships
the super-exponential error bound and holomorphy-strip half-width that the
downstream perturbation arguments consume.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DecayViolated, DegenerateFit, DomainError, RealnessViolated

_REALNESS_RTOL = 1e-12


class GevreyPotential:
    """Finite Fourier series with a declared Gevrey decay envelope."""

    def __init__(self, coeffs, s: float, K: float, norm_sK: float):
        if s < 1.0:
            raise DomainError(f"Gevrey order s must be >= 1, got {s}")
        if K <= 0.0:
            raise DomainError(f"scale K must be positive, got {K}")
        if norm_sK < 0.0:
            raise DomainError(f"norm_sK must be >= 0, got {norm_sK}")
        self.s = float(s)
        self.K = float(K)
        self.norm_sK = float(norm_sK)

        items = sorted((int(k), complex(c)) for k, c in dict(coeffs).items())
        items = [(k, c) for k, c in items if c != 0]
        self._coeffs = dict(items)
        self.ks = np.array([k for k, _ in items], dtype=np.int64)
        self.cs = np.array([c for _, c in items], dtype=np.complex128)
        self.cutoff = int(np.max(np.abs(self.ks))) if items else 0
        # realness must hold exactly: v^(-k) == conj(v^(k))
        for k, c in items:
            if self._coeffs.get(-k, 0j) != c.conjugate():
                raise RealnessViolated(
                    f"coefficient pair k={k} breaks v^(-k) = conj(v^(k))")
        self.scale = float(np.sum(np.abs(self.cs))) if items else 0.0

    @property
    def rho(self) -> float:
        return 1.0 / self.K

    def coefficient(self, k: int) -> complex:
        return self._coeffs.get(int(k), 0j)

    def coeff_abs_sum(self) -> float:
        """Upper bound for sup|v|: sum of coefficient magnitudes."""
        return self.scale

    def lipschitz_bound(self) -> float:
        """Upper bound for sup|v'|: 2*pi*sum |k||v^(k)|."""
        if len(self.ks) == 0:
            return 0.0
        return float(2.0 * math.pi * np.sum(np.abs(self.ks) * np.abs(self.cs)))

    def sup_norm_grid(self, G: int = 4096) -> float:
        return float(np.max(np.abs(self.eval_grid(G)))) if len(self.ks) else 0.0

    def _assert_real(self, values: np.ndarray) -> np.ndarray:
        tol = _REALNESS_RTOL * max(self.scale, 1.0)
        worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
        if worst > tol:
            raise RealnessViolated(
                f"imaginary residue {worst:.3e} exceeds {tol:.3e}")
        return values.real

    def evaluate(self, x):
        """v at scalar or array phases, direct summation."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.zeros(x_arr.shape, dtype=np.complex128)
        # chunk the mode loop: outer products over all modes would blow memory
        block = 512
        for i in range(0, len(self.ks), block):
            ks = self.ks[i:i + block]
            cs = self.cs[i:i + block]
            out += np.exp(2j * np.pi * np.outer(x_arr, ks)) @ cs
        vals = self._assert_real(out)
        return float(vals[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else vals

    def eval_grid(self, G: int, offset: float = 0.0) -> np.ndarray:
        """v at x_i = i/G + offset for i = 0..G-1.

        Uses one inverse FFT when the grid resolves all modes (G > 2*cutoff),
        otherwise falls back to direct summation.
        """
        if G < 1:
            raise DomainError("grid size must be >= 1")
        if len(self.ks) == 0:
            return np.zeros(G)
        if G <= 2 * self.cutoff:
            return self.evaluate((np.arange(G) / G + offset) % 1.0)
        spec = np.zeros(G, dtype=np.complex128)
        phased = self.cs * np.exp(2j * np.pi * self.ks * offset)
        np.add.at(spec, np.mod(self.ks, G), phased)
        return self._assert_real(np.fft.ifft(spec) * G)

    def to_coeff_items(self):
        return [(int(k), complex(c)) for k, c in sorted(self._coeffs.items())]

    def __repr__(self):
        return (f"GevreyPotential(s={self.s}, K={self.K}, "
                f"norm_sK={self.norm_sK}, cutoff={self.cutoff})")


@dataclass(frozen=True)
class TruncatedPotential:
    """Truncation of a potential to scale n with its guaranteed error data.

    degree          -- kept mode range min(ceil(n^(2s)), cutoff)
    error_bound     -- sup|v - v_n| <= norm_sK * exp(-(rho/2) * n^2)
    strip_halfwidth -- holomorphy half-width (rho/2) * n^(-2(s-1))
    """

    base: GevreyPotential
    n: int
    degree: int
    error_bound: float
    strip_halfwidth: float
    potential: GevreyPotential


def truncate(v: GevreyPotential, n: int) -> TruncatedPotential:
    """Keep modes |k| <= min(ceil(n^(2s)), cutoff)."""
    if n < 1:
        raise DomainError("truncation scale n must be >= 1")
    degree = min(int(math.ceil(n ** (2.0 * v.s))), v.cutoff)
    kept = {k: c for k, c in v.to_coeff_items() if abs(k) <= degree}
    vn = GevreyPotential(kept, s=v.s, K=v.K, norm_sK=v.norm_sK)
    error_bound = v.norm_sK * math.exp(-0.5 * v.rho * n * n)
    strip = 0.5 * v.rho * float(n) ** (-2.0 * (v.s - 1.0))
    return TruncatedPotential(base=v, n=n, degree=degree,
                              error_bound=error_bound, strip_halfwidth=strip,
                              potential=vn)


@dataclass(frozen=True)
class DecayReport:
    tightest_norm: float
    declared_norm: float
    ok: bool


def decay_check(v: GevreyPotential) -> DecayReport:
    """Verify the declared envelope; return the tightest admissible constant.

    Raises DecayViolated (with the offending mode list) when some coefficient
    exceeds norm_sK * exp(-rho |k|^(1/s)) beyond rounding slack.
    """
    if len(v.ks) == 0:
        return DecayReport(tightest_norm=0.0, declared_norm=v.norm_sK, ok=True)
    envelope = np.exp(-v.rho * np.abs(v.ks).astype(np.float64) ** (1.0 / v.s))
    ratios = np.abs(v.cs) / envelope
    tightest = float(np.max(ratios))
    bad = v.ks[ratios > v.norm_sK * (1.0 + 1e-12)]
    if bad.size:
        raise DecayViolated(
            f"declared norm_sK={v.norm_sK} fails at {bad.size} modes "
            f"(tightest admissible {tightest:.6g})", offending=bad.tolist())
    return DecayReport(tightest_norm=tightest, declared_norm=v.norm_sK, ok=True)


@dataclass(frozen=True)
class LojasiewiczReport:
    """Grid-measured level-set scaling mes{|v - gamma| < delta} ~ delta^alpha."""

    gamma: float
    deltas: tuple
    measures: tuple
    alpha: float
    intercept: float
    fit_residual: float
    G: int


def lojasiewicz_probe(v: GevreyPotential, gamma: float, deltas,
                      G: int = 10 ** 5) -> LojasiewiczReport:
    """Measure level sets of v on a G-grid and fit the scaling exponent.

    measures[i] = #{x on grid : |v(x) - gamma| < deltas[i]} / G.  The fit is
    least squares of log m against log delta; it needs at least two deltas
    whose measures lie strictly between 0 and 1, otherwise DegenerateFit is
    raised (carrying the raw measures).
    """
    deltas = tuple(float(d) for d in deltas)
    if any(d <= 0 for d in deltas):
        raise DomainError("deltas must be positive")
    vals = v.eval_grid(G)
    measures = tuple(float(np.count_nonzero(np.abs(vals - gamma) < d)) / G
                     for d in deltas)
    usable = [(d, m) for d, m in zip(deltas, measures) if 0.0 < m < 1.0]
    if len(usable) < 2:
        raise DegenerateFit(
            f"level-set measures at gamma={gamma} have no usable variation",
            measures=dict(zip(deltas, measures)))
    logd = np.log([d for d, _ in usable])
    logm = np.log([m for _, m in usable])
    alpha, intercept = np.polyfit(logd, logm, 1)
    resid = float(np.max(np.abs(logm - (alpha * logd + intercept))))
    return LojasiewiczReport(gamma=float(gamma), deltas=deltas,
                             measures=measures, alpha=float(alpha),
                             intercept=float(intercept), fit_residual=resid,
                             G=G)


# --- JSON corpus -----------------------------------------------------------

def potential_to_json(v: GevreyPotential) -> dict:
    return {
        "s": v.s,
        "K": v.K,
        "norm_sK": v.norm_sK,
        "coeffs": [[k, c.real, c.imag] for k, c in v.to_coeff_items()],
    }


def potential_from_json(obj: dict) -> GevreyPotential:
    try:
        coeffs = {int(k): complex(re, im) for k, re, im in obj["coeffs"]}
        return GevreyPotential(coeffs, s=obj["s"], K=obj["K"],
                               norm_sK=obj["norm_sK"])
    except KeyError as exc:
        raise DomainError(f"potential JSON missing field {exc}") from exc


def save_potential(v: GevreyPotential, path) -> None:
    with open(path, "w") as fh:
        json.dump(potential_to_json(v), fh)
        fh.write("\n")


def load_potential_file(path) -> GevreyPotential:
    with open(path) as fh:
        return potential_from_json(json.load(fh))


# --- shipped corpus --------------------------------------------------------

def zero_potential() -> GevreyPotential:
    return GevreyPotential({}, s=1.0, K=1.0, norm_sK=0.0)


def amo_potential() -> GevreyPotential:
    """v(x) = 2*cos(2*pi*x); analytic, the standard almost Mathieu diagonal."""
    return GevreyPotential({-1: 1.0 + 0j, 1: 1.0 + 0j},
                           s=1.0, K=1.0, norm_sK=math.e)


def gevrey2_potential(cutoff: int = 2048) -> GevreyPotential:
    """Model series v^(k) = exp(-sqrt|k|): genuinely Gevrey order 2, rho = 1.

    The stored envelope constant 3 leaves room for the tail-sum factor that
    the truncation error bound absorbs; the tightest pointwise constant is 1.
    """
    coeffs = {0: 1.0 + 0j}
    for k in range(1, cutoff + 1):
        c = complex(math.exp(-math.sqrt(k)), 0.0)
        coeffs[k] = c
        coeffs[-k] = c
    return GevreyPotential(coeffs, s=2.0, K=1.0, norm_sK=3.0)


# names -> (builder or None, conforming flag); flat_bump ships only as data
CORPUS = {
    "amo": (amo_potential, True),
    "gevrey_s2": (gevrey2_potential, True),
    "flat_bump": (None, False),
}


def load_potential(name: str) -> GevreyPotential:
    """Load a corpus potential from the packaged JSON files."""
    if name not in CORPUS:
        raise DomainError(f"unknown corpus potential '{name}'; "
                          f"have {sorted(CORPUS)}")
    ref = resources.files("qpspec.data").joinpath(f"{name}.json")
    return potential_from_json(json.loads(ref.read_text()))


def is_conforming(name: str) -> bool:
    """Whether the corpus entry satisfies its own declared decay envelope."""
    if name not in CORPUS:
        raise DomainError(f"unknown corpus potential '{name}'")
    return CORPUS[name][1]
