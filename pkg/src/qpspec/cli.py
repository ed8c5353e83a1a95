"""Experiment runner: one subcommand per capability, JSON config in,
CSV + manifest out.

Every run reads a single JSON config document, writes one CSV with fixed
columns (floats at 17 significant digits) and one JSON manifest echoing
the config, the resolved constants, library versions, seed, and wall
time.  Identical config and seed produce byte-identical CSV regardless
of thread count.

Exit codes: 0 success, 2 config validation failure (the message names
the offending field), 3 a verification assertion failed during the run.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .cocycle import CocycleParams, lyapunov
from .config import Constants, DEFAULT_CONSTANTS, fmt17
from .deviation import CSV_FIELDS, default_wegner_k, ldt_trend, wegner_measure
from .errors import ConfigError, DegenerateFit, DomainError, QpspecError
from .numtheory import (Frequency, circle_norm, continued_fraction,
                        diophantine_fit, frequency_from_quotients,
                        golden_frequency)
from .operator import FiniteOperator, green_decay_check
from .potential import (GevreyPotential, load_potential, potential_from_json,
                        zero_potential, CORPUS)
from .spectrum import (SegmentConfig, approx_spectrum, gap_report,
                       homogeneity_profile, spectral_segment,
                       stabilize_segment)


# ---------------------------------------------------------------------------
# Config parsing.  Every reader names the offending field in ConfigError so
# exit-2 messages point at the problem.

def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("--config", "top level must be a JSON object")
    return cfg


def _number(cfg, name, required=False, default=None, lo=None, hi=None,
            lo_strict=None):
    if name not in cfg:
        if required:
            raise ConfigError(name, "required")
        return default
    v = cfg[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"must be a number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(name, "must be finite")
    if lo is not None and v < lo:
        raise ConfigError(name, f"must be >= {lo}")
    if lo_strict is not None and v <= lo_strict:
        raise ConfigError(name, f"must be > {lo_strict}")
    if hi is not None and v > hi:
        raise ConfigError(name, f"must be <= {hi}")
    return v


def _integer(cfg, name, required=False, default=None, lo=None, hi=None):
    if name not in cfg:
        if required:
            raise ConfigError(name, "required")
        return default
    v = cfg[name]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(name, f"must be an integer, got {type(v).__name__}")
    if lo is not None and v < lo:
        raise ConfigError(name, f"must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(name, f"must be <= {hi}")
    return v


def _number_list(cfg, name, required=False, default=None, min_len=1,
                 increasing=False):
    if name not in cfg:
        if required:
            raise ConfigError(name, "required")
        return default
    v = cfg[name]
    if not isinstance(v, list) or len(v) < min_len:
        raise ConfigError(name, f"must be a list with >= {min_len} entries")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{name}[{i}]", "must be a number")
        out.append(float(item))
    if increasing and any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(name, "must be strictly increasing")
    return out


def _resolve_potential(cfg) -> GevreyPotential:
    if "potential" not in cfg:
        raise ConfigError("potential", "required")
    spec = cfg["potential"]
    if isinstance(spec, str):
        if spec == "zero":
            return zero_potential()
        if spec not in CORPUS:
            raise ConfigError("potential",
                              f"unknown name '{spec}'; have "
                              f"{sorted(CORPUS) + ['zero']}")
        return load_potential(spec)
    if isinstance(spec, dict):
        try:
            return potential_from_json(spec)
        except QpspecError as exc:
            raise ConfigError("potential", str(exc)) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("potential", f"bad inline spec: {exc}") from exc
    raise ConfigError("potential", "must be a name or an inline object")


def _resolve_omega(cfg) -> Frequency:
    if "omega" not in cfg:
        raise ConfigError("omega", "required")
    spec = cfg["omega"]
    if isinstance(spec, str):
        if spec == "golden":
            return golden_frequency()
        raise ConfigError("omega", f"unknown named frequency '{spec}'")
    if isinstance(spec, dict):
        if "quotients" in spec:
            q = spec["quotients"]
            if (not isinstance(q, list) or not q
                    or any(not isinstance(a, int) or a < 1 for a in q)):
                raise ConfigError("omega.quotients",
                                  "must be a list of integers >= 1")
            return frequency_from_quotients(q)
        if "decimal" in spec:
            depth = spec.get("depth", 40)
            bits = spec.get("precision_bits", 160)
            if not isinstance(depth, int) or depth < 1:
                raise ConfigError("omega.depth", "must be an integer >= 1")
            if not isinstance(bits, int) or bits < 8:
                raise ConfigError("omega.precision_bits",
                                  "must be an integer >= 8")
            try:
                return continued_fraction(spec["decimal"], depth,
                                          precision_bits=bits)
            except QpspecError as exc:
                raise ConfigError("omega.decimal", str(exc)) from exc
        raise ConfigError("omega", "object needs 'quotients' or 'decimal'")
    raise ConfigError("omega", "must be 'golden' or an object")


_CONSTANT_FIELDS = ("A", "nu", "C_decay", "c_seg", "c_ldt", "C_avalanche")


def _resolve_constants(cfg) -> Constants:
    raw = cfg.get("constants", {})
    if not isinstance(raw, dict):
        raise ConfigError("constants", "must be an object")
    for key in raw:
        if key not in _CONSTANT_FIELDS:
            raise ConfigError(f"constants.{key}", "unknown constant")
    merged = {f: getattr(DEFAULT_CONSTANTS, f) for f in _CONSTANT_FIELDS}
    for key, val in raw.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"constants.{key}", "must be a number")
        merged[key] = float(val)
    if merged["A"] < 1.0:
        raise ConfigError("constants.A", "must be >= 1")
    if not 0.0 < merged["nu"] <= 0.5:
        raise ConfigError("constants.nu", "must lie in (0, 1/2]")
    return Constants(**merged)


def _resolve_params(cfg, E: float) -> CocycleParams:
    lam = _number(cfg, "lambda", required=True, lo_strict=0.0)
    return CocycleParams(potential=_resolve_potential(cfg), lam=lam,
                         omega=_resolve_omega(cfg), E=float(E))


def _energies(cfg) -> list:
    if "energies" in cfg:
        return _number_list(cfg, "energies")
    if "E" in cfg:
        return [_number(cfg, "E", required=True)]
    raise ConfigError("energies", "need 'energies' or 'E'")


def _single_energy(cfg) -> float:
    return _number(cfg, "E", required=True)


def _seed(cfg) -> int:
    return _integer(cfg, "seed", default=0, lo=0, hi=2 ** 64 - 1)


def _threads(cfg) -> int:
    return _integer(cfg, "threads", default=1, lo=1, hi=256)


def _window(cfg):
    w = cfg.get("window")
    if w is None:
        raise ConfigError("window", "required")
    if (not isinstance(w, list) or len(w) != 2
            or any(isinstance(x, bool) or not isinstance(x, int) for x in w)):
        raise ConfigError("window", "must be [a, b] with integer endpoints")
    if w[1] < w[0]:
        raise ConfigError("window", "needs b >= a")
    return int(w[0]), int(w[1])


# ---------------------------------------------------------------------------
# Output plumbing.

def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row[c]) for c in columns) + "\n")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt17(float(v))


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_manifest(out_dir, sub, cfg, constants, seed, threads, wall,
                    csv_name, extra):
    manifest = {
        "subcommand": sub,
        "config": cfg,
        "constants": constants.to_dict(),
        "seed": seed,
        "threads": threads,
        "versions": {
            "qpspec": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "wall_time_s": wall,
        "csv": csv_name,
        "results": extra,
    }
    path = os.path.join(out_dir, f"{sub}_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True,
                  default=_json_default)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# Subcommand bodies.  Each returns (columns, rows, extra-results dict).

def _run_numtheory(cfg, constants, seed, threads):
    omega = _resolve_omega(cfg)
    N = _integer(cfg, "N", default=200, lo=1)
    A = _number(cfg, "A", default=constants.A, lo=0.0)
    rows = []
    for k in range(1, N + 1):
        rows.append({"k": k, "shift": fmt17(omega.shift(k)),
                     "circle_norm": fmt17(circle_norm(omega, k))})
    fit = diophantine_fit(omega, A, N)
    extra = {"omega_float": float(omega), "depth": omega.depth,
             "diophantine": {"A": fit.A, "N": fit.N, "c_est": fit.c_est,
                             "n_witness": fit.n_witness}}
    try:
        from .numtheory import beta_estimate
        extra["beta_estimate"] = beta_estimate(omega)
    except QpspecError:
        extra["beta_estimate"] = None
    return ("k", "shift", "circle_norm"), rows, extra


def _run_lyapunov(cfg, constants, seed, threads):
    energies = _energies(cfg)
    n_list = [int(n) for n in _number_list(cfg, "n_list", required=True,
                                           min_len=2, increasing=True)]
    Nx = _integer(cfg, "Nx", default=2048, lo=2)
    tol = _number(cfg, "tol", default=1e-3, lo_strict=0.0)
    rows, seqs = [], []
    for E in energies:
        params = _resolve_params(cfg, E)
        est = lyapunov(params, n_list, Nx=Nx, tol=tol, threads=threads)
        rows.append({"E": fmt17(E), "L": fmt17(est.value),
                     "converged": est.converged,
                     "max_increase": fmt17(est.max_increase)})
        seqs.append({"E": E, "sequence": [[n, v] for n, v in est.sequence]})
    return ("E", "L", "converged", "max_increase"), rows, {
        "Nx": Nx, "tol": tol, "sequences": seqs}


def _run_ldt(cfg, constants, seed, threads):
    params = _resolve_params(cfg, _single_energy(cfg))
    n_list = [int(n) for n in _number_list(cfg, "n_list", required=True,
                                           min_len=3, increasing=True)]
    delta = _number(cfg, "delta", required=True, lo_strict=0.0)
    G = _integer(cfg, "G", required=True, lo=1000)
    x0 = _number(cfg, "x0", default=0.0)
    refine = bool(cfg.get("refine", False))
    try:
        trend = ldt_trend(params, n_list, delta, G, constants=constants, x0=x0,
                          threads=threads, refine=refine)
    except DegenerateFit as exc:
        # keep the scan rows so reruns stay comparable even when the fit
        # is impossible; the exit code still reports the failure
        rows = [r.csv_row(seed) for r in exc.rows]
        extra = {"degenerate": True, "measures": exc.measures, "nu": constants.nu}
        return CSV_FIELDS, rows, extra, str(exc)
    rows = [r.csv_row(seed) for r in trend.rows]
    extra = {"c_fit": trend.c_fit, "intercept": trend.intercept,
             "fit_residual": trend.fit_residual,
             "monotone_nonincreasing": trend.monotone_nonincreasing,
             "count_exponent": trend.count_exponent, "nu": trend.nu}
    return CSV_FIELDS, rows, extra


def _run_wegner(cfg, constants, seed, threads):
    params = _resolve_params(cfg, _single_energy(cfg))
    n = _integer(cfg, "n", required=True, lo=1)
    epsilon = _number(cfg, "epsilon", required=True, lo=0.0)
    G = _integer(cfg, "G", required=True, lo=1000)
    k = _integer(cfg, "k", default=None, lo=1)
    x0 = _number(cfg, "x0", default=0.0)
    report = wegner_measure(params, n, epsilon, G, k=k, constants=constants,
                            x0=x0, threads=threads)
    extra = {"k": report.k, "rhs": report.rhs,
             "measure_est": report.measure_est,
             "default_k": default_wegner_k(n, constants)}
    return CSV_FIELDS, [report.csv_row(seed)], extra


def _run_spectrum(cfg, constants, seed, threads):
    params = _resolve_params(cfg, 0.0)
    n = _integer(cfg, "n", required=True, lo=1)
    Gx = _integer(cfg, "Gx", required=True, lo=64)
    fatten = _number(cfg, "fatten", required=True, lo=0.0)
    S = approx_spectrum(params, n, Gx, fatten, threads=threads)
    rows = [{"l": fmt17(l), "r": fmt17(r)} for l, r in S.intervals]
    gaps = gap_report(S)[:10]
    extra = {"measure": S.measure, "diam": S.diam,
             "hull": list(S.hull), "interval_count": len(S.intervals),
             "largest_gaps": [[a, b, w] for a, b, w in gaps]}
    return ("l", "r"), rows, extra


def _run_homogeneity(cfg, constants, seed, threads):
    params = _resolve_params(cfg, 0.0)
    n = _integer(cfg, "n", required=True, lo=1)
    Gx = _integer(cfg, "Gx", required=True, lo=64)
    fatten = _number(cfg, "fatten", required=True, lo=0.0)
    e_samples = _integer(cfg, "e_samples", default=512, lo=0)
    S = approx_spectrum(params, n, Gx, fatten, threads=threads)
    sigmas = cfg.get("sigmas")
    if sigmas is not None:
        sigmas = _number_list(cfg, "sigmas")
        for i, s in enumerate(sigmas):
            if s <= 0:
                raise ConfigError(f"sigmas[{i}]", "must be > 0")
    else:
        sigma_min = _number(cfg, "sigma_min", default=1e-3, lo_strict=0.0)
        count = _integer(cfg, "sigma_count", default=16, lo=2)
        if sigma_min > S.diam:
            raise ConfigError("sigma_min", f"exceeds diam(S) = {S.diam}")
        sigmas = np.geomspace(sigma_min, S.diam, count).tolist()
    prof = homogeneity_profile(S, e_samples, sigmas)
    rows = [{"sigma": fmt17(s), "tau": fmt17(t), "worst_E": fmt17(w)}
            for s, t, w in prof.rows()]
    extra = {"tau_min": prof.tau_min, "e_count": prof.e_count,
             "spectrum_measure": S.measure, "diam": S.diam,
             "interval_count": len(S.intervals)}
    threshold = _number(cfg, "tau_threshold", default=None, lo=0.0)
    if threshold is not None:
        extra["tau_threshold"] = threshold
        extra["tau_threshold_met"] = prof.tau_min >= threshold
    return ("sigma", "tau", "worst_E"), rows, extra, (
        None if threshold is None or prof.tau_min >= threshold
        else f"tau_min = {prof.tau_min:.6g} below threshold {threshold:.6g}")


def _run_segment(cfg, constants, seed, threads):
    E = _single_energy(cfg)
    params = _resolve_params(cfg, E)
    n = _integer(cfg, "n", required=True, lo=2)
    n1 = _integer(cfg, "n1", default=None, lo=3)
    sc = SegmentConfig(
        Gx=_integer(cfg, "Gx", default=256, lo=8),
        dx=_number(cfg, "dx", default=1.0 / 2048.0, lo_strict=0.0),
        max_steps=_integer(cfg, "max_steps", default=256, lo=1),
        max_detune=_number(cfg, "max_detune", default=1.0, lo_strict=0.0),
        seed=seed, threads=threads, constants=constants)
    seg = spectral_segment(params, E, n, config=sc)
    max_samples = _integer(cfg, "max_samples", default=None, lo=2)
    stab = stabilize_segment(params, seg, n1=n1, seed=seed,
                             max_samples=max_samples)
    rows = [{"x_lo": fmt17(p.x_lo), "x_hi": fmt17(p.x_hi), "j1": p.j1,
             "max_discrepancy": fmt17(p.max_discrepancy),
             "min_overlap": fmt17(p.min_overlap),
             "new_residual": fmt17(p.new_residual),
             "n_samples": p.n_samples} for p in stab.pieces]
    extra = {"segment": seg.to_dict(), "stabilized": stab.to_dict()}
    cols = ("x_lo", "x_hi", "j1", "max_discrepancy", "min_overlap",
            "new_residual", "n_samples")
    return cols, rows, extra


def _run_greencheck(cfg, constants, seed, threads):
    energies = _energies(cfg)
    window = _window(cfg)
    x = _number(cfg, "x", default=0.0)
    J = _number(cfg, "J", required=True, lo_strict=0.0)
    lam = _number(cfg, "lambda", required=True, lo_strict=0.0)
    ln_value = _number(cfg, "ln_value", default=math.log(lam))
    rows = []
    worst = math.inf
    op = None
    for E in energies:
        params = _resolve_params(cfg, E)
        if op is None:
            op = FiniteOperator(params, x, window)
        rep = green_decay_check(op, E, J, ln_value, constants=constants)
        worst = min(worst, rep.min_slack)
        rows.append({"E": fmt17(E), "n": rep.n, "J": fmt17(rep.J),
                     "rate": fmt17(rep.rate), "offset": fmt17(rep.offset),
                     "min_slack": fmt17(rep.min_slack),
                     "dist_value": fmt17(rep.dist_value),
                     "ok": rep.ok})
    cols = ("E", "n", "J", "rate", "offset", "min_slack", "dist_value", "ok")
    return cols, rows, {"min_slack_overall": worst, "ln_value": ln_value,
                        "window": list(window)}


_RUNNERS = {
    "numtheory": _run_numtheory,
    "lyapunov": _run_lyapunov,
    "ldt": _run_ldt,
    "wegner": _run_wegner,
    "spectrum": _run_spectrum,
    "homogeneity": _run_homogeneity,
    "segment": _run_segment,
    "greencheck": _run_greencheck,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpspec",
        description="Quasi-periodic cocycle experiments: config in, "
                    "CSV + manifest out.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="override config thread count")
        p.add_argument("--seed", type=int, default=None,
                       help="override config seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.threads is not None:
            cfg["threads"] = args.threads
        if args.seed is not None:
            cfg["seed"] = args.seed
        out_dir = args.out or os.environ.get("QPSPEC_OUT") or cfg.get("out", ".")
        if not isinstance(out_dir, str):
            raise ConfigError("out", "must be a directory path")
        os.makedirs(out_dir, exist_ok=True)
        constants = _resolve_constants(cfg)
        seed = _seed(cfg)
        threads = _threads(cfg)
        t0 = time.perf_counter()
        result = _RUNNERS[args.subcommand](cfg, constants, seed, threads)
        wall = time.perf_counter() - t0
        columns, rows, extra = result[0], result[1], result[2]
        failure = result[3] if len(result) > 3 else None
        csv_name = f"{args.subcommand}.csv"
        _write_csv(os.path.join(out_dir, csv_name), columns, rows)
        manifest = _write_manifest(out_dir, args.subcommand, cfg, constants,
                                   seed, threads, wall, csv_name, extra)
        print(f"wrote {os.path.join(out_dir, csv_name)} and {manifest} "
              f"({len(rows)} rows, {wall:.2f}s)")
        if failure is not None:
            print(f"assertion failed: {failure}", file=sys.stderr)
            return 3
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QpspecError as exc:
        print(f"assertion failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
