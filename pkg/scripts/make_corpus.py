"""Regenerate the packaged potential corpus under src/qpspec/data/.

Run from the repository root:  python scripts/make_corpus.py

amo and gevrey_s2 come straight from their closed-form builders.  flat_bump
is a smooth plateau (C-infinity ramps, value 1 on roughly [0.35, 0.65])
sampled on a fine grid and truncated to |k| <= 64.  It declares an analytic
(s=1, K=1, norm_sK=1) envelope that its merely-Gevrey coefficients cannot
meet, so it is the corpus' non-conforming entry: decay_check must reject it
and level-set probes at the plateau height must come out degenerate-flat.
"""

import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from qpspec.potential import (GevreyPotential, amo_potential,  # noqa: E402
                              gevrey2_potential, potential_to_json)

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "qpspec" / "data"


def smooth_ramp(t):
    """C-infinity 0 -> 1 transition on [0,1]."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def flat_bump_potential(cutoff=64, grid=8192):
    x = np.arange(grid) / grid
    plateau = smooth_ramp((x - 0.25) / 0.1) * smooth_ramp((0.75 - x) / 0.1)
    spec = np.fft.fft(plateau) / grid
    coeffs = {0: complex(spec[0].real, 0.0)}
    for k in range(1, cutoff + 1):
        c = spec[k]
        # enforce exact realness symmetry, drop numerically dead modes
        if abs(c) < 1e-17:
            continue
        coeffs[k] = complex(c.real, c.imag)
        coeffs[-k] = complex(c.real, -c.imag)
    return GevreyPotential(coeffs, s=1.0, K=1.0, norm_sK=1.0)


def write(name, pot):
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / f"{name}.json"
    with open(path, "w") as fh:
        json.dump(potential_to_json(pot), fh)
        fh.write("\n")
    print(f"wrote {path} ({path.stat().st_size} bytes, "
          f"{len(pot.ks)} modes)")


if __name__ == "__main__":
    write("amo", amo_potential())
    write("gevrey_s2", gevrey2_potential())
    write("flat_bump", flat_bump_potential())
