"""Shared helpers for deterministic grid scans.

Heavy scans evaluate orbit data as (steps, lanes) matrices and then run
per-lane recurrences.  Parallelism only ever splits the lane axis into
fixed-size chunks processed in index order, so results are byte-identical
for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

# fixed irrational offset (inverse golden ratio / 2) applied to uniform
# phase grids; keeps grid points off resonances with convergent denominators
GRID_SHIFT = 0.30901699437494745

CHUNK = 4096


def phase_grid(G: int, x0: float = 0.0, shift: float = GRID_SHIFT) -> np.ndarray:
    """x_i = x0 + (i + shift)/G mod 1."""
    return (x0 + (np.arange(G) + shift) / G) % 1.0


def step_values(potential, lam, omega, n, G, x0=0.0, E=0.0, k0=1,
                shift: float = GRID_SHIFT) -> np.ndarray:
    """(n, G) matrix of lam*v(x_i + k*omega) - E, k = k0..k0+n-1.

    Each row is one full-grid potential evaluation at the exactly-computed
    orbit offset frac(k*omega), so rows stay uniform grids and the FFT path
    applies.
    """
    out = np.empty((n, G))
    base = (x0 + shift / G) % 1.0
    for i, k in enumerate(range(k0, k0 + n)):
        off = (base + omega.shift(k)) % 1.0
        out[i] = lam * potential.eval_grid(G, off) - E
    return out


def run_chunked(fn, n_lanes: int, threads: int = 1, chunk: int = CHUNK):
    """Apply fn(i0, i1) over fixed chunks of the lane axis, in index order.

    fn must be pure and return a tuple of 1-d arrays of length i1-i0.
    Chunk boundaries do not depend on `threads`.
    """
    bounds = [(i, min(i + chunk, n_lanes)) for i in range(0, n_lanes, chunk)]
    if threads <= 1 or len(bounds) == 1:
        parts = [fn(i0, i1) for i0, i1 in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    first = parts[0]
    if not isinstance(first, tuple):
        return np.concatenate(parts)
    return tuple(np.concatenate([p[i] for p in parts])
                 for i in range(len(first)))
