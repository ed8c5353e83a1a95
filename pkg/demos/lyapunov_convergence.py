"""Finite-scale Lyapunov exponents and their convergence.

Three experiments:
  1. zero potential at |E| > 2, where the exponent is log of the larger
     root of z^2 - E z + 1 = 0 and the finite-n error is visible directly
  2. zero potential at E inside [-2, 2]: elliptic rotation, exponent 0
  3. almost Mathieu at large coupling, where L_n plateaus near log(lam)
"""

import math

from qpspec import (CocycleParams, L_n, amo_potential, golden_frequency,
                    lyapunov, zero_potential)

omega = golden_frequency()


def free_case():
    free = CocycleParams(zero_potential(), 1.0, omega, 3.0)
    exact = math.log((3.0 + math.sqrt(5.0)) / 2.0)
    print("zero potential, E = 3 (hyperbolic):")
    for n in (100, 1000, 10000):
        ln = L_n(free, n, Nx=2)
        print(f"  n = {n:6d}   L_n = {ln:.9f}   error = {ln - exact:+.2e}")
    est = lyapunov(free, (100000, 200000, 400000), Nx=2, tol=1e-5)
    print(f"  extrapolated: {est.value:.9f}  (exact {exact:.9f}, "
          f"converged = {est.converged})")

    rot = CocycleParams(zero_potential(), 1.0, omega, 1.5)
    print("zero potential, E = 1.5 (elliptic):")
    for n in (4, 40, 400):
        # norms of rotation powers stay bounded, so L_n -> 0 like 1/n
        print(f"  n = {n:4d}   L_n = {L_n(rot, n, Nx=2):.6f}")


def amo_case():
    print("almost Mathieu, lam = 10, E = 0:")
    params = CocycleParams(amo_potential(), 10.0, omega, 0.0)
    target = math.log(10.0)
    for n in (50, 200, 1000, 4000):
        ln = L_n(params, n, Nx=256)
        print(f"  n = {n:5d}   L_n = {ln:.6f}   L_n - log(lam) = "
              f"{ln - target:+.2e}")
    print(f"  log(lam) = {target:.6f}; at E in the spectrum the exponent "
          "equals log(lam) exactly in the large-coupling limit")


if __name__ == "__main__":
    free_case()
    print()
    amo_case()
