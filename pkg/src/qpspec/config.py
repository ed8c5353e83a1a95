"""Experiment-wide constants and helpers for deterministic runs.

Every unnamed constant that enters a verified bound lives here with an
explicit default, gets echoed into result objects, and is serialized into
run manifests.  Changing one of these changes what is being asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Constants:
    """Tunable constants entering quantitative bounds.

    A        -- Diophantine exponent assumed for the frequency
    nu       -- deviation-set exponent, nu = 1/(2A)
    C_decay  -- constant in Green's-function decay slack exp(C*n^(1-nu))
    c_seg    -- segment residual threshold constant exp(-c_seg * n^nu)
    c_ldt    -- target constant in measure < exp(-c_ldt * delta * n^nu) fits
    C_avalanche -- constant in the block-product residual bound C*n/mu
    """

    A: float = 2.0
    nu: float = 0.25
    C_decay: float = 5.0
    c_seg: float = 0.25
    c_ldt: float = 1.0
    C_avalanche: float = 20.0

    def __post_init__(self):
        if not (self.A >= 1.0):
            raise ValueError("A must be >= 1")
        if not (0.0 < self.nu <= 0.5):
            raise ValueError("nu must lie in (0, 1/2]")

    @classmethod
    def for_exponent(cls, A: float, **overrides) -> "Constants":
        """Constants with nu tied to the Diophantine exponent: nu = 1/(2A)."""
        return cls(A=A, nu=1.0 / (2.0 * A), **overrides)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONSTANTS = Constants()


def fmt17(x: float) -> str:
    """Serialize a float with 17 significant digits (round-trip exact)."""
    return format(float(x), ".17g")
