"""Numerical laboratory for quasi-periodic Schrodinger cocycles.

Finite-volume Schrodinger operators h psi(j) = psi(j+1) + psi(j-1)
+ lam*v(x + j*omega) psi(j) with Gevrey-regular v, studied through
Dirichlet determinants, transfer-matrix products, Green's functions,
large-deviation measures, and interval-set spectrum geometry.  Every
quantitative claim is exposed as a checkable report object.
"""

from .config import Constants, DEFAULT_CONSTANTS, fmt17
from .numtheory import (Frequency, beta_estimate, circle_norm,
                        continued_fraction, diophantine_fit,
                        frequency_from_quotients, golden_frequency)
from .potential import (GevreyPotential, amo_potential, decay_check,
                        gevrey2_potential, load_potential,
                        lojasiewicz_probe, truncate, zero_potential)
from .cocycle import (CocycleParams, LyapunovEstimate, ScaledMatrix,
                      avalanche_residual, L_n, L_n_refined, lyapunov,
                      one_step, product, truncation_gap, u_n, u_n_grid)
from .determinant import (SignedLog, det_transfer_identity, dirichlet_det,
                          dirichlet_det_grid, dirichlet_det_sequence,
                          shifted_det)
from .operator import (EigenPair, EigenSystem, FiniteOperator,
                       correlated_eigenpair, dist_spec, dist_spec_grid,
                       eigenpair, eigensystem, eigenvalue_branch,
                       eigenvalues, green_decay_check, green_entry,
                       poisson_residual, spectra_on_grid, sturm_count)
from .deviation import (CircleGridSet, LdtTrend, WegnerReport,
                        default_wegner_k, deviation_set_f, deviation_set_u,
                        flatness, ldt_trend, wegner_measure)
from .spectrum import (CriterionCertificate, HomogeneityProfile, IntervalSet,
                       SegmentConfig, SpectralSegment, StabilizedSegment,
                       approx_spectrum, criterion_check, gap_report,
                       homogeneity_profile, spectral_segment,
                       stabilize_segment)
from . import errors
from .errors import (BoundViolated, ConfigError, ConvergenceFailure,
                     DecayViolated, DegenerateFit, DomainError, EmptySet,
                     HypothesisFailed, IdentityViolated, InsufficientDepth,
                     NotNearSpectrum, PairingFailed, PrecisionExhausted,
                     PreconditionNotMet, QpspecError, RealnessViolated,
                     Refusal, SingularEnergy)

__version__ = "0.1.0"

__all__ = [
    "Constants", "DEFAULT_CONSTANTS", "fmt17",
    "Frequency", "beta_estimate", "circle_norm", "continued_fraction",
    "diophantine_fit", "frequency_from_quotients", "golden_frequency",
    "GevreyPotential", "amo_potential", "decay_check", "gevrey2_potential",
    "load_potential", "lojasiewicz_probe", "truncate", "zero_potential",
    "CocycleParams", "LyapunovEstimate", "ScaledMatrix",
    "avalanche_residual", "L_n", "L_n_refined", "lyapunov", "one_step",
    "product", "truncation_gap", "u_n", "u_n_grid",
    "SignedLog", "det_transfer_identity", "dirichlet_det",
    "dirichlet_det_grid", "dirichlet_det_sequence", "shifted_det",
    "EigenPair", "EigenSystem", "FiniteOperator", "correlated_eigenpair",
    "dist_spec", "dist_spec_grid", "eigenpair", "eigensystem",
    "eigenvalue_branch", "eigenvalues", "green_decay_check", "green_entry",
    "poisson_residual", "spectra_on_grid", "sturm_count",
    "CircleGridSet", "LdtTrend", "WegnerReport", "default_wegner_k",
    "deviation_set_f", "deviation_set_u", "flatness", "ldt_trend",
    "wegner_measure",
    "CriterionCertificate", "HomogeneityProfile", "IntervalSet",
    "SegmentConfig", "SpectralSegment", "StabilizedSegment",
    "approx_spectrum", "criterion_check", "gap_report",
    "homogeneity_profile", "spectral_segment", "stabilize_segment",
    "errors",
    "QpspecError", "DomainError", "PrecisionExhausted", "InsufficientDepth",
    "RealnessViolated", "DecayViolated", "DegenerateFit", "HypothesisFailed",
    "IdentityViolated", "SingularEnergy", "ConvergenceFailure",
    "PreconditionNotMet", "BoundViolated", "NotNearSpectrum", "PairingFailed",
    "Refusal", "EmptySet", "ConfigError",
]
