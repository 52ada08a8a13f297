"""p-radius, joint spectral radius and stochastic Lyapunov functions for switched linear systems."""

from .dist import MatrixDistribution, example5, uniform_scalar
from .errors import (
    AssumptionViolated,
    BudgetExceeded,
    DegenerateFit,
    DimensionCapError,
    EigensolverFailure,
    GammaTooSmall,
    JsrlabError,
    SpecError,
)
from .jsr import jsr_brute_force, jsr_gap_report, jsr_limit_formula
from .lyapunov import (
    LyapunovCertificate,
    definitional_lyapunov,
    synth_cone_norm,
    synth_quadratic,
    verify_certificate,
)
from .pradius import p_radius_exact, p_radius_montecarlo, p_radius_sequence
from .simulate import estimate_pth_mean_rate, simulate_stochastic, simulate_worst_case

__all__ = [
    "MatrixDistribution", "example5", "uniform_scalar",
    "AssumptionViolated", "BudgetExceeded", "DegenerateFit", "DimensionCapError",
    "EigensolverFailure", "GammaTooSmall", "JsrlabError", "SpecError",
    "jsr_brute_force", "jsr_gap_report", "jsr_limit_formula",
    "LyapunovCertificate", "definitional_lyapunov", "synth_cone_norm", "synth_quadratic",
    "verify_certificate",
    "p_radius_exact", "p_radius_montecarlo", "p_radius_sequence",
    "estimate_pth_mean_rate", "simulate_stochastic", "simulate_worst_case",
]
