"""Deterministic and Monte Carlo error studies for Levy-driven linear SPDEs on (0,1)."""

from .errors import (
    ErrorReport,
    RegularityError,
    Setup,
    error_report,
    hs_time_integral,
    mc_weak_error,
    propagator_error_profile,
    representation_quadratic,
    strong_error,
    weak_error_quadratic,
)
from .mittag_leffler import mittag_leffler_neg
from .noise import (
    CovarianceSpec,
    JumpPath,
    LevyLaw,
    hs_condition,
    increments_from_path,
    sample_increments,
    sample_jump_path,
    stream,
    asymmetric_condition,
)
from .propagators import (
    CqWeights,
    DiscreteFamily,
    EquationKind,
    be_mode_power,
    cq_mode_solve,
    cq_resolvent,
    cq_weights,
    discrete_family,
    exact_mode_factor,
    heat_kind,
    i_stability_check,
    rational_wave_mode,
    volterra_kind,
    wave_kind,
)
from .spectral import (
    DirichletSpectrum,
    DotHVector,
    FemSpace,
    assemble_fem,
    cross_gram,
    dirichlet_spectrum,
    dot_norm,
    l2_project_mode,
)
from .studies import (
    ExpectedRates,
    RateFit,
    StudyConfig,
    StudyResult,
    emit_csv,
    expected_rates,
    fit_rate,
    preset_studies,
    representation_sweep,
    run_study,
)

__all__ = [
    "CovarianceSpec",
    "CqWeights",
    "DirichletSpectrum",
    "DiscreteFamily",
    "DotHVector",
    "EquationKind",
    "ErrorReport",
    "ExpectedRates",
    "FemSpace",
    "JumpPath",
    "LevyLaw",
    "RateFit",
    "RegularityError",
    "Setup",
    "StudyConfig",
    "StudyResult",
    "assemble_fem",
    "be_mode_power",
    "cq_mode_solve",
    "cq_resolvent",
    "cq_weights",
    "cross_gram",
    "dirichlet_spectrum",
    "discrete_family",
    "dot_norm",
    "emit_csv",
    "error_report",
    "exact_mode_factor",
    "expected_rates",
    "fit_rate",
    "heat_kind",
    "hs_condition",
    "hs_time_integral",
    "i_stability_check",
    "increments_from_path",
    "l2_project_mode",
    "mc_weak_error",
    "mittag_leffler_neg",
    "preset_studies",
    "propagator_error_profile",
    "rational_wave_mode",
    "representation_quadratic",
    "representation_sweep",
    "run_study",
    "sample_increments",
    "sample_jump_path",
    "stream",
    "strong_error",
    "volterra_kind",
    "wave_kind",
    "weak_error_quadratic",
    "asymmetric_condition",
]
