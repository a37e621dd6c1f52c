"""Wrapped Gaussian process models for angles observed at spatial sites."""

from .circular import (
    CircularSample,
    CircularSummary,
    arctan_star,
    circular_distance,
    circular_mean,
    concentration,
    moments_estimate,
    rayleigh_test,
    wrap,
    wrapped_correlation,
)
from .errors import (
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    SingularCovarianceError,
    UndefinedDirectionError,
    WrapGPError,
)
from .inference import (
    McmcConfig,
    PosteriorDraws,
    PosteriorSummary,
    Priors,
    fit_independent,
    fit_spatial,
    summarize,
)
from .prediction import (
    KrigeResult,
    LooResult,
    RegressionCurve,
    average_prediction_error,
    krige,
    loo_validate,
    nonspatial_loo,
    nonspatial_predict_error,
    regression_curve,
)
from .sim import SimSpec, SpatialParams, regular_grid, simulate
from .spatial_cov import Kernel, build_cov, predictive_conditional, site_conditional
from .wrapped_normal import (
    TruncationWindow,
    WnParams,
    credible_arc,
    k_conditional,
    truncation_window,
    wn_density,
    wn_sample,
)

__version__ = "0.1.0"
