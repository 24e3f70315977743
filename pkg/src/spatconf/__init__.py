"""Estimation of an exposure effect under spatial confounding.

Simulation scenarios, spline / GLS / random-effect estimators, interval
methods and the Monte Carlo harness behind the ``spatconf`` CLI.
"""

__version__ = "0.1.0"

from .geometry import LocationSet  # noqa: E402
from .kernels import KernelSpec, TheoremKernelSpec  # noqa: E402
from .rng import RngStream  # noqa: E402
from .estimators import (  # noqa: E402
    FitResult,
    IdentifiabilityError,
    fit_gls_known,
    fit_gls_profile,
    fit_gls_vecchia,
    fit_gp_ridge,
    fit_grouped_re,
    fit_ols,
    fit_rsr,
    fit_spatial_plus,
    fit_spline_plm,
)
from .models import (  # noqa: E402
    GLSRegressor,
    GPRidgeRegressor,
    GroupedRERegressor,
    OLSRegressor,
    ProfileGLSRegressor,
    RestrictedSpatialRegressor,
    SpatialPlusRegressor,
    SplinePLMRegressor,
    ThinPlateSmoother,
)

__all__ = [
    "__version__",
    "LocationSet",
    "KernelSpec",
    "TheoremKernelSpec",
    "RngStream",
    "FitResult",
    "IdentifiabilityError",
    "fit_ols",
    "fit_rsr",
    "fit_gls_known",
    "fit_gls_profile",
    "fit_gls_vecchia",
    "fit_gp_ridge",
    "fit_spline_plm",
    "fit_spatial_plus",
    "fit_grouped_re",
    "OLSRegressor",
    "RestrictedSpatialRegressor",
    "GLSRegressor",
    "ProfileGLSRegressor",
    "GPRidgeRegressor",
    "SplinePLMRegressor",
    "SpatialPlusRegressor",
    "GroupedRERegressor",
    "ThinPlateSmoother",
]
