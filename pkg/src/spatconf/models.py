"""scikit-learn compatible wrappers around the ``fit_*`` estimators.

Spatial information enters through keyword arguments to ``fit``
(``locations=`` or ``groups=``), following the usual convention for
side-information such as ``sample_weight``.  After fitting, ``result_``
holds the :class:`~spatconf.estimators.FitResult`, ``beta_`` the exposure
effect and ``coef_`` / ``intercept_`` the linear coefficients.
"""

from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import estimators as est
from ._validation import check_exposure, check_groups, check_locations, check_xy
from .geometry import LocationSet
from .inference import analytic_ci
from .kernels import KernelSpec, covariance_matrix
from .linalg import spd_factor
from .smoothers import (
    SplineBasis,
    _radial,
    default_lambda_grid,
    select_lambda_gcv,
    thinplate_basis,
)

__all__ = [
    "cached_thinplate_basis",
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


@lru_cache(maxsize=8)
def cached_thinplate_basis(L, rank):
    """Basis memoized per LocationSet object (replications often share locations)."""
    return thinplate_basis(L, rank)


def _basis_for(locations, n, rank):
    if rank is None:
        raise ValueError("a spline rank is required")
    L = check_locations(locations, n)
    return cached_thinplate_basis(L, int(rank)) if isinstance(locations, LocationSet) else thinplate_basis(L, int(rank))


def _resolve_grid(lambda_grid, n):
    """``None``, an explicit grid, or a ``{"lo", "hi", "num"}`` spec scaled by ``n``."""
    if lambda_grid is None:
        return default_lambda_grid(n)
    if isinstance(lambda_grid, dict):
        return default_lambda_grid(n, **lambda_grid)
    return np.asarray(lambda_grid, dtype=float)


class _EffectRegressor(RegressorMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses implement ``_fit_result``."""

    _has_intercept_column = True

    def fit(self, X, y, locations=None, groups=None):
        X, y = check_xy(X, y)
        res = self._fit_result(X, y, locations, groups)
        p = X.shape[1]
        self.result_ = res
        self.n_features_in_ = p
        coef = np.asarray(res.coef, dtype=float)
        self.coef_ = coef[:p]
        self.intercept_ = float(coef[p]) if coef.shape[0] > p else 0.0
        self.beta_ = res.beta_hat
        self.se_ = res.se
        return self

    def predict(self, X):
        """Exposure part of the mean, ``X @ coef_ + intercept_``."""
        check_is_fitted(self, "result_")
        X = check_exposure(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} exposure columns, got {X.shape[1]}")
        return X @ self.coef_ + self.intercept_

    def conf_int(self, level=0.95):
        check_is_fitted(self, "result_")
        return analytic_ci(self.result_, level)


class OLSRegressor(_EffectRegressor):
    def __init__(self, fit_intercept=True):
        self.fit_intercept = fit_intercept

    def _fit_result(self, X, y, locations, groups):
        return est.fit_ols(X, y, self.fit_intercept)


class RestrictedSpatialRegressor(_EffectRegressor):
    """Spatial basis restricted to the orthogonal complement of the exposure."""

    def __init__(self, rank=200, fit_intercept=True):
        self.rank = rank
        self.fit_intercept = fit_intercept

    def _fit_result(self, X, y, locations, groups):
        basis = _basis_for(locations, X.shape[0], self.rank)
        return est.fit_rsr(X, y, basis, self.fit_intercept)


class GLSRegressor(_EffectRegressor):
    """GLS with a known covariance ``kernel`` (dense or nearest-neighbour)."""

    def __init__(self, kernel=None, fit_intercept=True, approx="dense", neighbors=15):
        self.kernel = kernel
        self.fit_intercept = fit_intercept
        self.approx = approx
        self.neighbors = neighbors

    def _fit_result(self, X, y, locations, groups):
        if not isinstance(self.kernel, KernelSpec):
            raise ValueError("GLSRegressor needs a KernelSpec")
        L = check_locations(locations, X.shape[0])
        if self.approx == "vecchia":
            return est.fit_gls_vecchia(X, y, L, self.kernel, self.neighbors, self.fit_intercept)
        F = spd_factor(covariance_matrix(self.kernel, L))
        res = est.fit_gls_known(X, y, F, self.fit_intercept)
        k = self.kernel
        res.cov_params = (k.variance, k.scale, k.nugget)
        res.diagnostics.update(kernel=k, approx="dense")
        return res


class ProfileGLSRegressor(_EffectRegressor):
    """Feasible GLS with covariance parameters by maximum likelihood."""

    def __init__(self, family="exponential", fit_intercept=True, approx="dense", neighbors=15, max_evals=500):
        self.family = family
        self.fit_intercept = fit_intercept
        self.approx = approx
        self.neighbors = neighbors
        self.max_evals = max_evals

    def _fit_result(self, X, y, locations, groups):
        L = check_locations(locations, X.shape[0])
        return est.fit_gls_profile(
            X, y, L, self.family, self.fit_intercept, self.approx, self.neighbors, self.max_evals
        )


class GPRidgeRegressor(_EffectRegressor):
    def __init__(self, kernel=None, tau2=1e6, fit_intercept=True):
        self.kernel = kernel
        self.tau2 = tau2
        self.fit_intercept = fit_intercept

    def _fit_result(self, X, y, locations, groups):
        if not isinstance(self.kernel, KernelSpec):
            raise ValueError("GPRidgeRegressor needs a KernelSpec")
        L = check_locations(locations, X.shape[0])
        F = spd_factor(covariance_matrix(self.kernel, L))
        return est.fit_gp_ridge(X, y, F, self.tau2, self.fit_intercept)


class SplinePLMRegressor(_EffectRegressor):
    """Partially linear spline model; ``penalty="gcv"`` (GAM) or ``"none"`` (GAM.fx)."""

    def __init__(self, rank=200, penalty="gcv", lambda_grid=None):
        self.rank = rank
        self.penalty = penalty
        self.lambda_grid = lambda_grid

    def _fit_result(self, X, y, locations, groups):
        basis = _basis_for(locations, X.shape[0], self.rank)
        mode = {"gcv": "gcv_penalty", "none": "no_penalty"}.get(self.penalty)
        if mode is None:
            raise ValueError(f"penalty must be 'gcv' or 'none', got {self.penalty!r}")
        return est.fit_spline_plm(X, y, basis, mode, _resolve_grid(self.lambda_grid, X.shape[0]))

    def fit(self, X, y, locations=None, groups=None):
        super().fit(X, y, locations, groups)
        # the intercept lives in the basis, not in coef_
        self.intercept_ = 0.0
        self.coef_ = np.asarray(self.result_.coef[: self.n_features_in_])
        return self


class SpatialPlusRegressor(SplinePLMRegressor):
    def __init__(self, rank=200, lambda_grid=None):
        super().__init__(rank=rank, penalty="gcv", lambda_grid=lambda_grid)

    def _fit_result(self, X, y, locations, groups):
        basis = _basis_for(locations, X.shape[0], self.rank)
        return est.fit_spatial_plus(X, y, basis, _resolve_grid(self.lambda_grid, X.shape[0]))


class GroupedRERegressor(_EffectRegressor):
    def __init__(self, fit_intercept=True):
        self.fit_intercept = fit_intercept

    def _fit_result(self, X, y, locations, groups):
        if groups is None and isinstance(locations, LocationSet):
            groups = locations.groups
        if groups is None:
            raise ValueError("GroupedRERegressor needs groups")
        return est.fit_grouped_re(X, y, check_groups(groups, X.shape[0]), self.fit_intercept)


class ThinPlateSmoother(RegressorMixin, BaseEstimator):
    """Low-rank thin-plate regression of a response on coordinates.

    ``fit(coords, y)`` picks the penalty by GCV; ``predict`` evaluates the
    fitted surface at new coordinates.
    """

    def __init__(self, rank=200, lambda_grid=None):
        self.rank = rank
        self.lambda_grid = lambda_grid

    def fit(self, X, y):
        L = X if isinstance(X, LocationSet) else LocationSet(np.asarray(X, dtype=float), ("unknown",))
        y = np.asarray(y, dtype=float)
        basis = thinplate_basis(L, self.rank)
        grid = _resolve_grid(self.lambda_grid, L.n)
        self.lambda_, fit = select_lambda_gcv(basis, y, grid)
        self.basis_ = basis
        self.coef_ = fit.coefficients
        self.edf_ = fit.hat_trace
        self.n_features_in_ = L.dim
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        coords = X.coords if isinstance(X, LocationSet) else np.asarray(X, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        knots = self.basis_.knots
        r = np.sqrt(np.sum((coords[:, None, :] - knots[None, :, :]) ** 2, axis=-1))
        B = np.hstack([np.ones((coords.shape[0], 1)), coords, _radial(r, coords.shape[1])])
        return B @ self.coef_
