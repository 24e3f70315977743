"""Effect estimators for the partially linear model ``Y = X beta + g(s) + eps``.

Every ``fit_*`` function returns a :class:`FitResult` whose ``beta_hat`` is
the coefficient on the first exposure column.  ``intercept=True`` appends a
constant column to the design (the spline models carry their own).
"""

from dataclasses import dataclass, field
import logging

import numpy as np
import scipy.linalg as sla
from scipy import optimize, stats

from ._validation import check_groups, check_locations, check_xy, design
from .kernels import KernelSpec, covariance_matrix
from .linalg import CompoundSymmetryFactor, quad_form, spd_factor, vecchia_factor, vecchia_neighbors
from .smoothers import PenalizedLeastSquares, SplineBasis, default_lambda_grid, select_lambda_gcv

__all__ = [
    "METHODS",
    "FitResult",
    "IdentifiabilityError",
    "fit_ols",
    "fit_rsr",
    "fit_gls_known",
    "gls_loglik",
    "fit_gls_profile",
    "fit_gls_vecchia",
    "fit_gp_ridge",
    "fit_spline_plm",
    "fit_spatial_plus",
    "fit_grouped_re",
]

logger = logging.getLogger(__name__)

METHODS = (
    "OLS", "RSR", "GLS_known", "GLS_profile", "GLS_vecchia",
    "GP_ridge", "GAM", "GAM_fx", "SpatialPlus", "GroupedRE",
)

_Z95 = stats.norm.ppf(0.975)


class IdentifiabilityError(ValueError):
    """The exposure has no component outside the spatial function class."""


@dataclass
class FitResult:
    method: str
    beta_hat: float
    se: float | None = None
    ci: tuple | None = None
    cov_params: tuple | None = None
    diagnostics: dict = field(default_factory=dict)
    coef: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        self.beta_hat = float(self.beta_hat)
        if self.se is not None:
            self.se = float(self.se)
            if self.ci is None and self.se > 0:
                self.ci = (self.beta_hat - _Z95 * self.se, self.beta_hat + _Z95 * self.se)


def _ols_core(D, y):
    n, p = D.shape
    Q, R = np.linalg.qr(D)
    dg = np.abs(np.diag(R))
    if p > n or dg.min() <= 1e-10 * dg.max():
        raise np.linalg.LinAlgError("design matrix is rank deficient")
    coef = sla.solve_triangular(R, Q.T @ y)
    resid = y - D @ coef
    Rinv = sla.solve_triangular(R, np.eye(p))
    return coef, resid, Q, Rinv @ Rinv.T


def fit_ols(X, y, intercept=True):
    """Least squares of ``y`` on the exposure, ignoring space."""
    X, y = check_xy(X, y)
    D = design(X, intercept)
    n, p = D.shape
    coef, resid, _, xtx_inv = _ols_core(D, y)
    dof = n - p
    s2 = float(resid @ resid) / dof if dof > 0 else np.nan
    se = np.sqrt(s2 * xtx_inv[0, 0]) if dof > 0 else None
    return FitResult("OLS", coef[0], se, coef=coef, diagnostics={"sigma2": s2, "rss": float(resid @ resid)})


def fit_rsr(X, y, basis, intercept=True, tol=1e-9):
    """Restricted spatial regression.

    The spatial basis is projected onto the orthogonal complement of the
    design, so the exposure coefficient is exactly the OLS one; only the
    residual variance (and hence the SE) changes.
    """
    X, y = check_xy(X, y)
    D = design(X, intercept)
    n, p = D.shape
    coef, resid, Q, xtx_inv = _ols_core(D, y)
    B = basis.B if isinstance(basis, SplineBasis) else np.asarray(basis, dtype=float).reshape(n, -1)
    dropped = 0
    gain = 0.0
    rank = 0
    if B.shape[1]:
        Bp = B - Q @ (Q.T @ B)
        Qb, Rb, _ = sla.qr(Bp, mode="economic", pivoting=True)
        dg = np.abs(np.diag(Rb))
        ref = max(np.linalg.norm(B, axis=0).max(), 1.0)
        rank = int(np.sum(dg > tol * ref))
        dropped = B.shape[1] - rank
        if dropped:
            logger.debug("RSR: dropped %d basis columns collinear with the design", dropped)
        proj = Qb[:, :rank].T @ resid
        gain = float(proj @ proj)
    rss = float(resid @ resid) - gain
    dof = n - p - rank
    if dof <= 0:
        raise np.linalg.LinAlgError("no residual degrees of freedom after adding the restricted basis")
    s2 = rss / dof
    return FitResult(
        "RSR", coef[0], np.sqrt(s2 * xtx_inv[0, 0]), coef=coef,
        diagnostics={"sigma2": s2, "rss": rss, "basis_rank": rank, "dropped_columns": dropped},
    )


def _gls_core(D, y, F):
    A = quad_form(F, D, D)
    A = np.atleast_2d(A)
    b = np.atleast_1d(quad_form(F, D, y))
    try:
        cf = sla.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("X^T inv(Sigma) X is singular") from exc
    coef = sla.cho_solve(cf, b)
    cov = sla.cho_solve(cf, np.eye(A.shape[0]))
    return coef, cov


def fit_gls_known(X, y, F, intercept=True, method="GLS_known"):
    """Generalized least squares for a given covariance factor.

    ``se`` is the model-based ``sqrt((X^T inv(Sigma) X)^{-1})``, which treats
    the supplied covariance as exact.
    """
    X, y = check_xy(X, y)
    D = design(X, intercept)
    coef, cov = _gls_core(D, y, F)
    return FitResult(
        method, coef[0], np.sqrt(cov[0, 0]), coef=coef,
        diagnostics={"model_cov": cov, "model_se": float(np.sqrt(cov[0, 0]))},
    )


def _factor_for(spec, L, approx, nbrs=None, m=15):
    if approx == "dense":
        return spd_factor(covariance_matrix(spec, L))
    if approx == "vecchia":
        return vecchia_factor(spec, L.coords, m, neighbors=nbrs)
    raise ValueError(f"unknown likelihood approximation {approx!r}")


def _concentrated(D, y, F):
    """GLS coefficients and scale-profiled Gaussian log-likelihood."""
    WD = F.whiten(D)
    Wy = F.whiten(y)
    coef, *_ = np.linalg.lstsq(WD, Wy, rcond=None)
    r = Wy - WD @ coef
    n = y.shape[0]
    s2 = float(r @ r) / n
    ll = -0.5 * (n * np.log(2 * np.pi * s2) + F.logdet + n)
    return ll, coef, s2


def gls_loglik(X, y, L, spec, intercept=True, approx="dense", neighbors=15):
    """Gaussian log-likelihood at ``spec`` with the mean profiled out."""
    X, y = check_xy(X, y)
    L = check_locations(L, X.shape[0])
    D = design(X, intercept)
    F = _factor_for(spec, L, approx, m=neighbors)
    WD = F.whiten(D)
    Wy = F.whiten(y)
    coef, *_ = np.linalg.lstsq(WD, Wy, rcond=None)
    r = Wy - WD @ coef
    n = y.shape[0]
    return float(-0.5 * (n * np.log(2 * np.pi) + F.logdet + r @ r))


def _median_distance(coords, max_points=500):
    step = max(1, coords.shape[0] // max_points)
    sub = coords[::step]
    d = np.sqrt(np.sum((sub[:, None, :] - sub[None, :, :]) ** 2, axis=-1))
    iu = np.triu_indices(sub.shape[0], 1)
    md = float(np.median(d[iu])) if iu[0].size else 1.0
    return md if md > 0 else 1.0


def fit_gls_profile(X, y, L, family="exponential", intercept=True, approx="dense",
                    neighbors=15, max_evals=500, tol=1e-4):
    """Feasible GLS with covariance parameters from maximum likelihood.

    The marginal variance is profiled analytically, so the simplex search
    runs over ``(log scale, log nugget-to-variance ratio)``.  Starting values:
    equal spatial and nugget variance, range equal to the median
    inter-point distance.  ``approx="vecchia"`` uses the nearest-neighbour
    likelihood and GLS throughout.
    """
    X, y = check_xy(X, y)
    n = X.shape[0]
    if n < 30:
        raise ValueError("feasible GLS needs at least 30 observations")
    L = check_locations(L, n)
    D = design(X, intercept)
    md = _median_distance(L.coords)
    scale0 = md if family == "squared_exponential" else 1.0 / md
    nbrs = vecchia_neighbors(L.coords, neighbors) if approx == "vecchia" else None

    cache = {}

    def negll(theta):
        key = tuple(np.round(theta, 12))
        if key not in cache:
            spec = KernelSpec(family, 1.0, float(np.exp(theta[0])), float(np.exp(theta[1])))
            F = _factor_for(spec, L, approx, nbrs, neighbors)
            cache[key] = -_concentrated(D, y, F)[0]
        return cache[key]

    x0 = np.array([np.log(scale0), 0.0])
    bounds = [(np.log(scale0) - np.log(1e3), np.log(scale0) + np.log(1e3)), (np.log(1e-6), np.log(1e4))]
    res = optimize.minimize(
        negll, x0, method="Nelder-Mead", bounds=bounds,
        options={"maxfev": max_evals, "xatol": tol, "fatol": tol},
    )
    scale, tau = float(np.exp(res.x[0])), float(np.exp(res.x[1]))
    F = _factor_for(KernelSpec(family, 1.0, scale, tau), L, approx, nbrs, neighbors)
    ll, _, s2 = _concentrated(D, y, F)
    gamma2, sigma2 = s2, s2 * tau
    spec = KernelSpec(family, gamma2, scale, sigma2)
    coef, cov_unit = _gls_core(D, y, F)
    cov = cov_unit * s2
    if not res.success:
        logger.warning("feasible GLS optimizer stopped without convergence after %d evaluations", res.nfev)
    method = "GLS_vecchia" if approx == "vecchia" else "GLS_profile"
    return FitResult(
        method, coef[0], np.sqrt(cov[0, 0]), cov_params=(gamma2, scale, sigma2), coef=coef,
        diagnostics={
            "loglik": float(ll), "nfev": int(res.nfev), "converged": bool(res.success),
            "kernel": spec, "approx": approx, "neighbors": neighbors, "model_cov": cov,
        },
    )


def fit_gls_vecchia(X, y, L, spec, m=15, intercept=True):
    """GLS under a nearest-neighbour approximate precision (coordinate ordering)."""
    X, y = check_xy(X, y)
    L = check_locations(L, X.shape[0])
    F = vecchia_factor(spec, L.coords, m)
    res = fit_gls_known(X, y, F, intercept, method="GLS_vecchia")
    res.cov_params = (spec.variance, spec.scale, spec.nugget)
    res.diagnostics.update(kernel=spec, neighbors=m, approx="vecchia")
    return res


def fit_gp_ridge(X, y, F, tau2=1e6, intercept=True):
    """Posterior mean of beta under a N(0, tau2 I) prior and the marginal GP
    likelihood: ``(X^T inv(Sigma) X + I / tau2)^{-1} X^T inv(Sigma) y``."""
    if not tau2 > 0:
        raise ValueError("tau2 must be positive")
    X, y = check_xy(X, y)
    D = design(X, intercept)
    A = np.atleast_2d(quad_form(F, D, D)) + np.eye(D.shape[1]) / tau2
    b = np.atleast_1d(quad_form(F, D, y))
    cov = np.linalg.inv(A)
    coef = np.linalg.solve(A, b)
    return FitResult("GP_ridge", coef[0], np.sqrt(cov[0, 0]), coef=coef, diagnostics={"tau2": tau2})


def _projected_norm_ratio(X, B):
    """Smallest singular value of ``X`` after removing ``col(B)``, over ``||X||``."""
    X = np.asarray(X, dtype=float).reshape(B.shape[0], -1)
    Q, _ = np.linalg.qr(B)
    Xp = X - Q @ (Q.T @ X)
    smin = np.linalg.svd(Xp, compute_uv=False).min()
    return float(smin / max(np.linalg.norm(X), 1e-300)), float(np.linalg.norm(Xp))


def fit_spline_plm(X, y, basis, mode="gcv_penalty", lambda_grid=None, method=None):
    """Joint fit of ``y`` on the exposure and a spline basis.

    Only the basis block is penalized.  The SE comes from
    ``scale * (D^T D + lam S)^{-1}`` with ``scale = rss / (n - edf)``, which is
    the ordinary linear-model SE when ``mode="no_penalty"``.
    """
    X, y = check_xy(X, y)
    n, p = X.shape
    D = np.hstack([X, basis.B])
    S = np.zeros((D.shape[1], D.shape[1]))
    S[p:, p:] = basis.penalty
    solver = PenalizedLeastSquares(D, S)
    if mode == "no_penalty":
        if not solver.full_rank:
            raise np.linalg.LinAlgError("exposure plus basis design is rank deficient")
        fit = solver.fit(y, 0.0)
        name = method or "GAM_fx"
    elif mode == "gcv_penalty":
        grid = default_lambda_grid(n) if lambda_grid is None else lambda_grid
        _, fit = select_lambda_gcv(basis, y, grid, solver=solver)
        name = method or "GAM"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if fit.hat_trace >= n:
        raise np.linalg.LinAlgError("no residual degrees of freedom")
    scale = fit.scale
    se = np.sqrt(scale * fit.cov_unscaled[0, 0])
    return FitResult(
        name, fit.coefficients[0], se, coef=fit.coefficients,
        diagnostics={"lambda": fit.lam, "edf": fit.hat_trace, "sigma2": scale, "rss": fit.rss},
    )


def fit_spatial_plus(X, y, basis, lambda_grid=None, tol=1e-8):
    """Two-stage fit: residualize the exposure on the basis (GCV penalty), then
    regress ``y`` on the residual exposure plus the basis."""
    X, y = check_xy(X, y)
    if X.shape[1] != 1:
        raise ValueError("Spatial+ is implemented for a single exposure")
    ratio, _ = _projected_norm_ratio(X, basis.B)
    if ratio < tol:
        raise IdentifiabilityError("exposure lies in the span of the spatial basis")
    grid = default_lambda_grid(X.shape[0]) if lambda_grid is None else lambda_grid
    lam1, stage1 = select_lambda_gcv(basis, X[:, 0], grid)
    x_res = X[:, 0] - stage1.fitted
    if np.linalg.norm(x_res) <= tol * np.linalg.norm(X):
        raise IdentifiabilityError("residualized exposure is numerically zero")
    res = fit_spline_plm(x_res, y, basis, "gcv_penalty", grid, method="SpatialPlus")
    res.diagnostics.update(stage1_lambda=lam1, stage1_edf=stage1.hat_trace)
    return res


def fit_grouped_re(X, y, groups, intercept=True):
    """GLS under independent group random effects,
    ``Sigma = sigma2 I + v2 * blockones``, with ``v2 / sigma2`` by maximum likelihood."""
    X, y = check_xy(X, y)
    n = X.shape[0]
    groups = check_groups(groups, n)
    D = design(X, intercept)

    def negll(log_rho):
        rho = 0.0 if log_rho is None else float(np.exp(log_rho))
        return -_concentrated(D, y, CompoundSymmetryFactor(groups, 1.0, rho))[0]

    # the profile likelihood in the ratio can be bimodal (between- vs within-group
    # information), so scan a coarse grid before refining the best cell
    grid = np.arange(-20.0, 12.0 + 1e-9, 0.5)
    vals = np.array([negll(v) for v in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(negll, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    best_x, best_f = (res.x, res.fun) if res.fun <= vals[i] else (grid[i], vals[i])
    rho = float(np.exp(best_x))
    if negll(None) <= best_f:
        rho = 0.0
    F = CompoundSymmetryFactor(groups, 1.0, rho)
    ll, _, s2 = _concentrated(D, y, F)
    coef, cov_unit = _gls_core(D, y, F)
    cov = cov_unit * s2
    return FitResult(
        "GroupedRE", coef[0], np.sqrt(cov[0, 0]), cov_params=(s2 * rho, None, s2), coef=coef,
        diagnostics={"loglik": float(ll), "ratio": rho, "model_cov": cov},
    )
