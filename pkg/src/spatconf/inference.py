"""Confidence intervals: analytic, parametric spatial bootstrap, subsampling."""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._validation import check_locations, check_xy, design
from .estimators import _gls_core
from .kernels import KernelSpec, covariance_matrix
from .linalg import spd_factor, vecchia_factor

__all__ = [
    "CI_METHODS",
    "IntervalSpec",
    "analytic_ci",
    "percentile_interval",
    "parametric_spatial_bootstrap",
    "subsample_se",
]

CI_METHODS = ("analytic", "parametric_bootstrap", "subsample")


@dataclass(frozen=True)
class IntervalSpec:
    method: str = "analytic"
    level: float = 0.95
    replicates: int = 200

    def __post_init__(self):
        if self.method not in CI_METHODS:
            raise ValueError(f"unknown interval method {self.method!r}")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if self.method != "analytic" and self.replicates < 50:
            raise ValueError("resampling intervals need at least 50 replicates")


def _z(level):
    return stats.norm.ppf(0.5 + level / 2.0)


def analytic_ci(fit, level=0.95):
    """Normal-theory interval ``beta_hat +- z * se``."""
    if fit.se is None:
        raise ValueError(f"{fit.method} fit carries no analytic standard error")
    z = _z(level)
    return (fit.beta_hat - z * fit.se, fit.beta_hat + z * fit.se)


def percentile_interval(estimates, level=0.95):
    """Percentile interval whose endpoints are order statistics of ``estimates``."""
    est = np.sort(np.asarray(estimates, dtype=float))
    alpha = (1.0 - level) / 2.0
    lo = np.quantile(est, alpha, method="inverted_cdf")
    hi = np.quantile(est, 1.0 - alpha, method="inverted_cdf")
    return float(lo), float(hi)


def parametric_spatial_bootstrap(X, y, L, fit, B=200, rng=None, level=0.95, intercept=True,
                                 normal=False):
    """Decorrelate-resample-recorrelate bootstrap under a fitted covariance.

    Residuals from the fitted mean are whitened with the factor of the
    fitted covariance, centred, resampled with replacement and coloured
    again; GLS under the fitted covariance is re-run on each synthetic
    response.  Returns ``(se, (lo, hi))``: the replicate SD and the
    percentile interval (normal-theory when ``normal=True``).
    """
    X, y = check_xy(X, y)
    L = check_locations(L, X.shape[0])
    if fit.cov_params is None:
        raise ValueError("the fit does not carry covariance parameters")
    spec = fit.diagnostics.get("kernel")
    if spec is None:
        gamma2, scale, sigma2 = fit.cov_params
        spec = KernelSpec(fit.diagnostics.get("family", "exponential"), gamma2, scale, sigma2)
    D = design(X, intercept)
    if fit.diagnostics.get("approx") == "vecchia":
        F = vecchia_factor(spec, L.coords, fit.diagnostics.get("neighbors", 15))
    else:
        F = spd_factor(covariance_matrix(spec, L))
    coef = np.asarray(fit.coef, dtype=float)
    mean = D @ coef
    e = F.whiten(y - mean)
    e = e - e.mean()
    n = y.shape[0]
    idx = rng.integers(0, n, size=(B, n))
    Ystar = mean[:, None] + F.color(e[idx].T)
    # fitted covariance held fixed: one solve for all replicates
    coefs, _ = _gls_core(D, Ystar, F)
    est = np.atleast_2d(coefs)[0]
    se = float(np.std(est, ddof=1))
    if normal:
        z = _z(level)
        return se, (fit.beta_hat - z * se, fit.beta_hat + z * se)
    return se, percentile_interval(est, level)


def subsample_se(estimator, X, y, fraction, reps, rng, groups=None, level=0.95,
                 full_estimate=None, **context):
    """Subsampling standard error with root-n rescaling.

    ``estimator(X, y, idx=..., **context)`` must return a point estimate for
    the rows ``idx``.  When ``groups`` is given whole groups are drawn, so
    each subsample keeps its within-group structure.  The SE is the SD of
    the subsample estimates times ``sqrt(b / n)``; the interval is centred at
    ``full_estimate`` (computed on all rows when omitted).
    """
    X, y = check_xy(X, y)
    n = X.shape[0]
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    if groups is not None:
        labels, inv = np.unique(np.asarray(groups), return_inverse=True)
        n_draw = max(1, int(round(fraction * labels.size)))
        members = [np.flatnonzero(inv == g) for g in range(labels.size)]
    else:
        n_draw = int(round(fraction * n))
    if round(fraction * n) < 30:
        raise ValueError(f"subsample of size {fraction * n:.0f} is too small (need >= 30)")
    estimates = np.empty(reps)
    sizes = np.empty(reps)
    for r in range(reps):
        if groups is None:
            idx = np.sort(rng.choice(n, size=n_draw, replace=False))
        else:
            pick = rng.choice(labels.size, size=n_draw, replace=False)
            idx = np.sort(np.concatenate([members[g] for g in pick]))
        sizes[r] = idx.size
        estimates[r] = estimator(X, y, idx=idx, **context)
    b = float(np.mean(sizes))
    se = float(np.std(estimates, ddof=1) * np.sqrt(b / n)) if reps > 1 else 0.0
    if full_estimate is None:
        full_estimate = estimator(X, y, idx=np.arange(n), **context)
    z = _z(level)
    return se, (full_estimate - z * se, full_estimate + z * se)
