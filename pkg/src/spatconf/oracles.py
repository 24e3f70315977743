"""Truth-based bias functionals and the lemma diagnostics.

These functions take ground truth (``g_true``, ``h_true``, realized noise)
and are only meaningful on simulated data.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import quad_form
from .smoothers import SplineBasis

__all__ = [
    "BiasReport",
    "exact_gls_bias",
    "ols_asymptotic_bias",
    "cross_term_diag",
    "quadform_diag",
    "quadform_lower_bound",
    "identifiability_check",
    "gls_bias_decomposition",
]


@dataclass
class BiasReport:
    exact_bias: float
    predicted_bias: float | None = None
    ols_asymptotic_bias: float | None = None
    components: dict = field(default_factory=dict)

    def recombine(self):
        c = self.components
        num = c["h_g"] + c["eta_g"] + c["x_eps"]
        den = c["h_h"] + c["eta_eta"] + 2.0 * c["h_eta"]
        return num / den


def exact_gls_bias(X, F, g_true):
    """Conditional bias of GLS (no intercept): ``X^T inv(S) g / X^T inv(S) X``."""
    den = quad_form(F, X, X)
    if not den > 0:
        raise ValueError("X^T inv(Sigma) X is not positive")
    return quad_form(F, X, g_true) / den


def ols_asymptotic_bias(X, g_true):
    """Plug-in ``cov(X, g) / var(X)`` from sample moments."""
    X = np.asarray(X, dtype=float)
    g = np.asarray(g_true, dtype=float)
    xc = X - X.mean()
    var = float(xc @ xc)
    if var <= 0:
        raise ValueError("exposure has zero variance")
    return float(xc @ (g - g.mean())) / var


def cross_term_diag(h_true, F, noise):
    """``(1/n) h^T inv(Sigma) eps``."""
    h = np.asarray(h_true, dtype=float)
    if h.shape != np.shape(noise):
        raise ValueError("h and noise must have the same shape")
    return quad_form(F, h, noise) / h.shape[0]


def quadform_diag(eta, F, var_eta):
    """``(1/n) eta^T inv(Sigma) eta`` for i.i.d. ``eta`` with variance ``var_eta``."""
    if not var_eta > 0:
        raise ValueError("var_eta must be positive")
    eta = np.asarray(eta, dtype=float)
    return quad_form(F, eta, eta) / eta.shape[0]


def quadform_lower_bound(var_eta, gamma2, sigma2, slack=0.9):
    """``slack * var_eta / (gamma2 + sigma2)``; Jensen gives ``tr(inv(S))/n >= n/tr(S)``."""
    return slack * var_eta / (gamma2 + sigma2)


def identifiability_check(X, basis, tol=1e-8):
    """Classify the exposure as ``"identified"`` or ``"degenerate"``.

    Uses the smallest singular value of ``X`` after projecting out the
    basis span, relative to ``||X||``.  Returns ``(status, residual_norm)``.
    """
    B = basis.B if isinstance(basis, SplineBasis) else np.asarray(basis, dtype=float)
    X = np.asarray(X, dtype=float).reshape(B.shape[0], -1)
    Q, _ = np.linalg.qr(B)
    Xp = X - Q @ (Q.T @ X)
    smin = np.linalg.svd(Xp, compute_uv=False).min()
    status = "degenerate" if smin < tol * np.linalg.norm(X) else "identified"
    return status, float(np.linalg.norm(Xp))


def gls_bias_decomposition(data, F, predicted_bias=None):
    """Split ``beta_GLS - beta`` into the numerator/denominator terms of the
    expansion in ``h``, ``eta``, ``g`` and ``eps`` (all scaled by ``1/n``)."""
    n = data.n
    h, eta, g, eps = data.h_true, data.eta, data.g_true, data.eps
    X = data.X
    comp = {
        "h_g": quad_form(F, h, g) / n,
        "eta_g": quad_form(F, eta, g) / n,
        "x_eps": quad_form(F, X, eps) / n,
        "h_h": quad_form(F, h, h) / n,
        "eta_eta": quad_form(F, eta, eta) / n,
        "h_eta": quad_form(F, h, eta) / n,
    }
    beta_gls = quad_form(F, X, data.Y) / quad_form(F, X, X)
    return BiasReport(
        exact_bias=beta_gls - data.beta_true,
        predicted_bias=predicted_bias,
        ols_asymptotic_bias=ols_asymptotic_bias(X, g),
        components=comp,
    )
