"""Hermite eigensystem of the squared-exponential kernel under a Gaussian
input density, and the truncated Mercer approximation of ``inv(Sigma)``."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "K_MAX_CAP",
    "EigenSystem",
    "hermite_constants",
    "hermite_polynomials",
    "hermite_eigensystem",
    "mercer_sigma_inverse_action",
    "predicted_gls_bias",
]

K_MAX_CAP = 10


@dataclass(frozen=True, eq=False)
class EigenSystem:
    a: float
    b: float
    c: float
    A: float
    B: float
    eigenvalues: np.ndarray
    Phi: np.ndarray
    normalization: np.ndarray

    @property
    def n(self):
        return self.Phi.shape[0]

    @property
    def k_max(self):
        return self.Phi.shape[1] - 1


def hermite_constants(sigma, l):
    """Return ``(a, b, c, A, B)`` for location sd ``sigma`` and lengthscale ``l``."""
    a = 1.0 / (4.0 * sigma**2)
    b = 1.0 / (2.0 * l**2)
    c = np.sqrt(a**2 + 2.0 * a * b)
    A = a + b + c
    return a, b, c, A, b / A


def hermite_polynomials(x, k_max):
    """Physicists' Hermite polynomials ``H_0..H_kmax`` at ``x`` (columns)."""
    x = np.asarray(x, dtype=float)
    H = np.empty(x.shape + (k_max + 1,))
    H[..., 0] = 1.0
    if k_max >= 1:
        H[..., 1] = 2.0 * x
    for k in range(1, k_max):
        H[..., k + 1] = 2.0 * x * H[..., k] - 2.0 * k * H[..., k - 1]
    return H


def hermite_eigensystem(sigma, l, k_max, L, rtol=1e-8):
    """Analytic eigenvalues and empirically normalized eigenfunctions.

    Eigenfunction ``k`` is ``exp(-(c - a) x^2) H_k(sqrt(2c) x)``, rescaled so its
    mean square over the sampled locations is one.
    """
    if L.kind != "gaussian_line" or L.dim != 1:
        raise ValueError("the Hermite eigensystem needs locations from a Gaussian line density")
    if abs(L.density[1] - sigma) > rtol * max(1.0, sigma):
        raise ValueError(f"location sd {L.density[1]} does not match sigma={sigma}")
    if not 0 <= k_max <= K_MAX_CAP:
        raise ValueError(f"k_max must lie in [0, {K_MAX_CAP}]")
    a, b, c, A, B = hermite_constants(sigma, l)
    lam = np.sqrt(2.0 * a / A) * B ** np.arange(k_max + 1)
    x = L.coords[:, 0]
    raw = np.exp(-(c - a) * x**2)[:, None] * hermite_polynomials(np.sqrt(2.0 * c) * x, k_max)
    norm = np.sqrt(np.mean(raw**2, axis=0))
    return EigenSystem(a, b, c, A, B, lam, raw / norm, norm)


def mercer_sigma_inverse_action(E, sigma2, v, eigenvalues=None):
    """``(1/n) Phi (D + sigma2 I)^{-1} Phi^T v`` with ``D = diag(n * lambda_k)``.

    Only the first ``k_max + 1`` terms are kept, so the result is the action
    of the truncated expansion.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] != E.n:
        raise ValueError("v does not match the eigensystem locations")
    lam = E.eigenvalues if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
    n = E.n
    w = (E.Phi.T @ v) / (n * lam + sigma2)[:, None] if v.ndim == 2 else (E.Phi.T @ v) / (n * lam + sigma2)
    return E.Phi @ w / n


def predicted_gls_bias(c_g, c_h, E, sigma0_2, denom, n):
    """Eigen-expansion bias: ``sum_k c_g c_h / (n lambda_k + sigma0_2)`` over ``denom``.

    ``denom`` is ``X^T inv(Sigma) X / n``.
    """
    c_g = np.asarray(c_g, dtype=float)
    c_h = np.asarray(c_h, dtype=float)
    if c_g.shape != c_h.shape:
        raise ValueError("coefficient vectors must have equal length")
    if c_g.shape[0] > E.eigenvalues.shape[0]:
        raise ValueError("more coefficients than eigenfunctions")
    if not denom > 0:
        raise ValueError("denominator must be positive")
    lam = E.eigenvalues[: c_g.shape[0]]
    return float(np.sum(c_g * c_h / (n * lam + sigma0_2)) / denom)
