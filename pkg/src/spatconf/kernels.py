"""Covariance families and covariance-matrix assembly."""

from dataclasses import dataclass

import numpy as np

from .geometry import distance_matrix

__all__ = [
    "FAMILIES",
    "KernelSpec",
    "TheoremKernelSpec",
    "kernel_eval",
    "covariance_matrix",
    "theorem_covariance",
]

FAMILIES = ("spherical", "exponential", "squared_exponential")


@dataclass(frozen=True)
class KernelSpec:
    """Stationary isotropic covariance plus nugget.

    ``scale`` is the inverse range ``phi`` for the spherical and exponential
    families and the lengthscale ``l`` for the squared exponential.
    """

    family: str
    variance: float = 1.0
    scale: float = 1.0
    nugget: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        # variance 0 is allowed as the pure-nugget degenerate case
        if self.variance < 0 or not np.isfinite(self.variance):
            raise ValueError("variance must be nonnegative")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.nugget < 0:
            raise ValueError("nugget must be nonnegative")

    def replace(self, **kw):
        params = dict(family=self.family, variance=self.variance, scale=self.scale, nugget=self.nugget)
        params.update(kw)
        return KernelSpec(**params)


@dataclass(frozen=True)
class TheoremKernelSpec:
    """Squared-exponential covariance with sample-size dependent bandwidth
    ``a_n = n ** (1 / (2 * alpha + d))``."""

    gamma: float
    sigma2: float
    alpha: float
    d: int
    n: int

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.sigma2 > 0:
            raise ValueError("a nonzero nugget is required")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def bandwidth(self):
        return float(self.n) ** (1.0 / (2.0 * self.alpha + self.d))


def kernel_eval(spec, d):
    """Covariance at distance(s) ``d``, without the nugget."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if spec.family == "spherical":
        u = spec.scale * d
        out = spec.variance * (1.0 - 1.5 * u + 0.5 * u**3)
        out = np.where(u <= 1.0, out, 0.0)
    elif spec.family == "exponential":
        out = spec.variance * np.exp(-spec.scale * d)
    else:
        out = spec.variance * np.exp(-(d**2) / (2.0 * spec.scale**2))
    return out if out.ndim else float(out)


def covariance_matrix(spec, L):
    """Dense covariance ``C + nugget * I`` on the locations."""
    S = kernel_eval(spec, distance_matrix(L))
    S[np.diag_indices_from(S)] += spec.nugget
    if not np.all(np.isfinite(S)):
        raise ValueError("covariance matrix has non-finite entries")
    return S


def theorem_covariance(spec, L):
    """``gamma^2 exp(-a_n |s_i - s_j|^2) + sigma^2 delta_ij``.

    Requires smoothness ``alpha > d / 2``; a TheoremKernelSpec alone only needs
    ``alpha > 0`` for the bandwidth to be defined.
    """
    if not spec.alpha > spec.d / 2:
        raise ValueError(f"smoothness alpha={spec.alpha} must exceed d/2={spec.d / 2}")
    D = distance_matrix(L)
    S = spec.gamma**2 * np.exp(-spec.bandwidth * D**2)
    S[np.diag_indices_from(S)] += spec.sigma2
    return S
