"""Data-generating processes: fixed, random, clustered-linear and
eigenfunction-based confounding."""

from dataclasses import dataclass, field
import logging

import numpy as np

from .geometry import (
    LocationSet,
    fixed_grid_locations,
    sample_gaussian_line,
    sample_uniform_square,
)
from .kernels import KernelSpec, covariance_matrix
from .linalg import NotPositiveDefiniteError, spd_factor, vecchia_factor
from .mercer import hermite_eigensystem
from .smoothers import default_lambda_grid, select_lambda_gcv, thinplate_basis

__all__ = [
    "DENSE_N_CAP",
    "SimulatedDataset",
    "ConfounderSurface",
    "FixedConfounderConfig",
    "EigenScenarioConfig",
    "simulate_gp",
    "simulate_confounder_surface",
    "gen_fixed_confounder",
    "gen_random_confounder",
    "gen_clustered_linear",
    "gen_eigen_scenario",
]

logger = logging.getLogger(__name__)

DENSE_N_CAP = 4000


@dataclass(frozen=True, eq=False)
class SimulatedDataset:
    """One simulated draw with its ground truth.

    ``g_true`` and ``h_true`` are for the oracles only; estimators receive
    ``X``, ``Y`` and the locations (plus ``groups`` where relevant).
    """

    locations: LocationSet
    X: np.ndarray
    Y: np.ndarray
    beta_true: float
    g_true: np.ndarray
    h_true: np.ndarray | None
    scenario: str
    groups: np.ndarray | None = None
    eta: np.ndarray | None = None
    eps: np.ndarray | None = None

    @property
    def n(self):
        return self.X.shape[0]


@dataclass(frozen=True, eq=False)
class ConfounderSurface:
    """Locations plus the smoothed confounder ``Z`` and the basis that produced it."""

    locations: LocationSet
    Z: np.ndarray
    Z_raw: np.ndarray
    lam: float


@dataclass(frozen=True)
class FixedConfounderConfig:
    n: int = 2000
    lo: float = 0.0
    hi: float = 10.0
    gamma2: float = 1.0
    phi: float = 0.25
    smoother_rank: int = 200
    exposure_var: float = 1.0
    outcome_var: float = 1.0
    beta: float = 1.0
    lambda_grid: tuple = (1e-8, 1e4, 40)
    dense_cap: int = DENSE_N_CAP
    vecchia_neighbors: int = 15

    def __post_init__(self):
        if self.n < self.smoother_rank:
            raise ValueError(f"n={self.n} is below the smoother rank {self.smoother_rank}")
        if self.gamma2 <= 0 or self.phi <= 0:
            raise ValueError("gamma2 and phi must be positive")
        if self.exposure_var <= 0:
            raise ValueError("exposure noise variance must be positive: X would be a smooth function of space and beta is not identified")
        if self.outcome_var <= 0:
            raise ValueError("outcome noise variance must be positive")

    @property
    def kernel(self):
        return KernelSpec("spherical", self.gamma2, self.phi, 0.0)


@dataclass(frozen=True)
class EigenScenarioConfig:
    n: int = 3000
    sigma: float = 1.0
    ell: float = 1.0
    kmax: int = 5
    kappa2: float = 1.0 / 16
    sigma0_2: float = 1.0
    nugget: float = 2.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kappa2 <= 0:
            raise ValueError("kappa2 must be positive: without a non-smooth exposure component beta is not identified")
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        if self.sigma0_2 <= 0 or self.nugget <= 0:
            raise ValueError("variances must be positive")


def simulate_gp(spec, L, rng, dense_cap=DENSE_N_CAP, neighbors=15):
    """Zero-mean GP draw; exact dense factorization up to ``dense_cap`` points,
    nearest-neighbour coloring above it."""
    e = rng.normal(size=L.n)
    if L.n > dense_cap:
        return vecchia_factor(spec, L.coords, neighbors).color(e)
    S = covariance_matrix(spec, L)
    try:
        F = spd_factor(S)
    except NotPositiveDefiniteError:
        jitter = 1e-8 * (spec.variance + spec.nugget)
        logger.warning("GP covariance not positive definite; retrying with nugget +%g", jitter)
        S[np.diag_indices_from(S)] += jitter
        F = spd_factor(S)
    return F.color(e)


def simulate_confounder_surface(cfg, rng):
    """Draw locations and a GP surface, then smooth it with the rank-K thin-plate fit."""
    L = sample_uniform_square(cfg.n, cfg.lo, cfg.hi, rng.substream("locations"))
    Z_raw = simulate_gp(cfg.kernel, L, rng.substream("gp"), cfg.dense_cap, cfg.vecchia_neighbors)
    basis = thinplate_basis(L, cfg.smoother_rank)
    lo, hi, num = cfg.lambda_grid
    lam, fit = select_lambda_gcv(basis, Z_raw, default_lambda_grid(L.n, lo, hi, num))
    return ConfounderSurface(L, fit.fitted, Z_raw, lam)


def _plm_from_surface(cfg, surface, rng, scenario):
    n = surface.locations.n
    Z = surface.Z
    eta = rng.normal(0.0, np.sqrt(cfg.exposure_var), size=n)
    eps = rng.normal(0.0, np.sqrt(cfg.outcome_var), size=n)
    X = Z + eta
    Y = cfg.beta * X + Z + eps
    return SimulatedDataset(surface.locations, X, Y, cfg.beta, Z.copy(), Z.copy(), scenario, eta=eta, eps=eps)


def gen_fixed_confounder(cfg, rng, frozen_g=None):
    """Fixed-confounder draw.

    ``frozen_g`` is a :class:`ConfounderSurface` shared by all replications;
    when omitted one is simulated from ``rng.substream("confounder")``.
    """
    surface = frozen_g if frozen_g is not None else simulate_confounder_surface(cfg, rng.substream("confounder"))
    return _plm_from_surface(cfg, surface, rng.substream("noise"), "fixed_confounder")


def gen_random_confounder(cfg, rng, confounder_rng=None):
    """Random-confounder draw: locations and surface are redrawn every call.

    ``confounder_rng`` pins the surface stream (pairing with the fixed scenario).
    """
    surface = simulate_confounder_surface(cfg, confounder_rng or rng.substream("confounder"))
    return _plm_from_surface(cfg, surface, rng.substream("noise"), "random_confounder")


def gen_clustered_linear(m, k, rng, beta=1.0):
    """``s_ij = i``, ``Z = s / 10``, ``X ~ N(Z, 1)``, ``Y ~ N(beta X + Z, 1)``."""
    L = fixed_grid_locations(m, k)
    Z = L.coords[:, 0] / 10.0
    eta = rng.normal(size=L.n)
    eps = rng.normal(size=L.n)
    X = Z + eta
    Y = beta * X + Z + eps
    return SimulatedDataset(L, X, Y, float(beta), Z, Z.copy(), "clustered", groups=L.groups, eta=eta, eps=eps)


def gen_eigen_scenario(cfg, rng):
    """Gaussian locations, ``h`` and ``g`` built from the first ``kmax`` Hermite
    eigenfunctions with standard normal coefficients.

    Returns ``(dataset, eigensystem, c_g, c_h)``.
    """
    L = sample_gaussian_line(cfg.n, cfg.sigma, rng.substream("locations"))
    E = hermite_eigensystem(cfg.sigma, cfg.ell, cfg.kmax - 1, L)
    coef_rng = rng.substream("coefficients")
    c_g = coef_rng.normal(size=cfg.kmax)
    c_h = coef_rng.normal(size=cfg.kmax)
    h = E.Phi @ c_h
    g = E.Phi @ c_g
    noise = rng.substream("noise")
    eta = noise.normal(0.0, np.sqrt(cfg.kappa2), size=cfg.n)
    eps = noise.normal(0.0, np.sqrt(cfg.sigma0_2), size=cfg.n)
    X = h + eta
    Y = cfg.beta * X + g + eps
    data = SimulatedDataset(L, X, Y, cfg.beta, g, h, "eigen", eta=eta, eps=eps)
    return data, E, c_g, c_h
