import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatconf.dgp import FixedConfounderConfig, gen_fixed_confounder, simulate_confounder_surface
from spatconf.estimators import (
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
    gls_loglik,
)
from spatconf.geometry import sample_uniform_square
from spatconf.kernels import KernelSpec, covariance_matrix
from spatconf.linalg import spd_factor
from spatconf.rng import RngStream
from spatconf.smoothers import SplineBasis, thinplate_basis


def _spatial_data(n, spec, seed, beta=1.0):
    rng = RngStream(seed)
    L = sample_uniform_square(n, 0, 10, rng.substream("loc"))
    F = spd_factor(covariance_matrix(spec, L))
    X = rng.substream("x").normal(size=n)
    y = beta * X + F.color(rng.substream("e").normal(size=n))
    return L, X, y, F


# OLS

def test_ols_examples():
    assert fit_ols([-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], intercept=False).beta_hat == pytest.approx(2.0)
    x = np.array([-1.0, 1.0])
    assert fit_ols(x, x + 1.0, intercept=False).beta_hat == pytest.approx(1.0)


def test_ols_monte_carlo():
    g = RngStream(1)
    X = g.normal(size=2000)
    fit = fit_ols(X, 3 * X + g.normal(size=2000))
    assert abs(fit.beta_hat - 3) < 4 * fit.se
    lo, hi = fit.ci
    assert lo < fit.beta_hat < hi


def test_ols_rank_deficient():
    with pytest.raises(np.linalg.LinAlgError):
        fit_ols(np.ones(10), np.arange(10.0))


# RSR

@settings(max_examples=60, deadline=None)
@given(n=st.integers(20, 200), k=st.integers(0, 15), seed=st.integers(0, 2**32 - 1))
def test_rsr_point_estimate_is_ols(n, k, seed):
    g = np.random.default_rng(seed)
    X = g.normal(size=n)
    B = g.normal(size=(n, k))
    y = X + B @ g.normal(size=k) + g.normal(size=n)
    assert abs(fit_rsr(X, y, B).beta_hat - fit_ols(X, y).beta_hat) <= 1e-8


def test_rsr_empty_basis_equals_ols():
    g = RngStream(2)
    X, y = g.normal(size=50), g.normal(size=50)
    a, b = fit_rsr(X, y, np.zeros((50, 0))), fit_ols(X, y)
    assert a.beta_hat == b.beta_hat and a.se == pytest.approx(b.se, rel=1e-12)


def test_rsr_drops_collinear_columns():
    g = RngStream(3)
    X = g.normal(size=60)
    B = np.column_stack([X, np.ones(60), g.normal(size=60)])
    res = fit_rsr(X, g.normal(size=60), B)
    assert res.diagnostics["dropped_columns"] == 2


def test_rsr_se_not_larger_than_ols():
    surf = simulate_confounder_surface(FixedConfounderConfig(n=600, smoother_rank=60), RngStream(1).substream("c"))
    d = gen_fixed_confounder(FixedConfounderConfig(n=600, smoother_rank=60), RngStream(1, 1), surf)
    basis = thinplate_basis(d.locations, 60)
    assert fit_rsr(d.X, d.Y, basis).se <= fit_ols(d.X, d.Y).se


# GLS with known covariance

def test_gls_identity_equals_ols():
    g = RngStream(4)
    X, y = g.normal(size=30), g.normal(size=30)
    assert fit_gls_known(X, y, spd_factor(np.eye(30))).beta_hat == pytest.approx(fit_ols(X, y).beta_hat, abs=1e-12)


def test_gls_hand_example():
    F = spd_factor(np.diag([1.0, 4.0]))
    assert fit_gls_known([1.0, 2.0], [1.0, 2.0], F, intercept=False).beta_hat == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(0.01, 100.0))
def test_gls_scale_invariance(seed, c):
    g = np.random.default_rng(seed)
    n = 25
    A = g.normal(size=(n, n))
    S = A @ A.T + np.eye(n)
    X, y = g.normal(size=n), g.normal(size=n)
    a = fit_gls_known(X, y, spd_factor(S))
    b = fit_gls_known(X, y, spd_factor(c * S))
    assert a.beta_hat == pytest.approx(b.beta_hat, rel=1e-9, abs=1e-10)
    assert b.se == pytest.approx(np.sqrt(c) * a.se, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), sigma2=st.floats(0.05, 20.0), gamma2=st.floats(0.0, 10.0),
       sigma0_2=st.floats(0.05, 20.0))
def test_gls_nugget_variance_scaling_identity(seed, sigma2, gamma2, sigma0_2):
    g = np.random.default_rng(seed)
    n = 30
    L = sample_uniform_square(n, 0, 5, RngStream(int(seed % 1000)))
    X, y = g.normal(size=n), g.normal(size=n)
    a = fit_gls_known(X, y, spd_factor(covariance_matrix(KernelSpec("exponential", gamma2, 0.7, sigma2), L)))
    spec2 = KernelSpec("exponential", gamma2 * sigma0_2 / sigma2, 0.7, sigma0_2)
    b = fit_gls_known(X, y, spd_factor(covariance_matrix(spec2, L)))
    assert a.beta_hat == pytest.approx(b.beta_hat, abs=1e-10)


def test_gls_singular_design():
    with pytest.raises(np.linalg.LinAlgError):
        fit_gls_known(np.zeros(5), np.ones(5), spd_factor(np.eye(5)), intercept=False)


# feasible GLS

@pytest.mark.slow
def test_profile_range_recovered_within_factor_two():
    spec = KernelSpec("exponential", 1.0, 1.0, 0.5)
    phis = []
    for r in range(20):
        L, X, y, _ = _spatial_data(500, spec, 100 + r)
        phis.append(fit_gls_profile(X, y, L).cov_params[1])
    assert 0.5 <= np.median(phis) <= 2.0


def test_profile_optimum_beats_truth():
    spec = KernelSpec("exponential", 1.0, 1.0, 0.5)
    L, X, y, _ = _spatial_data(300, spec, 7)
    fit = fit_gls_profile(X, y, L)
    assert fit.diagnostics["loglik"] >= gls_loglik(X, y, L, spec) - 1e-8
    assert fit.diagnostics["loglik"] == pytest.approx(gls_loglik(X, y, L, fit.diagnostics["kernel"]), abs=1e-6)
    assert fit.method == "GLS_profile" and len(fit.cov_params) == 3


def test_profile_pure_noise_matches_ols():
    g = RngStream(9)
    L = sample_uniform_square(300, 0, 10, g.substream("loc"))
    X, y = g.normal(size=300), g.normal(size=300)
    fit, ols = fit_gls_profile(X, y, L), fit_ols(X, y)
    assert abs(fit.beta_hat - ols.beta_hat) <= 4 * ols.se


def test_profile_needs_30_points():
    with pytest.raises(ValueError):
        fit_gls_profile(np.arange(10.0), np.arange(10.0), np.arange(10.0))


def test_profile_vecchia_close_to_dense():
    spec = KernelSpec("exponential", 1.0, 1.0, 0.5)
    L, X, y, _ = _spatial_data(400, spec, 11)
    a = fit_gls_profile(X, y, L)
    b = fit_gls_profile(X, y, L, approx="vecchia")
    assert b.method == "GLS_vecchia"
    assert abs(a.beta_hat - b.beta_hat) < 0.25 * a.se


# Vecchia GLS

def test_vecchia_full_conditioning_matches_dense():
    spec = KernelSpec("exponential", 1.0, 0.8, 0.4)
    L, X, y, F = _spatial_data(150, spec, 12)
    a = fit_gls_vecchia(X, y, L, spec, m=149)
    assert a.beta_hat == pytest.approx(fit_gls_known(X, y, F).beta_hat, rel=1e-6)


def test_vecchia_pure_nugget_is_ols():
    spec = KernelSpec("exponential", 0.0, 0.8, 0.4)
    L, X, y, _ = _spatial_data(100, KernelSpec("exponential", 1.0, 0.8, 0.4), 13)
    assert fit_gls_vecchia(X, y, L, spec, m=5).beta_hat == pytest.approx(fit_ols(X, y).beta_hat, abs=1e-10)


@pytest.mark.slow
def test_vecchia_close_to_dense_on_confounded_data():
    surf = simulate_confounder_surface(FixedConfounderConfig(), RngStream(2).substream("c"))
    d = gen_fixed_confounder(FixedConfounderConfig(), RngStream(2, 1), surf)
    spec = KernelSpec("exponential", 1.0, 0.25, 1.0)
    dense = fit_gls_known(d.X, d.Y, spd_factor(covariance_matrix(spec, d.locations)))
    assert abs(fit_gls_vecchia(d.X, d.Y, d.locations, spec, m=15).beta_hat - dense.beta_hat) < 1e-2


# GP ridge

def test_gp_ridge_flat_prior_limit():
    spec = KernelSpec("exponential", 1.0, 0.8, 0.4)
    L, X, y, F = _spatial_data(100, spec, 14)
    a, b = fit_gp_ridge(X, y, F, tau2=1e12), fit_gls_known(X, y, F)
    assert a.beta_hat == pytest.approx(b.beta_hat, rel=1e-6)


def test_gp_ridge_scalar():
    assert fit_gp_ridge([1.0], [2.0], spd_factor(np.eye(1)), tau2=1.0, intercept=False).beta_hat == pytest.approx(1.0)


def test_gp_ridge_gap_shrinks_with_n():
    spec = KernelSpec("exponential", 1.0, 0.8, 0.4)
    gaps = []
    for n in (100, 400, 1600):
        L, X, y, F = _spatial_data(n, spec, 15)
        gaps.append(abs(fit_gp_ridge(X, y, F, tau2=1.0).beta_hat - fit_gls_known(X, y, F).beta_hat))
    assert gaps[0] > gaps[1] > gaps[2]


def test_gp_ridge_rejects_bad_tau():
    with pytest.raises(ValueError):
        fit_gp_ridge([1.0], [1.0], spd_factor(np.eye(1)), tau2=0.0)


# spline partially linear models

@pytest.fixture(scope="module")
def basis_setup():
    L = sample_uniform_square(400, 0, 10, RngStream(21))
    return L, thinplate_basis(L, 50)


def test_spline_exact_representation(basis_setup):
    L, basis = basis_setup
    g = basis.B @ RngStream(1).normal(size=50)
    X = g + RngStream(2).normal(size=400)
    res = fit_spline_plm(X, 2.0 * X + g, basis, "no_penalty")
    assert res.beta_hat == pytest.approx(2.0, abs=1e-8)
    assert res.method == "GAM_fx"


def test_spline_intercept_only_basis_is_ols():
    g = RngStream(3)
    X, y = g.normal(size=80), g.normal(size=80)
    basis = SplineBasis(np.ones((80, 1)), np.zeros((0, 1)), np.zeros((1, 1)), 1)
    for mode in ("no_penalty", "gcv_penalty"):
        res = fit_spline_plm(X, y, basis, mode)
        ols = fit_ols(X, y)
        assert res.beta_hat == pytest.approx(ols.beta_hat, abs=1e-10)
        assert res.se == pytest.approx(ols.se, rel=1e-8)


def test_spline_rank_deficient_no_penalty(basis_setup):
    L, basis = basis_setup
    with pytest.raises(np.linalg.LinAlgError):
        fit_spline_plm(basis.B[:, 5], RngStream(1).normal(size=400), basis, "no_penalty")


def test_spatial_plus_orthogonal_exposure(basis_setup):
    L, basis = basis_setup
    X = RngStream(4).normal(size=400)
    Q, _ = np.linalg.qr(basis.B)
    X -= Q @ (Q.T @ X)
    y = X + basis.B @ RngStream(5).normal(size=50) * 0.1 + RngStream(6).normal(size=400)
    a = fit_spatial_plus(X, y, basis)
    b = fit_spline_plm(X, y, basis, "gcv_penalty")
    assert a.beta_hat == pytest.approx(b.beta_hat, abs=1e-6)
    assert a.method == "SpatialPlus"


def test_spatial_plus_rejects_spatial_exposure(basis_setup):
    L, basis = basis_setup
    with pytest.raises(IdentifiabilityError):
        fit_spatial_plus(basis.B[:, 7], RngStream(1).normal(size=400), basis)


# grouped random effects

def test_grouped_singletons_equal_ols():
    g = RngStream(7)
    X, y = g.normal(size=40), g.normal(size=40)
    assert fit_grouped_re(X, y, np.arange(40)).beta_hat == pytest.approx(fit_ols(X, y).beta_hat, abs=1e-8)


def test_grouped_no_group_effect_equals_ols():
    g = RngStream(8)
    groups = np.repeat(np.arange(50), 4)
    X = g.normal(size=200)
    # construct y with negative within-group correlation so the ML ratio sits at zero
    y = X + g.normal(size=200)
    y = y - np.repeat(np.bincount(groups, y) / 4, 4) * 0.9
    res = fit_grouped_re(X, y, groups)
    assert res.diagnostics["ratio"] == 0.0
    assert res.beta_hat == pytest.approx(fit_ols(X, y).beta_hat, abs=1e-10)


def test_grouped_matches_dense_block_gls():
    g = RngStream(9)
    groups = np.repeat(np.arange(30), 5)
    u = np.repeat(g.normal(size=30), 5)
    X = g.normal(size=150)
    y = X + 2 * u + g.normal(size=150)
    res = fit_grouped_re(X, y, groups)
    s2, rho = res.cov_params[2], res.diagnostics["ratio"]
    S = s2 * (np.eye(150) + rho * (groups[:, None] == groups[None, :]))
    assert res.beta_hat == pytest.approx(fit_gls_known(X, y, spd_factor(S)).beta_hat, abs=1e-10)
    assert rho > 1.0


def test_grouped_single_group_rejected():
    with pytest.raises(ValueError):
        fit_grouped_re(np.arange(5.0), np.arange(5.0), np.zeros(5))


def test_fit_result_validation():
    with pytest.raises(ValueError):
        FitResult("LASSO", 1.0)
    fr = FitResult("OLS", 1.0, 0.5)
    assert fr.ci[0] < 1.0 < fr.ci[1]
