import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatconf.geometry import LocationSet, sample_uniform_square
from spatconf.kernels import KernelSpec, TheoremKernelSpec, covariance_matrix, kernel_eval, theorem_covariance
from spatconf.linalg import (
    CompoundSymmetryFactor,
    NotPositiveDefiniteError,
    RECONSTRUCTION_RTOL,
    quad_form,
    spd_factor,
    vecchia_factor,
)
from spatconf.rng import RngStream


def _line(x):
    return LocationSet(np.asarray(x, dtype=float), ("unknown",))


# kernel_eval

def test_spherical_values():
    k = KernelSpec("spherical", 1.0, 0.25)
    assert kernel_eval(k, 0.0) == 1.0
    assert kernel_eval(k, 4.0) == pytest.approx(0.0, abs=1e-15)
    assert kernel_eval(k, 2.0) == pytest.approx(0.3125)
    assert kernel_eval(k, 10.0) == 0.0


def test_exponential_value():
    assert kernel_eval(KernelSpec("exponential", 1.0, 0.25), 4.0) == pytest.approx(np.exp(-1), abs=1e-6)


def test_squared_exponential_value():
    assert kernel_eval(KernelSpec("squared_exponential", 2.0, 1.0), 1.0) == pytest.approx(2 * np.exp(-0.5))


def test_negative_distance_rejected():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec("exponential"), -1.0)


@pytest.mark.parametrize("family", ["spherical", "exponential", "squared_exponential"])
def test_kernel_monotone_and_bounded(family):
    spec = KernelSpec(family, 1.7, 0.25 if family != "squared_exponential" else 2.0)
    d = np.linspace(0, 3 / 0.25, 400)
    v = kernel_eval(spec, d)
    assert np.all(np.diff(v) <= 1e-15)
    assert np.all((v >= 0) & (v <= spec.variance))


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("matern")
    with pytest.raises(ValueError):
        KernelSpec("exponential", 1.0, 0.0)
    with pytest.raises(ValueError):
        KernelSpec("exponential", 1.0, 1.0, -0.1)


# covariance_matrix

def test_covariance_diagonal_constant():
    L = sample_uniform_square(30, 0, 10, RngStream(1))
    S = covariance_matrix(KernelSpec("spherical", 1.3, 0.25, 0.4), L)
    assert np.allclose(np.diag(S), 1.7)
    assert np.array_equal(S, S.T)


def test_covariance_pure_nugget():
    L = sample_uniform_square(10, 0, 10, RngStream(1))
    assert np.array_equal(covariance_matrix(KernelSpec("exponential", 0.0, 1.0, 0.7), L), 0.7 * np.eye(10))


def test_covariance_coincident_points():
    S = covariance_matrix(KernelSpec("exponential", 1.0, 1.0, 0.5), _line([2.0, 2.0]))
    assert np.allclose(S, [[1.5, 1.0], [1.0, 1.5]])


@pytest.mark.parametrize("family", ["spherical", "exponential", "squared_exponential"])
def test_min_eigenvalue_at_least_nugget(family):
    L = sample_uniform_square(150, 0, 10, RngStream(4))
    S = covariance_matrix(KernelSpec(family, 1.0, 0.25 if family != "squared_exponential" else 1.0, 0.3), L)
    assert np.linalg.eigvalsh(S).min() >= 0.3 - 1e-9


# theorem_covariance

def test_theorem_bandwidth():
    assert TheoremKernelSpec(1.0, 1.0, 1.0, 1, 1).bandwidth == 1.0
    assert TheoremKernelSpec(1.0, 1.0, 1.0, 2, 16).bandwidth == pytest.approx(2.0)


def test_theorem_rejects_low_smoothness():
    L = _line([0.0, 1.0])
    with pytest.raises(ValueError):
        theorem_covariance(TheoremKernelSpec(1.0, 1.0, 0.5, 1, 10), L)
    with pytest.raises(ValueError):
        theorem_covariance(TheoremKernelSpec(1.0, 1.0, 1.0, 2, 16), L)
    with pytest.raises(ValueError):
        TheoremKernelSpec(1.0, 0.0, 2.0, 1, 10)


def test_theorem_coincident_points():
    S = theorem_covariance(TheoremKernelSpec(1.5, 0.5, 1.0, 1, 10), _line([0.3, 0.3]))
    assert np.allclose(S, [[2.25 + 0.5, 2.25], [2.25, 2.25 + 0.5]])


# spd_factor / quad_form

def test_factor_identity():
    F = spd_factor(np.eye(3))
    assert np.allclose(F.lower, np.eye(3)) and F.logdet == 0.0


def test_factor_hand_example():
    F = spd_factor(np.array([[4.0, 2.0], [2.0, 5.0]]))
    assert np.allclose(F.lower, [[2, 0], [1, 2]])
    assert F.logdet == pytest.approx(np.log(16))


def test_factor_rejects_singular_with_pivot():
    S = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(NotPositiveDefiniteError) as info:
        spd_factor(S)
    assert info.value.pivot == 1


def test_factor_reconstruction():
    L = sample_uniform_square(120, 0, 10, RngStream(9))
    S = covariance_matrix(KernelSpec("exponential", 1.0, 0.5, 0.2), L)
    F = spd_factor(S)
    assert np.max(np.abs(F.lower @ F.lower.T - S)) <= RECONSTRUCTION_RTOL * np.max(np.abs(S))
    assert np.all(np.diag(F.lower) > 0)


def test_quad_form_examples():
    u = np.array([1.0, 2.0])
    assert quad_form(spd_factor(np.eye(2)), u, u) == pytest.approx(5.0)
    assert quad_form(spd_factor(np.diag([1.0, 4.0])), u, u) == pytest.approx(2.0)


def test_quad_form_dimension_mismatch():
    with pytest.raises(ValueError):
        quad_form(spd_factor(np.eye(2)), np.ones(2), np.ones(3))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 50), seed=st.integers(0, 2**32 - 1))
def test_quad_form_matches_inverse_and_is_symmetric(n, seed):
    g = np.random.default_rng(seed)
    A = g.normal(size=(n, n))
    S = A @ A.T + n * np.eye(n)
    F = spd_factor(S)
    u, v = g.normal(size=n), g.normal(size=n)
    exact = u @ np.linalg.solve(S, v)
    assert quad_form(F, u, v) == pytest.approx(exact, rel=1e-8, abs=1e-12)
    assert quad_form(F, u, v) == pytest.approx(quad_form(F, v, u), rel=1e-12, abs=1e-14)
    assert quad_form(F, u, u) > 0


# alternative factors

def test_vecchia_full_conditioning_is_exact():
    L = sample_uniform_square(80, 0, 10, RngStream(2))
    spec = KernelSpec("exponential", 1.0, 0.5, 0.3)
    S = covariance_matrix(spec, L)
    V = vecchia_factor(spec, L.coords, m=L.n - 1)
    D = spd_factor(S)
    u, v = RngStream(3).normal(size=(2, L.n))
    assert V.logdet == pytest.approx(D.logdet, rel=1e-8)
    assert quad_form(V, u, v) == pytest.approx(quad_form(D, u, v), rel=1e-8)
    assert np.allclose(V.color(V.whiten(u)), u)


def test_compound_symmetry_matches_dense():
    groups = np.repeat([3, 1, 2], [4, 2, 5])
    F = CompoundSymmetryFactor(groups, 0.7, 1.9)
    S = F.dense()
    expect = 0.7 * np.eye(11) + 1.9 * (groups[:, None] == groups[None, :])
    assert np.allclose(S, expect)
    D = spd_factor(S)
    u = RngStream(5).normal(size=11)
    assert F.logdet == pytest.approx(D.logdet)
    assert quad_form(F, u, u) == pytest.approx(quad_form(D, u, u))
    assert np.allclose(F.color(F.whiten(u)), u)
