"""Factorizations of spatial covariance matrices.

Every factor type here exposes the same small surface used by the
estimators and oracles:

``whiten(v)``
    apply ``W`` with ``W.T @ W == inv(Sigma)``
``color(e)``
    apply ``W^{-1}``, so ``color(e)`` has covariance ``Sigma`` when ``e`` is
    white noise
``solve(v)``
    ``inv(Sigma) @ v``
``logdet``
    ``log det(Sigma)``
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

__all__ = [
    "RECONSTRUCTION_RTOL",
    "NotPositiveDefiniteError",
    "SpdFactor",
    "spd_factor",
    "quad_form",
    "VecchiaFactor",
    "vecchia_neighbors",
    "vecchia_factor",
    "CompoundSymmetryFactor",
]

RECONSTRUCTION_RTOL = 1e-8


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky failed; ``pivot`` is the 0-based index of the failing pivot."""

    def __init__(self, pivot):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (pivot {pivot} <= 0)")


@dataclass(frozen=True, eq=False)
class SpdFactor:
    lower: np.ndarray
    logdet: float

    @property
    def n(self):
        return self.lower.shape[0]

    def whiten(self, v):
        return sla.solve_triangular(self.lower, v, lower=True, check_finite=False)

    def color(self, e):
        return self.lower @ e

    def solve(self, v):
        return sla.cho_solve((self.lower, True), v, check_finite=False)


def spd_factor(S):
    """Cholesky factor ``L`` with ``L @ L.T == S``."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    L, info = sla.lapack.dpotrf(S, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"illegal argument to dpotrf ({info})")
    diag = np.diag(L)
    return SpdFactor(L, float(2.0 * np.sum(np.log(diag))))


def quad_form(F, u, v):
    """``u.T @ inv(Sigma) @ v`` through the factor's whitening map.

    ``u`` and ``v`` may be vectors or ``n x p`` matrices.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[0] != F.n or v.shape[0] != F.n:
        raise ValueError(f"dimension mismatch: factor is {F.n}, got {u.shape[0]} and {v.shape[0]}")
    wu = F.whiten(u)
    wv = wu if v is u else F.whiten(v)
    out = wu.T @ wv
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Nearest-neighbour (Vecchia) approximation


def vecchia_neighbors(coords, m):
    """Ordering by first coordinate and up to ``m`` nearest earlier neighbours.

    Returns ``(order, nbrs)`` where ``nbrs[i]`` lists positions (in the
    ordered sequence) of the neighbours of ordered point ``i``, padded with
    ``-1``.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    if m < 1:
        raise ValueError("neighbour count must be >= 1")
    keys = coords[:, ::-1].T  # lexsort uses the last key as primary
    order = np.lexsort(keys)
    xs = coords[order]
    m = min(m, max(n - 1, 1))
    nbrs = np.full((n, m), -1, dtype=np.intp)
    for i in range(1, n):
        d = np.sum((xs[:i] - xs[i]) ** 2, axis=1)
        if i <= m:
            sel = np.argsort(d, kind="stable")
        else:
            part = np.argpartition(d, m - 1)[:m]
            sel = part[np.argsort(d[part], kind="stable")]
        nbrs[i, : len(sel)] = sel
    return order, nbrs


class VecchiaFactor:
    """Sparse approximate precision ``A.T @ A`` from ordered conditioning.

    ``A`` is lower triangular in the chosen ordering; row ``i`` is
    ``(e_i - b_i) / sqrt(F_i)`` where ``b_i`` holds the kriging weights on the
    earlier neighbours and ``F_i`` the conditional variance.
    """

    def __init__(self, order, A, logdet):
        self.order = order
        self.A = A
        self.logdet = float(logdet)
        self.n = A.shape[0]

    def whiten(self, v):
        v = np.asarray(v, dtype=float)
        return self.A @ v[self.order]

    def color(self, e):
        e = np.asarray(e, dtype=float)
        x = spsolve_triangular(self.A, e, lower=True)
        out = np.empty_like(x)
        out[self.order] = x
        return out

    def solve(self, v):
        w = self.A.T @ self.whiten(v)
        out = np.empty_like(w)
        out[self.order] = w
        return out


def vecchia_factor(spec, coords, m=15, neighbors=None):
    """Build a :class:`VecchiaFactor` for ``spec`` on ``coords``.

    Pass a precomputed ``neighbors=(order, nbrs)`` to reuse the neighbour
    search across covariance parameters.
    """
    from .kernels import kernel_eval

    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    order, nbrs = neighbors if neighbors is not None else vecchia_neighbors(coords, m)
    n, m_eff = nbrs.shape
    xs = coords[order]
    valid = nbrs >= 0
    safe = np.where(valid, nbrs, 0)
    var0 = spec.variance + spec.nugget

    pts = xs[safe]  # n x m x d
    d_nn = np.sqrt(np.sum((pts[:, :, None, :] - pts[:, None, :, :]) ** 2, axis=-1))
    C_nn = kernel_eval(spec, d_nn)
    idx = np.arange(m_eff)
    C_nn[:, idx, idx] += spec.nugget
    d_in = np.sqrt(np.sum((pts - xs[:, None, :]) ** 2, axis=-1))
    c_in = kernel_eval(spec, d_in)

    # padded slots become an identity block with zero cross-covariance
    pair_valid = valid[:, :, None] & valid[:, None, :]
    C_nn = np.where(pair_valid, C_nn, 0.0)
    C_nn[:, idx, idx] = np.where(valid, C_nn[:, idx, idx], 1.0)
    c_in = np.where(valid, c_in, 0.0)

    b = np.linalg.solve(C_nn, c_in[:, :, None])[:, :, 0]
    F = var0 - np.sum(b * c_in, axis=1)
    if np.any(F <= 0):
        raise NotPositiveDefiniteError(int(np.argmax(F <= 0)))
    inv_sd = 1.0 / np.sqrt(F)

    rows = np.concatenate([np.arange(n), np.repeat(np.arange(n), m_eff)[valid.ravel()]])
    cols = np.concatenate([np.arange(n), nbrs.ravel()[valid.ravel()]])
    vals = np.concatenate([inv_sd, (-b * inv_sd[:, None]).ravel()[valid.ravel()]])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return VecchiaFactor(order, A, np.sum(np.log(F)))


# ---------------------------------------------------------------------------
# Grouped compound symmetry


class CompoundSymmetryFactor:
    """``Sigma = sigma2 * I + v2 * (block of ones per group)``.

    Whitening and coloring use the symmetric square roots of each block,
    ``sigma * (I + d J)`` and its inverse, so every operation is O(n).
    """

    def __init__(self, groups, sigma2, v2):
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if v2 < 0:
            raise ValueError("v2 must be nonnegative")
        groups = np.asarray(groups)
        self.n = groups.shape[0]
        self.sigma2 = float(sigma2)
        self.v2 = float(v2)
        _, self._inv, counts = np.unique(groups, return_inverse=True, return_counts=True)
        self._counts = counts
        rho = self.v2 / self.sigma2
        k = counts.astype(float)
        root = np.sqrt(1.0 + k * rho)
        self._c = (1.0 - 1.0 / root) / k  # whiten: (I - cJ) / sigma
        self._d = (root - 1.0) / k  # color: sigma (I + dJ)
        self.logdet = float(self.n * np.log(self.sigma2) + np.sum(np.log1p(k * rho)))

    def _group_sums(self, v):
        v2d = v.reshape(self.n, -1)
        sums = np.zeros((self._counts.shape[0], v2d.shape[1]))
        np.add.at(sums, self._inv, v2d)
        return sums

    def whiten(self, v):
        v = np.asarray(v, dtype=float)
        sums = self._group_sums(v)
        out = v.reshape(self.n, -1) - (self._c[:, None] * sums)[self._inv]
        return (out / np.sqrt(self.sigma2)).reshape(v.shape)

    def color(self, e):
        e = np.asarray(e, dtype=float)
        sums = self._group_sums(e)
        out = e.reshape(self.n, -1) + (self._d[:, None] * sums)[self._inv]
        return (out * np.sqrt(self.sigma2)).reshape(e.shape)

    def solve(self, v):
        return self.whiten(self.whiten(v))

    def dense(self):
        same = self._inv[:, None] == self._inv[None, :]
        return self.sigma2 * np.eye(self.n) + self.v2 * same
