"""Low-rank thin-plate regression splines with GCV-selected penalty."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SplineBasis",
    "PenalizedFit",
    "PenalizedLeastSquares",
    "farthest_point_knots",
    "thinplate_basis",
    "penalized_fit",
    "gcv_score",
    "default_lambda_grid",
    "select_lambda_gcv",
]


@dataclass(frozen=True, eq=False)
class SplineBasis:
    """Design ``B`` = [intercept, coordinates, radial terms] and its penalty."""

    B: np.ndarray
    knots: np.ndarray
    penalty: np.ndarray
    n_poly: int

    @property
    def n(self):
        return self.B.shape[0]

    @property
    def rank(self):
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class PenalizedFit:
    coefficients: np.ndarray
    fitted: np.ndarray
    hat_trace: float
    rss: float
    lam: float = 0.0
    cov_unscaled: np.ndarray | None = None

    @property
    def n(self):
        return self.fitted.shape[0]

    @property
    def gcv(self):
        return gcv_score(self.rss, self.n, self.hat_trace)

    @property
    def scale(self):
        """Residual variance ``rss / (n - edf)``."""
        return self.rss / (self.n - self.hat_trace)


def _radial(r, dim):
    if dim == 1:
        return r**3
    with np.errstate(divide="ignore", invalid="ignore"):
        out = r**2 * np.log(r)
    return np.where(r > 0, out, 0.0)


def farthest_point_knots(coords, k):
    """Deterministic farthest-point traversal starting from the first point."""
    coords = np.asarray(coords, dtype=float)
    idx = np.empty(k, dtype=np.intp)
    idx[0] = 0
    dmin = np.sum((coords - coords[0]) ** 2, axis=1)
    for j in range(1, k):
        idx[j] = int(np.argmax(dmin))
        dmin = np.minimum(dmin, np.sum((coords - coords[idx[j]]) ** 2, axis=1))
    return coords[idx]


def thinplate_basis(L, K):
    """Rank-``K`` thin-plate basis on a LocationSet.

    Columns are an intercept, the ``d`` coordinates, and ``K - d - 1`` radial
    functions (``r^2 log r`` in 2-D, ``|r|^3`` in 1-D) centred at knots picked
    by farthest-point traversal.  The radial block is penalized by the
    absolute value of the knot Gram matrix, rescaled so the penalty and
    ``B_r^T B_r / n`` have equal trace; the polynomial block is unpenalized.
    """
    coords = L.coords
    n, d = coords.shape
    if K < d + 2:
        raise ValueError(f"rank K={K} must be at least d + 2 = {d + 2}")
    if K > n:
        raise ValueError(f"rank K={K} exceeds the number of points n={n}")
    n_poly = d + 1
    knots = farthest_point_knots(coords, K - n_poly)
    r = np.sqrt(np.sum((coords[:, None, :] - knots[None, :, :]) ** 2, axis=-1))
    radial = _radial(r, d)
    B = np.hstack([np.ones((n, 1)), coords, radial])

    rk = np.sqrt(np.sum((knots[:, None, :] - knots[None, :, :]) ** 2, axis=-1))
    w, V = np.linalg.eigh(_radial(rk, d))
    omega = (V * np.abs(w)) @ V.T
    if np.trace(omega) <= 0:  # a single knot has a zero Gram matrix; fall back to a ridge
        omega = np.eye(omega.shape[0])
    omega *= max(np.sum(radial**2) / n, 1e-300) / np.trace(omega)
    P = np.zeros((K, K))
    P[n_poly:, n_poly:] = (omega + omega.T) / 2
    return SplineBasis(B, knots, P, n_poly)


def gcv_score(rss, n, hat_trace):
    """``n * rss / (n - tr(H))^2``."""
    if hat_trace >= n:
        return np.inf
    return n * rss / (n - hat_trace) ** 2


def default_lambda_grid(n, lo=1e-8, hi=1e4, num=40):
    return np.logspace(np.log10(lo), np.log10(hi), int(num)) * n


class PenalizedLeastSquares:
    """Solve ``min ||y - D c||^2 + lam c^T S c`` for many ``lam`` at once.

    With ``D = QR`` and ``R^{-T} S R^{-1} = U diag(s) U^T`` every quantity is a
    diagonal rescaling by ``1 / (1 + lam s)`` (Demmler-Reinsch form).
    """

    def __init__(self, D, S, rcond=1e-10):
        D = np.asarray(D, dtype=float)
        S = np.asarray(S, dtype=float)
        self.D = D
        self.S = S
        self.n, self.p = D.shape
        Q, R = np.linalg.qr(D)
        dg = np.abs(np.diag(R))
        self.full_rank = self.p <= self.n and dg.min() > rcond * dg.max()
        if self.full_rank:
            Rinv = sla.solve_triangular(R, np.eye(self.p))
            M = Rinv.T @ S @ Rinv
            s, U = np.linalg.eigh((M + M.T) / 2)
            self._s = np.clip(s, 0.0, None)
            self._Q = Q
            self._U = U
            self._RinvU = Rinv @ U

    def fit(self, y, lam):
        y = np.asarray(y, dtype=float)
        if self.full_rank:
            shrink = 1.0 / (1.0 + lam * self._s)
            z = self._U.T @ (self._Q.T @ y)
            coef = self._RinvU @ (shrink * z)
            fitted = self.D @ coef
            hat_trace = float(np.sum(shrink))
            cov = (self._RinvU * shrink) @ self._RinvU.T
        else:
            if lam <= 0:
                raise np.linalg.LinAlgError("singular normal equations: rank-deficient design with zero penalty")
            A = self.D.T @ self.D + lam * self.S
            try:
                cov = np.linalg.inv(A)
            except np.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError("singular penalized normal equations") from exc
            coef = cov @ (self.D.T @ y)
            fitted = self.D @ coef
            hat_trace = float(np.sum(cov * (self.D.T @ self.D)))
        resid = y - fitted
        return PenalizedFit(coef, fitted, hat_trace, float(resid @ resid), float(lam), cov)

    def gcv_path(self, y, grid):
        """GCV score at each grid value (vectorized in the full-rank case)."""
        if not self.full_rank:
            return np.array([self.fit(y, lam).gcv for lam in grid])
        z = self._U.T @ (self._Q.T @ y)
        tail = float(y @ y - z @ z)  # component of y outside col(D)
        grid = np.asarray(grid, dtype=float)
        shrink = 1.0 / (1.0 + grid[:, None] * self._s[None, :])
        rss = tail + np.sum(((1.0 - shrink) * z[None, :]) ** 2, axis=1)
        tr = shrink.sum(axis=1)
        with np.errstate(divide="ignore"):
            return np.where(tr < self.n, self.n * rss / (self.n - tr) ** 2, np.inf)


def penalized_fit(basis, y, lam):
    """Penalized least-squares fit of ``y`` on a spline basis."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] != basis.n:
        raise ValueError("y does not match the basis")
    if lam < 0:
        raise ValueError("penalty must be nonnegative")
    return PenalizedLeastSquares(basis.B, basis.penalty).fit(y, lam)


def select_lambda_gcv(basis, y, grid=None, solver=None):
    """Grid search for the GCV-minimizing penalty; ties go to the larger value.

    ``solver`` lets callers pass a prepared :class:`PenalizedLeastSquares`
    (e.g. on an augmented design).
    """
    y = np.asarray(y, dtype=float)
    solver = solver or PenalizedLeastSquares(basis.B, basis.penalty)
    grid = default_lambda_grid(solver.n) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    scores = solver.gcv_path(y, grid)
    if not np.any(np.isfinite(scores)):
        raise ValueError("GCV undefined: hat trace equals n at every grid point")
    best = np.nanmin(scores)
    # ties are judged on the scale of the data variance; prefer the largest penalty
    tol = 1e-12 * max(abs(best), float(y @ y) / y.shape[0], 1e-300)
    tied = np.flatnonzero(scores <= best + tol)
    lam = float(grid[tied[np.argmax(grid[tied])]])
    return lam, solver.fit(y, lam)
