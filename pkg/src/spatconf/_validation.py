"""Input validation helpers shared by the estimators."""

import numpy as np

from .geometry import LocationSet


def check_exposure(X, n=None):
    """Return the exposure as a float ``n x p`` array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"exposure must be 1-D or 2-D, got shape {X.shape}")
    if n is not None and X.shape[0] != n:
        raise ValueError(f"exposure has {X.shape[0]} rows, expected {n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("exposure contains non-finite values")
    return X


def check_response(y, n=None):
    y = np.asarray(y, dtype=float)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if y.ndim != 1:
        raise ValueError(f"response must be a vector, got shape {y.shape}")
    if n is not None and y.shape[0] != n:
        raise ValueError(f"response has {y.shape[0]} rows, expected {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    return y


def check_xy(X, y):
    X = check_exposure(X)
    return X, check_response(y, X.shape[0])


def check_locations(locations, n):
    if isinstance(locations, LocationSet):
        L = locations
    else:
        coords = np.asarray(locations, dtype=float)
        L = LocationSet(coords, ("unknown",))
    if L.n != n:
        raise ValueError(f"{L.n} locations for {n} observations")
    return L


def check_groups(groups, n):
    groups = np.asarray(groups)
    if groups.shape != (n,):
        raise ValueError(f"groups must have shape ({n},)")
    if np.unique(groups).size < 2:
        raise ValueError("at least two groups are required")
    return groups


def design(X, intercept):
    """Exposure columns first, then an optional constant column."""
    if intercept:
        return np.hstack([X, np.ones((X.shape[0], 1))])
    return X
