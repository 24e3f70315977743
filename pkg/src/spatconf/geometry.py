"""Location sampling and pairwise distances."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "LocationSet",
    "sample_uniform_square",
    "sample_gaussian_line",
    "fixed_grid_locations",
    "distance_matrix",
]


@dataclass(frozen=True, eq=False)
class LocationSet:
    """Sampled coordinates plus the density they were drawn from.

    ``density`` is a tuple whose first entry is one of ``"uniform_square"``
    (followed by ``lo, hi``), ``"gaussian_line"`` (followed by ``sd``) or
    ``"fixed_grid"`` (followed by ``m, k``).
    """

    coords: np.ndarray
    density: tuple
    groups: np.ndarray | None = field(default=None)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[1] not in (1, 2):
            raise ValueError("coords must be n x 1 or n x 2")
        if coords.shape[0] < 1:
            raise ValueError("a LocationSet needs at least one point")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if self.groups is not None:
            groups = np.asarray(self.groups)
            if groups.shape != (coords.shape[0],):
                raise ValueError("groups must have one entry per point")
            object.__setattr__(self, "groups", groups)

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]

    @property
    def kind(self):
        return self.density[0]

    @cached_property
    def distances(self):
        return cdist(self.coords, self.coords)

    def subset(self, idx):
        idx = np.asarray(idx)
        groups = None if self.groups is None else self.groups[idx]
        return LocationSet(self.coords[idx], self.density, groups)


def sample_uniform_square(n, lo, hi, rng):
    """Draw ``n`` points uniformly on ``[lo, hi]^2``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not lo < hi:
        raise ValueError(f"invalid bounds: lo={lo} must be < hi={hi}")
    coords = rng.uniform(lo, hi, size=(int(n), 2))
    return LocationSet(coords, ("uniform_square", float(lo), float(hi)))


def sample_gaussian_line(n, sd, rng):
    """Draw ``n`` points from N(0, sd^2) on the line."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not sd > 0:
        raise ValueError(f"sd must be positive, got {sd}")
    coords = rng.normal(0.0, sd, size=(int(n), 1))
    return LocationSet(coords, ("gaussian_line", float(sd)))


def fixed_grid_locations(m, k):
    """Locations ``1..m`` on the line, each repeated ``k`` times (group id = location)."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    ids = np.repeat(np.arange(1, int(m) + 1), int(k))
    return LocationSet(ids.astype(float)[:, None], ("fixed_grid", int(m), int(k)), groups=ids)


def distance_matrix(L):
    """Euclidean distance matrix (cached on the LocationSet)."""
    return L.distances
