"""Projection of a centered point cloud onto an equiangular sphere grid.

The grid for bandlimit ``L`` has ``n_lat = 2(L+1)`` co-latitude rows
``theta_j = pi j / n_lat`` (north pole included, south pole excluded) and
``n_lon = 2 n_lat`` longitude columns ``phi_k = 2 pi k / n_lon``.
"""
import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .cloud import unit_directions
from .errors import GridMismatch, InvalidBandlimit, NotCentered

MAX_BANDLIMIT = 512
CENTER_TOL = 1e-6


@lru_cache(maxsize=32)
def _angles(bandlimit):
    n_lat = 2 * (bandlimit + 1)
    n_lon = 2 * n_lat
    theta = np.pi * np.arange(n_lat) / n_lat
    phi = 2.0 * np.pi * np.arange(n_lon) / n_lon
    theta.setflags(write=False)
    phi.setflags(write=False)
    return theta, phi


@dataclass(frozen=True)
class GridSpec:
    bandlimit: int

    @property
    def n_lat(self):
        return 2 * (self.bandlimit + 1)

    @property
    def n_lon(self):
        return 2 * self.n_lat

    @property
    def shape(self):
        return (self.n_lat, self.n_lon)

    @property
    def size(self):
        return self.n_lat * self.n_lon

    @property
    def theta(self):
        return _angles(self.bandlimit)[0]

    @property
    def phi(self):
        return _angles(self.bandlimit)[1]

    def node_vectors(self):
        return kernels.node_vectors(self.theta, self.phi)


def build_grid(bandlimit):
    if isinstance(bandlimit, bool) or int(bandlimit) != bandlimit:
        raise InvalidBandlimit(f"bandlimit must be an integer, got {bandlimit!r}")
    bandlimit = int(bandlimit)
    if not 1 <= bandlimit <= MAX_BANDLIMIT:
        raise InvalidBandlimit(f"bandlimit must be in [1, {MAX_BANDLIMIT}], got {bandlimit}")
    return GridSpec(bandlimit)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Radius-per-direction samples ``values[j, k]`` on a :class:`GridSpec`.

    ``occupancy[j, k]`` counts the cloud points whose nearest node is
    ``(j, k)``; ``cell_of_point[i]`` is that node's flat index for point ``i``
    and ``nearest_point[j, k]`` the point that supplied ``values[j, k]``.
    Fields produced by synthesis rather than projection carry all-ones
    occupancy and no point bookkeeping.
    """

    grid: GridSpec
    values: np.ndarray
    occupancy: np.ndarray
    cell_of_point: Optional[np.ndarray] = None
    nearest_point: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.values.shape != self.grid.shape or self.occupancy.shape != self.grid.shape:
            raise GridMismatch(
                f"field arrays must have shape {self.grid.shape}, "
                f"got {self.values.shape} and {self.occupancy.shape}"
            )

    @property
    def occupied(self):
        return self.occupancy > 0

    def assigned(self, j, k):
        """Indices of the points assigned to cell ``(j, k)``."""
        if self.cell_of_point is None:
            return np.empty(0, dtype=np.int64)
        return np.flatnonzero(self.cell_of_point == j * self.grid.n_lon + k)

    def with_values(self, values):
        return RadialField(self.grid, np.asarray(values, dtype=np.float64), self.occupancy,
                           self.cell_of_point, self.nearest_point)

    def to_csv(self, path):
        """Debug dump: one row per node with ``j, k, theta, phi, value, occupancy``."""
        th, ph = self.grid.theta, self.grid.phi
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "k", "theta", "phi", "value", "occupancy"])
            for j in range(self.grid.n_lat):
                for k in range(self.grid.n_lon):
                    w.writerow([j, k, f"{th[j]:.17g}", f"{ph[k]:.17g}",
                                f"{self.values[j, k]:.17g}", int(self.occupancy[j, k])])


def project(cloud, grid):
    """Sample the radial function of a centered cloud on ``grid``.

    Each node takes the radius of the point whose direction is nearest to it;
    each point is counted in the occupancy of its own nearest node.
    Points at the origin have no direction: they are counted at node (0, 0)
    and only supply node values when every point is at the origin.
    """
    pts = cloud.points
    c = pts.mean(axis=0)
    scale = np.sqrt((pts * pts).sum(axis=1)).max()
    if np.linalg.norm(c) > CENTER_TOL * scale:
        raise NotCentered(f"cloud centroid {c} is not at the origin")
    dirs, r = unit_directions(pts)
    theta, phi = grid.theta, grid.phi
    nearest = kernels.nearest_point_per_node(theta, phi, dirs, r > 0)
    cells = kernels.nearest_node_per_point(dirs, theta, phi)
    occupancy = np.bincount(cells, minlength=grid.size).reshape(grid.shape)
    return RadialField(grid, r[nearest], occupancy, cells, nearest)
