"""Point-cloud value types and coordinate conversions."""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import EmptyCloud

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class PointCloud:
    """An ordered, immutable set of 3D points.

    ``points`` is stored as a read-only ``(N, 3)`` float64 array.
    """

    points: np.ndarray
    label: Optional[str] = None
    source_path: Optional[str] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1 and pts.size == 3:
            pts = pts.reshape(1, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (N, 3), got {pts.shape}")
        if pts.shape[0] == 0:
            raise EmptyCloud("point cloud has no points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def with_points(self, points):
        """Same metadata, new coordinates."""
        return PointCloud(points, label=self.label, source_path=self.source_path)

    def bounding_radius(self, origin=None):
        o = np.zeros(3) if origin is None else np.asarray(origin, dtype=np.float64)
        return float(np.sqrt(((self.points - o) ** 2).sum(axis=1)).max())

    def centroid(self):
        return Centroid(*self.points.mean(axis=0))


class Centroid(NamedTuple):
    cx: float
    cy: float
    cz: float

    def as_array(self):
        return np.array([self.cx, self.cy, self.cz], dtype=np.float64)


class SphericalCoord(NamedTuple):
    r: float
    theta: float
    phi: float


ORIGIN = Centroid(0.0, 0.0, 0.0)


def center(cloud):
    """Translate ``cloud`` so its centroid is at the origin.

    Returns the centered cloud and the centroid that undoes the translation.
    """
    if len(cloud) == 0:
        raise EmptyCloud("cannot center an empty cloud")
    c = cloud.points.mean(axis=0)
    shifted = cloud.points - c
    # a second pass removes the rounding left by the first subtraction
    shifted = shifted - shifted.mean(axis=0)
    return cloud.with_points(shifted), Centroid(*map(float, c))


def uncenter(cloud, centroid):
    return cloud.with_points(cloud.points + centroid.as_array())


def cartesian_to_spherical(xyz, origin=ORIGIN):
    """Vectorized conversion of ``(N, 3)`` points to ``(r, theta, phi)`` arrays.

    Points at the origin map to ``r = theta = phi = 0``.
    """
    d = np.atleast_2d(np.asarray(xyz, dtype=np.float64)) - np.asarray(origin, dtype=np.float64)
    r = np.sqrt((d * d).sum(axis=1))
    nz = r > 0
    # atan2 stays accurate near the poles where arccos(z / r) does not
    theta = np.where(nz, np.arctan2(np.hypot(d[:, 0], d[:, 1]), d[:, 2]), 0.0)
    phi = np.arctan2(d[:, 1], d[:, 0])
    phi = np.where(phi < 0, phi + TWO_PI, phi)
    # -0.0 and values that round up to 2*pi both belong at 0
    phi = np.where((phi >= TWO_PI) | ~nz, 0.0, phi)
    phi = np.abs(phi)
    return r, theta, phi


def spherical_to_cartesian(r, theta, phi, origin=ORIGIN):
    r = np.asarray(r, dtype=np.float64)
    st = np.sin(theta)
    xyz = np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)], axis=-1)
    return xyz + np.asarray(origin, dtype=np.float64)


def to_spherical(point, origin=ORIGIN):
    r, theta, phi = cartesian_to_spherical(np.asarray(point, dtype=np.float64).reshape(1, 3), origin)
    return SphericalCoord(float(r[0]), float(theta[0]), float(phi[0]))


def to_cartesian(coord, origin=ORIGIN):
    return tuple(float(v) for v in spherical_to_cartesian(coord.r, coord.theta, coord.phi, origin))


def unit_directions(points):
    """Unit vectors of ``points``; zero vectors map to the +z axis."""
    pts = np.asarray(points, dtype=np.float64)
    r = np.sqrt((pts * pts).sum(axis=1))
    out = np.zeros_like(pts)
    nz = r > 0
    out[nz] = pts[nz] / r[nz, None]
    out[~nz, 2] = 1.0
    return out, r
