"""Degree-domain low-pass filtering and the point-cloud round trip.

``lowpass_cloud`` runs: center -> project -> forward SHT -> per-degree
weighting -> inverse SHT -> one point per occupied cell -> resample.
"""
import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cloud import PointCloud, center, spherical_to_cartesian
from .errors import GridMismatch, InvalidFilterParam, ShrinkRequested
from .projection import build_grid, project
from .sht import SHCoefficients, forward_sht, inverse_sht

DEFAULT_BANDLIMIT = 100
DEFAULT_N_TARGET = 1024
DEFAULT_S = 20.0
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class FilterSpec:
    """Per-degree weights: ``exp(-l^2 / (2 S^2))`` (gaussian) or a hard cutoff (box)."""

    kind: str = "gaussian"
    s: Optional[float] = DEFAULT_S
    cutoff: Optional[int] = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.s is None or not np.isfinite(self.s) or self.s <= 0:
                raise InvalidFilterParam(f"gaussian S must be a positive number, got {self.s!r}")
        elif self.kind == "box":
            if self.cutoff is None or int(self.cutoff) != self.cutoff or self.cutoff < 0:
                raise InvalidFilterParam(f"box cutoff must be a non-negative integer, got {self.cutoff!r}")
        else:
            raise InvalidFilterParam(f"unknown filter kind {self.kind!r}")

    @classmethod
    def gaussian(cls, s):
        return cls("gaussian", s=s, cutoff=None)

    @classmethod
    def box(cls, cutoff):
        return cls("box", s=None, cutoff=cutoff)

    def params(self):
        if self.kind == "gaussian":
            return {"kind": "gaussian", "S": float(self.s)}
        return {"kind": "box", "cutoff": int(self.cutoff)}


def degree_weights(spec, bandlimit):
    """Weights ``w_0 .. w_L``; ``w_0`` is always 1."""
    l = np.arange(bandlimit + 1, dtype=np.float64)
    if spec.kind == "gaussian":
        return np.exp(-(l * l) / (2.0 * spec.s * spec.s))
    return (l <= spec.cutoff).astype(np.float64)


def apply_filter(coeffs, spec):
    w = degree_weights(spec, coeffs.bandlimit)
    return SHCoefficients(coeffs.bandlimit, coeffs.coeffs * w[coeffs.degrees()])


def reconstruct(filtered, projected, centroid):
    """One point per occupied cell of ``projected`` at the filtered radius.

    Negative filtered radii are clamped to zero.  Points are emitted in
    row-major cell order and shifted back by ``centroid``.
    """
    if filtered.grid != projected.grid:
        raise GridMismatch("filtered and projected fields use different grids")
    grid = filtered.grid
    j, k = np.nonzero(projected.occupancy > 0)
    r = np.maximum(filtered.values[j, k], 0.0)
    pts = spherical_to_cartesian(r, grid.theta[j], grid.phi[k], origin=centroid)
    return PointCloud(pts)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))


def path_seed(seed, relpath):
    """Per-file stream seed: ``seed`` XOR the first 8 bytes of SHA-256(relpath)."""
    h = hashlib.sha256(str(relpath).replace("\\", "/").encode("utf-8")).digest()
    return (int(seed) ^ int.from_bytes(h[:8], "little")) & SEED_MASK


def resample(cloud, n_target, seed):
    """Pad ``cloud`` to ``n_target`` points by re-drawing existing ones.

    Original points keep their positions at the front; the rest are uniform
    draws with replacement.
    """
    n = len(cloud)
    if n_target < n:
        raise ShrinkRequested(f"cannot resample {n} points down to {n_target}")
    if n_target == n:
        return cloud
    idx = make_rng(seed).integers(0, n, size=n_target - n)
    return cloud.with_points(np.concatenate([cloud.points, cloud.points[idx]]))


def filter_cloud(cloud, spec, bandlimit=DEFAULT_BANDLIMIT):
    """Low-pass a cloud without resampling; returns ``(cloud, projected field)``."""
    grid = build_grid(bandlimit)
    centered, centroid = center(cloud)
    field = project(centered, grid)
    coeffs = apply_filter(forward_sht(field), spec)
    smooth = inverse_sht(coeffs, grid, like=field)
    out = reconstruct(smooth, field, centroid)
    return PointCloud(out.points, label=cloud.label, source_path=cloud.source_path), field


def lowpass_cloud(cloud, spec, bandlimit=DEFAULT_BANDLIMIT, n_target=DEFAULT_N_TARGET, seed=0):
    """Low-pass filtered copy of ``cloud`` with ``n_target`` points.

    ``n_target=None`` keeps the input size.
    """
    out, _ = filter_cloud(cloud, spec, bandlimit)
    if n_target is None:
        n_target = len(cloud)
    return resample(out, n_target, seed)
