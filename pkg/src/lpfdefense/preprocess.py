"""Input-restoration baselines (SOR, SRS) and synthetic perturbations."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DropTooLarge, InvalidSpec, TooFewPoints
from .lpf import make_rng

SOR_K = 2
SOR_ALPHA = 1.1
SRS_DROP = 500


@dataclass(frozen=True)
class SorParams:
    k: int = SOR_K
    alpha: float = SOR_ALPHA

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidSpec(f"SOR k must be a positive integer, got {self.k!r}")
        if not self.alpha > 0:
            raise InvalidSpec(f"SOR alpha must be positive, got {self.alpha!r}")


def knn_mean_distances(points, k):
    """Mean Euclidean distance from each point to its ``k`` nearest other points."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    _, nb = cKDTree(pts).query(pts, k=k + 1)
    nb = np.asarray(nb).reshape(n, k + 1)
    own = nb == np.arange(n)[:, None]
    # drop the query point itself; with > k+1 coincident points it may be absent
    keep = np.where(own.any(axis=1)[:, None], ~own, np.arange(k + 1)[None, :] < k)
    nb = nb[keep].reshape(n, k)
    diff = pts[nb] - pts[:, None, :]
    d = np.sort(np.sqrt((diff * diff).sum(axis=-1)), axis=1)
    return d.mean(axis=1)


def sor(cloud, params=SorParams()):
    """Statistical outlier removal.

    Drops points whose mean k-NN distance exceeds ``mean + alpha * std`` of
    that statistic over the cloud (population std).  Survivors keep their
    relative order.
    """
    if len(cloud) <= params.k:
        raise TooFewPoints(f"SOR with k={params.k} needs more than {params.k} points, got {len(cloud)}")
    d = knn_mean_distances(cloud.points, params.k)
    keep = d <= d.mean() + params.alpha * d.std()
    return cloud.with_points(cloud.points[keep])


def srs(cloud, n_drop=SRS_DROP, seed=0):
    """Simple random sampling: drop ``n_drop`` uniformly chosen points."""
    n = len(cloud)
    if int(n_drop) != n_drop or not 0 <= n_drop < n:
        raise DropTooLarge(f"cannot drop {n_drop} of {n} points")
    if n_drop == 0:
        return cloud
    idx = np.sort(make_rng(seed).choice(n, size=n - int(n_drop), replace=False))
    return cloud.with_points(cloud.points[idx])


SHIFT = "shift"
ADD = "add"
DROP = "drop"


@dataclass(frozen=True)
class PerturbSpec:
    """``shift``: iid Gaussian displacement of std ``sigma`` on every point;
    ``add``: ``count`` outliers at random directions around the centroid with
    radius uniform in ``[r_min, r_max]``; ``drop``: remove ``count`` points.
    """

    kind: str
    sigma: float = 0.0
    count: int = 0
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (SHIFT, ADD, DROP):
            raise InvalidSpec(f"unknown perturbation kind {self.kind!r}")
        if not self.sigma >= 0:
            raise InvalidSpec(f"sigma must be >= 0, got {self.sigma!r}")
        if int(self.count) != self.count or self.count < 0:
            raise InvalidSpec(f"count must be a non-negative integer, got {self.count!r}")
        if self.kind == ADD:
            if self.r_min is None or self.r_max is None or not 0 <= self.r_min <= self.r_max:
                raise InvalidSpec("add needs 0 <= r_min <= r_max")


def perturb(cloud, spec):
    rng = make_rng(spec.seed)
    pts = cloud.points
    if spec.kind == SHIFT:
        if spec.sigma == 0:
            return cloud
        return cloud.with_points(pts + rng.normal(0.0, spec.sigma, size=pts.shape))
    if spec.kind == DROP:
        if spec.count >= len(cloud):
            raise InvalidSpec(f"cannot drop {spec.count} of {len(cloud)} points")
        keep = np.sort(rng.choice(len(cloud), size=len(cloud) - spec.count, replace=False))
        return cloud.with_points(pts[keep])
    u = rng.normal(size=(spec.count, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = rng.uniform(spec.r_min, spec.r_max, size=spec.count)
    extra = pts.mean(axis=0) + u * r[:, None]
    return cloud.with_points(np.concatenate([pts, extra]))
