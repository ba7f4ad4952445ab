"""Synthetic point clouds for tests, benchmarks and demos."""
import numpy as np

from .cloud import PointCloud
from .lpf import make_rng


def _unit_vectors(rng, n):
    u = rng.normal(size=(n, 3))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def sphere(n=1024, seed=0, radius=1.0, symmetric=True):
    """Points on a sphere.  ``symmetric`` pairs every point with its antipode,
    which puts the centroid exactly at the origin."""
    rng = make_rng(seed)
    if symmetric:
        half = _unit_vectors(rng, (n + 1) // 2)
        u = np.concatenate([half, -half])[:n]
    else:
        u = _unit_vectors(rng, n)
    return PointCloud(radius * u, label="sphere")


def cube(n=1024, seed=0, half=1.0):
    """Points uniform on the surface of an axis-aligned cube."""
    rng = make_rng(seed)
    face = rng.integers(0, 6, size=n)
    uv = rng.uniform(-half, half, size=(n, 2))
    pts = np.empty((n, 3))
    axis = face // 2
    sign = np.where(face % 2 == 0, 1.0, -1.0)
    for a in range(3):
        others = [b for b in range(3) if b != a]
        sel = axis == a
        pts[sel, a] = sign[sel] * half
        pts[sel, others[0]] = uv[sel, 0]
        pts[sel, others[1]] = uv[sel, 1]
    return PointCloud(pts, label="cube")


def ellipsoid(n=1024, seed=0, axes=(1.0, 0.7, 0.5)):
    rng = make_rng(seed)
    return PointCloud(_unit_vectors(rng, n) * np.asarray(axes), label="ellipsoid")


def airplane(n=1024, seed=0):
    """Fuselage, wings and tail fin built from flattened ellipsoids."""
    rng = make_rng(seed)
    parts = [  # (center, semi-axes, share of points)
        ((0.0, 0.0, 0.0), (1.0, 0.12, 0.12), 0.45),
        ((0.05, 0.0, 0.0), (0.22, 0.9, 0.03), 0.35),
        ((-0.85, 0.0, 0.15), (0.12, 0.03, 0.2), 0.1),
        ((-0.85, 0.0, 0.05), (0.1, 0.3, 0.02), 0.1),
    ]
    counts = [int(round(share * n)) for *_, share in parts]
    counts[0] += n - sum(counts)
    pts = [np.asarray(c) + _unit_vectors(rng, m) * np.asarray(ax)
           for (c, ax, _), m in zip(parts, counts)]
    return PointCloud(np.concatenate(pts), label="airplane")


def blob(n=1024, seed=0, bumps=6, amplitude=0.25):
    """Star-shaped body: an ellipsoid with a few smooth radial bumps."""
    rng = make_rng(seed)
    u = _unit_vectors(rng, n)
    centers = _unit_vectors(rng, bumps)
    widths = rng.uniform(0.2, 0.5, size=bumps)
    heights = rng.uniform(-amplitude, amplitude, size=bumps)
    ang = np.arccos(np.clip(u @ centers.T, -1.0, 1.0))
    r = 1.0 + (heights * np.exp(-(ang / widths) ** 2)).sum(axis=1)
    axes = rng.uniform(0.6, 1.0, size=3)
    return PointCloud(u * r[:, None] * axes, label="blob")


SHAPES = {"sphere": sphere, "cube": cube, "ellipsoid": ellipsoid, "airplane": airplane, "blob": blob}
