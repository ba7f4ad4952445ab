"""Where perturbations live in the harmonic spectrum.

``dis_coef`` averages, over aligned (original, perturbed) pairs, the
per-coefficient relative change ``|c_adv - c_org| / |c_org|``.  The
denominator is floored at ``eps`` times the RMS of the original's
coefficients so near-zero coefficients cannot blow the statistic up.
"""
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cloud import center
from .errors import CloudIOError, EmptySet, LengthMismatch, ParseError
from .projection import build_grid, project
from .sht import check_same_bandlimit, degree_order_pairs, flat_index, forward_sht

DEFAULT_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class DisCoefMap:
    bandlimit: int
    dis: np.ndarray  # flat, same layout as SHCoefficients
    n_pairs: int
    eps: float

    def __getitem__(self, lm):
        l, m = lm
        return float(self.dis[flat_index(l, m)])

    def degree_means(self):
        """Mean of ``dis`` over the orders of each degree."""
        starts = np.arange(self.bandlimit + 1) ** 2
        return np.add.reduceat(self.dis, starts) / (2 * np.arange(self.bandlimit + 1) + 1)

    def band_mean(self, lo, hi):
        """Mean of ``dis`` over all entries with ``lo <= l <= hi``."""
        return float(self.dis[lo * lo: (hi + 1) ** 2].mean())


def cloud_coefficients(cloud, bandlimit):
    centered, _ = center(cloud)
    return forward_sht(project(centered, build_grid(bandlimit)))


def _pair_terms(c_org, c_adv, eps):
    check_same_bandlimit(c_org, c_adv)
    org = c_org.coeffs
    floor = eps * np.sqrt(np.mean(org * org))
    return np.abs(c_adv.coeffs - org) / np.maximum(np.abs(org), floor)


def dis_coef_from_coeffs(originals, adversarials, eps=DEFAULT_EPS):
    """Dis_Coef from precomputed coefficient pairs."""
    originals, adversarials = list(originals), list(adversarials)
    if len(originals) != len(adversarials):
        raise LengthMismatch(f"{len(originals)} originals vs {len(adversarials)} perturbed")
    if not originals:
        raise EmptySet("need at least one pair")
    total = np.zeros_like(originals[0].coeffs)
    for c_org, c_adv in zip(originals, adversarials):
        total = total + _pair_terms(c_org, c_adv, eps)
    return DisCoefMap(originals[0].bandlimit, total / len(originals), len(originals), eps)


def dis_coef(originals, adversarials, bandlimit, eps=DEFAULT_EPS, threads=1):
    """Dis_Coef over aligned cloud pairs, transformed at ``bandlimit``."""
    originals, adversarials = list(originals), list(adversarials)
    if len(originals) != len(adversarials):
        raise LengthMismatch(f"{len(originals)} originals vs {len(adversarials)} perturbed")
    if not originals:
        raise EmptySet("need at least one pair")
    clouds = originals + adversarials

    def transform(c):
        return cloud_coefficients(c, bandlimit)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            coeffs = list(pool.map(transform, clouds))
    else:
        coeffs = [transform(c) for c in clouds]
    n = len(originals)
    return dis_coef_from_coeffs(coeffs[:n], coeffs[n:], eps)


def spectrum_delta(a, b):
    """Per-degree ``sum_m |a[l, m] - b[l, m]|``."""
    check_same_bandlimit(a, b)
    starts = np.arange(a.bandlimit + 1) ** 2
    return np.add.reduceat(np.abs(a.coeffs - b.coeffs), starts)


def export_triangle(dmap, path):
    """CSV of ``l, m, dis`` ordered by degree then order, after a ``#`` header line."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(f"# bandlimit={dmap.bandlimit} n_pairs={dmap.n_pairs} eps={dmap.eps!r}\n")
            w = csv.writer(fh)
            w.writerow(["l", "m", "dis"])
            for (l, m), v in zip(degree_order_pairs(dmap.bandlimit), dmap.dis):
                w.writerow([l, m, f"{v:.17g}"])
    except OSError as exc:
        raise CloudIOError(f"cannot write {path}: {exc}") from exc


def read_triangle(path):
    with open(path, newline="") as fh:
        head = fh.readline()
        if not head.startswith("#"):
            raise ParseError("missing '#' metadata line", path, 1)
        meta = dict(kv.split("=", 1) for kv in head[1:].split())
        rows = list(csv.DictReader(fh))
    L = int(meta["bandlimit"])
    dis = np.zeros((L + 1) ** 2)
    for r in rows:
        dis[flat_index(int(r["l"]), int(r["m"]))] = float(r["dis"])
    return DisCoefMap(L, dis, int(meta["n_pairs"]), float(meta["eps"]))


def export_marginal(path, delta, dmap=None):
    """Degree-marginal CSV: ``l, delta`` (plus ``dis_mean`` when a map is given)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        means = None if dmap is None else dmap.degree_means()
        w.writerow(["l", "delta"] + ([] if means is None else ["dis_mean"]))
        for l, d in enumerate(delta):
            row = [l, f"{d:.17g}"]
            if means is not None:
                row.append(f"{means[l]:.17g}")
            w.writerow(row)


__all__ = [
    "DisCoefMap", "dis_coef", "dis_coef_from_coeffs", "spectrum_delta", "export_triangle",
    "read_triangle", "export_marginal", "cloud_coefficients",
]
