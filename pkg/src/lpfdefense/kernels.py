"""Hot numeric kernels, each in a numba loop form and a vectorized numpy form.

The public names at the bottom of the module are bound to one of the two
according to :mod:`lpfdefense._accel`.  Both forms are always importable so
tests and the benchmark can compare them directly.

Conventions shared by every kernel:

* grid nodes are ``(theta[j], phi[k])`` with unit vector
  ``(sin t cos p, sin t sin p, cos t)``;
* nearest means largest dot product between unit vectors;
* ties go to the lowest point index (node -> point) or the lowest flat cell
  index ``j * n_lon + k`` (point -> node).
"""
import math
from functools import lru_cache

import numpy as np

from ._accel import USE_NUMBA, njit

# slack on dot-product bounds used to prune candidates; far above rounding error
_PRUNE_SLACK = 1e-12
_CHUNK = 1 << 21  # max dot products materialised at once on the numpy path


def node_vectors(theta, phi):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    return np.stack(
        [np.outer(st, cp), np.outer(st, sp), np.repeat(ct[:, None], len(phi), axis=1)], axis=-1
    )


def polar_angles(dirs):
    """Co-latitude of unit vectors, accurate near the poles."""
    rho = np.hypot(dirs[:, 0], dirs[:, 1])
    return np.arctan2(rho, dirs[:, 2])


# ---------------------------------------------------------------------------
# node -> nearest point


def _nearest_point_loops(theta, phi, dirs, valid, order, sorted_theta):
    n_lat, n_lon = theta.shape[0], phi.shape[0]
    n = dirs.shape[0]
    out = np.zeros((n_lat, n_lon), dtype=np.int64)
    any_valid = False
    for i in range(n):
        if valid[i]:
            any_valid = True
            break
    if not any_valid:
        return out
    for j in range(n_lat):
        tj = theta[j]
        st = math.sin(tj)
        ct = math.cos(tj)
        start = np.searchsorted(sorted_theta, tj)
        for k in range(n_lon):
            nx = st * math.cos(phi[k])
            ny = st * math.sin(phi[k])
            nz = ct
            best = -2.0
            best_i = n
            # walk outward in co-latitude; |dtheta| bounds the attainable dot
            lo = start - 1
            hi = start
            while lo >= 0 or hi < n:
                if hi < n:
                    if math.cos(sorted_theta[hi] - tj) < best - _PRUNE_SLACK:
                        hi = n
                    else:
                        i = order[hi]
                        if valid[i]:
                            d = nx * dirs[i, 0] + ny * dirs[i, 1] + nz * dirs[i, 2]
                            if d > best or (d == best and i < best_i):
                                best = d
                                best_i = i
                        hi += 1
                if lo >= 0:
                    if math.cos(tj - sorted_theta[lo]) < best - _PRUNE_SLACK:
                        lo = -1
                    else:
                        i = order[lo]
                        if valid[i]:
                            d = nx * dirs[i, 0] + ny * dirs[i, 1] + nz * dirs[i, 2]
                            if d > best or (d == best and i < best_i):
                                best = d
                                best_i = i
                        lo -= 1
            out[j, k] = best_i
    return out


_nearest_point_jit = njit(_nearest_point_loops)


def nearest_point_per_node_numba(theta, phi, dirs, valid):
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    pt = polar_angles(dirs)
    order = np.argsort(pt, kind="stable")
    return _nearest_point_jit(
        np.ascontiguousarray(theta, dtype=np.float64),
        np.ascontiguousarray(phi, dtype=np.float64),
        dirs,
        np.ascontiguousarray(valid, dtype=np.bool_),
        order.astype(np.int64),
        np.ascontiguousarray(pt[order]),
    )


def nearest_point_per_node_numpy(theta, phi, dirs, valid):
    nodes = node_vectors(theta, phi).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    if not valid.any():
        return np.zeros((len(theta), len(phi)), dtype=np.int64)
    out = np.empty(len(nodes), dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(dirs)))
    for s in range(0, len(nodes), step):
        d = nodes[s:s + step] @ dirs.T
        d[:, ~valid] = -np.inf
        out[s:s + step] = np.argmax(d, axis=1)  # first maximum = lowest index
    return out.reshape(len(theta), len(phi))


# ---------------------------------------------------------------------------
# point -> nearest node


def _nearest_node_loops(dirs, ptheta, theta, phi):
    n = dirs.shape[0]
    n_lat, n_lon = theta.shape[0], phi.shape[0]
    dtheta = theta[1] - theta[0]
    cphi = np.empty(n_lon)
    sphi = np.empty(n_lon)
    for k in range(n_lon):
        cphi[k] = math.cos(phi[k])
        sphi[k] = math.sin(phi[k])
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        ux = dirs[i, 0]
        uy = dirs[i, 1]
        uz = dirs[i, 2]
        tp = ptheta[i]
        j0 = int(round(tp / dtheta))
        if j0 > n_lat - 1:
            j0 = n_lat - 1
        best = -2.0
        best_c = n_lat * n_lon
        for direction in range(2):
            j = j0 if direction == 0 else j0 + 1
            while j >= 0 and j < n_lat:
                if math.cos(tp - theta[j]) < best - _PRUNE_SLACK:
                    break
                st = math.sin(theta[j])
                ct = math.cos(theta[j])
                for k in range(n_lon):
                    d = (st * cphi[k]) * ux + (st * sphi[k]) * uy + ct * uz
                    c = j * n_lon + k
                    if d > best or (d == best and c < best_c):
                        best = d
                        best_c = c
                j = j - 1 if direction == 0 else j + 1
        out[i] = best_c
    return out


_nearest_node_jit = njit(_nearest_node_loops)


def nearest_node_per_point_numba(dirs, theta, phi):
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    return _nearest_node_jit(
        dirs,
        polar_angles(dirs),
        np.ascontiguousarray(theta, dtype=np.float64),
        np.ascontiguousarray(phi, dtype=np.float64),
    )


def nearest_node_per_point_numpy(dirs, theta, phi):
    nodes = node_vectors(theta, phi).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64)
    out = np.empty(len(dirs), dtype=np.int64)
    step = max(1, _CHUNK // len(nodes))
    for s in range(0, len(dirs), step):
        out[s:s + step] = np.argmax(dirs[s:s + step] @ nodes.T, axis=1)
    return out


# ---------------------------------------------------------------------------
# orthonormal associated Legendre recurrence


@lru_cache(maxsize=16)
def recurrence_tables(lmax):
    """Coefficients of the fixed-order upward recurrence in degree.

    ``pbar[l, m] = a[l, m] * (x * pbar[l-1, m] - b[l, m] * pbar[l-2, m])`` for
    ``l >= m + 2``; ``diag[m]`` advances ``pbar[m-1, m-1] -> pbar[m, m]`` (times
    sin theta) and ``sub[m]`` gives ``pbar[m+1, m] = sub[m] * x * pbar[m, m]``.
    """
    l = np.arange(lmax + 1, dtype=np.float64)[:, None]
    m = np.arange(lmax + 1, dtype=np.float64)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
    mask = l >= m + 2
    a = np.where(mask, a, 0.0)
    b = np.where(mask, b, 0.0)
    mm = np.arange(lmax + 1, dtype=np.float64)
    diag = np.ones(lmax + 1)
    diag[1:] = np.sqrt((2 * mm[1:] + 1) / (2 * mm[1:]))
    sub = np.sqrt(2 * mm + 3)
    for arr in (a, b, diag, sub):
        arr.setflags(write=False)
    return a, b, diag, sub


P00 = math.sqrt(1.0 / (4.0 * math.pi))
SQRT2 = math.sqrt(2.0)


def _analysis_loops(acos, asin, theta, lmax, ra, rb, diag, sub):
    n_lat = theta.shape[0]
    ccos = np.zeros((lmax + 1, lmax + 1))
    csin = np.zeros((lmax + 1, lmax + 1))
    for j in range(n_lat):
        x = math.cos(theta[j])
        s = math.sin(theta[j])
        pmm = P00
        for m in range(lmax + 1):
            if m > 0:
                pmm = pmm * diag[m] * s
                fa = SQRT2 * acos[j, m]
                fb = SQRT2 * asin[j, m]
            else:
                fa = acos[j, 0]
                fb = 0.0
            p2 = 0.0
            p1 = pmm
            ccos[m, m] += p1 * fa
            csin[m, m] += p1 * fb
            if m < lmax:
                p = sub[m] * x * pmm
                ccos[m + 1, m] += p * fa
                csin[m + 1, m] += p * fb
                p2 = p1
                p1 = p
                for l in range(m + 2, lmax + 1):
                    p = ra[l, m] * (x * p1 - rb[l, m] * p2)
                    ccos[l, m] += p * fa
                    csin[l, m] += p * fb
                    p2 = p1
                    p1 = p
    return ccos, csin


def _synthesis_loops(ccos, csin, theta, lmax, ra, rb, diag, sub):
    n_lat = theta.shape[0]
    gcos = np.zeros((n_lat, lmax + 1))
    gsin = np.zeros((n_lat, lmax + 1))
    for j in range(n_lat):
        x = math.cos(theta[j])
        s = math.sin(theta[j])
        pmm = P00
        for m in range(lmax + 1):
            if m > 0:
                pmm = pmm * diag[m] * s
            p1 = pmm
            ga = p1 * ccos[m, m]
            gb = p1 * csin[m, m]
            if m < lmax:
                p = sub[m] * x * pmm
                ga += p * ccos[m + 1, m]
                gb += p * csin[m + 1, m]
                p2 = p1
                p1 = p
                for l in range(m + 2, lmax + 1):
                    p = ra[l, m] * (x * p1 - rb[l, m] * p2)
                    ga += p * ccos[l, m]
                    gb += p * csin[l, m]
                    p2 = p1
                    p1 = p
            if m > 0:
                ga *= SQRT2
                gb *= SQRT2
            gcos[j, m] = ga
            gsin[j, m] = gb
    return gcos, gsin


_analysis_jit = njit(_analysis_loops)
_synthesis_jit = njit(_synthesis_loops)


def legendre_order_block(m, lmax, x, s, pmm):
    """Rows ``pbar[l, m]`` for ``l = m..lmax`` at all ``x``; ``pmm`` is ``pbar[m, m]``."""
    ra, rb, _, sub = recurrence_tables(lmax)
    out = np.empty((lmax + 1 - m, len(x)))
    out[0] = pmm
    if m < lmax:
        out[1] = sub[m] * x * pmm
        for l in range(m + 2, lmax + 1):
            out[l - m] = ra[l, m] * (x * out[l - m - 1] - rb[l, m] * out[l - m - 2])
    return out


def _order_blocks(theta, lmax):
    x, s = np.cos(theta), np.sin(theta)
    _, _, diag, _ = recurrence_tables(lmax)
    pmm = np.full(len(theta), P00)
    for m in range(lmax + 1):
        if m > 0:
            pmm = pmm * diag[m] * s
        yield m, legendre_order_block(m, lmax, x, s, pmm)


def analysis_numpy(acos, asin, theta, lmax):
    ccos = np.zeros((lmax + 1, lmax + 1))
    csin = np.zeros((lmax + 1, lmax + 1))
    for m, block in _order_blocks(theta, lmax):
        f = SQRT2 if m > 0 else 1.0
        ccos[m:, m] = block @ (f * acos[:, m])
        if m > 0:
            csin[m:, m] = block @ (f * asin[:, m])
    return ccos, csin


def synthesis_numpy(ccos, csin, theta, lmax):
    gcos = np.zeros((len(theta), lmax + 1))
    gsin = np.zeros((len(theta), lmax + 1))
    for m, block in _order_blocks(theta, lmax):
        f = SQRT2 if m > 0 else 1.0
        gcos[:, m] = f * (ccos[m:, m] @ block)
        gsin[:, m] = f * (csin[m:, m] @ block)
    return gcos, gsin


def analysis_numba(acos, asin, theta, lmax):
    ra, rb, diag, sub = recurrence_tables(lmax)
    return _analysis_jit(
        np.ascontiguousarray(acos), np.ascontiguousarray(asin),
        np.ascontiguousarray(theta, dtype=np.float64), lmax, ra, rb, diag, sub,
    )


def synthesis_numba(ccos, csin, theta, lmax):
    ra, rb, diag, sub = recurrence_tables(lmax)
    return _synthesis_jit(
        np.ascontiguousarray(ccos), np.ascontiguousarray(csin),
        np.ascontiguousarray(theta, dtype=np.float64), lmax, ra, rb, diag, sub,
    )


if USE_NUMBA:
    nearest_point_per_node = nearest_point_per_node_numba
    nearest_node_per_point = nearest_node_per_point_numba
    sht_analysis = analysis_numba
    sht_synthesis = synthesis_numba
else:
    nearest_point_per_node = nearest_point_per_node_numpy
    nearest_node_per_point = nearest_node_per_point_numpy
    sht_analysis = analysis_numpy
    sht_synthesis = synthesis_numpy
