"""Real orthonormal spherical-harmonic transforms on the equiangular grid.

Harmonics (no Condon-Shortley phase)::

    Y[l, 0]  = N[l, 0] P[l, 0](cos t)
    Y[l, m]  = sqrt(2) N[l, m] P[l, m](cos t) cos(m p)      m > 0
    Y[l, -m] = sqrt(2) N[l, m] P[l, m](cos t) sin(m p)      m > 0

with ``N[l, m]**2 = (2l+1)/(4 pi) (l-m)!/(l+m)!``, so that the integral of
``Y[l, m] Y[l', m']`` over the sphere is ``delta(l, l') delta(m, m')``.

Analysis uses exact equiangular quadrature: with ``n_lat = 2(L+1)`` rows the
ring weights integrate every product of two degree-``L`` harmonics exactly.
"""
import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import BandlimitMismatch, GridMismatch, InvalidDegreeOrder
from .projection import MAX_BANDLIMIT, GridSpec, RadialField, build_grid


def flat_index(l, m):
    return l * l + l + m


def degree_order_pairs(bandlimit):
    """All ``(l, m)`` in storage order: by degree, then order from -l to l."""
    return [(l, m) for l in range(bandlimit + 1) for m in range(-l, l + 1)]


@dataclass(frozen=True, eq=False)
class SHCoefficients:
    """Coefficients ``c[l, m]``, stored flat at index ``l*l + l + m``."""

    bandlimit: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64, copy=True).reshape(-1)
        n = (self.bandlimit + 1) ** 2
        if c.shape[0] != n:
            raise ValueError(f"bandlimit {self.bandlimit} needs {n} coefficients, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, bandlimit):
        return cls(bandlimit, np.zeros((bandlimit + 1) ** 2))

    @classmethod
    def from_dict(cls, bandlimit, entries):
        c = np.zeros((bandlimit + 1) ** 2)
        for (l, m), v in entries.items():
            _check_lm(l, m, bandlimit)
            c[flat_index(l, m)] = v
        return cls(bandlimit, c)

    def __getitem__(self, lm):
        l, m = lm
        _check_lm(l, m, self.bandlimit)
        return float(self.coeffs[flat_index(l, m)])

    def degrees(self):
        """Degree ``l`` of every stored entry."""
        return np.repeat(np.arange(self.bandlimit + 1), 2 * np.arange(self.bandlimit + 1) + 1)

    def to_cos_sin(self):
        L = self.bandlimit
        ccos = np.zeros((L + 1, L + 1))
        csin = np.zeros((L + 1, L + 1))
        for l in range(L + 1):
            base = l * l + l
            ccos[l, : l + 1] = self.coeffs[base: base + l + 1]
            csin[l, 1: l + 1] = self.coeffs[base - 1: base - l - 1: -1] if l else 0.0
        return ccos, csin

    @classmethod
    def from_cos_sin(cls, ccos, csin):
        L = ccos.shape[0] - 1
        c = np.zeros((L + 1) ** 2)
        for l in range(L + 1):
            base = l * l + l
            c[base: base + l + 1] = ccos[l, : l + 1]
            if l:
                c[base - l: base] = csin[l, l:0:-1]
        return cls(L, c)

    def truncated(self, bandlimit):
        return SHCoefficients(bandlimit, self.coeffs[: (bandlimit + 1) ** 2])

    def padded(self, bandlimit):
        c = np.zeros((bandlimit + 1) ** 2)
        c[: self.coeffs.shape[0]] = self.coeffs
        return SHCoefficients(bandlimit, c)


def _check_lm(l, m, lcap=MAX_BANDLIMIT):
    if int(l) != l or int(m) != m or l < 0 or abs(m) > l or l > lcap:
        raise InvalidDegreeOrder(f"invalid degree/order (l={l}, m={m}) for cap {lcap}")


def eval_ylm(l, m, theta, phi):
    """Real orthonormal ``Y[l, m]`` at scalar or array angles."""
    _check_lm(l, m)
    l, m = int(l), int(m)
    am = abs(m)
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    x = np.cos(theta).reshape(-1)
    s = np.sin(theta).reshape(-1)
    _, _, diag, _ = kernels.recurrence_tables(l)
    pmm = np.full(x.shape, kernels.P00)
    for i in range(1, am + 1):
        pmm = pmm * diag[i] * s
    plm = kernels.legendre_order_block(am, l, x, s, pmm)[-1].reshape(theta.shape)
    if m == 0:
        out = plm * np.ones_like(phi)
    elif m > 0:
        out = math.sqrt(2.0) * plm * np.cos(am * phi)
    else:
        out = math.sqrt(2.0) * plm * np.sin(am * phi)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def quadrature_weights(n_lat):
    """Ring weights ``w_j`` with ``sum_j w_j g(theta_j) = int_0^pi g sin(t) dt``.

    Exact for ``g = cos(p t)``, ``p < n_lat`` (``n_lat`` even).
    """
    theta = np.pi * np.arange(n_lat) / n_lat
    k = 2 * np.arange(n_lat // 2) + 1
    w = (4.0 / n_lat) * np.sin(theta) * (np.sin(np.outer(theta, k)) / k).sum(axis=1)
    w.setflags(write=False)
    return w


def _grid_values(field):
    if isinstance(field, RadialField):
        return field.grid, field.values
    raise TypeError("expected a RadialField")


def analyze(values, grid):
    """Coefficients up to ``grid.bandlimit`` of grid samples ``values``."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != grid.shape:
        raise GridMismatch(f"values shape {values.shape} does not match grid {grid.shape}")
    L = grid.bandlimit
    ft = np.fft.rfft(values, axis=1)[:, : L + 1] * (2.0 * np.pi / grid.n_lon)
    w = quadrature_weights(grid.n_lat)[:, None]
    acos = np.ascontiguousarray(w * ft.real)
    asin = np.ascontiguousarray(w * -ft.imag)
    ccos, csin = kernels.sht_analysis(acos, asin, grid.theta, L)
    return SHCoefficients.from_cos_sin(ccos, csin)


def forward_sht(field):
    grid, values = _grid_values(field)
    if not isinstance(grid, GridSpec) or values.shape != (2 * (grid.bandlimit + 1), 4 * (grid.bandlimit + 1)):
        raise GridMismatch("field is not on an equiangular grid of its bandlimit")
    return analyze(values, grid)


def synthesize(coeffs, grid):
    """Grid samples of the expansion ``sum c[l, m] Y[l, m]``."""
    if grid.bandlimit < coeffs.bandlimit:
        raise GridMismatch(
            f"grid bandlimit {grid.bandlimit} is below coefficient bandlimit {coeffs.bandlimit}"
        )
    L = coeffs.bandlimit
    ccos, csin = coeffs.to_cos_sin()
    gcos, gsin = kernels.sht_synthesis(ccos, csin, grid.theta, L)
    n = grid.n_lon
    spec = np.zeros((grid.n_lat, n // 2 + 1), dtype=np.complex128)
    spec[:, 0] = n * gcos[:, 0]
    spec[:, 1: L + 1] = (n / 2.0) * (gcos[:, 1:] - 1j * gsin[:, 1:])
    return np.fft.irfft(spec, n=n, axis=1)


def inverse_sht(coeffs, grid, like=None):
    """Synthesize a :class:`RadialField`.

    With ``like`` (a field on the same grid) its occupancy and point
    bookkeeping are carried over; otherwise every node counts as occupied.
    """
    values = synthesize(coeffs, grid)
    if like is not None:
        if like.grid != grid:
            raise GridMismatch("paired field lives on a different grid")
        return like.with_values(values)
    return RadialField(grid, values, np.ones(grid.shape, dtype=np.int64))


def power_spectrum(coeffs):
    """Per-degree power ``P[l] = sum_m c[l, m]**2``."""
    sq = coeffs.coeffs ** 2
    starts = np.arange(coeffs.bandlimit + 1) ** 2
    return np.add.reduceat(sq, starts)


def export_coefficients(coeffs, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["l", "m", "c"])
        for (l, m), v in zip(degree_order_pairs(coeffs.bandlimit), coeffs.coeffs):
            w.writerow([l, m, repr(float(v))])


def read_coefficients(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    L = max(int(r["l"]) for r in rows)
    return SHCoefficients.from_dict(L, {(int(r["l"]), int(r["m"])): float(r["c"]) for r in rows})


def check_same_bandlimit(a, b):
    if a.bandlimit != b.bandlimit:
        raise BandlimitMismatch(f"bandlimits differ: {a.bandlimit} vs {b.bandlimit}")


__all__ = [
    "SHCoefficients", "eval_ylm", "forward_sht", "inverse_sht", "analyze", "synthesize",
    "power_spectrum", "quadrature_weights", "export_coefficients", "read_coefficients",
    "flat_index", "degree_order_pairs", "build_grid",
]
