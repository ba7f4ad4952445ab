import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_synthesis, random_cloud
from lpfdefense.errors import GridMismatch, InvalidDegreeOrder
from lpfdefense.projection import RadialField, build_grid, project
from lpfdefense.sht import (
    SHCoefficients,
    analyze,
    degree_order_pairs,
    eval_ylm,
    export_coefficients,
    forward_sht,
    inverse_sht,
    power_spectrum,
    quadrature_weights,
    read_coefficients,
    synthesize,
)

# Frozen from sympy (Rodrigues formula, 20 significant digits).
Y53 = -0.14891050266679803709
Y5m3 = 0.25461410818699718325


def random_coeffs(L, seed):
    return SHCoefficients(L, np.random.default_rng(seed).normal(size=(L + 1) ** 2))


def field_of(values, grid):
    return RadialField(grid, values, np.ones(grid.shape, dtype=np.int64))


def test_ylm_closed_forms():
    assert eval_ylm(0, 0, 0.3, 2.0) == pytest.approx(1 / math.sqrt(4 * math.pi), abs=1e-15)
    assert eval_ylm(1, 0, 0.0, 0.0) == pytest.approx(math.sqrt(3 / (4 * math.pi)), abs=1e-15)
    assert eval_ylm(5, 3, 1.1, 0.7) == pytest.approx(Y53, abs=1e-14)
    assert eval_ylm(5, -3, 1.1, 0.7) == pytest.approx(Y5m3, abs=1e-14)


def test_ylm_against_sympy():
    sp = pytest.importorskip("sympy")
    t, p = sp.symbols("t p")
    theta, phi = 0.83, 2.9
    for l, m in [(2, 1), (4, -2), (7, 7), (9, 0), (12, -5)]:
        am = abs(m)
        x = sp.Symbol("x")
        P = sp.diff((x**2 - 1) ** l, x, l + am) / (2**l * sp.factorial(l)) * (1 - x**2) ** sp.Rational(am, 2)
        N = sp.sqrt(sp.Rational(2 * l + 1) / (4 * sp.pi) * sp.factorial(l - am) / sp.factorial(l + am))
        ang = 1 if m == 0 else sp.sqrt(2) * (sp.cos(am * p) if m > 0 else sp.sin(am * p))
        expr = N * P.subs(x, sp.cos(t)) * ang
        want = float(sp.N(expr.subs({t: theta, p: phi}), 30))
        assert eval_ylm(l, m, theta, phi) == pytest.approx(want, abs=1e-13)


def test_ylm_high_degree_is_finite():
    v = eval_ylm(512, 300, np.linspace(0, np.pi, 50), 0.4)
    assert np.isfinite(v).all()
    assert np.abs(v).max() < 10


@pytest.mark.parametrize("l, m", [(2, 3), (-1, 0), (3, -4), (513, 0)])
def test_ylm_invalid(l, m):
    with pytest.raises(InvalidDegreeOrder):
        eval_ylm(l, m, 0.1, 0.1)


def test_coefficient_index_errors():
    c = SHCoefficients.zeros(3)
    with pytest.raises(InvalidDegreeOrder):
        c[4, 0]
    with pytest.raises(InvalidDegreeOrder):
        c[2, -3]
    with pytest.raises(ValueError):
        SHCoefficients(3, np.zeros(15))


def test_quadrature_integrates_polynomials():
    n = 20
    theta = np.pi * np.arange(n) / n
    w = quadrature_weights(n)
    for p in range(n):
        exact = 2.0 / (1 - p * p) if p % 2 == 0 else 0.0
        assert np.dot(w, np.cos(p * theta)) == pytest.approx(exact, abs=1e-14)


def test_constant_field(backend):
    g = build_grid(10)
    c = forward_sht(field_of(np.ones(g.shape), g))
    assert c[0, 0] == pytest.approx(math.sqrt(4 * math.pi), abs=1e-12)
    rest = np.delete(c.coeffs, 0)
    assert np.abs(rest).max() < 1e-9


def test_single_harmonic(backend):
    g = build_grid(8)
    T, P = np.meshgrid(g.theta, g.phi, indexing="ij")
    c = forward_sht(field_of(eval_ylm(3, 2, T, P), g))
    assert c[3, 2] == pytest.approx(1.0, abs=1e-9)
    others = c.coeffs.copy()
    others[3 * 3 + 3 + 2] = 0
    assert np.abs(others).max() < 1e-9


def test_random_recovery_L16(backend):
    g = build_grid(16)
    c = random_coeffs(16, 3)
    back = analyze(synthesize(c, g), g)
    np.testing.assert_allclose(back.coeffs, c.coeffs, rtol=0, atol=1e-9)


def test_inverse_trivial_cases(backend):
    g = build_grid(6)
    one = inverse_sht(SHCoefficients.from_dict(6, {(0, 0): math.sqrt(4 * math.pi)}), g)
    np.testing.assert_allclose(one.values, 1.0, atol=1e-14)
    assert (one.occupancy == 1).all()
    assert (inverse_sht(SHCoefficients.zeros(6), g).values == 0).all()


def test_inverse_matches_naive_sum(backend):
    g = build_grid(8)
    c = forward_sht(project(random_cloud(64, 5), g))
    field = inverse_sht(c, g)
    np.testing.assert_allclose(field.values, naive_synthesis(c, g.theta, g.phi), rtol=0, atol=1e-10)


def test_inverse_on_finer_grid(backend):
    c = random_coeffs(5, 8)
    g = build_grid(9)
    np.testing.assert_allclose(synthesize(c, g), naive_synthesis(c, g.theta, g.phi), atol=1e-11)
    with pytest.raises(GridMismatch):
        synthesize(random_coeffs(10, 0), g)


def test_inverse_keeps_paired_bookkeeping():
    g = build_grid(4)
    f = project(random_cloud(30, 1), g)
    out = inverse_sht(forward_sht(f), g, like=f)
    np.testing.assert_array_equal(out.occupancy, f.occupancy)
    np.testing.assert_array_equal(out.nearest_point, f.nearest_point)
    with pytest.raises(GridMismatch):
        inverse_sht(forward_sht(f), build_grid(5), like=f)


def test_forward_rejects_wrong_shape():
    g = build_grid(4)
    with pytest.raises(GridMismatch):
        analyze(np.ones((3, 3)), g)


def test_orthonormality_L16():
    L = 16
    g = build_grid(L)
    w = quadrature_weights(g.n_lat)[:, None] * (2 * np.pi / g.n_lon)
    T, P = np.meshgrid(g.theta, g.phi, indexing="ij")
    Y = np.stack([eval_ylm(l, m, T, P) for l, m in degree_order_pairs(L)])
    gram = np.einsum("ajk,bjk->ab", Y * w, Y)
    np.testing.assert_allclose(gram, np.eye(len(Y)), atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_roundtrip_and_parseval(L, seed):
    g = build_grid(L)
    f = synthesize(random_coeffs(L, seed), g)
    c = analyze(f, g)
    np.testing.assert_allclose(synthesize(c, g), f, rtol=0, atol=1e-9)
    w = quadrature_weights(g.n_lat)[:, None] * (2 * np.pi / g.n_lon)
    energy = (w * f * f).sum()
    assert energy == pytest.approx(np.dot(c.coeffs, c.coeffs), rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.integers(0, 100))
def test_polar_rotation_preserves_power(L, seed, shift):
    g = build_grid(L)
    f = synthesize(random_coeffs(L, seed), g)
    p0 = power_spectrum(analyze(f, g))
    p1 = power_spectrum(analyze(np.roll(f, shift, axis=1), g))
    np.testing.assert_allclose(p1, p0, rtol=0, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.floats(-10, 10))
def test_linearity(seed, a, b):
    g = build_grid(6)
    rng = np.random.default_rng(seed)
    f, h = rng.normal(size=g.shape), rng.normal(size=g.shape)
    lhs = analyze(a * f + b * h, g).coeffs
    rhs = a * analyze(f, g).coeffs + b * analyze(h, g).coeffs
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10)


def test_power_spectrum_examples():
    np.testing.assert_array_equal(power_spectrum(SHCoefficients(0, [2.0])), [4.0])
    c = SHCoefficients.from_dict(1, {(1, -1): 3.0, (1, 0): 4.0})
    assert power_spectrum(c)[1] == 25.0
    r = random_coeffs(9, 2)
    p = power_spectrum(r)
    assert (p >= 0).all()
    assert p.sum() == pytest.approx(np.dot(r.coeffs, r.coeffs), rel=1e-14)


def test_cos_sin_layout_roundtrip():
    c = random_coeffs(7, 4)
    ccos, csin = c.to_cos_sin()
    assert ccos[5, 3] == c[5, 3] and csin[5, 3] == c[5, -3]
    np.testing.assert_array_equal(SHCoefficients.from_cos_sin(ccos, csin).coeffs, c.coeffs)


def test_coefficient_csv(tmp_path):
    c = random_coeffs(4, 6)
    export_coefficients(c, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "l,m,c" and lines[1].startswith("0,0,") and lines[2].startswith("1,-1,")
    np.testing.assert_array_equal(read_coefficients(tmp_path / "c.csv").coeffs, c.coeffs)


def test_backends_agree():
    from lpfdefense import _accel, kernels

    if not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    g = build_grid(24)
    c = random_coeffs(24, 9)
    a, b = c.to_cos_sin()
    for x, y in zip(kernels.synthesis_numba(a, b, g.theta, 24), kernels.synthesis_numpy(a, b, g.theta, 24)):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-12)
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, g.n_lat, 25))
    for x, y in zip(kernels.analysis_numba(a, b, g.theta, 24), kernels.analysis_numpy(a, b, g.theta, 24)):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-12)
