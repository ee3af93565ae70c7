"""Fourier-side operators: exactness on the band and analytic identities."""

import numpy as np
import pytest

from fracspike import spectral as sp
from fracspike.grid import FracParams, Field, Grid


def band_limited(grid, rng, cutoff_frac=0.25):
    """Random real field supported on modes below cutoff_frac * Nyquist."""
    spec = np.fft.rfftn(rng.standard_normal(grid.shape))
    mask = grid.abs_freq <= cutoff_frac * np.max(grid.abs_freq)
    return Field(grid, np.fft.irfftn(spec * mask, s=grid.shape,
                                     axes=tuple(range(grid.dim))))


def test_laplacian_eigenfunction_1d():
    grid = Grid(1, 10.0, 128)
    k = 3.0 * np.pi / 10.0  # mode n = 3
    f = Field(grid, np.cos(k * grid.axis))
    for s in (0.3, 0.5, 0.9):
        out = sp.fractional_laplacian(f, FracParams(s, 2.0))
        np.testing.assert_allclose(out.values, k ** (2 * s) * f.values,
                                   atol=1e-12)


def test_laplacian_annihilates_constants():
    grid = Grid(2, 5.0, 32)
    f = Field(grid, np.full(grid.shape, 3.7))
    out = sp.fractional_laplacian(f, FracParams(0.6, 2.0))
    assert np.max(np.abs(out.values)) < 1e-13


def test_laplacian_s_one_matches_classical():
    grid = Grid(1, 10.0, 256)
    u = np.exp(-grid.axis ** 2)
    f = Field(grid, u)
    out = sp.fractional_laplacian(f, FracParams(1.0, 2.0))
    classical = -(4.0 * grid.axis ** 2 - 2.0) * u
    np.testing.assert_allclose(out.values, classical, atol=1e-9)


@pytest.mark.parametrize("dim,M", [(1, 256), (2, 64)])
def test_resolvent_composition(rng, dim, M):
    grid = Grid(dim, 8.0, M)
    f = band_limited(grid, rng)
    for s, m in ((0.35, 0.7), (0.5, 1.0), (0.85, 2.3)):
        params = FracParams(s, 2.0)
        g = sp.resolvent(f, params, m)
        back = sp.fractional_laplacian(g, params).values + m * g.values
        rel = np.max(np.abs(back - f.values)) / np.max(np.abs(f.values))
        assert rel < 1e-12


def test_resolvent_rejects_nonpositive_shift():
    grid = Grid(1, 8.0, 64)
    f = Field(grid, np.ones(64))
    with pytest.raises(ValueError):
        sp.resolvent(f, FracParams(0.5, 2.0), 0.0)


def test_spectral_derivative_trig():
    grid = Grid(1, np.pi, 128)
    f = Field(grid, np.sin(2.0 * grid.axis))
    out = sp.spectral_derivative(f)
    np.testing.assert_allclose(out.values, 2.0 * np.cos(2.0 * grid.axis),
                               atol=1e-12)
    grid2 = Grid(2, np.pi, 32)
    x, y = grid2.coords()
    f2 = Field(grid2, np.sin(x) * np.cos(2 * y))
    d1 = sp.spectral_derivative(f2, axis=1)
    np.testing.assert_allclose(d1.values, -2.0 * np.sin(x) * np.sin(2 * y),
                               atol=1e-12)
    with pytest.raises(ValueError):
        sp.spectral_derivative(f, axis=1)


def test_translate_exact_on_band(rng):
    grid = Grid(1, 10.0, 256)
    f = band_limited(grid, rng)
    # translation by a whole number of cells equals np.roll
    shift = 7 * grid.spacing
    out = sp.translate(f, shift)
    np.testing.assert_allclose(out.values, np.roll(f.values, 7), atol=1e-10)
    # off-grid translation checked against the analytic interpolant
    k = np.pi / 10.0
    g = Field(grid, np.cos(3 * k * grid.axis))
    got = sp.translate(g, 0.3456)
    np.testing.assert_allclose(got.values,
                               np.cos(3 * k * (grid.axis - 0.3456)),
                               atol=1e-12)


def test_translate_2d_roundtrip(rng):
    grid = Grid(2, 6.0, 64)
    f = band_limited(grid, rng)
    shift = np.array([1.234, -2.5])
    back = sp.translate(sp.translate(f, shift), -shift)
    np.testing.assert_allclose(back.values, f.values, atol=1e-10)


def test_dilate_against_analytic():
    grid = Grid(1, 20.0, 512)
    f = Field(grid, np.exp(-grid.axis ** 2))
    for scale in (0.8, 1.0, 1.3):
        out = sp.dilate(f, scale)
        np.testing.assert_allclose(out.values,
                                   np.exp(-(scale * grid.axis) ** 2),
                                   atol=1e-10)
    with pytest.raises(ValueError):
        sp.dilate(f, -1.0)


def test_dilate_2d_separable():
    grid = Grid(2, 10.0, 64)
    x, y = grid.coords()
    f = Field(grid, np.exp(-(x ** 2 + 0.5 * y ** 2)))
    out = sp.dilate(f, 1.25)
    expect = np.exp(-((1.25 * x) ** 2 + 0.5 * (1.25 * y) ** 2))
    np.testing.assert_allclose(out.values, expect, atol=1e-9)


def test_inner_norm_consistency(rng):
    grid = Grid(1, 5.0, 128)
    f = Field(grid, rng.standard_normal(128))
    assert sp.norm_l2(f) == pytest.approx(np.sqrt(sp.inner(f, f)))
    g = Field(Grid(1, 5.0, 64), np.zeros(64))
    with pytest.raises(ValueError):
        sp.inner(f, g)


def test_plancherel(rng):
    grid = Grid(1, 5.0, 128)
    f = Field(grid, rng.standard_normal(128))
    fhat = sp.physical_fft(f)
    # discrete Parseval with the continuum normalization
    lhs = sp.inner(f, f)
    rhs = float(np.sum(np.abs(fhat) ** 2)) / (2.0 * grid.half_width)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_weighted_sup_norm_window():
    grid = Grid(1, 10.0, 128)
    f = Field(grid, np.ones(128))
    with pytest.raises(ValueError):
        sp.weighted_sup_norm(f, [0.0], 0.4)  # below N/2
    with pytest.raises(ValueError):
        sp.weighted_sup_norm(f, [0.0], 2.5, FracParams(0.5, 2.0))  # above N+2s
    # rho <= 1 so the weighted norm dominates the sup norm
    val = sp.weighted_sup_norm(f, [0.0], 0.9)
    assert val >= 1.0


def test_far_field_fit_recovers_power_law():
    L, s, dim = 40.0, 0.5, 1
    beta = dim + 2 * s
    r = np.linspace(0.5, L, 400)
    gamma = 2.7
    from fracspike.spectral import _periodized_power_1d
    v = gamma * _periodized_power_1d(r, beta, L)
    fit = sp.far_field_fit(r, v, L, dim, s)
    assert fit.ok
    assert fit.amplitude == pytest.approx(gamma, rel=1e-6)
    assert fit.slope == pytest.approx(-beta, rel=1e-3)


def test_far_field_fit_too_few_points():
    fit = sp.far_field_fit(np.array([1.0, 2.0]), np.array([1.0, 0.5]),
                           40.0, 1, 0.5)
    assert not fit.ok and np.isnan(fit.amplitude)


@pytest.mark.parametrize("dim,M,m", [(1, 512, 1.0), (2, 128, 0.7)])
def test_kernel_profile_mass(dim, M, m):
    grid = Grid(dim, 20.0, M)
    prof = sp.kernel_profile(grid, FracParams(0.5, 2.0), m)
    assert prof.mass == pytest.approx(1.0 / m, rel=1e-12)
    assert prof.k[0] > 0  # kernel is positive near the origin
