import warnings

import numpy as np
import pytest
from math import erf

from dispersive_lab.spectral import (DecayWarning, Grid, NonFiniteError, SpectralField, cumulative_integral,
                                     dealias, fourier_derivative, padded_product, sobolev_norm)
from dispersive_lab.rates import fit_loglog

from conftest import random_smooth_field


def test_grid_invariants():
    g = Grid(7.3, 96)
    assert abs(g.dx * g.points - 2 * g.half_width) <= np.spacing(2 * g.half_width)
    xi = np.sort(g.wavenumbers)
    assert xi[0] == pytest.approx(-np.pi * 48 / 7.3)
    # symmetric apart from the single Nyquist mode
    np.testing.assert_allclose(xi[1:], -xi[1:][::-1], atol=1e-12)
    assert g.mode_index[g.nyquist] == -48


@pytest.mark.parametrize("bad", [(0.0, 16), (1.0, 15), (1.0, 0)])
def test_grid_rejects(bad):
    with pytest.raises(ValueError):
        Grid(*bad)


def test_field_caches_agree(rng):
    g = Grid(10.0, 128)
    f = random_smooth_field(g, 2, rng)
    back = SpectralField.from_spectrum(g, f.hat)
    scale = np.linalg.norm(f.values)
    assert np.linalg.norm(back.values - f.values) <= 10 * np.finfo(float).eps * scale * np.sqrt(g.points)
    with pytest.raises(ValueError):
        SpectralField(g, np.zeros((0, 128)))


def test_derivative_of_constant():
    g = Grid(5.0, 64)
    f = SpectralField(g, np.full(64, 3.0 + 1j))
    for k in range(1, 9):
        assert np.max(np.abs(fourier_derivative(f, k).values)) < 1e-12


def test_derivative_single_mode():
    g = Grid(4.0, 64)
    c = np.pi / g.half_width
    f = SpectralField(g, np.sin(c * g.x))
    d = fourier_derivative(f, 1).values[0]
    np.testing.assert_allclose(d, c * np.cos(c * g.x), rtol=0, atol=1e-12 * c)


def test_derivative_order_guard_and_nonfinite():
    g = Grid(4.0, 32)
    f = SpectralField(g, np.ones(32))
    with pytest.raises(ValueError):
        fourier_derivative(f, 9)
    vals = np.ones(32, dtype=complex)
    vals[5] = np.nan
    with pytest.raises(NonFiniteError, match="grid index 5"):
        fourier_derivative(SpectralField(g, vals), 1)


def test_second_derivative_matches_fourth_order_differences():
    # fixed band-limited field in physical wavenumbers, resolved on every grid
    hw = 4.0
    modes = {1: 0.7 + 0.2j, -2: 0.3 - 0.5j, 3: 0.25j}

    def f_of(x):
        return sum(c * np.exp(1j * m * np.pi * x / hw) for m, c in modes.items())

    errs, dxs = [], []
    for N in (32, 64, 128):
        g = Grid(hw, N)
        f = f_of(g.x)
        spec = fourier_derivative(SpectralField(g, f), 2).values[0]
        fd = (-np.roll(f, -2) + 16 * np.roll(f, -1) - 30 * f + 16 * np.roll(f, 1) - np.roll(f, 2)) / (12 * g.dx**2)
        errs.append(np.max(np.abs(fd - spec)))
        dxs.append(g.dx)
    slope, _ = fit_loglog(dxs, errs)
    assert slope > 3.7


def test_sobolev_norms_analytic():
    g = Grid(np.pi, 64)
    f = SpectralField(g, np.sin(g.x))
    assert sobolev_norm(SpectralField.zeros(g), 3) == 0.0
    assert sobolev_norm(f, 0) ** 2 == pytest.approx(np.pi, rel=1e-12)
    assert sobolev_norm(f, 1) ** 2 == pytest.approx(2 * np.pi, rel=1e-12)


def test_sobolev_frequency_equals_physical(rng):
    g = Grid(12.0, 256)
    for _ in range(5):
        f = random_smooth_field(g, 2, rng)
        for k in (0, 2, 4):
            phys = sum(g.dx * np.sum(np.abs(fourier_derivative(f, l).values) ** 2) for l in range(k + 1))
            assert sobolev_norm(f, k) ** 2 == pytest.approx(phys, rel=1e-10)


def test_round_trip_identity(rng):
    g = Grid(9.0, 128)
    f = random_smooth_field(g, 3, rng)
    rt = np.fft.ifft(np.fft.fft(f.values, axis=-1), axis=-1)
    assert np.linalg.norm(rt - f.values) <= 10 * np.finfo(float).eps * np.linalg.norm(f.values) * np.sqrt(128)


def test_derivative_composition(rng):
    g = Grid(10.0, 128)
    f = dealias(random_smooth_field(g, 1, rng))
    for j, k in ((1, 1), (1, 2), (2, 2), (1, 3)):
        lhs = fourier_derivative(fourier_derivative(f, j), k).values
        rhs = fourier_derivative(f, j + k).values
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_cumulative_integral_zero_and_gaussian():
    g = Grid(8.0, 2**16)
    assert not np.any(cumulative_integral(SpectralField.zeros(Grid(8.0, 64))).values)
    G = cumulative_integral(SpectralField(g, np.exp(-g.x**2))).values[0].real
    exact = np.sqrt(np.pi) / 2 * (1 + np.array([erf(v) for v in g.x]))
    assert np.max(np.abs(G - exact)) < 1e-8
    assert G[0] == 0.0


def test_cumulative_integral_refinement_order(rng):
    # same smooth decaying function sampled at N, 2N, 4N; compare on the coarse points
    def f(x):
        return (1 + 0.5 * x - 0.2 * x**2) * np.exp(-x**2 / 3) * np.cos(2 * x)

    vals = []
    for N in (256, 512, 1024):
        g = Grid(10.0, N)
        vals.append(cumulative_integral(SpectralField(g, f(g.x))).values[0][:: N // 256])
    e1 = np.max(np.abs(vals[0] - vals[1]))
    e2 = np.max(np.abs(vals[1] - vals[2]))
    assert np.log2(e1 / e2) >= 1.9


def test_cumulative_integral_then_derivative():
    # zero-mass integrand so the antiderivative is periodic and smooth
    errs = []
    for N in (256, 512):
        g = Grid(10.0, N)
        x = g.x
        f = SpectralField(g, -2 * x * np.exp(-x**2) + 0.5 * np.gradient(np.exp(-(x - 1) ** 2 / 2), x) * 0
                          + (1 - 2 * x**2) * np.exp(-x**2) * 1j)
        back = fourier_derivative(cumulative_integral(f), 1).values[0]
        inner = slice(N // 10, N - N // 10)
        errs.append(np.max(np.abs(back[inner] - f.values[0][inner])))
    assert errs[0] < 5 * (20.0 / 256) ** 2
    assert errs[1] < errs[0] / 3


def test_cumulative_integral_decay_warning():
    g = Grid(3.0, 64)
    with pytest.warns(DecayWarning):
        out = cumulative_integral(SpectralField(g, np.ones(64)))
    assert out.notes and "left edge" in out.notes[0]


def test_dealias_properties(rng):
    g = Grid(6.0, 96)
    xi_idx = np.abs(g.mode_index)
    hat = (rng.standard_normal(96) + 1j * rng.standard_normal(96))
    low = SpectralField.from_spectrum(g, np.where(xi_idx < 32, hat, 0))
    np.testing.assert_array_equal(dealias(low).hat, low.hat)
    f = SpectralField.from_spectrum(g, hat)
    once = dealias(f)
    np.testing.assert_array_equal(dealias(once).hat, once.hat)
    assert not np.any(once.hat[0, xi_idx >= 32])


def test_padded_product_equals_dealiased_naive(rng):
    g = Grid(6.0, 96)
    mask = g.dealias_mask()
    f = SpectralField.from_spectrum(g, np.where(mask, rng.standard_normal(96) + 1j * rng.standard_normal(96), 0))
    h = SpectralField.from_spectrum(g, np.where(mask, rng.standard_normal(96) + 1j * rng.standard_normal(96), 0))
    padded = padded_product(f, h).hat[0]
    naive = dealias(SpectralField(g, f.values * h.values)).hat[0]
    scale = np.max(np.abs(naive))
    assert np.max(np.abs(padded[mask] - naive[mask])) <= 1e-12 * scale


def test_field_arithmetic_checks():
    g1, g2 = Grid(1.0, 16), Grid(2.0, 16)
    a = SpectralField(g1, np.ones(16))
    with pytest.raises(ValueError):
        a + SpectralField(g2, np.ones(16))
    with pytest.raises(ValueError):
        a - SpectralField(g1, np.ones((2, 16)))
    np.testing.assert_allclose((a * 2 + a).values, 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert a.conj().n == 1
