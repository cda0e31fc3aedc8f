import numpy as np
import pytest

from dispersive_lab.experiments import gaussian_packet
from dispersive_lab.mollifier import MollifierProfile, mollify, verify_rates
from dispersive_lab.spectral import Grid, SpectralField, sobolev_norm

from conftest import random_smooth_field

EPS = [2.0**-k for k in range(3, 9)]


def test_profile_shape():
    p = MollifierProfile()
    xi = np.linspace(-3, 3, 6001)
    v = p(xi)
    assert p(0.0) == 1.0
    assert np.all((v >= 0) & (v <= 1))
    np.testing.assert_array_equal(v, p(-xi))
    half = v[xi >= 0]
    assert np.all(np.diff(half) <= 0)
    assert np.all(v[np.abs(xi) <= 1] == 1) and np.all(v[np.abs(xi) >= 2] == 0)
    with pytest.raises(ValueError):
        MollifierProfile(2.0, 1.0)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
def test_eps_range(eps):
    g = Grid(4.0, 32)
    with pytest.raises(ValueError):
        mollify(SpectralField(g, np.ones(32)), eps)


def test_identity_when_band_covers_grid(rng):
    g = Grid(8.0, 64)
    f = random_smooth_field(g, 2, rng)
    eps = 0.9 / np.max(np.abs(g.wavenumbers))
    out = mollify(f, eps)
    np.testing.assert_array_equal(out.values, f.values)


def test_band_limited_output(rng):
    g = Grid(8.0, 256)
    f = random_smooth_field(g, 1, rng, band=0.01)
    eps = 0.25
    out = mollify(f, eps)
    assert not np.any(out.hat[:, np.abs(g.wavenumbers) >= 2.0 / eps])


def test_contraction_every_order(rng):
    g = Grid(8.0, 256)
    for _ in range(5):
        f = random_smooth_field(g, 2, rng, band=0.02)
        for eps in (0.5, 0.2, 0.05):
            out = mollify(f, eps)
            for k in range(9):
                assert sobolev_norm(out, k) <= sobolev_norm(f, k)


def test_strong_convergence_monotone():
    g = Grid(8.0, 2048)
    f = gaussian_packet(g, 1, 0.1, 0.125, [10.0])
    errs = [sobolev_norm(mollify(f, e) - f, 4) for e in EPS]
    # strictly decreasing until the band covers the whole grid, exact zero after that
    pos = [e for e in errs if e > 0]
    assert len(pos) >= 3 and all(b < a for a, b in zip(pos, pos[1:]))
    assert errs[len(pos):] == [0.0] * (len(errs) - len(pos))


def test_nested_bands_steep_profile():
    steep = MollifierProfile(1.0, 1.0 + 1e-9)
    g = Grid(8.0, 256)
    f = gaussian_packet(g, 1, 1.0, 0.5, [2.0])
    e_wide, e_narrow = 0.05, 0.2
    twice = mollify(mollify(f, e_wide, steep), e_narrow, steep)
    once = mollify(f, e_narrow, steep)
    np.testing.assert_allclose(twice.hat, once.hat, rtol=0, atol=1e-14 * np.max(np.abs(f.hat)))


def test_rates_on_oscillating_packet():
    g = Grid(8.0, 4096)
    f = gaussian_packet(g, 1, 0.1, 0.125, [10.0])
    rep = verify_rates(f, 4, EPS)
    assert rep.verdict in ("PASS", "MARGINAL")
    fits = {fit.quantity: fit for fit in rep.fits}
    assert fits["decay H^3"].fitted_slope >= 0.7
    assert fits["decay H^2"].fitted_slope >= 1.7
    assert fits["growth H^5"].fitted_slope >= -1.3
    assert fits["growth H^6"].fitted_slope >= -2.3
    assert set(rep.to_dict()) >= {"m", "eps", "vacuous", "verdict", "fits"}


def test_rates_vacuous_for_band_limited_data():
    g = Grid(8.0, 256)
    hat = np.zeros(256, complex)
    hat[[1, -1]] = 128.0
    f = SpectralField.from_spectrum(g, hat)
    rep = verify_rates(f, 4, EPS)
    assert rep.vacuous and rep.verdict == "VACUOUS"


def test_rates_argument_checks():
    g = Grid(8.0, 256)
    f = gaussian_packet(g, 1)
    with pytest.raises(ValueError):
        verify_rates(f, 3, EPS)
    with pytest.raises(ValueError):
        verify_rates(f, 4, EPS[:3])
    with pytest.raises(ValueError):
        verify_rates(f, 4, EPS[::-1])
    with pytest.raises(ValueError):
        verify_rates(f, 4, [0.5, 0.45, 0.4, 0.35])
