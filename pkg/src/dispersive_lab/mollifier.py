"""Bona-Smith low-pass regularization of initial data and its rate checks."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .spectral import SpectralField, sobolev_norm_sq
from .rates import fit_loglog, slope_verdict, worst

# differences below this fraction of the reference norm are treated as round-off
RATE_FLOOR = 1e-13


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


@dataclass(frozen=True)
class MollifierProfile:
    """Radial cutoff: 1 on |xi| <= inner_radius, 0 on |xi| >= outer_radius,
    joined by the exp(-1/s) bridge (C-infinity, monotone)."""

    inner_radius: float = 1.0
    outer_radius: float = 2.0

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")

    def __call__(self, xi):
        t = (np.abs(np.asarray(xi, dtype=float)) - self.inner_radius) / (
            self.outer_radius - self.inner_radius
        )
        a = _bump(1.0 - t)
        b = _bump(t)
        with np.errstate(invalid="ignore"):
            val = a / (a + b)
        val = np.where(t <= 0, 1.0, np.where(t >= 1, 0.0, val))
        return val


DEFAULT_PROFILE = MollifierProfile()


def mollify(Q0: SpectralField, eps: float, profile: MollifierProfile = DEFAULT_PROFILE) -> SpectralField:
    """Scale each Fourier mode by profile(eps * xi)."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    mult = profile(eps * Q0.grid.wavenumbers)
    if np.all(mult == 1.0):
        # copy the stored representation; a transform round trip would add round-off
        if Q0._hat is not None:
            return SpectralField.from_spectrum(Q0.grid, Q0._hat.copy())
        return SpectralField(Q0.grid, Q0.values.copy())
    return SpectralField.from_spectrum(Q0.grid, Q0.hat * mult)


@dataclass
class RateFit:
    quantity: str
    exponent: float
    fitted_slope: float | None
    residual: float | None
    verdict: str
    eps: list
    values: list
    used: list

    def to_dict(self):
        return asdict(self)


@dataclass
class RateReport:
    m: int
    eps: list
    fits: list
    vacuous: bool

    @property
    def verdict(self):
        if self.vacuous:
            return "VACUOUS"
        return worst(f.verdict for f in self.fits)

    def to_dict(self):
        return {
            "m": self.m,
            "eps": list(self.eps),
            "vacuous": self.vacuous,
            "verdict": self.verdict,
            "fits": [f.to_dict() for f in self.fits],
        }


def rate_series(Q0: SpectralField, m: int, eps_list, profile=DEFAULT_PROFILE, ells=(1, 2)):
    """Raw norms: {('growth', l): [...], ('decay', l): [...]} and reference norms."""
    grid = Q0.grid
    base = Q0.hat
    out = {}
    for ell in ells:
        out[("growth", ell)] = []
        out[("decay", ell)] = []
    for eps in eps_list:
        mult = profile(eps * grid.wavenumbers)
        for ell in ells:
            out[("growth", ell)].append(np.sqrt(sobolev_norm_sq(base * mult, grid, m + ell)))
            out[("decay", ell)].append(np.sqrt(sobolev_norm_sq(base * (1.0 - mult), grid, m - ell)))
    refs = {ell: np.sqrt(sobolev_norm_sq(base, grid, m - ell)) for ell in ells}
    return out, refs


def verify_rates(Q0: SpectralField, m: int, eps_list, profile=DEFAULT_PROFILE, tol=0.3) -> RateReport:
    """Fit log-log slopes of ||Q0^eps||_{H^{m+l}} (growth, expected >= -l) and
    ||Q0^eps - Q0||_{H^{m-l}} (decay, expected >= l) for l = 1, 2.

    Decay points under ``RATE_FLOOR`` relative to ||Q0||_{H^{m-l}} carry no rate
    information (the data is resolved to round-off there) and are left out of
    the fit; they remain in the report.
    """
    eps_list = [float(e) for e in eps_list]
    if m < 4:
        raise ValueError("m must be >= 4")
    if len(eps_list) < 4 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must hold >= 4 strictly decreasing values")
    if eps_list[0] / eps_list[-1] < 4.0 - 1e-12:
        raise ValueError("eps_list must span at least two dyadic octaves")

    series, refs = rate_series(Q0, m, eps_list, profile)
    fits = []
    vacuous = all(v == 0.0 for ell in (1, 2) for v in series[("decay", ell)])
    for ell in (1, 2):
        g = series[("growth", ell)]
        slope, resid = fit_loglog(eps_list, g)
        fits.append(RateFit(f"growth H^{m + ell}", -ell, slope, resid,
                            slope_verdict(slope, -ell, tol), eps_list, g, [True] * len(g)))
        d = series[("decay", ell)]
        used = [v > RATE_FLOOR * refs[ell] for v in d]
        xs = [e for e, u in zip(eps_list, used) if u]
        ys = [v for v, u in zip(d, used) if u]
        if vacuous or len(xs) < 2:
            fits.append(RateFit(f"decay H^{m - ell}", ell, None, None, "VACUOUS" if vacuous else "INSUFFICIENT",
                                eps_list, d, used))
            continue
        slope, resid = fit_loglog(xs, ys)
        fits.append(RateFit(f"decay H^{m - ell}", ell, slope, resid,
                            slope_verdict(slope, ell, tol), eps_list, d, used))
    return RateReport(m, eps_list, fits, vacuous)
