"""Gauge variable V_j = d^m Q_j + (L / 4a_j) Phi i d^{m-1} Q_j and the energies built on it.

Phi(x) = int_{-inf}^x |Q|^2 is the cumulative mass. The energy is
E_m^2 = ||V||^2 + ||Q||_{H^{m-1}}^2.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels
from .spectral import SpectralField, DecayWarning, DECAY_TOL, sobolev_norm_sq, check_finite
from .rates import exponential_envelope

import warnings


@dataclass(frozen=True)
class GaugeConfig:
    L: float
    m: int
    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if any(x == 0 for x in self.a):
            raise ValueError("every a_j must be nonzero")
        if not self.L > 1 and self.L != 0:
            raise ValueError("L must exceed 1 (L=0 only through GaugeConfig.off)")

    @classmethod
    def off(cls, m, a):
        """Gauge switched off (L = 0): V = d^m Q."""
        return cls(0.0, m, a)

    def with_order(self, m):
        return GaugeConfig(self.L, m, self.a)

    @property
    def weights(self) -> np.ndarray:
        return self.L / (4.0 * np.asarray(self.a))


@dataclass
class EnergyRecord:
    t: float
    energy: float  # E_m
    v_norm: float
    q_norm_lower: float  # ||Q||_{H^{m-1}}
    q_norm_m: float  # ||Q||_{H^m}
    lower: float  # lower bound on E_m^2
    upper: float  # upper bound on E_m^2
    sandwich_constant: float
    phi_sup: float

    def to_dict(self):
        return asdict(self)


def phi_array(values: np.ndarray, dx: float) -> np.ndarray:
    mass = np.sum(np.abs(values) ** 2, axis=0)
    return _kernels.cumtrapz(mass[None, :], dx)[0].real


def gauge_phi(Q: SpectralField, decay_tol: float = DECAY_TOL) -> SpectralField:
    """Phi(x) = int_{-half_width}^x |Q(y)|^2 dy as a one-component field."""
    check_finite(Q)
    notes = list(Q.notes)
    edge = float(np.sqrt(np.sum(np.abs(Q.values[:, 0]) ** 2)))
    if edge ** 2 > decay_tol:
        msg = f"|Q|^2 is {edge ** 2:.3e} at the left edge (decay_tol={decay_tol:.1e})"
        warnings.warn(msg, DecayWarning, stacklevel=2)
        notes.append(msg)
    phi = phi_array(Q.values, Q.grid.dx)
    return SpectralField(Q.grid, phi.astype(np.complex128), notes=notes)


def _derivs(hat, grid, m):
    dm = np.fft.ifft(hat * grid.derivative_symbol(m), axis=-1)
    dm1 = np.fft.ifft(hat * grid.derivative_symbol(m - 1), axis=-1)
    return dm, dm1


def _gauged(hat_w, grid, phi, cfg: GaugeConfig, k):
    dk, dk1 = _derivs(hat_w, grid, k)
    n = hat_w.shape[0]
    if len(cfg.a) != n:
        raise ValueError(f"gauge has {len(cfg.a)} dispersion entries, field has {n} components")
    return dk + (cfg.weights[:, None] * phi[None, :]) * 1j * dk1


def gauged_variable(Q: SpectralField, cfg: GaugeConfig) -> SpectralField:
    check_finite(Q)
    phi = phi_array(Q.values, Q.grid.dx)
    return SpectralField(Q.grid, _gauged(Q.hat, Q.grid, phi, cfg, cfg.m))


def _record(hat_w, grid, phi, l2_sq_q, cfg: GaugeConfig, k, t):
    V = _gauged(hat_w, grid, phi, cfg, k)
    v_sq = float(grid.dx * np.sum(np.abs(V) ** 2))
    low_sq = sobolev_norm_sq(hat_w, grid, k - 1)
    top_sq = sobolev_norm_sq(hat_w, grid, k)
    e_sq = v_sq + low_sq
    phi_sup = float(np.max(np.abs(phi))) if phi.size else 0.0
    # |L Phi / 4 a_j| <= kappa pointwise; triangle + (x+y)^2 <= 2x^2 + 2y^2 on both sides
    kappa = abs(cfg.L) / (4.0 * min(abs(x) for x in cfg.a)) * max(l2_sq_q, phi_sup)
    C = 2.0 * (1.0 + kappa**2)
    return EnergyRecord(float(t), float(np.sqrt(e_sq)), float(np.sqrt(v_sq)), float(np.sqrt(low_sq)),
                        float(np.sqrt(top_sq)), top_sq / C, C * top_sq, C, phi_sup)


def energy(Q: SpectralField, cfg: GaugeConfig, t: float = 0.0) -> EnergyRecord:
    check_finite(Q)
    phi = phi_array(Q.values, Q.grid.dx)
    l2_sq = sobolev_norm_sq(Q.hat, Q.grid, 0)
    rec = _record(Q.hat, Q.grid, phi, l2_sq, cfg, cfg.m, t)
    _assert_sandwich(rec)
    return rec


def difference_energy(Qa: SpectralField, Qb: SpectralField, cfg: GaugeConfig, k: int | None = None,
                      t: float = 0.0) -> EnergyRecord:
    """E_k^{a,b}: gauge built from Qa acting on W = Qa - Qb."""
    if Qa.grid != Qb.grid or Qa.n != Qb.n:
        raise ValueError("Qa and Qb must share grid and component count")
    k = cfg.m if k is None else k
    phi = phi_array(Qa.values, Qa.grid.dx)
    l2_sq = sobolev_norm_sq(Qa.hat, Qa.grid, 0)
    W_hat = Qa.hat - Qb.hat
    rec = _record(W_hat, Qa.grid, phi, l2_sq, cfg, k, t)
    _assert_sandwich(rec)
    return rec


def _assert_sandwich(rec: EnergyRecord, rtol=1e-12):
    e_sq = rec.energy**2
    slack = rtol * max(rec.upper, e_sq, 1e-300)
    if not (rec.lower - slack <= e_sq <= rec.upper + slack):
        raise AssertionError(f"energy sandwich violated: {rec.lower} <= {e_sq} <= {rec.upper}")


@dataclass
class GronwallFit:
    rate: float
    residual: float
    margin: float
    holds: bool
    degenerate: bool
    energies_sq: list
    times: list

    @property
    def verdict(self):
        if self.degenerate:
            return "FAIL"
        return "PASS" if self.holds else "FAIL"

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = self.verdict
        return d


def gronwall_rate(traj, cfg: GaugeConfig) -> GronwallFit:
    """Fit K in E_m(t)^2 <= E_m(0)^2 exp((K + margin) t) over the snapshots."""
    e_sq = [energy(f, cfg, t).energy ** 2 for t, f in zip(traj.times, traj.fields)]
    env = exponential_envelope(traj.times, e_sq)
    return GronwallFit(env.rate, env.residual, env.margin, env.holds, env.degenerate, e_sq,
                       list(map(float, traj.times)))
