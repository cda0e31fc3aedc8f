"""Exponential time differencing (ETDRK4, Cox-Matthews) for

    Q_t = s(xi) Q + F(Q, Q_x, Q_xx),   s_j = -eps^5 xi^4 + i(a_j xi^4 - b_j xi^3 - lambda_j xi^2).

The stiff linear part is propagated exactly in Fourier space; the nonlinearity
is evaluated in physical space and dealiased with the two-thirds rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .gauge import GaugeConfig, phi_array, _record
from .nonlin.evaluate import compile_spec
from .spectral import Grid, SpectralField, sobolev_norm_sq, check_finite
from .system import SystemSpec

C_STAB = 5.0
CONTOUR_POINTS = 32
BLOWUP_AMPLITUDE = 1e6


class BlowUp(RuntimeError):
    """Non-finite or runaway state; ``t`` is the time of the step that failed."""

    def __init__(self, t, reason="non-finite state"):
        self.t = float(t)
        super().__init__(f"blow-up at t={self.t:.6g}: {reason}")


@dataclass(frozen=True, eq=False)
class LinearSymbol:
    table: np.ndarray  # (n, N) complex, FFT order
    eps: float
    grid: Grid

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.table)))

    def propagator(self, t: float) -> np.ndarray:
        return np.exp(self.table * t)

    def negated(self) -> "LinearSymbol":
        """Time-reversed linear flow (only meaningful for eps = 0)."""
        return LinearSymbol(-self.table, self.eps, self.grid)


def linear_symbol(spec: SystemSpec, grid: Grid, eps: float = 0.0) -> LinearSymbol:
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    if any(a == 0 for a in spec.a):
        raise ValueError("every a_j must be nonzero")
    xi = grid.wavenumbers
    a = np.asarray(spec.a)[:, None]
    b = np.asarray(spec.b)[:, None]
    lam = np.asarray(spec.lam)[:, None]
    table = -(eps**5) * xi**4 + 1j * (a * xi**4 - b * xi**3 - lam * xi**2)
    # odd powers have no real meaning at the Nyquist mode
    table[:, grid.nyquist] = -(eps**5) * xi[grid.nyquist] ** 4 + 1j * (a[:, 0] * xi[grid.nyquist] ** 4
                                                                      - lam[:, 0] * xi[grid.nyquist] ** 2)
    if np.any(table.real > 0):
        raise AssertionError("linear symbol is not dissipative")
    table.setflags(write=False)
    return LinearSymbol(table, float(eps), grid)


@dataclass(frozen=True, eq=False)
class ETDCoefficients:
    h: float
    E: np.ndarray
    E2: np.ndarray
    Q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


def etdrk4_coefficients(table: np.ndarray, h: float, contour_points: int = CONTOUR_POINTS) -> ETDCoefficients:
    """phi-function weights for step h; contour mean where |h s| < 1 to avoid cancellation."""
    z = np.asarray(table, dtype=np.complex128) * h
    E = np.exp(z)
    E2 = np.exp(z / 2)

    def direct(z):
        ez, ez2 = np.exp(z), np.exp(z / 2)
        return (h * (ez2 - 1) / z,
                h * (-4 - z + ez * (4 - 3 * z + z * z)) / z**3,
                h * (2 + z + ez * (z - 2)) / z**3,
                h * (-4 - 3 * z - z * z + ez * (4 - z)) / z**3)

    small = np.abs(z) < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        Q, f1, f2, f3 = direct(np.where(small, 1.0, z))
    if small.any():
        roots = np.exp(2j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
        zs = z[small][..., None] + roots
        parts = [p.mean(axis=-1) for p in direct(zs)]
        for arr, val in zip((Q, f1, f2, f3), parts):
            arr[small] = val
    return ETDCoefficients(h, E, E2, Q, f1, f2, f3)


def etdrk4_advance(vhat, t, coef: ETDCoefficients, nonlinear):
    """One ETDRK4 step in Fourier space; nonlinear(vhat, t) returns the transformed right side."""
    h = coef.h
    Nv = nonlinear(vhat, t)
    a = coef.E2 * vhat + coef.Q * Nv
    Na = nonlinear(a, t + h / 2)
    b = coef.E2 * vhat + coef.Q * Na
    Nb = nonlinear(b, t + h / 2)
    c = coef.E2 * a + coef.Q * (2 * Nb - Nv)
    Nc = nonlinear(c, t + h)
    return coef.E * vhat + coef.f1 * Nv + 2 * coef.f2 * (Na + Nb) + coef.f3 * Nc


def make_rhs(spec: SystemSpec, grid: Grid, dealias: bool = True):
    """Fourier-space nonlinearity vhat -> FFT(F(Q, Q_x, Q_xx)), dealiased."""
    comp = compile_spec(spec.nonlinearity)
    d1 = grid.derivative_symbol(1)
    d2 = grid.derivative_symbol(2)
    mask = grid.dealias_mask() if dealias else None
    dx = grid.dx

    def rhs(vhat, t=0.0):
        Q = np.fft.ifft(vhat, axis=-1)
        Qx = np.fft.ifft(vhat * d1, axis=-1)
        Qxx = np.fft.ifft(vhat * d2, axis=-1)
        F = np.fft.fft(comp.physical(Q, Qx, Qxx, dx), axis=-1)
        return F * mask if mask is not None else F

    rhs.is_zero = comp.is_zero
    return rhs


_COEF_CACHE: dict = {}


def _coefficients(symbol: LinearSymbol, dt: float) -> ETDCoefficients:
    key = (id(symbol), float(dt))
    hit = _COEF_CACHE.get(key)
    if hit is None or hit[0] is not symbol:
        if len(_COEF_CACHE) > 64:
            _COEF_CACHE.clear()
        hit = (symbol, etdrk4_coefficients(symbol.table, dt))
        _COEF_CACHE[key] = hit
    return hit[1]


def _guard(vhat, t, amplitude=BLOWUP_AMPLITUDE):
    if not np.all(np.isfinite(vhat)):
        raise BlowUp(t)
    # |Q| <= sum |hat| / N
    if np.max(np.sum(np.abs(vhat), axis=-1)) / vhat.shape[-1] > amplitude:
        raise BlowUp(t, f"amplitude above {amplitude:g}")


def step(state: SpectralField, t: float, dt: float, spec: SystemSpec, symbol: LinearSymbol,
         dealias: bool = True) -> SpectralField:
    if state.grid != symbol.grid:
        raise ValueError("state and symbol live on different grids")
    if state.n != spec.n:
        raise ValueError(f"system has {spec.n} components, state has {state.n}")
    coef = _coefficients(symbol, dt)
    rhs = make_rhs(spec, state.grid, dealias)
    if rhs.is_zero:
        out = coef.E * state.hat
    else:
        out = etdrk4_advance(state.hat, t, coef, rhs)
    _guard(out, t + dt)
    return SpectralField.from_spectrum(state.grid, out)


@dataclass(frozen=True)
class SolverConfig:
    half_width: float = 16.0
    points: int = 512
    dt: float = 1e-4
    T: float = 0.25
    eps_parabolic: float = 0.0
    stride: int = 250
    dealias: bool = True
    c_stab: float = C_STAB
    gauge_L: float = 10.0
    gauge_m: int = 4
    blowup_amplitude: float = BLOWUP_AMPLITUDE

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if not 0.0 <= self.eps_parabolic < 1.0:
            raise ValueError("eps_parabolic must lie in [0, 1)")
        if self.stride < 0:
            raise ValueError("stride must be >= 0")
        Grid(self.half_width, self.points)

    @property
    def grid(self) -> Grid:
        return Grid(self.half_width, self.points)

    @property
    def nsteps(self) -> int:
        return max(1, math.ceil(self.T / self.dt - 1e-9))

    @property
    def dt_effective(self) -> float:
        """Step actually taken, so that the last step lands on T."""
        return self.T / self.nsteps

    def replace(self, **kw) -> "SolverConfig":
        d = asdict(self)
        d.update(kw)
        return SolverConfig(**d)

    def check_budget(self):
        # ETDRK4 handles s exactly; the budget bounds the second-order nonlinear scale
        xi = self.grid.max_wavenumber
        if self.dt_effective * xi**2 > self.c_stab:
            raise ValueError(f"dt={self.dt_effective:.3g} exceeds the stability budget "
                             f"c_stab/xi_max^2 = {self.c_stab / xi**2:.3g}")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    norms: tuple  # H^0 .. H^4
    energy: float  # gauged E_m
    phi_sup: float

    def to_dict(self):
        return {"t": self.t, **{f"H{k}": v for k, v in enumerate(self.norms)},
                "E": self.energy, "phi_sup": self.phi_sup}


def diagnostics(Q: SpectralField, t: float, gauge: GaugeConfig) -> DiagnosticsRecord:
    norms = tuple(float(np.sqrt(sobolev_norm_sq(Q.hat, Q.grid, k))) for k in range(5))
    phi = phi_array(Q.values, Q.grid.dx)
    rec = _record(Q.hat, Q.grid, phi, norms[0] ** 2, gauge, gauge.m, t)
    return DiagnosticsRecord(float(t), norms, rec.energy, rec.phi_sup)


@dataclass(frozen=True)
class Trajectory:
    times: tuple
    fields: tuple
    diagnostics: tuple
    config: SolverConfig
    system: str = "custom"
    blowup_time: float | None = None
    notes: tuple = field(default=())

    def __post_init__(self):
        ts = self.times
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("snapshot times must increase strictly")
        for f in self.fields:
            f.hat.setflags(write=False)
            f.values.setflags(write=False)

    @property
    def blew_up(self) -> bool:
        return self.blowup_time is not None

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    def energy_window_held(self) -> bool:
        """E_4(t) <= 2 E_4(0) at every snapshot."""
        e0 = self.diagnostics[0].energy
        return all(d.energy <= 2 * e0 + 1e-300 for d in self.diagnostics)

    def sup_norm(self, k: int) -> float:
        return max(d.norms[k] for d in self.diagnostics)


def _snapshot_steps(nsteps: int, stride: int):
    if stride == 0:
        return {0, nsteps}
    return set(range(0, nsteps + 1, stride)) | {nsteps}


def solve(Q0: SpectralField, spec: SystemSpec, config: SolverConfig, symbol: LinearSymbol | None = None,
          raise_on_blowup: bool = False) -> Trajectory:
    """March Q0 to T. A blow-up returns the snapshots so far with ``blowup_time`` set."""
    grid = config.grid
    if Q0.grid != grid:
        raise ValueError("Q0 is not on the configured grid")
    if Q0.n != spec.n:
        raise ValueError(f"system has {spec.n} components, data has {Q0.n}")
    check_finite(Q0)
    config.check_budget()
    symbol = symbol or linear_symbol(spec, grid, config.eps_parabolic)
    gauge = GaugeConfig(config.gauge_L, config.gauge_m, spec.a)
    nsteps, h = config.nsteps, config.dt_effective
    coef = etdrk4_coefficients(symbol.table, h)
    rhs = make_rhs(spec, grid, config.dealias)
    keep = _snapshot_steps(nsteps, config.stride)

    vhat = Q0.hat.copy()
    times, fields, diags = [0.0], [SpectralField.from_spectrum(grid, vhat.copy())], []
    diags.append(diagnostics(fields[0], 0.0, gauge))
    blowup = None
    for k in range(1, nsteps + 1):
        t = (k - 1) * h
        vhat = coef.E * vhat if rhs.is_zero else etdrk4_advance(vhat, t, coef, rhs)
        try:
            _guard(vhat, k * h, config.blowup_amplitude)
        except BlowUp as exc:
            if raise_on_blowup:
                raise
            blowup = exc.t
            break
        if k in keep:
            tk = config.T if k == nsteps else k * h
            f = SpectralField.from_spectrum(grid, vhat.copy())
            times.append(tk)
            fields.append(f)
            diags.append(diagnostics(f, tk, gauge))
    return Trajectory(tuple(times), tuple(fields), tuple(diags), config, spec.name, blowup)


def rk4_reference(Q0: SpectralField, spec: SystemSpec, T: float, dt: float, eps: float = 0.0,
                  dealias: bool = True) -> SpectralField:
    """Classical explicit RK4 on the full semi-discrete system (needs dt ~ 1/max|s|)."""
    grid = Q0.grid
    symbol = linear_symbol(spec, grid, eps)
    rhs = make_rhs(spec, grid, dealias)
    L = symbol.table
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    h = T / nsteps

    def f(v):
        return L * v + rhs(v)

    v = Q0.hat.copy()
    for _ in range(nsteps):
        k1 = f(v)
        k2 = f(v + 0.5 * h * k1)
        k3 = f(v + 0.5 * h * k2)
        k4 = f(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(v)):
        raise BlowUp(T, "reference integrator went unstable")
    return SpectralField.from_spectrum(grid, v)
