"""Periodic grid, Fourier transforms, spectral derivatives and Sobolev norms.

The real line is replaced by the periodic box ``[-half_width, half_width)``;
every experiment uses data that decays below ``DECAY_TOL`` at the edges.
Wavenumbers are stored in numpy FFT order.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels

DECAY_TOL = 1e-12
MAX_DERIVATIVE = 8


class NonFiniteError(ValueError):
    """Raised when a field contains NaN or inf samples."""


class DecayWarning(UserWarning):
    """Integrand does not decay at the left edge; truncating the line is invalid."""


@dataclass(frozen=True)
class Grid:
    half_width: float
    points: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.points <= 0 or self.points % 2:
            raise ValueError("points must be a positive even integer")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.fft.fftfreq(self.points, d=1.0 / self.points)
        return np.pi * k / self.half_width

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers k in FFT order (Nyquist is -N/2)."""
        return np.rint(np.fft.fftfreq(self.points, d=1.0 / self.points)).astype(int)

    @property
    def nyquist(self) -> int:
        return self.points // 2

    @property
    def max_wavenumber(self) -> float:
        return np.pi * (self.points // 2) / self.half_width

    def derivative_symbol(self, order: int) -> np.ndarray:
        """(i xi)^order with the Nyquist entry zeroed for odd orders."""
        sym = (1j * self.wavenumbers) ** order
        if order % 2:
            sym[self.nyquist] = 0.0
        return sym

    def sobolev_weight(self, k: int) -> np.ndarray:
        """sum_{l<=k} |symbol_l|^2, the Parseval weight of the H^k norm."""
        w = np.zeros(self.points)
        for ell in range(k + 1):
            w += np.abs(self.derivative_symbol(ell)) ** 2
        return w

    def dealias_mask(self) -> np.ndarray:
        # keep |k| <= K with 3K < N: a product's top mode 2K then aliases to 2K - N < -K
        return np.abs(self.mode_index) <= (self.points - 1) // 3


class SpectralField:
    """n-component complex field sampled on a grid.

    Holds physical samples, the FFT mirror, or both. Treat as immutable.
    """

    __slots__ = ("grid", "_values", "_hat", "notes")

    def __init__(self, grid: Grid, values=None, hat=None, notes=()):
        if values is None and hat is None:
            raise ValueError("need physical values or spectrum")
        self.grid = grid
        self._values = None if values is None else _as_components(values, grid)
        self._hat = None if hat is None else _as_components(hat, grid)
        self.notes = tuple(notes)

    @classmethod
    def from_spectrum(cls, grid: Grid, hat, notes=()):
        return cls(grid, hat=hat, notes=notes)

    @classmethod
    def zeros(cls, grid: Grid, n: int = 1):
        return cls(grid, np.zeros((n, grid.points), dtype=np.complex128))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = np.fft.ifft(self._hat, axis=-1)
        return self._values

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = np.fft.fft(self._values, axis=-1)
        return self._hat

    @property
    def n(self) -> int:
        return (self._values if self._values is not None else self._hat).shape[0]

    def __add__(self, other):
        _check_compatible(self, other)
        return SpectralField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_compatible(self, other)
        return SpectralField(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def conj(self):
        return SpectralField(self.grid, np.conj(self.values))

    def __repr__(self):
        return f"SpectralField(n={self.n}, N={self.grid.points}, half_width={self.grid.half_width})"


def _as_components(arr, grid):
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != grid.points or arr.shape[0] < 1:
        raise ValueError(f"expected shape (n, {grid.points}), got {arr.shape}")
    return arr


def _check_compatible(a: SpectralField, b: SpectralField):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.n != b.n:
        raise ValueError(f"component count mismatch: {a.n} vs {b.n}")


def check_finite(f: SpectralField):
    vals = f._values if f._values is not None else f._hat
    bad = ~np.isfinite(vals)
    if bad.any():
        comp, idx = np.argwhere(bad)[0]
        raise NonFiniteError(f"non-finite sample in component {comp} at grid index {idx}")


def _check_order(k):
    if k < 0 or k > MAX_DERIVATIVE:
        raise ValueError(f"derivative order must be in [0, {MAX_DERIVATIVE}], got {k}")


def fourier_derivative(f: SpectralField, order: int) -> SpectralField:
    _check_order(order)
    check_finite(f)
    if order == 0:
        return SpectralField(f.grid, f.values.copy())
    return SpectralField.from_spectrum(f.grid, f.hat * f.grid.derivative_symbol(order))


def sobolev_norm(f: SpectralField, k: int) -> float:
    """H^k norm: sqrt(sum_{l<=k} ||d^l f||_{L2}^2), evaluated by Parseval."""
    _check_order(k)
    check_finite(f)
    return float(np.sqrt(sobolev_norm_sq(f.hat, f.grid, k)))


def sobolev_norm_sq(hat: np.ndarray, grid: Grid, k: int) -> float:
    # rectangle (= periodic trapezoid) rule <-> dx/N * sum |F_k|^2
    w = grid.sobolev_weight(k)
    return float(grid.dx / grid.points * np.sum(w * np.abs(hat) ** 2))


def l2_norm_physical(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.dx * np.sum(np.abs(values) ** 2)))


def cumulative_integral(f: SpectralField, decay_tol: float = DECAY_TOL) -> SpectralField:
    """g(x) = int_{-half_width}^x f(y) dy per component, cumulative trapezoid."""
    check_finite(f)
    notes = []
    edge = np.abs(f.values[:, 0]).max()
    if edge > decay_tol:
        msg = f"integrand is {edge:.3e} at the left edge (decay_tol={decay_tol:.1e})"
        warnings.warn(msg, DecayWarning, stacklevel=2)
        notes.append(msg)
    return SpectralField(f.grid, _kernels.cumtrapz(f.values, f.grid.dx), notes=f.notes + tuple(notes))


def dealias(f: SpectralField) -> SpectralField:
    """Two-thirds rule: zero every mode with 3|k| >= N."""
    return SpectralField.from_spectrum(f.grid, f.hat * f.grid.dealias_mask())


def padded_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product computed on a 3/2-padded grid, truncated back to N modes."""
    _check_compatible(f, g)
    N = f.grid.points
    M = 3 * N // 2
    fh = _pad(f.hat, N, M)
    gh = _pad(g.hat, N, M)
    prod = np.fft.fft(np.fft.ifft(fh, axis=-1) * np.fft.ifft(gh, axis=-1), axis=-1) * (N / M)
    return SpectralField.from_spectrum(f.grid, _truncate(prod, N, M))


def _pad(hat, N, M):
    out = np.zeros(hat.shape[:-1] + (M,), dtype=np.complex128)
    h = N // 2
    out[..., :h] = hat[..., :h]
    out[..., M - h + 1:] = hat[..., h + 1:]
    # Nyquist mode dropped; it is never inside the resolved band
    return out * (M / N)


def _truncate(hat, N, M):
    out = np.zeros(hat.shape[:-1] + (N,), dtype=np.complex128)
    h = N // 2
    out[..., :h] = hat[..., :h]
    out[..., h + 1:] = hat[..., M - h + 1:]
    return out
