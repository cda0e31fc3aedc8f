"""Pseudospectral laboratory for fourth-order dispersive systems with nonlocal nonlinearities."""
from ._kernels import USE_NUMBA
from .spectral import (Grid, SpectralField, DecayWarning, NonFiniteError, fourier_derivative, sobolev_norm,
                       cumulative_integral, dealias)
from .mollifier import MollifierProfile, mollify, verify_rates
from .system import SystemSpec
from .nonlin import (NonlinearitySpec, parse_spec, load_spec, format_spec, validate_structure, evaluate,
                     builtin)
from .evolve import BlowUp, LinearSymbol, SolverConfig, Trajectory, linear_symbol, step, solve
from .gauge import GaugeConfig, EnergyRecord, gauge_phi, gauged_variable, energy, difference_energy, gronwall_rate
from .linear_gauge import LinearCoefficients, GaugeOperator, build_gauge, evolve_linear, gauged_energy_trace

__version__ = "0.1.0"
