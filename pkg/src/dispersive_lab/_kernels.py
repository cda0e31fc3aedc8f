"""Hot inner loops, compiled with numba when available.

Set ``DISPERSIVE_LAB_NUMBA=0`` in the environment before import to force the
pure-numpy path. Both implementations are always importable under their
explicit names so they can be compared directly.
"""
import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

USE_NUMBA = njit is not None and os.environ.get("DISPERSIVE_LAB_NUMBA", "1") != "0"


def eval_monomials_numpy(variables, coeffs, var_idx, powers, target, n_targets):
    """Evaluate sums of monomials at every grid point.

    variables : (V, N) complex
    coeffs : (M,) complex
    var_idx, powers : (M, K) int, padded with power 0
    target : (M,) int, output row of each monomial
    """
    out = np.zeros((n_targets, variables.shape[1]), dtype=np.complex128)
    for m in range(coeffs.shape[0]):
        term = np.full(variables.shape[1], coeffs[m], dtype=np.complex128)
        for k in range(var_idx.shape[1]):
            p = powers[m, k]
            if p:
                term *= variables[var_idx[m, k]] ** p
        out[target[m]] += term
    return out


def cumtrapz_numpy(values, dx):
    """Cumulative trapezoid along the last axis, starting at zero."""
    out = np.zeros_like(values)
    out[..., 1:] = np.cumsum(0.5 * dx * (values[..., 1:] + values[..., :-1]), axis=-1)
    return out


if njit is not None:

    @njit(cache=True)
    def eval_monomials_numba(variables, coeffs, var_idx, powers, target, n_targets):
        npts = variables.shape[1]
        out = np.zeros((n_targets, npts), dtype=np.complex128)
        for i in range(npts):
            for m in range(coeffs.shape[0]):
                term = coeffs[m]
                for k in range(var_idx.shape[1]):
                    z = variables[var_idx[m, k], i]
                    for _ in range(powers[m, k]):
                        term *= z
                out[target[m], i] += term
        return out

    @njit(cache=True)
    def cumtrapz_numba(values, dx):
        out = np.zeros_like(values)
        for r in range(values.shape[0]):
            acc = 0.0 * values[r, 0]
            for i in range(1, values.shape[1]):
                acc += 0.5 * dx * (values[r, i] + values[r, i - 1])
                out[r, i] = acc
        return out

else:  # pragma: no cover
    eval_monomials_numba = None
    cumtrapz_numba = None


def eval_monomials(variables, coeffs, var_idx, powers, target, n_targets):
    if USE_NUMBA and coeffs.shape[0]:
        return eval_monomials_numba(variables, coeffs, var_idx, powers, target, n_targets)
    return eval_monomials_numpy(variables, coeffs, var_idx, powers, target, n_targets)


def cumtrapz(values, dx):
    values = np.ascontiguousarray(values, dtype=np.complex128)
    if USE_NUMBA:
        flat = values.reshape(-1, values.shape[-1])
        return cumtrapz_numba(flat, float(dx)).reshape(values.shape)
    return cumtrapz_numpy(values, dx)
