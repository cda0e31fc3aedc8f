import os
import subprocess
import sys

import numpy as np
import pytest

from dispersive_lab import _kernels

needs_numba = pytest.mark.skipif(_kernels.eval_monomials_numba is None, reason="numba not installed")


def _tables(rng, n_vars=12, n_mono=40, width=4, rows=3, N=257):
    variables = rng.standard_normal((n_vars, N)) + 1j * rng.standard_normal((n_vars, N))
    coeffs = rng.standard_normal(n_mono) + 1j * rng.standard_normal(n_mono)
    idx = rng.integers(0, n_vars, (n_mono, width))
    pw = rng.integers(0, 4, (n_mono, width))
    target = rng.integers(0, rows, n_mono)
    return variables, coeffs, idx, pw, target, rows


@needs_numba
def test_monomials_numba_matches_numpy(rng):
    args = _tables(rng)
    a = _kernels.eval_monomials_numpy(*args)
    b = _kernels.eval_monomials_numba(*args)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


@needs_numba
def test_cumtrapz_numba_matches_numpy(rng):
    v = rng.standard_normal((3, 500)) + 1j * rng.standard_normal((3, 500))
    a = _kernels.cumtrapz_numpy(v, 0.01)
    b = _kernels.cumtrapz_numba(v, 0.01)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))
    assert np.all(a[:, 0] == 0)


def test_cumtrapz_exact_on_linear():
    x = np.linspace(0, 1, 11)
    out = _kernels.cumtrapz(np.ones((1, 11), complex), 0.1)[0].real
    np.testing.assert_allclose(out, x, atol=1e-15)


def test_numpy_fallback_in_subprocess():
    code = ("from dispersive_lab import _kernels, builtin;"
            "from dispersive_lab.evolve import SolverConfig, solve;"
            "from dispersive_lab.experiments import gaussian_packet;"
            "assert not _kernels.USE_NUMBA;"
            "c = SolverConfig(points=128, dt=1e-3, T=0.01, stride=0);"
            "tr = solve(gaussian_packet(c.grid, 1), builtin('4shro'), c);"
            "print(repr(complex(tr.fields[-1].values[0, 64])))")
    env = dict(os.environ, DISPERSIVE_LAB_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    slow = complex(out.stdout.strip())

    from dispersive_lab.evolve import SolverConfig, solve
    from dispersive_lab.experiments import gaussian_packet
    from dispersive_lab.nonlin import builtin
    c = SolverConfig(points=128, dt=1e-3, T=0.01, stride=0)
    fast = solve(gaussian_packet(c.grid, 1), builtin("4shro"), c).fields[-1].values[0, 64]
    assert abs(slow - fast) <= 1e-13
