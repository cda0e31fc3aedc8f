"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""
import argparse
import time

import numpy as np

from dispersive_lab import _kernels
from dispersive_lab.evolve import SolverConfig, make_rhs
from dispersive_lab.experiments import gaussian_packet
from dispersive_lab.nonlin import builtin
from dispersive_lab.nonlin.evaluate import compile_spec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()

    sys_ = builtin("grassmannian", k0=2, n0=4)
    comp = compile_spec(sys_.nonlinearity)
    cfg = SolverConfig(points=args.points)
    Q = gaussian_packet(cfg.grid, sys_.n)
    variables = comp.variables(Q.values, Q.values, Q.values)
    table = (variables, comp.coeffs, comp.var_idx, comp.powers, comp.target, comp.n_rows)
    A = np.ascontiguousarray(np.tile(Q.values, (4, 1)))

    cases = {
        "monomials": (lambda: _kernels.eval_monomials_numpy(*table),
                      lambda: _kernels.eval_monomials_numba(*table)),
        "cumtrapz": (lambda: _kernels.cumtrapz_numpy(A, cfg.grid.dx),
                     lambda: _kernels.cumtrapz_numba(A, cfg.grid.dx)),
    }
    print(f"grassmannian k0=2 n0=4: {len(comp.coeffs)} monomials, N={args.points}")
    print(f"{'kernel':<12}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, (slow, fast) in cases.items():
        if _kernels.eval_monomials_numba is None:
            print(f"{name:<12}{best_of(slow, args.repeat) * 1e3:>12.3f}{'n/a':>12}")
            continue
        fast()  # compile
        ts, tf = best_of(slow, args.repeat), best_of(fast, args.repeat)
        print(f"{name:<12}{ts * 1e3:>12.3f}{tf * 1e3:>12.3f}{ts / tf:>10.1f}")
    rhs = make_rhs(sys_, cfg.grid)
    rhs(Q.hat, 0.0)
    t = best_of(lambda: rhs(Q.hat, 0.0), args.repeat)
    print(f"full right side (active backend, numba={_kernels.USE_NUMBA}): {t * 1e3:.3f} ms")


if __name__ == "__main__":
    main()
