"""Pointwise evaluation of F = F1 + F2 + F3 on spectral fields."""
from __future__ import annotations

import numpy as np

from .. import _kernels
from ..spectral import SpectralField, dealias as _dealias, DECAY_TOL
from .poly import PolyExpr
from .spec import NonlinearitySpec


class CompiledNonlinearity:
    """Flattened monomial tables for the evaluation kernel.

    Rows 0..n-1 hold F1_j + F2_j, then one row per nonlocal A and one per B.
    """

    def __init__(self, spec: NonlinearitySpec):
        self.spec = spec
        self.n = spec.n
        self.pairs = [(j, r) for j, r, _, _ in spec.f3_pairs()]
        rows = [spec.f1[j] + spec.f2[j] for j in range(spec.n)]
        rows += [A for _, _, A, _ in spec.f3_pairs()]
        rows += [B for _, _, _, B in spec.f3_pairs()]
        self.n_rows = len(rows)
        coeffs, idx, pw, target = [], [], [], []
        width = max([len(k) for p in rows for k in p.terms] or [1])
        for row, p in enumerate(rows):
            for key, c in p.terms.items():
                coeffs.append(c)
                target.append(row)
                idx.append([6 * (v.j - 1) + v.slot for v, _ in key] + [0] * (width - len(key)))
                pw.append([e for _, e in key] + [0] * (width - len(key)))
        self.coeffs = np.array(coeffs, dtype=np.complex128)
        self.var_idx = np.array(idx, dtype=np.int64).reshape(-1, width)
        self.powers = np.array(pw, dtype=np.int64).reshape(-1, width)
        self.target = np.array(target, dtype=np.int64)
        self.is_zero = spec.is_zero()

    def variables(self, Q, Qx, Qxx):
        n, N = Q.shape
        out = np.empty((6 * n, N), dtype=np.complex128)
        out[0::6] = Q
        out[1::6] = np.conj(Q)
        out[2::6] = Qx
        out[3::6] = np.conj(Qx)
        out[4::6] = Qxx
        out[5::6] = np.conj(Qxx)
        return out

    def rows(self, Q, Qx, Qxx):
        return _kernels.eval_monomials(self.variables(Q, Qx, Qxx), self.coeffs, self.var_idx,
                                       self.powers, self.target, self.n_rows)

    def physical(self, Q, Qx, Qxx, dx):
        """F at every grid point, arrays in and out (no dealiasing)."""
        if self.is_zero:
            return np.zeros_like(Q)
        vals = self.rows(Q, Qx, Qxx)
        F = vals[: self.n].copy()
        P = len(self.pairs)
        if P:
            A = vals[self.n: self.n + P]
            B = vals[self.n + P:]
            intA = _kernels.cumtrapz(A, dx)
            for p, (j, _) in enumerate(self.pairs):
                F[j - 1] += intA[p] * B[p]
        return F


_CACHE: dict = {}


def compile_spec(spec: NonlinearitySpec) -> CompiledNonlinearity:
    key = id(spec)
    hit = _CACHE.get(key)
    if hit is None or hit.spec is not spec:
        hit = CompiledNonlinearity(spec)
        _CACHE[key] = hit
    return hit


def evaluate(spec: NonlinearitySpec, Q: SpectralField, Qx: SpectralField, Qxx: SpectralField,
             dealias: bool = True) -> SpectralField:
    for f in (Qx, Qxx):
        if f.grid != Q.grid:
            raise ValueError("Q, Qx and Qxx must share a grid")
        if f.n != Q.n:
            raise ValueError("Q, Qx and Qxx must share the component count")
    if Q.n != spec.n:
        raise ValueError(f"spec has {spec.n} components, fields have {Q.n}")
    comp = compile_spec(spec)
    notes = ()
    if comp.pairs and np.abs(Q.values[:, 0]).max() > DECAY_TOL:
        notes = (f"state is {np.abs(Q.values[:, 0]).max():.3e} at the left edge; nonlocal terms truncated",)
    F = SpectralField(Q.grid, comp.physical(Q.values, Qx.values, Qxx.values, Q.grid.dx), notes=notes)
    return _dealias(F) if dealias else F


def evaluate_poly(p: PolyExpr, n: int, Q, Qx=None, Qxx=None) -> np.ndarray:
    """Evaluate one polynomial on raw sample arrays of shape (n, K)."""
    Q = np.asarray(Q, dtype=np.complex128)
    Qx = np.zeros_like(Q) if Qx is None else np.asarray(Qx, dtype=np.complex128)
    Qxx = np.zeros_like(Q) if Qxx is None else np.asarray(Qxx, dtype=np.complex128)
    spec = NonlinearitySpec.empty(n)
    comp = CompiledNonlinearity(spec)
    comp.n_rows = 1
    coeffs, idx, pw = [], [], []
    width = max([len(k) for k in p.terms] or [1])
    for key, c in p.terms.items():
        coeffs.append(c)
        idx.append([6 * (v.j - 1) + v.slot for v, _ in key] + [0] * (width - len(key)))
        pw.append([e for _, e in key] + [0] * (width - len(key)))
    return _kernels.eval_monomials(
        comp.variables(Q, Qx, Qxx), np.array(coeffs, dtype=np.complex128),
        np.array(idx, dtype=np.int64).reshape(-1, width), np.array(pw, dtype=np.int64).reshape(-1, width),
        np.zeros(len(coeffs), dtype=np.int64), 1)[0]
