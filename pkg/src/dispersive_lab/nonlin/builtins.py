"""Built-in systems: the fourth-order NLS with derivative terms, the n-field
ultrashort-pulse system, and the Grassmannian curve-flow system.

Matrix expressions are expanded symbolically: each entry of q is a PolyExpr in
the flattened components, so products and x-derivatives are exact.
"""
from __future__ import annotations

from ..system import SystemSpec
from .poly import PolyExpr, Var, U, UBAR, V, VBAR, W, WBAR
from .spec import NonlinearitySpec


class SymMatrix:
    """Small matrix of PolyExpr entries."""

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    def __matmul__(self, other):
        p, q = self.shape
        q2, s = other.shape
        assert q == q2
        return SymMatrix([[sum((self.rows[i][k] * other.rows[k][j] for k in range(q)), PolyExpr())
                           for j in range(s)] for i in range(p)])

    def __add__(self, other):
        return SymMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def scale(self, c):
        return SymMatrix([[a.scale(c) for a in r] for r in self.rows])

    @property
    def H(self):
        p, q = self.shape
        return SymMatrix([[self.rows[i][j].conj() for i in range(p)] for j in range(q)])

    def diff(self):
        return SymMatrix([[a.diff() for a in r] for r in self.rows])

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]


def component_index(j1: int, j2: int, k0: int) -> int:
    """1-based flattened index j = (j2 - 1) k0 + j1."""
    return (j2 - 1) * k0 + j1


def symbolic_q(k0: int, cols: int) -> SymMatrix:
    return SymMatrix([[PolyExpr.var(Var(component_index(i + 1, j + 1, k0), U)) for j in range(cols)]
                      for i in range(k0)])


def split_local(n: int, exprs) -> tuple:
    """Split per-component local polynomials into the w-carrying part and the rest."""
    f1, f2 = [], []
    for p in exprs:
        with_w = {k: c for k, c in p.terms.items() if any(v.group == "w" for v, _ in k)}
        rest = {k: c for k, c in p.terms.items() if k not in with_w}
        f1.append(PolyExpr(with_w))
        f2.append(PolyExpr(rest))
    return tuple(f1), tuple(f2)


def _flatten(mat: SymMatrix, k0: int, n: int):
    out = [PolyExpr() for _ in range(n)]
    p, q = mat.shape
    for i in range(p):
        for j in range(q):
            out[component_index(i + 1, j + 1, k0) - 1] = mat[i, j]
    return out


def builtin_4shro(nu, mu) -> SystemSpec:
    """psi_t - i nu psi_xxxx - i psi_xx = mu1|psi|^2 psi + mu2|psi|^4 psi
    + mu3 psi_x^2 conj(psi) + mu4 |psi_x|^2 psi + mu5 psi^2 conj(psi_xx) + mu6 |psi|^2 psi_xx."""
    mu = [float(m) for m in mu]
    if len(mu) != 6:
        raise ValueError("need six coefficients mu1..mu6")
    if nu == 0:
        raise ValueError("nu must be nonzero")
    u, ub = PolyExpr.var(Var(1, U)), PolyExpr.var(Var(1, UBAR))
    v, vb = PolyExpr.var(Var(1, V)), PolyExpr.var(Var(1, VBAR))
    w, wb = PolyExpr.var(Var(1, W)), PolyExpr.var(Var(1, WBAR))
    f1 = (u * u * wb).scale(mu[4]) + (u * ub * w).scale(mu[5])
    f2 = ((u * u * ub).scale(mu[0]) + (u * u * u * ub * ub).scale(mu[1])
          + (v * v * ub).scale(mu[2]) + (v * vb * u).scale(mu[3]))
    spec = NonlinearitySpec(1, (f1,), (f2,), {})
    return SystemSpec(1, (float(nu),), (0.0,), (1.0,), spec, name="4shro",
                      params={"nu": float(nu), "mu": mu})


def wzy_rhs_local(alpha, eps, gamma, n) -> list:
    """Nonlinear part of q_t for the column vector q, per component."""
    q = symbolic_q(n, 1)
    qs = q.H
    qx, qxx = q.diff(), q.diff().diff()
    qsx = qs.diff()
    qqq = q @ qs @ q
    total = qqq.scale(1j * alpha)
    total = total + (qx @ qs @ q + q @ qs @ qx).scale(-1.5 * eps)
    block = (q @ (qsx @ q).diff() + qx @ qsx @ q
             + (qxx @ qs @ q + q @ qs @ qxx).scale(2.0)
             + (qx @ qs @ qx + q @ qs @ q @ qs @ q).scale(3.0))
    total = total + block.scale(1j * gamma)
    return _flatten(total, n, n)


def builtin_wzy(alpha, eps, gamma, n) -> SystemSpec:
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    if n < 1:
        raise ValueError("n must be >= 1")
    f1, f2 = split_local(n, wzy_rhs_local(alpha, eps, gamma, n))
    spec = NonlinearitySpec(n, f1, f2, {})
    # q_t = i(gamma/2) q_xxxx - (eps/2) q_xxx + i(alpha/2) q_xx + ...
    return SystemSpec(n, (gamma / 2,) * n, (-eps / 2,) * n, (alpha / 2,) * n, spec, name="wzy",
                      params={"alpha": alpha, "eps": eps, "gamma": gamma, "n": n})


def grassmannian_parts(alpha, beta, gamma, k0, n0):
    """Local right side (per component) and the two nonlocal kernels
    M = q*(qq*)_x q and N = q(q*q)_x q*, all symbolic."""
    cols = n0 - k0
    n = k0 * cols
    q = symbolic_q(k0, cols)
    qs = q.H
    qx, qxx = q.diff(), q.diff().diff()
    qsx, qsxx = qs.diff(), qs.diff().diff()
    qqq = q @ qs @ q
    q5 = q @ qs @ q @ qs @ q
    beta_block = ((qxx @ qs @ q).scale(4.0) + (q @ qsxx @ q).scale(2.0) + (q @ qs @ qxx).scale(4.0)
                  + (qx @ qsx @ q).scale(2.0) + (qx @ qs @ qx).scale(6.0) + (q @ qsx @ qx).scale(2.0)
                  + q5.scale(6.0))
    local = qqq.scale(-2j * alpha) + beta_block.scale(1j * beta)
    c = -2j * (beta + 8 * gamma)
    local = local + (qqq.diff().diff() + q5.scale(2.0)).scale(c)
    M = qs @ (q @ qs).diff() @ q
    N = q @ (qs @ q).diff() @ qs
    return _flatten(local, k0, n), M, N, c


def builtin_grassmannian(alpha, beta, gamma, k0, n0) -> SystemSpec:
    if beta == 0:
        raise ValueError("beta must be nonzero")
    if not 1 <= k0 < n0:
        raise ValueError("need 1 <= k0 < n0")
    cols = n0 - k0
    n = k0 * cols
    local, M, N, c = grassmannian_parts(alpha, beta, gamma, k0, n0)
    f1, f2 = split_local(n, local)
    A = {}
    for j1 in range(1, k0 + 1):
        for j2 in range(1, cols + 1):
            j = component_index(j1, j2, k0)
            # q (int M): sum_l q[j1,l] int M[l,j2]
            for l in range(1, cols + 1):
                r = component_index(j1, l, k0)
                A[(j, r)] = A.get((j, r), PolyExpr()) + M[l - 1, j2 - 1].scale(c)
            # (int N) q: sum_l int N[j1,l] q[l,j2]
            for l in range(1, k0 + 1):
                r = component_index(l, j2, k0)
                A[(j, r)] = A.get((j, r), PolyExpr()) + N[j1 - 1, l - 1].scale(c)
    f3 = {key: (a, PolyExpr.var(Var(key[1], U))) for key, a in sorted(A.items()) if not a.is_zero()}
    spec = NonlinearitySpec(n, f1, f2, f3)
    return SystemSpec(n, (float(beta),) * n, (0.0,) * n, (-float(alpha),) * n, spec, name="grassmannian",
                      params={"alpha": alpha, "beta": beta, "gamma": gamma, "k0": k0, "n0": n0})


def grassmannian_matrix_rhs(q, qx, qxx, intM, intN, alpha, beta, gamma):
    """Direct matrix evaluation of the nonlinear right side at one point.

    q, qx, qxx : (k0, n0-k0) complex arrays; intM, intN : the integrated kernels.
    """
    H = lambda a: a.conj().T  # noqa: E731
    qs, qsx, qsxx = H(q), H(qx), H(qxx)
    qqq = q @ qs @ q
    q5 = qqq @ qs @ q
    qqq_xx = (qxx @ qs @ q + q @ qsxx @ q + q @ qs @ qxx
              + 2 * (qx @ qsx @ q + qx @ qs @ qx + q @ qsx @ qx))
    beta_block = (4 * qxx @ qs @ q + 2 * q @ qsxx @ q + 4 * q @ qs @ qxx + 2 * qx @ qsx @ q
                  + 6 * qx @ qs @ qx + 2 * q @ qsx @ qx + 6 * q5)
    out = -2j * alpha * qqq + 1j * beta * beta_block
    out = out - 2j * (beta + 8 * gamma) * (qqq_xx + 2 * q5 + q @ intM + intN @ q)
    return out


def grassmannian_kernels(q, qx):
    """M = q*(qq*)_x q and N = q(q*q)_x q* at one point."""
    H = lambda a: a.conj().T  # noqa: E731
    qs, qsx = H(q), H(qx)
    M = qs @ (qx @ qs + q @ qsx) @ q
    N = q @ (qsx @ q + qs @ qx) @ qs
    return M, N


def builtin(name: str, **params) -> SystemSpec:
    name = name.lower()
    if name == "4shro":
        return builtin_4shro(params.get("nu", 1.0), params.get("mu", (1.0,) * 6))
    if name == "wzy":
        return builtin_wzy(params.get("alpha", 1.0), params.get("eps", 0.0), params.get("gamma", 1.0),
                           int(params.get("n", 2)))
    if name == "grassmannian":
        return builtin_grassmannian(params.get("alpha", 1.0), params.get("beta", 1.0),
                                    params.get("gamma", 0.0), int(params.get("k0", 1)),
                                    int(params.get("n0", 3)))
    raise ValueError(f"unknown built-in system {name!r}")


BUILTINS = ("4shro", "wzy", "grassmannian")
