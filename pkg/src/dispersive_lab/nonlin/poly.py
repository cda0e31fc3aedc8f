"""Canonical complex polynomials in u, v = u_x, w = u_xx and their conjugates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

SLOTS = ("u", "ubar", "v", "vbar", "w", "wbar")
U, UBAR, V, VBAR, W, WBAR = range(6)
SLOT_GROUP = {U: "u", UBAR: "u", V: "v", VBAR: "v", W: "w", WBAR: "w"}


@dataclass(frozen=True, order=True)
class Var:
    """Component j (1-based) in slot u, ubar, v, vbar, w or wbar."""

    j: int
    slot: int

    @property
    def group(self) -> str:
        return SLOT_GROUP[self.slot]

    def conj(self) -> "Var":
        return Var(self.j, self.slot ^ 1)

    def diff(self) -> "Var":
        if self.slot >= W:
            raise ValueError("third derivatives are outside the polynomial class")
        return Var(self.j, self.slot + 2)

    def __str__(self):
        base = SLOTS[self.slot][0] + str(self.j)
        return f"conj({base})" if self.slot % 2 else base


@dataclass(frozen=True)
class Monomial:
    coefficient: complex
    exponents: tuple  # sorted ((Var, power), ...)

    def __post_init__(self):
        if self.coefficient == 0:
            raise ValueError("monomial coefficient must be nonzero")
        if self.degree() < 1:
            raise ValueError("monomial must have positive total degree")

    def degree(self, group: str | None = None) -> int:
        return sum(p for v, p in self.exponents if group is None or v.group == group)

    def variables(self):
        return [v for v, _ in self.exponents]

    def __str__(self):
        parts = [format_coefficient(self.coefficient)]
        for v, p in self.exponents:
            parts.append(f"{v}^{p}" if p > 1 else str(v))
        return "*".join(parts)


def format_coefficient(c: complex) -> str:
    c = complex(c)
    re, im = repr(float(c.real)), float(c.imag)
    sign = "-" if (im < 0 or (im == 0 and str(im).startswith("-"))) else "+"
    return f"({re}{sign}{repr(abs(im))}i)"


def _key(pairs) -> tuple:
    acc = {}
    for v, p in pairs:
        if p:
            acc[v] = acc.get(v, 0) + p
    return tuple(sorted(acc.items()))


class PolyExpr:
    """Sum of monomials with merged duplicates; immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        acc: dict = {}
        for key, c in (terms.items() if isinstance(terms, dict) else (terms or ())):
            key = _key(key)
            acc[key] = acc.get(key, 0j) + complex(c)
        self._terms = {k: c for k, c in sorted(acc.items()) if c != 0}

    @classmethod
    def var(cls, v: Var, coefficient=1.0):
        return cls({((v, 1),): coefficient})

    @classmethod
    def zero(cls):
        return cls()

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def monomials(self) -> list:
        return [Monomial(c, k) for k, c in self._terms.items()]

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        return isinstance(other, PolyExpr) and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __add__(self, other):
        if not isinstance(other, PolyExpr):
            return NotImplemented
        return PolyExpr(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PolyExpr({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, PolyExpr):
            return NotImplemented
        out = []
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                out.append((k1 + k2, c1 * c2))
        return PolyExpr(out)

    __rmul__ = __mul__

    def conj(self):
        return PolyExpr([(tuple((v.conj(), p) for v, p in k), c.conjugate()) for k, c in self._terms.items()])

    def diff(self):
        """d/dx under u' = v, v' = w (and conjugates)."""
        out = []
        for k, c in self._terms.items():
            for i, (v, p) in enumerate(k):
                rest = list(k[:i]) + [(v, p - 1)] + list(k[i + 1:]) + [(v.diff(), 1)]
                out.append((rest, c * p))
        return PolyExpr(out)

    def variables(self) -> set:
        return {v for k in self._terms for v, _ in k}

    def coefficient_l1(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    def __repr__(self):
        return f"PolyExpr({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        return " + ".join(str(m) for m in self.monomials)


def poly_sum(polys: Iterable[PolyExpr]) -> PolyExpr:
    out = PolyExpr()
    for p in polys:
        out = out + p
    return out
