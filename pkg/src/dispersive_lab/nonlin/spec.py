"""Nonlinearity F = F1 + F2 + F3 of an n-component system."""
from __future__ import annotations

from dataclasses import dataclass, field

from .poly import PolyExpr

# slot groups admitted in each sub-expression
ALLOWED = {
    "F1": {"u", "w"},
    "F2": {"u", "v"},
    "F3A": {"u", "v"},
    "F3B": {"u"},
}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class NonlinearitySpec:
    n: int
    f1: tuple
    f2: tuple
    f3: dict = field(default_factory=dict)  # (j, r) -> (A, B), 1-based

    def __post_init__(self):
        if self.n < 1:
            raise SpecError("n must be >= 1")
        if len(self.f1) != self.n or len(self.f2) != self.n:
            raise SpecError("f1 and f2 need one entry per component")
        for j in range(self.n):
            _check_slots(self.f1[j], "F1", self.n, f"F1[{j + 1}]")
            _check_slots(self.f2[j], "F2", self.n, f"F2[{j + 1}]")
        for (j, r), (A, B) in self.f3.items():
            if not (1 <= j <= self.n and 1 <= r <= self.n):
                raise SpecError(f"F3 index ({j},{r}) out of range 1..{self.n}")
            _check_slots(A, "F3A", self.n, f"F3A[{j},{r}]")
            _check_slots(B, "F3B", self.n, f"F3B[{j},{r}]")

    @classmethod
    def empty(cls, n: int):
        return cls(n, tuple(PolyExpr() for _ in range(n)), tuple(PolyExpr() for _ in range(n)), {})

    def f3_pairs(self):
        """Nonzero (j, r, A, B) in sorted order."""
        return [(j, r, A, B) for (j, r), (A, B) in sorted(self.f3.items()) if not (A.is_zero() or B.is_zero())]

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.f1 + self.f2) and not self.f3_pairs()

    @property
    def degrees(self) -> dict:
        """Excess degrees d1..d5 read off the monomials."""
        d = {"d1": 0, "d2": 0, "d3": 0, "d4": 0, "d5": 0}
        for p in self.f2:
            for m in p.monomials:
                d["d1"] = max(d["d1"], m.degree("u") - 1)
                d["d2"] = max(d["d2"], m.degree("v"))
        for _, _, A, B in self.f3_pairs():
            for m in A.monomials:
                tot = m.degree()
                if m.degree("u"):
                    d["d3"] = max(d["d3"], tot - 2)
                if m.degree("v"):
                    d["d4"] = max(d["d4"], tot - 2)
            for m in B.monomials:
                d["d5"] = max(d["d5"], m.degree() - 1)
        return d

    def __eq__(self, other):
        if not isinstance(other, NonlinearitySpec):
            return NotImplemented
        return (self.n == other.n and self.f1 == other.f1 and self.f2 == other.f2
                and _pairs(self) == _pairs(other))

    def __hash__(self):
        return hash((self.n, self.f1, self.f2))


def _pairs(spec):
    return [(j, r, A, B) for j, r, A, B in spec.f3_pairs()]


def _check_slots(p: PolyExpr, which: str, n: int, where: str):
    for v in p.variables():
        if v.group not in ALLOWED[which]:
            raise SpecError(f"{where}: slot {v.group} is not allowed in {which}")
        if not 1 <= v.j <= n:
            raise SpecError(f"{where}: component {v.j} out of range 1..{n}")
