"""Dispersion data plus nonlinearity of the evolution system."""
from __future__ import annotations

from dataclasses import dataclass, field



@dataclass(frozen=True)
class SystemSpec:
    """(d_t - i M_a d^4 - M_b d^3 - i M_lambda d^2) Q = F(Q, Q_x, Q_xx)."""

    n: int
    a: tuple
    b: tuple
    lam: tuple
    nonlinearity: "NonlinearitySpec"  # noqa: F821
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "lam", tuple(float(x) for x in self.lam))
        if not (len(self.a) == len(self.b) == len(self.lam) == self.n):
            raise ValueError("a, b, lambda need one entry per component")
        if any(x == 0 for x in self.a):
            raise ValueError("every a_j must be nonzero")
        if self.nonlinearity.n != self.n:
            raise ValueError("nonlinearity component count differs from n")

    def linear(self):
        """Same dispersion, F = 0."""
        from .nonlin.spec import NonlinearitySpec

        return SystemSpec(self.n, self.a, self.b, self.lam, NonlinearitySpec.empty(self.n),
                          name=self.name + "-linear", params=self.params)
