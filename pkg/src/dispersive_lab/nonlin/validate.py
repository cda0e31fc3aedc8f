"""Monomial-level check of the growth conditions on F1, F2 and F3.

Rules, for a canonical monomial with u-, v-, w-degrees (a, b, c):

* F1:  c == 1 and a == 2.  |F1| <= c1 |u|^2 |w| forces bidegree exactly (2, 1)
  by scaling u and w independently.
* F2:  a >= 1.  Bounded by |u|^a |v|^b, one term of the (d1, d2) double sum.
* F3A: a + b >= 2.  Mixed terms obey |u|^a |v|^b <= |u|^(a+b) + |v|^(a+b)
  (weighted AM-GM), so they land in both pure sums with unit weight.
* F3B: a >= 1.

Constants are l1 norms of the coefficients, which suffice since |u_i| <= |u|.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .poly import Monomial
from .spec import NonlinearitySpec


@dataclass
class Verdict:
    target: str
    accepted: bool
    offending: list = field(default_factory=list)  # str(monomial) for each rejected one
    reasons: list = field(default_factory=list)
    amgm_monomials: list = field(default_factory=list)

    def to_dict(self):
        return {
            "target": self.target,
            "verdict": "accepted" if self.accepted else "rejected",
            "offending": self.offending,
            "reasons": self.reasons,
            "amgm_monomials": self.amgm_monomials,
        }


@dataclass
class ValidationReport:
    verdicts: list
    c1: dict
    c2: dict
    c3: dict
    degrees: dict

    @property
    def accepted(self) -> bool:
        return all(v.accepted for v in self.verdicts)

    def verdict_for(self, target: str) -> Verdict:
        for v in self.verdicts:
            if v.target == target:
                return v
        raise KeyError(target)

    def to_dict(self):
        return {
            "accepted": self.accepted,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "c1": {str(k): v for k, v in self.c1.items()},
            "c2": {str(k): v for k, v in self.c2.items()},
            "c3": {f"{j},{r}": v for (j, r), v in self.c3.items()},
            "degrees": self.degrees,
        }


def _check_f1(m: Monomial):
    a, c = m.degree("u"), m.degree("w")
    if m.degree("v"):
        return "F1 may not contain v"
    if c != 1:
        return f"w-degree {c} != 1"
    if a != 2:
        return f"u-degree {a} != 2"
    return None


def _check_f2(m: Monomial):
    if m.degree("w"):
        return "F2 may not contain w"
    if m.degree("u") < 1:
        return "u-degree 0: no |u| factor"
    return None


def _check_f3a(m: Monomial):
    if m.degree("w"):
        return "F3A may not contain w"
    if m.degree("u") + m.degree("v") < 2:
        return "total degree < 2"
    return None


def _check_f3b(m: Monomial):
    if m.degree("v") or m.degree("w"):
        return "F3B may depend on u only"
    return None


def _run(target, poly, rule):
    v = Verdict(target, True)
    for m in poly.monomials:
        why = rule(m)
        if why:
            v.accepted = False
            v.offending.append(str(m))
            v.reasons.append(why)
    return v


def validate_structure(spec: NonlinearitySpec) -> ValidationReport:
    verdicts = []
    c1, c2, c3 = {}, {}, {}
    for j in range(1, spec.n + 1):
        verdicts.append(_run(f"F1[{j}]", spec.f1[j - 1], _check_f1))
        c1[j] = spec.f1[j - 1].coefficient_l1()
        verdicts.append(_run(f"F2[{j}]", spec.f2[j - 1], _check_f2))
        c2[j] = spec.f2[j - 1].coefficient_l1()
    for j, r, A, B in spec.f3_pairs():
        va = _run(f"F3A[{j},{r}]", A, _check_f3a)
        va.amgm_monomials = [str(m) for m in A.monomials if m.degree("u") and m.degree("v")]
        verdicts.append(va)
        verdicts.append(_run(f"F3B[{j},{r}]", B, _check_f3b))
        c3[(j, r)] = max(A.coefficient_l1(), B.coefficient_l1())
    return ValidationReport(verdicts, c1, c2, c3, spec.degrees)
