"""Line-oriented text format for nonlinearities (``.fspec`` files).

    spec     := header stmt*
    header   := "n=" int ";"
    stmt     := target "=" polyexpr ";"
    target   := "F1[" j "]" | "F2[" j "]" | "F3A[" j "," r "]" | "F3B[" j "," r "]"
    polyexpr := term (("+" | "-") term)*
    term     := (coeff | factor) ("*" factor)*
    factor   := var ("^" int)?
    var      := ("u" | "v" | "w") idx | "conj(" var ")"
    coeff    := "(" real ("+" | "-") real "i)" | real

Repeated targets accumulate. ``#`` starts a comment.
"""
from __future__ import annotations

import re
from pathlib import Path

from .poly import PolyExpr, Var, U, V, W, format_coefficient
from .spec import NonlinearitySpec, SpecError, ALLOWED


class ParseError(SpecError):
    def __init__(self, msg, line=None, col=None):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[=;\[\],()+\-*^])"
)
_VAR = re.compile(r"^([uvw])(\d+)$")
_SLOT = {"u": U, "v": V, "w": W}


def _tokenize(text):
    pos, line, line_start = 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append((kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    out.append(("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[self.i + k]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def expect(self, value):
        t = self.next()
        if t[1] != value:
            self.error(f"expected {value!r}, found {t[1] or 'end of input'!r}", t)
        return t

    def integer(self):
        t = self.next()
        if t[0] != "num" or not t[1].isdigit():
            self.error(f"expected integer, found {t[1]!r}", t)
        return int(t[1])

    def real(self):
        sign = 1.0
        if self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            sign = -1.0 if self.next()[1] == "-" else 1.0
        t = self.next()
        if t[0] != "num":
            self.error(f"expected number, found {t[1]!r}", t)
        return sign * float(t[1])

    def parse(self):
        t = self.next()
        if t[1] != "n":
            self.error("spec must start with 'n=<int>;'", t)
        self.expect("=")
        n = self.integer()
        if n < 1:
            self.error("n must be >= 1")
        self.expect(";")
        self.n = n
        f1 = [PolyExpr() for _ in range(n)]
        f2 = [PolyExpr() for _ in range(n)]
        f3a, f3b = {}, {}
        while self.peek()[0] != "eof":
            kind, idx, tok = self.target()
            self.expect("=")
            poly = self.polyexpr(kind)
            self.expect(";")
            if kind == "F1":
                f1[idx[0] - 1] += poly
            elif kind == "F2":
                f2[idx[0] - 1] += poly
            elif kind == "F3A":
                f3a[idx] = f3a.get(idx, PolyExpr()) + poly
            else:
                f3b[idx] = f3b.get(idx, PolyExpr()) + poly
        f3 = {}
        for key in sorted(set(f3a) | set(f3b)):
            if key not in f3a or key not in f3b:
                raise ParseError(f"F3 pair {key} needs both F3A and F3B")
            f3[key] = (f3a[key], f3b[key])
        return NonlinearitySpec(n, tuple(f1), tuple(f2), f3)

    def target(self):
        t = self.next()
        if t[1] not in ALLOWED:
            self.error(f"expected target F1/F2/F3A/F3B, found {t[1]!r}", t)
        kind = t[1]
        self.expect("[")
        j = self.integer()
        idx = (j,)
        if kind.startswith("F3"):
            self.expect(",")
            idx = (j, self.integer())
        self.expect("]")
        for k in idx:
            if not 1 <= k <= self.n:
                self.error(f"index {k} out of range 1..{self.n}", t)
        return kind, idx, t

    def polyexpr(self, kind):
        lead = 1
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.next()
            lead = -1
        poly = self.term(kind).scale(lead)
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            sign = -1 if self.next()[1] == "-" else 1
            poly = poly + self.term(kind).scale(sign)
        return poly

    def term(self, kind):
        start = self.peek()
        coeff = 1.0 + 0j
        pairs = []
        if start[1] == "(" or start[0] == "num":
            coeff = self.coefficient()
        else:
            pairs.append(self.factor(kind))
        while self.peek()[1] == "*":
            self.next()
            pairs.append(self.factor(kind))
        if not pairs:
            self.error("constant terms are not allowed (every monomial needs positive degree)", start)
        if coeff == 0:
            return PolyExpr()
        return PolyExpr({tuple(pairs): coeff})

    def coefficient(self):
        if self.peek()[1] != "(":
            return complex(self.real())
        self.next()
        re_part = self.real()
        t = self.next()
        if t[1] not in ("+", "-") or t[0] != "op":
            self.error("complex literal must look like (re+imi)", t)
        im = self.real() * (-1.0 if t[1] == "-" else 1.0)
        t = self.next()
        if t[1] != "i":
            self.error("complex literal must end with 'i'", t)
        self.expect(")")
        return complex(re_part, im)

    def factor(self, kind):
        v = self.var(kind)
        power = 1
        if self.peek()[1] == "^":
            self.next()
            power = self.integer()
            if power < 1:
                self.error("exponent must be positive")
        return (v, power)

    def var(self, kind):
        t = self.next()
        if t[1] == "conj":
            self.expect("(")
            v = self.var(kind)
            self.expect(")")
            return v.conj()
        m = _VAR.match(t[1])
        if not m:
            self.error(f"expected variable u<j>, v<j>, w<j> or conj(...), found {t[1]!r}", t)
        slot, j = m.group(1), int(m.group(2))
        if not 1 <= j <= self.n:
            self.error(f"component {j} out of range 1..{self.n}", t)
        if slot not in ALLOWED[kind]:
            self.error(f"slot {slot} is not allowed in {kind}", t)
        return Var(j, _SLOT[slot])


def parse_spec(text: str) -> NonlinearitySpec:
    return _Parser(text).parse()


def load_spec(path) -> NonlinearitySpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _format_poly(p: PolyExpr) -> str:
    return " + ".join(str(m) for m in p.monomials)


def format_spec(spec: NonlinearitySpec) -> str:
    """Print a spec in the DSL; parse(format(spec)) == spec."""
    lines = [f"n={spec.n};"]
    for name, polys in (("F1", spec.f1), ("F2", spec.f2)):
        for j, p in enumerate(polys, start=1):
            if not p.is_zero():
                lines.append(f"{name}[{j}] = {_format_poly(p)};")
    for j, r, A, B in spec.f3_pairs():
        lines.append(f"F3A[{j},{r}] = {_format_poly(A)};")
        lines.append(f"F3B[{j},{r}] = {_format_poly(B)};")
    return "\n".join(lines) + "\n"


__all__ = ["ParseError", "parse_spec", "load_spec", "format_spec", "format_coefficient"]
