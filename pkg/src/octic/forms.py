"""Plane arrangements given as products of linear forms.

An equation like ``u^2 = xy(x+y+w)z`` is a product of factors, each linear
in the projective variables x, y, z, t with coefficients polynomial in the
parameter w.  Additive constant terms (including bare ``w``) are read in
the affine chart t = 1, so they pick up a factor of t on the way in.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exact import Poly, Rational

VARIABLES = ("x", "y", "z", "t")
PARAMETER = "w"


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NonLinearFactor(ValueError):
    def __init__(self, factor_index: int, detail: str = ""):
        msg = f"factor {factor_index} is not linear in x,y,z,t"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.factor_index = factor_index


class DuplicateFactor(ValueError):
    def __init__(self, i: int, j: int):
        super().__init__(f"factors {i} and {j} are proportional")
        self.indices = (i, j)


class FormVanishes(ValueError):
    def __init__(self, index: int, w0):
        super().__init__(f"form {index} vanishes identically at w = {w0}")
        self.index = index


class LinearForm:
    """a·x + b·y + c·z + d·t with a,b,c,d in Q[w]."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = []
        for c in coeffs:
            if isinstance(c, Poly):
                cs.append(c)
            else:
                cs.append(Poly([c]) if c else Poly())
        if len(cs) != 4:
            raise ValueError("a linear form needs 4 coefficients")
        self.coeffs = tuple(cs)

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def is_constant(self) -> bool:
        # no dependence on the parameter
        return all(c.degree <= 0 for c in self.coeffs)

    def apply(self, point: Sequence[Poly]) -> Poly:
        acc = Poly()
        for c, p in zip(self.coeffs, point):
            pv = p if isinstance(p, Poly) else Poly([p])
            acc = acc + c * pv
        return acc

    def evaluate_at(self, w0) -> "LinearForm":
        return LinearForm([Poly([c.evaluate(w0)]) for c in self.coeffs])

    def __eq__(self, other):
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(c.coeffs for c in self.coeffs))

    def proportional_to(self, other: "LinearForm") -> bool:
        for i in range(4):
            for j in range(i + 1, 4):
                if self.coeffs[i] * other.coeffs[j] != self.coeffs[j] * other.coeffs[i]:
                    return False
        return True

    def text(self) -> str:
        """Compact printable form; round-trips through parse_equation."""
        parts = []
        for vi, var in enumerate(VARIABLES):
            poly = self.coeffs[vi]
            for k, c in enumerate(poly.coeffs):
                if c == 0:
                    continue
                parts.append((c, k, var))
        if not parts:
            return "0"
        out = []
        for c, k, var in parts:
            wpart = "" if k == 0 else (PARAMETER if k == 1 else f"{PARAMETER}^{k}")
            vpart = "" if var == "t" else var
            if var == "t" and k == 0:
                body = _coeff_str(c, bare_ok=True)
            else:
                body = _coeff_str(c, bare_ok=False) + wpart + vpart
            if out:
                if body.startswith("-"):
                    out.append("-")
                    body = body[1:]
                else:
                    out.append("+")
            out.append(body)
        return "".join(out)

    def __repr__(self):
        return f"LinearForm({self.text()})"


def _coeff_str(c: Fraction, bare_ok: bool) -> str:
    if bare_ok:
        return str(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if c == 1:
        return ""
    if c == -1:
        return "-"
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class ParamArrangement:
    """One-parameter family of plane arrangements, 3 to 8 forms."""

    def __init__(self, forms: Sequence[LinearForm]):
        forms = list(forms)
        if not 3 <= len(forms) <= 8:
            raise ValueError(f"expected 3..8 forms, got {len(forms)}")
        for i, f in enumerate(forms):
            if f.is_zero():
                raise ValueError(f"form {i} is identically zero")
        for i in range(len(forms)):
            for j in range(i + 1, len(forms)):
                if forms[i].proportional_to(forms[j]):
                    raise DuplicateFactor(i, j)
        self.forms = forms
        self.parameter_name = PARAMETER
        self.variable_names = VARIABLES

    def __len__(self):
        return len(self.forms)

    def text(self) -> str:
        return "".join(_factor_text(f) for f in self.forms)

    def to_json(self) -> dict:
        return {
            "forms": [
                [[_frac_json(c) for c in poly.coeffs] for poly in f.coeffs]
                for f in self.forms
            ]
        }

    @staticmethod
    def from_json(data: dict) -> "ParamArrangement":
        forms = []
        for row in data["forms"]:
            forms.append(LinearForm([Poly([Fraction(c) for c in poly]) for poly in row]))
        return ParamArrangement(forms)

    def __repr__(self):
        return f"ParamArrangement({self.text()})"


class Arrangement:
    """Specialized arrangement: every coefficient a plain rational.

    Proportional pairs are allowed here; coincident planes in a degenerate
    fiber get reported by the incidence checks, not at construction.
    """

    def __init__(self, forms: Sequence[LinearForm]):
        forms = list(forms)
        for i, f in enumerate(forms):
            if not f.is_constant():
                raise ValueError(f"form {i} still depends on the parameter")
            if f.is_zero():
                raise ValueError(f"form {i} is identically zero")
        self.forms = forms
        self.variable_names = VARIABLES

    def __len__(self):
        return len(self.forms)

    def coefficient_rows(self) -> list[list[Fraction]]:
        return [
            [c.coeffs[0] if c.coeffs else Fraction(0) for c in f.coeffs]
            for f in self.forms
        ]

    def __repr__(self):
        return f"Arrangement({''.join(_factor_text(f) for f in self.forms)})"


def _factor_text(f: LinearForm) -> str:
    t = f.text()
    nontrivial = sum(1 for poly in f.coeffs for c in poly.coeffs if c != 0)
    if nontrivial == 1 and t in ("x", "y", "z", "t"):
        return t
    return f"({t})"


def _frac_json(c: Fraction) -> str:
    return str(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def specialize(a: ParamArrangement, w0) -> Arrangement:
    w0 = Fraction(w0) if not isinstance(w0, Fraction) else w0
    out = []
    for i, f in enumerate(a.forms):
        g = f.evaluate_at(w0)
        if g.is_zero():
            raise FormVanishes(i, w0)
        out.append(g)
    return Arrangement(out)


# ---------------------------------------------------------------------------
# parsing


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return ""
        return self.text[self.pos]

    def take(self) -> str:
        c = self.peek()
        if c:
            self.pos += 1
        return c

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.pos)


def parse_equation(text: str) -> ParamArrangement:
    """Parse a product of linear factors into a parameterized arrangement.

    Accepts an optional "u^2 =" prefix, implicit or explicit multiplication,
    and caret exponents on factors (which expand to repeated factors and are
    therefore rejected as duplicates).
    """
    stripped = text
    eq = stripped.find("=")
    if eq >= 0:
        head = stripped[:eq].replace(" ", "")
        if head not in ("u^2", "u2", "u**2", "u²"):
            raise ParseError(f"unexpected left-hand side {head!r}", 0)
        stripped = stripped[eq + 1 :]
        offset = eq + 1
    else:
        offset = 0
    sc = _Scanner(stripped)
    raw_factors: list[tuple] = []  # (vector-of-4-Polys, factor) before scalars
    pending_scalar = Poly.const(1)

    def flush_pending_onto_last():
        nonlocal pending_scalar
        if pending_scalar == Poly.const(1):
            return
        if not raw_factors:
            raise ParseError("dangling coefficient with no factor", offset + sc.pos)
        last = raw_factors[-1]
        raw_factors[-1] = tuple(pending_scalar * c for c in last)
        pending_scalar = Poly.const(1)

    while True:
        c = sc.peek()
        if c == "":
            break
        if c == "*":
            sc.take()
            continue
        if c == ")":
            raise sc.error("unbalanced ')'")
        if c == "(":
            try:
                vec = _parse_paren(sc)
            except NonLinearFactor as e:
                raise NonLinearFactor(len(raw_factors), str(e)) from None
            count = _maybe_exponent(sc)
            for _ in range(count):
                raw_factors.append(tuple(pending_scalar * co for co in vec))
            pending_scalar = Poly.const(1)
            continue
        if c in "xyzt":
            sc.take()
            vec = [Poly(), Poly(), Poly(), Poly()]
            vec["xyzt".index(c)] = Poly.const(1)
            count = _maybe_exponent(sc)
            for _ in range(count):
                raw_factors.append(tuple(pending_scalar * co for co in vec))
            pending_scalar = Poly.const(1)
            continue
        if c == PARAMETER:
            sc.take()
            count = _maybe_exponent(sc)
            pending_scalar = pending_scalar * (Poly.x() ** count)
            continue
        if c.isdigit():
            n = _parse_int(sc)
            pending_scalar = pending_scalar * Poly.const(n)
            continue
        raise sc.error(f"unexpected character {c!r}")
    flush_pending_onto_last()

    if not raw_factors:
        raise ParseError("empty product", offset)

    forms = []
    for idx, vec in enumerate(raw_factors):
        degree_part = vec[:3]
        if all(not p for p in degree_part) and not vec[3]:
            raise NonLinearFactor(idx, "zero factor")
        forms.append(LinearForm(list(vec)))
    for i in range(len(forms)):
        for j in range(i + 1, len(forms)):
            if forms[i].proportional_to(forms[j]):
                raise DuplicateFactor(i, j)
    return ParamArrangement(forms)


def _parse_int(sc: _Scanner) -> Fraction:
    start = sc.pos
    digits = ""
    while sc.peek().isdigit():
        digits += sc.take()
    if not digits:
        raise ParseError("expected an integer", start)
    if sc.peek() == "/":
        sc.take()
        dd = ""
        while sc.peek().isdigit():
            dd += sc.take()
        if not dd:
            raise sc.error("expected a denominator")
        return Fraction(int(digits), int(dd))
    return Fraction(int(digits))


def _maybe_exponent(sc: _Scanner) -> int:
    if sc.peek() != "^":
        return 1
    sc.take()
    if not sc.peek().isdigit():
        raise sc.error("expected an exponent")
    n = _parse_int(sc)
    if n.denominator != 1 or n <= 0:
        raise sc.error("exponent must be a positive integer")
    return int(n)


def _parse_paren(sc: _Scanner):
    """One parenthesized linear combination.  Terms without a projective
    variable are constant terms and land on t (chart t = 1)."""
    assert sc.take() == "("
    vec = [Poly(), Poly(), Poly(), Poly()]
    sign = 1
    empty = True
    while True:
        c = sc.peek()
        if c == "":
            raise sc.error("unterminated '('")
        if c == ")":
            sc.take()
            break
        if c == "+":
            sc.take()
            sign = 1
            continue
        if c == "-":
            sc.take()
            sign = -1
            continue
        coeff, var = _parse_term(sc)
        if sign < 0:
            coeff = -coeff
        if var is None:
            # additive constant: homogenize onto t
            vec[3] = vec[3] + coeff
        else:
            vec[VARIABLES.index(var)] = vec[VARIABLES.index(var)] + coeff
        sign = 1
        empty = False
    if empty:
        raise sc.error("empty parentheses")
    return tuple(vec)


def _parse_term(sc: _Scanner):
    """One product of an optional rational coefficient, powers of w, and at
    most one projective variable.  Returns (coefficient Poly in w, var|None).
    """
    coeff = Poly.const(1)
    var = None
    saw_anything = False
    while True:
        c = sc.peek()
        if c.isdigit():
            coeff = coeff * Poly.const(_parse_int(sc))
            saw_anything = True
            continue
        if c == PARAMETER:
            sc.take()
            k = _maybe_exponent(sc)
            coeff = coeff * (Poly.x() ** k)
            saw_anything = True
            continue
        if c in "xyzt":
            sc.take()
            k = _maybe_exponent(sc)
            if var is not None or k > 1:
                raise NonLinearFactor(-1, "term of degree > 1")
            var = c
            saw_anything = True
            continue
        break
    if not saw_anything:
        raise sc.error("expected a term")
    return coeff, var
