"""Exact arithmetic kernel.

Rationals are `fractions.Fraction` (arbitrary precision, always reduced,
positive denominator, so the invariants come for free).  On top of that:
dense univariate polynomials over Q, their fraction field, and dense
matrices over either scalar domain with deterministic row reduction.

Everything here is immutable and pure; no floats anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Sequence, Union

Rational = Fraction


class ZeroPolynomial(ValueError):
    pass


class BothZero(ValueError):
    pass


def _coerce_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to a rational")


class Poly:
    """Univariate polynomial over Q, coefficients ascending.

    The zero polynomial has an empty coefficient list; otherwise the
    leading coefficient is nonzero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_coerce_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors ------------------------------------------------

    @staticmethod
    def const(c) -> "Poly":
        return Poly([_coerce_fraction(c)])

    @staticmethod
    def x() -> "Poly":
        return Poly([0, 1])

    # -- basic queries -----------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        # degree of 0 is -1 by convention here
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("Poly", self.coeffs))

    # -- arithmetic --------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        d = other.coeffs
        while len(rem) >= len(d):
            if rem[-1] == 0:
                rem.pop()
                continue
            k = len(rem) - len(d)
            c = rem[-1] / d[-1]
            q[k] = c
            for i, dc in enumerate(d):
                rem[k + i] -= c * dc
            rem.pop()
        return Poly(q), Poly(rem)

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if r:
            raise ValueError("division was not exact")
        return q

    # -- structure ---------------------------------------------------

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        lc = self.coeffs[-1]
        if lc == 1:
            return self
        return Poly([c / lc for c in self.coeffs])

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def evaluate(self, v) -> Fraction:
        v = _coerce_fraction(v)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def primitive_integer(self) -> tuple[Fraction, list[int]]:
        """Split off content: p = content * primitive, primitive integral
        with gcd of coefficients 1 and positive leading coefficient."""
        if not self.coeffs:
            return Fraction(0), []
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // int_gcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for c in ints:
            g = int_gcd(g, abs(c))
        ints = [c // g for c in ints]
        sign = 1
        if ints[-1] < 0:
            sign = -1
            ints = [-c for c in ints]
        return Fraction(sign * g, den), ints

    def shift_scale(self, scale: Fraction) -> "Poly":
        return Poly([c * scale for c in self.coeffs])

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*w" if c != 1 else "w")
            else:
                parts.append(f"{c}*w^{i}" if c != 1 else f"w^{i}")
        return " + ".join(parts)


def _as_poly(x) -> Union[Poly, None]:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly([x])
    return None


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd via the Euclidean algorithm.  Raises BothZero on (0, 0)."""
    if not p and not q:
        raise BothZero("gcd of two zero polynomials")
    a, b = p, q
    while b:
        a, b = b, a % b
    return a.monic()


def squarefree_factors(p: Poly) -> list[tuple[Poly, int]]:
    """Yun-style square-free decomposition: pairwise coprime monic factors
    with multiplicities, product (with lead constant) rebuilding p."""
    if not p:
        raise ZeroPolynomial("square-free decomposition of 0")
    p = p.monic()
    out: list[tuple[Poly, int]] = []
    d = p.derivative()
    if not d:
        # constant
        return out
    g = poly_gcd(p, d)
    w = p.exact_div(g)
    mult = 1
    while w.degree > 0:
        y = poly_gcd(w, g)
        factor = w.exact_div(y)
        if factor.degree > 0:
            out.append((factor.monic(), mult))
        w = y
        g = g.exact_div(y)
        mult += 1
    return out


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


def rational_roots(p: Poly) -> tuple[list[tuple[Fraction, int]], list[Poly]]:
    """All rational roots of p with multiplicities, plus the leftover
    square-free, pairwise coprime factors of degree >= 2 that have no
    rational root.  No claim of irreducibility is made for the leftovers.
    """
    if not p:
        raise ZeroPolynomial("roots of the zero polynomial")
    roots: list[tuple[Fraction, int]] = []
    residual: list[Poly] = []
    for factor, mult in squarefree_factors(p):
        found, leftover = _roots_of_squarefree(factor)
        for r in found:
            roots.append((r, mult))
        if leftover.degree >= 2:
            residual.append(leftover)
    roots.sort(key=lambda rm: rm[0])
    return roots, residual


def _roots_of_squarefree(p: Poly) -> tuple[list[Fraction], Poly]:
    # rational-root candidates of the primitive integer form
    _, ints = p.primitive_integer()
    # strip w^k first
    shift = 0
    while ints and ints[0] == 0:
        ints = ints[1:]
        shift += 1
    found: list[Fraction] = []
    rest = p
    if shift:
        found.append(Fraction(0))
        rest = rest.exact_div(Poly.x())
    if not ints or len(ints) == 1:
        return found, Poly.const(1) if rest.degree < 2 else rest
    a0, an = ints[0], ints[-1]
    for num in _divisors(a0):
        for den in _divisors(an):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if rest.degree >= 1 and rest.evaluate(cand) == 0:
                    found.append(cand)
                    rest = rest.exact_div(Poly([-cand, 1]))
    found.sort()
    if rest.degree < 2:
        rest = Poly.const(1)
    return found, rest.monic()


# ---------------------------------------------------------------------------
# scalars for matrices: Fraction or RationalFunction


class RationalFunction:
    """Element of Q(w): coprime numerator/denominator, monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_rf_poly(num)
        den = Poly.const(1) if den is None else _as_rf_poly(den)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num:
            self.num = Poly()
            self.den = Poly.const(1)
            return
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.exact_div(g)
            den = den.exact_div(g)
        lc = den.lead
        if lc != 1:
            num = num.shift_scale(1 / lc)
            den = den.shift_scale(1 / lc)
        self.num = num
        self.den = den

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash(("RF", self.num.coeffs, self.den.coeffs))

    def __add__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _as_rf(other)
        if other is None:
            return NotImplemented
        return other / self

    def evaluate(self, v) -> Fraction:
        dv = self.den.evaluate(v)
        if dv == 0:
            raise ZeroDivisionError(f"denominator vanishes at {v}")
        return self.num.evaluate(v) / dv

    def __repr__(self):
        if self.den == Poly.const(1):
            return f"RF({self.num})"
        return f"RF(({self.num})/({self.den}))"


def _as_rf_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly([x])
    raise TypeError(f"cannot build a rational function from {x!r}")


def _as_rf(x) -> Union[RationalFunction, None]:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, (int, Fraction, Poly)):
        return RationalFunction(x)
    return None


Scalar = Union[Fraction, RationalFunction]


def _scalar_zero(sample: Scalar):
    return RationalFunction(0) if isinstance(sample, RationalFunction) else Fraction(0)


def _scalar_one(sample: Scalar):
    return RationalFunction(1) if isinstance(sample, RationalFunction) else Fraction(1)


class ExactMatrix:
    """Dense matrix over Q or Q(w).  All entries share one scalar kind."""

    __slots__ = ("rows", "cols", "entries", "field")

    def __init__(self, entries: Sequence[Sequence]):
        grid = [list(row) for row in entries]
        ncols = len(grid[0]) if grid else 0
        for row in grid:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
        # normalize scalar kind: any RationalFunction entry promotes the lot
        has_rf = any(isinstance(e, RationalFunction) for row in grid for e in row)
        norm = []
        for row in grid:
            nrow = []
            for e in row:
                if has_rf:
                    v = _as_rf(e)
                    if v is None:
                        raise TypeError(f"bad matrix entry {e!r}")
                else:
                    if isinstance(e, Poly):
                        has_rf = True  # pragma: no cover - caught by scan above
                    v = _coerce_fraction(e)
                nrow.append(v)
            norm.append(nrow)
        self.entries = norm
        self.rows = len(norm)
        self.cols = ncols
        self.field = "Q(w)" if has_rf else "Q"

    def transpose(self) -> "ExactMatrix":
        if self.rows == 0:
            return ExactMatrix([[] for _ in range(self.cols)]) if self.cols else ExactMatrix([])
        return ExactMatrix(
            [[self.entries[r][c] for r in range(self.rows)] for c in range(self.cols)]
        )

    def matvec(self, v: Sequence) -> list:
        if len(v) != self.cols:
            raise ValueError("dimension mismatch")
        out = []
        for row in self.entries:
            acc = None
            for a, b in zip(row, v):
                term = a * b
                acc = term if acc is None else acc + term
            if acc is None:
                acc = Fraction(0)
            out.append(acc)
        return out

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols} over {self.field})"


def rref(m: ExactMatrix) -> tuple[int, list[list], list[int]]:
    """Reduced row echelon form bookkeeping.

    Returns (rank, kernel_basis, pivot_columns).  Pivoting is always on the
    first nonzero entry scanning columns left to right, so the kernel basis
    is canonical: one vector per free column, with 1 in the free position.
    """
    if m.rows == 0 or m.cols == 0:
        return 0, _trivial_kernel(m.cols), []
    work = [row[:] for row in m.entries]
    nrows, ncols = m.rows, m.cols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if work[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        pv = work[r][c]
        inv = _scalar_one(pv) / pv if isinstance(pv, RationalFunction) else Fraction(1) / pv
        work[r] = [e * inv for e in work[r]]
        for i in range(nrows):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    rank = len(pivots)
    free = [c for c in range(ncols) if c not in pivots]
    zero = _scalar_zero(m.entries[0][0])
    one = _scalar_one(m.entries[0][0])
    kernel = []
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for i, pc in enumerate(pivots):
            v[pc] = -work[i][fc]
        kernel.append(v)
    return rank, kernel, pivots


def _trivial_kernel(ncols: int) -> list[list]:
    out = []
    for fc in range(ncols):
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        out.append(v)
    return out


def matrix_rank(entries: Sequence[Sequence]) -> int:
    return rref(ExactMatrix(entries))[0]


def poly_det(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a small square matrix of polynomials, by Laplace
    expansion down the first column.  Fine for the 3x3/4x4 minors used in
    incidence scans; not meant for anything big."""
    n = len(rows)
    for row in rows:
        if len(row) != n:
            raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return Poly.const(1)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = Poly()
    sign = 1
    for i in range(n):
        if rows[i][0]:
            minor = [r[1:] for j, r in enumerate(rows) if j != i]
            term = rows[i][0] * poly_det(minor)
            total = total + term if sign > 0 else total - term
        sign = -sign
    return total


def fraction_str(x: Fraction) -> str:
    """Canonical text form "p/q" in lowest terms, integers without "/1"."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s)
