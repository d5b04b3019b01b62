"""Incidence profiles of plane arrangements and their degenerations.

The combinatorial type of an arrangement is the list of its maximal
multiple lines (q planes through a common line, q >= 2) and multiple
points (p planes through a common point, p >= 3, decorated with the
count j of triple-or-worse lines through it).  Everything is decided by
exact rank computations on coefficient matrices, over Q for a single
arrangement and over Q(w) for a one-parameter family, so "generic"
really means generic and not "at a randomly sampled parameter".

Degenerate parameter values are located by scanning minor ideals of the
coefficient rows: a subset of planes acquires a new coincidence exactly
where its maximal minors all vanish.  Rational roots are classified by
recomputing the profile there; irrational candidates are handed back
unevaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd as int_gcd, lcm as int_lcm
from typing import Iterable, Optional, Sequence, Union

from .exact import (
    ExactMatrix,
    Poly,
    RationalFunction,
    fraction_str,
    poly_det,
    poly_gcd,
    rational_roots,
    rref,
)
from .forms import Arrangement, FormVanishes, ParamArrangement, specialize


class CoincidentPlanes(ValueError):
    def __init__(self, i: int, j: int):
        super().__init__(f"planes {i + 1} and {j + 1} coincide")
        self.indices = (i + 1, j + 1)


class WrongPlaneCount(ValueError):
    def __init__(self, n: int):
        super().__init__(f"octic check needs 8 planes, got {n}")
        self.n_forms = n


# ---------------------------------------------------------------------------
# profile records


Vec4 = tuple[Poly, Poly, Poly, Poly]


@dataclass(frozen=True)
class MultipleLine:
    """Maximal pencil: all planes through one line.  q = len(planes)."""

    planes: tuple[int, ...]  # 1-based form indices, sorted
    basis: tuple[Vec4, Vec4]  # two points spanning the line, primitive

    @property
    def q(self) -> int:
        return len(self.planes)


@dataclass(frozen=True)
class MultiplePoint:
    planes: tuple[int, ...]  # 1-based, sorted
    point: Vec4  # primitive projective coordinates
    j: int  # triple-or-worse lines through the point

    @property
    def p(self) -> int:
        return len(self.planes)


class IncidenceProfile:
    """Lines and points of one arrangement, lexicographically ordered."""

    def __init__(
        self,
        lines: Sequence[MultipleLine],
        points: Sequence[MultiplePoint],
        n_forms: int,
        at: Optional[Fraction] = None,
    ):
        self.lines = tuple(sorted(lines, key=lambda l: l.planes))
        self.points = tuple(sorted(points, key=lambda pt: pt.planes))
        self.n_forms = n_forms
        self.at = at

    def combinatorial_key(self):
        """The profile with coordinates forgotten; two arrangements have
        the same incidences exactly when these keys agree."""
        return (
            tuple((l.planes, l.q) for l in self.lines),
            tuple((pt.planes, pt.p, pt.j) for pt in self.points),
        )

    def line_by_planes(self, planes: Iterable[int]) -> Optional[MultipleLine]:
        key = tuple(sorted(planes))
        for l in self.lines:
            if l.planes == key:
                return l
        return None

    def point_by_planes(self, planes: Iterable[int]) -> Optional[MultiplePoint]:
        key = tuple(sorted(planes))
        for pt in self.points:
            if pt.planes == key:
                return pt
        return None

    def to_json(self) -> dict:
        return {
            "lines": [{"planes": list(l.planes), "q": l.q} for l in self.lines],
            "points": [
                {"planes": list(pt.planes), "p": pt.p, "j": pt.j}
                for pt in self.points
            ],
        }

    def __repr__(self):
        ls = ", ".join(f"l{l.q}{set(l.planes)}" for l in self.lines)
        ps = ", ".join(f"p{pt.p}^{pt.j}{set(pt.planes)}" for pt in self.points)
        return f"IncidenceProfile({ls}; {ps})"


@dataclass(frozen=True)
class NewIncidence:
    """One incidence present in a special fiber but not in the generic one.

    ``sources`` lists the plane sets of generic multiple points (p >= 4 or
    j >= 1) that land on the location; ``new_lines`` the newly-coincident
    pencils through it; ``multiplicity`` the (p, j) of the special point.
    """

    kind: str  # NewTripleLine | NewPoint | PointCollision | PointOnNewLine
    involved_planes: tuple[int, ...]
    location: tuple
    sources: tuple[tuple[int, ...], ...] = ()
    source_profiles: tuple[tuple[int, int], ...] = ()
    new_lines: tuple[tuple[int, ...], ...] = ()
    multiplicity: Optional[tuple[int, int]] = None

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "planes": list(self.involved_planes),
        }
        if self.multiplicity is not None:
            out["p"], out["j"] = self.multiplicity
        if self.sources:
            out["sources"] = [list(s) for s in self.sources]
        if self.new_lines:
            out["new_lines"] = [list(s) for s in self.new_lines]
        return out


# ---------------------------------------------------------------------------
# scalar plumbing

Scalar = Union[Fraction, RationalFunction]


def _scalar_rows(a: Union[Arrangement, ParamArrangement]) -> list[list[Scalar]]:
    param = any(c.degree > 0 for f in a.forms for c in f.coeffs)
    rows: list[list[Scalar]] = []
    for f in a.forms:
        if param:
            rows.append([RationalFunction(c) for c in f.coeffs])
        else:
            rows.append(
                [c.coeffs[0] if c.coeffs else Fraction(0) for c in f.coeffs]
            )
    return rows


def primitive_vector(vec: Sequence[Scalar]) -> Vec4:
    """Canonical representative of a projective point over Q or Q(w):
    polynomial entries, no common polynomial or rational factor, first
    nonzero entry with positive leading coefficient."""
    nums: list[Poly] = []
    dens: list[Poly] = []
    for v in vec:
        if isinstance(v, RationalFunction):
            nums.append(v.num)
            dens.append(v.den)
        else:
            nums.append(Poly([v]) if v else Poly())
            dens.append(Poly.const(1))
    common = Poly.const(1)
    for d in dens:
        common = common * d.exact_div(poly_gcd(common, d))
    polys = [n * common.exact_div(d) for n, d in zip(nums, dens)]
    nonzero = [p for p in polys if p]
    if not nonzero:
        raise ValueError("zero vector has no primitive form")
    g = nonzero[0]
    for p in nonzero[1:]:
        g = poly_gcd(g, p)
    if g.degree > 0:
        polys = [p.exact_div(g) if p else p for p in polys]
    coeffs = [c for p in polys for c in p.coeffs if c != 0]
    scale = Fraction(
        int_lcm(*(c.denominator for c in coeffs)),
        int_gcd(*(abs(c.numerator) for c in coeffs)),
    )
    polys = [p.shift_scale(scale) for p in polys]
    for p in polys:
        if p:
            if p.lead < 0:
                polys = [q.shift_scale(Fraction(-1)) for q in polys]
            break
    return tuple(polys)  # type: ignore[return-value]


def _dot(row: Sequence[Scalar], vec: Sequence[Scalar]):
    acc = None
    for a, b in zip(row, vec):
        term = a * b
        acc = term if acc is None else acc + term
    return acc


def evaluate_vector(vec: Vec4, w0: Fraction) -> Vec4:
    return primitive_vector([p.evaluate(w0) for p in vec])


def _vector_scalars(vec: Vec4) -> list[Scalar]:
    if any(p.degree > 0 for p in vec):
        return [RationalFunction(p) for p in vec]
    return [p.coeffs[0] if p else Fraction(0) for p in vec]


def point_on_line(point: Vec4, basis: tuple[Vec4, Vec4]) -> bool:
    """Whether a profile point lies on a profile line, both in primitive form."""
    rows = [_vector_scalars(v) for v in (basis[0], basis[1], point)]
    return _matrix_rank(rows) == 2


# ---------------------------------------------------------------------------
# the profile computation


def profile(
    a: Union[Arrangement, ParamArrangement], at: Optional[Fraction] = None
) -> IncidenceProfile:
    """Exact incidence profile; over Q(w) when any coefficient involves w.

    Raises CoincidentPlanes when two forms are proportional, which for a
    specialized fiber marks the degeneration as out of scope.
    """
    rows = _scalar_rows(a)
    n = len(rows)
    for i, j in combinations(range(n), 2):
        if _matrix_rank([rows[i], rows[j]]) < 2:
            raise CoincidentPlanes(i, j)

    # maximal pencils: the planes through the line of a pair (i, j) are
    # exactly those whose row lies in the span of rows i and j
    pencils: dict[tuple[int, ...], MultipleLine] = {}
    for i, j in combinations(range(n), 2):
        members = [i, j]
        for k in range(n):
            if k in (i, j):
                continue
            if _matrix_rank([rows[i], rows[j], rows[k]]) == 2:
                members.append(k)
        key = tuple(sorted(members))
        if key in pencils:
            continue
        _, kernel, _ = rref(ExactMatrix([rows[m] for m in key]))
        basis = tuple(
            sorted(
                (primitive_vector(v) for v in kernel),
                key=lambda vec: tuple(p.coeffs for p in vec),
            )
        )
        assert len(basis) == 2
        pencils[key] = MultipleLine(
            planes=tuple(m + 1 for m in key), basis=basis  # 1-based outward
        )
    lines = list(pencils.values())
    triple_sets = [set(l.planes) for l in lines if l.q >= 3]

    # points: kernels of rank-3 triples, merged by coordinates
    seen: dict[Vec4, tuple[int, ...]] = {}
    for triple in combinations(range(n), 3):
        sub = [rows[m] for m in triple]
        if _matrix_rank(sub) != 3:
            continue  # a pencil; already recorded as a line
        _, kernel, _ = rref(ExactMatrix(sub))
        pt = primitive_vector(kernel[0])
        if pt in seen:
            continue
        kvec = kernel[0]
        members = tuple(
            m + 1 for m in range(n) if not _dot(rows[m], kvec)
        )
        seen[pt] = members
    points = []
    for pt, members in seen.items():
        j = sum(1 for s in triple_sets if s <= set(members))
        points.append(MultiplePoint(planes=members, point=pt, j=j))

    return IncidenceProfile(lines, points, n_forms=n, at=at)


def _matrix_rank(rows: Sequence[Sequence[Scalar]]) -> int:
    return rref(ExactMatrix(rows))[0]


# ---------------------------------------------------------------------------
# octic condition


@dataclass(frozen=True)
class OcticCheck:
    valid: bool
    violations: tuple


def is_octic(p: IncidenceProfile) -> OcticCheck:
    """An arrangement of 8 planes qualifies when no line carries more than
    3 of them and no point more than 5."""
    if p.n_forms != 8:
        raise WrongPlaneCount(p.n_forms)
    bad: list = [l for l in p.lines if l.q >= 4]
    bad += [pt for pt in p.points if pt.p >= 6]
    return OcticCheck(valid=not bad, violations=tuple(bad))


# ---------------------------------------------------------------------------
# profile diff


def profile_diff(
    generic: IncidenceProfile, special: IncidenceProfile
) -> list[NewIncidence]:
    """New incidences of ``special`` relative to ``generic``.

    Needs coordinates: generic points are pushed to the special fiber by
    evaluating at ``special.at`` (a no-op for two constant profiles) and
    collisions are read off from coinciding images.  A changed point owns
    the new pencils through it; pencils away from every changed point are
    reported on their own.
    """
    if generic.n_forms != special.n_forms:
        raise ValueError("profiles of different arrangements")
    generic_line_sets = {l.planes for l in generic.lines}
    new_lines = [
        l
        for l in special.lines
        if l.q >= 3 and l.planes not in generic_line_sets
    ]

    if special.at is not None:
        push = lambda v: evaluate_vector(v, special.at)  # noqa: E731
    else:
        push = lambda v: v  # noqa: E731
    fibers: dict[Vec4, list[MultiplePoint]] = {}
    for g in generic.points:
        fibers.setdefault(push(g.point), []).append(g)

    changes: list[NewIncidence] = []
    claimed_line_sets: set[tuple[int, ...]] = set()
    for s in special.points:
        if s.p < 4 and s.j < 1:
            continue
        sources = fibers.get(s.point, [])
        notable = [g for g in sources if g.p >= 4 or g.j >= 1]
        if any(g.planes == s.planes and g.j == s.j for g in notable):
            continue  # the point was already there, unchanged
        lines_here = tuple(
            l.planes for l in new_lines if set(l.planes) <= set(s.planes)
        )
        claimed_line_sets.update(lines_here)
        if len(notable) >= 2:
            kind = "PointCollision"
        elif lines_here:
            kind = "PointOnNewLine"
        else:
            kind = "NewPoint"
        changes.append(
            NewIncidence(
                kind=kind,
                involved_planes=s.planes,
                location=s.point,
                sources=tuple(g.planes for g in notable),
                source_profiles=tuple((g.p, g.j) for g in notable),
                new_lines=lines_here,
                multiplicity=(s.p, s.j),
            )
        )

    line_changes = [
        NewIncidence(
            kind="NewTripleLine",
            involved_planes=l.planes,
            location=l.basis,
            new_lines=(l.planes,),
        )
        for l in new_lines
        if l.planes not in claimed_line_sets
    ]
    line_changes.sort(key=lambda c: c.involved_planes)
    changes.sort(key=lambda c: c.involved_planes)
    return line_changes + changes


# ---------------------------------------------------------------------------
# degenerate parameter values


@dataclass(frozen=True)
class DegenerateValue:
    w0: Fraction
    profile: IncidenceProfile
    changes: tuple[NewIncidence, ...]


@dataclass(frozen=True)
class FatalValue:
    """Parameter where the fiber stops being an arrangement of distinct
    planes; everything downstream refuses to touch these."""

    w0: Fraction
    reason: str


@dataclass(frozen=True)
class DegenerationScan:
    values: tuple[DegenerateValue, ...]
    fatal: tuple[FatalValue, ...]
    unresolved: tuple[Poly, ...] = field(default=())

    @property
    def sigma(self) -> tuple[Fraction, ...]:
        return tuple(v.w0 for v in self.values)


def degenerate_values(a: ParamArrangement) -> DegenerationScan:
    """Scan the family for parameters with different incidences.

    Candidates come from vanishing loci of maximal minors: a single form
    degenerating (fatal), a pair turning proportional (fatal), a triple
    acquiring a common line, a quadruple acquiring a common point.  Rank
    drops of larger subsets are witnessed by their 3- and 4-element
    subsets, so those two scans see every combinatorial change.  Each
    rational candidate is confirmed by recomputing the profile; factors
    of degree >= 2 without rational roots are returned unresolved.
    """
    rows = [list(f.coeffs) for f in a.forms]
    n = len(rows)
    candidates: set[Fraction] = set()
    fatal: dict[Fraction, str] = {}
    unresolved: dict[tuple, Poly] = {}

    def scan(polys: list[Poly], on_root) -> None:
        g: Optional[Poly] = None
        for p in polys:
            if p:
                g = p if g is None else poly_gcd(g, p)
        if g is None or g.degree < 1:
            return
        roots, leftovers = rational_roots(g)
        for r, _ in roots:
            on_root(r)
        for q in leftovers:
            unresolved[q.coeffs] = q

    for i in range(n):
        scan(
            list(rows[i]),
            lambda r, i=i: fatal.setdefault(r, f"form {i + 1} vanishes"),
        )
    for i, j in combinations(range(n), 2):
        cross = [
            rows[i][u] * rows[j][v] - rows[i][v] * rows[j][u]
            for u, v in combinations(range(4), 2)
        ]
        scan(
            cross,
            lambda r, i=i, j=j: fatal.setdefault(
                r, f"planes {i + 1} and {j + 1} coincide"
            ),
        )
    for triple in combinations(range(n), 3):
        sub = [rows[m] for m in triple]
        minors = [
            poly_det([[row[c] for c in cols] for row in sub])
            for cols in combinations(range(4), 3)
        ]
        if not any(minors):
            continue  # generically a pencil already
        scan(minors, candidates.add)
    for quad in combinations(range(n), 4):
        det = poly_det([rows[m] for m in quad])
        if not det:
            continue  # generically concurrent already
        scan([det], candidates.add)

    generic = profile(a)
    generic_key = generic.combinatorial_key()
    values = []
    for w0 in sorted(candidates - set(fatal)):
        try:
            spec = specialize(a, w0)
            prof = profile(spec, at=w0)
        except FormVanishes as e:
            fatal[w0] = str(e)
            continue
        except CoincidentPlanes as e:
            fatal[w0] = str(e)
            continue
        if prof.combinatorial_key() == generic_key:
            continue
        changes = profile_diff(generic, prof)
        values.append(DegenerateValue(w0, prof, tuple(changes)))

    return DegenerationScan(
        values=tuple(values),
        fatal=tuple(
            FatalValue(w0, fatal[w0]) for w0 in sorted(fatal)
        ),
        unresolved=tuple(
            unresolved[k] for k in sorted(unresolved, key=lambda c: (len(c), c))
        ),
    )


def point_text(vec: Vec4) -> str:
    """(a:b:c:d) with entries printed exactly."""
    parts = []
    for p in vec:
        if p.degree <= 0:
            parts.append(fraction_str(p.coeffs[0]) if p.coeffs else "0")
        else:
            parts.append(str(p))
    return "(" + ":".join(parts) + ")"
