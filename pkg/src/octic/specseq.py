"""Weight spectral sequence of a normal crossing degeneration.

The first page is assembled purely combinatorially from the strata complex:

    E1(-k, h+k) = (+)_{j >= max(-k,0)}  H^{h-2j-k}( S^[2j+k+1] )

where S^[m] is the disjoint union of the depth-m strata and h the degree the
entry converges to.  The differential d1 decomposes into restriction maps
(one level deeper, same degree) and Gysin maps (one level up, degree +2).
Three sources resolve its blocks:

* degree-zero restrictions are the signed coboundary of the nerve, and the
  top-degree Gysin blocks are their transposes;
* degree-two Gysin blocks can be presented by an explicit cycle model
  (labeled curve classes and their pushforward matrix);
* everything else is either forced to rank zero by the dimensions, carried
  by a justified rank annotation, or inherited from the dual arrow --
  Poincare duality of the pages pairs the arrow at (p, q) with the one at
  (-p-1, 6-q) rank for rank.

The second page is then exact linear algebra over the resolved ranks.  It
degenerates there, so its antidiagonals are the Betti numbers of a nearby
smooth fiber, and the off-center entries of the middle antidiagonal decide
whether the limit mixed Hodge structure on H^3 is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .exact import ExactMatrix, rref
from .semistable import StrataComplex, betti


class MissingBlock(ValueError):
    """An arrow of d1 has no matrix, no annotation, and no resolvable dual."""


class InconsistentRanks(ValueError):
    """Rank data contradicts dimensions, block matrices, or d1*d1 = 0."""


class UnknownLabel(KeyError):
    pass


def _top_degree(m: int) -> int:
    # depth-m strata have complex dimension 4 - m
    return 2 * (4 - m)


# ---------------------------------------------------------------------------
# E1 page


@dataclass(frozen=True)
class Summand:
    stratum: str
    degree: int
    twist: int
    dim: int

    def to_json(self):
        return {"stratum": self.stratum, "degree": self.degree,
                "twist": self.twist, "dim": self.dim}


@dataclass(frozen=True)
class E1Entry:
    k: int
    h: int
    summands: tuple = ()

    @property
    def dim(self) -> int:
        return sum(s.dim for s in self.summands)

    @property
    def p(self) -> int:
        return -self.k

    @property
    def q(self) -> int:
        return self.h + self.k

    def to_json(self):
        return {"k": self.k, "h": self.h, "dim": self.dim,
                "summands": [s.to_json() for s in self.summands]}


@dataclass(frozen=True)
class E1Grid:
    complex: StrataComplex
    entries: dict = field(default_factory=dict)   # (k, h) -> E1Entry

    @property
    def depth(self) -> int:
        n, d, t = self.complex.counts()
        return 3 if t else (2 if d else 1)

    @property
    def columns(self) -> list:
        w = self.depth - 1
        return list(range(-w, w + 1))

    def entry(self, k: int, h: int) -> E1Entry:
        return self.entries.get((k, h), E1Entry(k, h))

    def entry_pq(self, p: int, q: int) -> E1Entry:
        return self.entry(-p, p + q)

    def dim_pq(self, p: int, q: int) -> int:
        return self.entry_pq(p, q).dim

    def antidiagonal(self, h: int) -> int:
        """Total E1 dimension converging to H^h."""
        return sum(e.dim for (k, hh), e in self.entries.items() if hh == h)

    def euler(self) -> int:
        return sum((-1) ** h * self.antidiagonal(h)
                   for h in range(0, 2 * self.depth + 7))

    def to_json(self):
        cells = [self.entries[key].to_json() for key in sorted(self.entries)]
        return {"columns": self.columns, "cells": cells}


def assemble_e1(s: StrataComplex) -> E1Grid:
    """Populate the first page of the weight spectral sequence for s."""
    grid: dict = {}
    n, d, t = s.counts()
    depth = 3 if t else (2 if d else 1)
    for p in range(-(depth - 1), depth):
        k = -p
        for q in range(0, 7):
            h = p + q
            summands = []
            j = max(-k, 0)
            while True:
                m = 2 * j + k + 1
                if m > depth:
                    break
                deg = h - 2 * j - k
                for name, geom in s.level(m):
                    b = betti(geom)
                    if 0 <= deg < len(b) and b[deg]:
                        summands.append(Summand(name, deg, j, b[deg]))
                j += 1
            grid[(k, h)] = E1Entry(k, h, tuple(summands))
    return E1Grid(s, grid)


# ---------------------------------------------------------------------------
# nerve coboundaries


def _level_members(s: StrataComplex, m: int) -> list:
    """Depth-m strata as tuples of component labels, in canonical order."""
    if m == 1:
        return [(c.label,) for c in s.components]
    if m == 2:
        return [tuple(d.pair) for d in s.double_strata]
    if m == 3:
        return [tuple(t.triple) for t in s.triple_strata]
    return []


def nerve_coboundary(s: StrataComplex, m: int) -> ExactMatrix:
    """Signed incidence matrix from depth-m strata to depth-(m+1) strata.

    Rows follow the deeper level, columns the shallower one; the sign of an
    incidence is the position of the dropped component, so consecutive
    coboundaries compose to zero.
    """
    cols = _level_members(s, m)
    rows = _level_members(s, m + 1)
    col_index = {tup: i for i, tup in enumerate(cols)}
    entries = []
    for tup in rows:
        row = [Fraction(0)] * len(cols)
        for t in range(len(tup)):
            face = tup[:t] + tup[t + 1:]
            i = col_index.get(face)
            if i is not None:
                row[i] = Fraction((-1) ** t)
        entries.append(row)
    return ExactMatrix(entries)


# ---------------------------------------------------------------------------
# cycle model


@dataclass(frozen=True)
class CycleModel:
    """Labeled degree-2 homology bases and an explicit pushforward matrix.

    ``generators`` lists a basis of curve classes per double stratum.  The
    matrix presents the pushforward of the ``row_labels`` subset of them in
    the span of the ``col_labels`` classes on the components; a relation
    among the rows is exactly a cycle that dies under d1.
    """

    generators: dict
    row_labels: tuple
    col_labels: tuple
    matrix: ExactMatrix
    col_display: tuple = ()    # printed headers, when they differ from labels

    def __post_init__(self):
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        object.__setattr__(self, "col_display", tuple(self.col_display))
        labels = [l for labs in self.generators.values() for l in labs]
        if len(set(labels)) != len(labels):
            raise ValueError("generator labels repeat across strata")
        known = set(labels)
        for l in self.row_labels:
            if l not in known:
                raise UnknownLabel(l)
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("matrix row labels repeat")
        if len(set(self.col_labels)) != len(self.col_labels):
            raise ValueError("matrix column labels repeat")
        if self.matrix.rows != len(self.row_labels):
            raise ValueError("matrix height does not match its row labels")
        if self.matrix.cols != len(self.col_labels):
            raise ValueError("matrix width does not match its column labels")
        if self.col_display and len(self.col_display) != len(self.col_labels):
            raise ValueError("printed headers do not match the columns")

    def generator_count(self) -> int:
        return sum(len(labs) for labs in self.generators.values())

    def rank(self) -> int:
        return rref(self.matrix)[0]

    def relations(self) -> list:
        """Basis of the relation space among the rows (left kernel)."""
        _, kernel, _ = rref(self.matrix.transpose())
        out = []
        for vec in kernel:
            out.append({label: coeff for label, coeff in zip(self.row_labels, vec)
                        if coeff != 0})
        return out

    def to_json(self):
        return {
            "generators": {k: list(v) for k, v in self.generators.items()},
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "col_display": list(self.col_display) if self.col_display else None,
            "matrix": [[str(x) for x in row] for row in self.matrix.entries],
            "rank": self.rank(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "CycleModel":
        matrix = ExactMatrix([[Fraction(str(x)) for x in row]
                              for row in data["matrix"]])
        return cls(
            generators={k: tuple(v) for k, v in data["generators"].items()},
            row_labels=tuple(data["row_labels"]),
            col_labels=tuple(data["col_labels"]),
            matrix=matrix,
            col_display=tuple(data.get("col_display") or ()),
        )


def verify_cycle_chain(cm: CycleModel, chain: Mapping) -> bool:
    """True iff the labeled combination of rows lies in the relation space."""
    index = {l: i for i, l in enumerate(cm.row_labels)}
    acc = [Fraction(0)] * cm.matrix.cols
    for label, coeff in chain.items():
        if label not in index:
            raise UnknownLabel(label)
        row = cm.matrix.entries[index[label]]
        c = Fraction(coeff) if not isinstance(coeff, Fraction) else coeff
        for i, x in enumerate(row):
            acc[i] += c * x
    return all(x == 0 for x in acc)


# ---------------------------------------------------------------------------
# d1


@dataclass(frozen=True)
class Block:
    """One level-to-level piece of an arrow of d1."""

    source: tuple        # (depth, degree)
    target: tuple
    kind: str            # "matrix" | "open"
    matrix: Optional[ExactMatrix] = None
    full: bool = True    # whether the matrix covers the whole bases
    note: str = ""

    def to_json(self):
        out = {"source": list(self.source), "target": list(self.target),
               "kind": self.kind}
        if self.note:
            out["note"] = self.note
        if self.matrix is not None:
            out["shape"] = [self.matrix.rows, self.matrix.cols]
        return out


@dataclass(frozen=True)
class RankAnnotation:
    p: int
    q: int
    rank: int
    why: str

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("negative rank annotation")
        if not self.why:
            raise ValueError("a rank annotation must carry its justification")

    def to_json(self):
        return {"p": self.p, "q": self.q, "rank": self.rank, "why": self.why}


@dataclass(frozen=True)
class Arrow:
    """The differential leaving position (p, q), with its block data."""

    p: int
    q: int
    source_dim: int
    target_dim: int
    blocks: tuple = ()
    annotation: Optional[RankAnnotation] = None

    def matrix_blocks(self):
        return [b for b in self.blocks if b.kind == "matrix"]

    def open_blocks(self):
        return [b for b in self.blocks if b.kind == "open"]

    def fully_presented(self) -> bool:
        """All needed blocks are full matrices, so the rank is computable."""
        return (self.target_dim == 0 or self.source_dim == 0 or
                (not self.open_blocks() and
                 all(b.full for b in self.matrix_blocks())))

    def to_json(self):
        out = {"p": self.p, "q": self.q,
               "source_dim": self.source_dim, "target_dim": self.target_dim,
               "blocks": [b.to_json() for b in self.blocks]}
        if self.annotation:
            out["annotation"] = self.annotation.to_json()
        return out


@dataclass(frozen=True)
class DifferentialSpec:
    ordering: tuple                       # component labels, sign convention
    arrows: dict = field(default_factory=dict)    # (p, q) -> Arrow

    def arrow(self, p: int, q: int) -> Optional[Arrow]:
        return self.arrows.get((p, q))

    def to_json(self):
        return {"ordering": list(self.ordering),
                "arrows": [self.arrows[key].to_json()
                           for key in sorted(self.arrows)]}


def _groups(entry: E1Entry) -> list:
    """Summands of an entry merged into (depth, degree) groups with dims,
    ordered by twist (the order the formula lists them in)."""
    seen = []
    dims = {}
    for s in entry.summands:
        m = 2 * s.twist - entry.p + 1
        key = (m, s.degree)
        if key not in dims:
            seen.append(key)
            dims[key] = 0
        dims[key] += s.dim
    return [(key, dims[key]) for key in seen]


def build_d1(s: StrataComplex,
             cm: Optional[CycleModel] = None,
             annotations: Iterable = ()) -> DifferentialSpec:
    """Collect block data for every arrow of d1 on the first page.

    Automatic blocks: degree-zero restrictions are nerve coboundaries,
    top-degree Gysin maps their transposes, and a supplied cycle model
    presents the degree-two Gysin block.  Every other block with nonzero
    dimensions must be covered by a rank annotation on its arrow or by the
    dual arrow at (-p-1, 6-q); otherwise the arrow is reported missing.
    """
    e1 = assemble_e1(s)
    anns = {}
    for a in annotations:
        if not isinstance(a, RankAnnotation):
            a = RankAnnotation(int(a["p"]), int(a["q"]), int(a["rank"]),
                               str(a.get("why", "")))
        if (a.p, a.q) in anns:
            raise ValueError(f"two annotations for the arrow at ({a.p}, {a.q})")
        anns[(a.p, a.q)] = a

    deltas = {m: nerve_coboundary(s, m) for m in (1, 2) if _level_members(s, m + 1)}

    arrows = {}
    for p in e1.columns:
        for q in range(0, 7):
            src = e1.entry_pq(p, q)
            tgt = e1.entry_pq(p + 1, q)
            if src.dim == 0:
                continue
            blocks = []
            tgt_groups = dict(_groups(tgt))
            for (m, deg), dim in _groups(src):
                restriction = (m + 1, deg)
                if tgt_groups.get(restriction):
                    if deg == 0 and m in deltas:
                        blocks.append(Block((m, deg), restriction, "matrix",
                                            deltas[m], note="nerve coboundary"))
                    else:
                        blocks.append(Block((m, deg), restriction, "open",
                                            note="restriction"))
                gysin = (m - 1, deg + 2)
                if tgt_groups.get(gysin):
                    if deg == _top_degree(m) and (m - 1) in deltas:
                        blocks.append(Block((m, deg), gysin, "matrix",
                                            deltas[m - 1].transpose(),
                                            note="transposed coboundary"))
                    elif m == 2 and deg == 2 and cm is not None:
                        # model rows are source classes, block rows targets
                        full = (cm.matrix.rows == dim and
                                cm.matrix.cols == tgt_groups[gysin])
                        blocks.append(Block((m, deg), gysin, "matrix",
                                            cm.matrix.transpose(),
                                            full=full, note="cycle model"))
                    else:
                        blocks.append(Block((m, deg), gysin, "open",
                                            note="Gysin"))
            arrows[(p, q)] = Arrow(p, q, src.dim, tgt.dim, tuple(blocks),
                                   anns.pop((p, q), None))

    for (p, q), a in anns.items():
        raise ValueError(f"annotation at ({p}, {q}) matches no arrow")

    spec = DifferentialSpec(tuple(c.label for c in s.components), arrows)

    # resolvability pass: every arrow with nonzero dimensions must have a
    # full matrix presentation, an annotation, or a dual arrow that has one
    unresolved = []
    for (p, q), arrow in arrows.items():
        if arrow.target_dim == 0 or arrow.source_dim == 0:
            continue
        if arrow.fully_presented() or arrow.annotation:
            continue
        dual = arrows.get((-p - 1, 6 - q))
        if dual is not None and (dual.fully_presented() or dual.annotation):
            continue
        if dual is None:
            # the dual arrow may be trivial because its dimensions vanish
            if e1.dim_pq(-p - 1, 6 - q) == 0 or e1.dim_pq(-p, 6 - q) == 0:
                continue
        unresolved.append((p, q))
    if unresolved:
        raise MissingBlock(
            "no matrix, annotation, or resolvable dual for the arrows at "
            + ", ".join(f"({p}, {q})" for p, q in sorted(unresolved)))
    return spec


# ---------------------------------------------------------------------------
# E2 and the limit report


def _stack(arrow: Arrow, src_groups, tgt_groups) -> ExactMatrix:
    """Assemble the full arrow matrix from its per-group blocks."""
    col_off, row_off = {}, {}
    ncols = nrows = 0
    for key, dim in src_groups:
        col_off[key] = ncols
        ncols += dim
    for key, dim in tgt_groups:
        row_off[key] = nrows
        nrows += dim
    grid = [[Fraction(0)] * ncols for _ in range(nrows)]
    for b in arrow.matrix_blocks():
        r0, c0 = row_off[b.target], col_off[b.source]
        for r in range(b.matrix.rows):
            for c in range(b.matrix.cols):
                grid[r0 + r][c0 + c] = b.matrix.entries[r][c]
    return ExactMatrix(grid)


def _resolve_ranks(e1: E1Grid, d: DifferentialSpec):
    """Exact rank of every arrow plus the provenance of each value."""
    ranks = {}
    assembled = {}

    def groups_at(p, q):
        return _groups(e1.entry_pq(p, q))

    # first pass: trivial, matrix-presented and annotated arrows
    for (p, q), arrow in d.arrows.items():
        if arrow.source_dim != e1.dim_pq(p, q):
            raise InconsistentRanks(
                f"arrow at ({p}, {q}) was built for a different page")
        if arrow.target_dim == 0:
            ranks[(p, q)] = (0, "zero", "")
            continue
        value = None
        if arrow.fully_presented():
            m = _stack(arrow, groups_at(p, q), groups_at(p + 1, q))
            assembled[(p, q)] = m
            value = ("matrix", rref(m)[0])
        if arrow.annotation is not None:
            a = arrow.annotation
            lower = max((rref(b.matrix)[0] for b in arrow.matrix_blocks()),
                        default=0)
            if not (lower <= a.rank <= min(arrow.source_dim, arrow.target_dim)):
                raise InconsistentRanks(
                    f"annotated rank {a.rank} at ({p}, {q}) is outside "
                    f"[{lower}, {min(arrow.source_dim, arrow.target_dim)}]")
            if value is not None and value[1] != a.rank:
                raise InconsistentRanks(
                    f"annotated rank {a.rank} at ({p}, {q}) disagrees with "
                    f"the computed rank {value[1]}")
            value = ("annotation", a.rank, a.why)
        if value is not None:
            via, r = value[0], value[1]
            ranks[(p, q)] = (r, via, value[2] if len(value) > 2 else "")

    # second pass: duality fills what is left
    for (p, q), arrow in d.arrows.items():
        if (p, q) in ranks:
            continue
        dual = ranks.get((-p - 1, 6 - q))
        if dual is not None:
            ranks[(p, q)] = (dual[0], "duality", f"dual of ({-p - 1}, {6 - q})")
        elif e1.dim_pq(-p - 1, 6 - q) == 0 or e1.dim_pq(-p, 6 - q) == 0:
            ranks[(p, q)] = (0, "duality", "dual arrow vanishes")
        else:
            raise MissingBlock(f"arrow at ({p}, {q}) has no resolved dual")

    # duality must agree wherever both arrows were resolved independently
    for (p, q), (r, via, _) in ranks.items():
        if via == "duality":
            continue
        partner = ranks.get((-p - 1, 6 - q))
        if partner and partner[1] not in ("duality",) and partner[0] != r:
            raise InconsistentRanks(
                f"ranks at ({p}, {q}) and ({-p - 1}, {6 - q}) break duality: "
                f"{r} vs {partner[0]}")

    # d1 * d1 = 0, on matrices where both are assembled, on ranks always
    for (p, q), m2 in assembled.items():
        m1 = assembled.get((p - 1, q))
        if m1 is not None and m1.rows:
            prod = [m2.matvec([m1.entries[r][c] for r in range(m1.rows)])
                    for c in range(m1.cols)]
            if any(x != 0 for col in prod for x in col):
                raise InconsistentRanks(
                    f"d1 after d1 at ({p - 1}, {q}) is not zero")
    for (p, q), (r, _, _) in ranks.items():
        incoming = ranks.get((p - 1, q), (0,))[0]
        if incoming + r > e1.dim_pq(p, q):
            raise InconsistentRanks(
                f"image ({incoming}) plus rank ({r}) exceed the {e1.dim_pq(p, q)}"
                f"-dimensional entry at ({p}, {q})")
    return ranks


@dataclass(frozen=True)
class LimitReport:
    e1: E1Grid
    e2: dict                  # (p, q) -> dimension
    betti: tuple
    h3_weights: tuple
    pure: bool
    ranks: dict               # (p, q) -> (rank, via, why)
    warnings: tuple = ()

    def e2_pq(self, p: int, q: int) -> int:
        return self.e2.get((p, q), 0)

    def to_json(self):
        cols = self.e1.columns
        rows = [{"q": q, "dims": [self.e2_pq(p, q) for p in cols]}
                for q in range(6, -1, -1)]
        return {
            "e1": self.e1.to_json(),
            "e2": {"columns": cols, "rows": rows},
            "betti": list(self.betti),
            "h3_weights": list(self.h3_weights),
            "pure": self.pure,
            "ranks": [{"p": p, "q": q, "rank": r, "via": via,
                       **({"why": why} if why else {})}
                      for (p, q), (r, via, why) in sorted(self.ranks.items())],
            "euler_e1": self.e1.euler(),
            "euler_betti": sum((-1) ** h * b for h, b in enumerate(self.betti)),
            "warnings": list(self.warnings),
        }


def compute_e2(e1: E1Grid, d: DifferentialSpec) -> LimitReport:
    """Exact second page, limit Betti numbers and the purity verdict."""
    ranks = _resolve_ranks(e1, d)

    def rank_at(p, q):
        return ranks.get((p, q), (0,))[0]

    e2 = {}
    for p in e1.columns:
        for q in range(0, 7):
            dim = e1.dim_pq(p, q)
            val = dim - rank_at(p, q) - rank_at(p - 1, q)
            if val < 0:
                raise InconsistentRanks(
                    f"negative entry at ({p}, {q}) on the second page")
            e2[(p, q)] = val

    betti = tuple(sum(e2.get((p, h - p), 0) for p in e1.columns)
                  for h in range(0, 7))
    # weights on H^3 in increasing order: q = 2, 3, 4
    h3_weights = (e2.get((1, 2), 0), e2.get((0, 3), 0), e2.get((-1, 4), 0))
    pure = all(e2.get((p, 3 - p), 0) == 0 for p in e1.columns if p != 0)

    warnings = []
    for p in e1.columns:
        if abs(p) > 1 and e2.get((p, 3 - p), 0):
            warnings.append(f"H^3 carries weight {3 - p} beyond the middle "
                            "three")
    for (p, q), val in sorted(e2.items()):
        mirror = e2.get((-p, q + 2 * p))
        if mirror is not None and mirror != val:
            warnings.append(
                f"second page is not weight-symmetric at ({p}, {q}): "
                f"{val} vs {mirror}")
    if e1.euler() != sum((-1) ** h * b for h, b in enumerate(betti)):
        warnings.append("Euler characteristic changed between pages")

    return LimitReport(e1, e2, betti, h3_weights, pure, ranks, tuple(warnings))


# ---------------------------------------------------------------------------
# text rendering


def _cell_e1(entry: E1Entry) -> str:
    if entry.dim == 0:
        return "0"
    # few summands are spelled out, a crowd is summed up
    if len(entry.summands) > 3:
        return _dim_str(entry.dim)
    return "⊕".join(_dim_str(s.dim) for s in entry.summands)


def _dim_str(n: int) -> str:
    return "0" if n == 0 else ("C" if n == 1 else f"C^{n}")


def _render(cols: Sequence[int], cell) -> str:
    table = [[cell(p, q) for p in cols] for q in range(6, -1, -1)]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    lines = []
    for row in table:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_e1(grid: E1Grid) -> str:
    """The first page as a text grid, rows running q = 6 down to 0."""
    return _render(grid.columns, lambda p, q: _cell_e1(grid.entry_pq(p, q)))


def render_e2(report: LimitReport) -> str:
    return _render(report.e1.columns,
                   lambda p, q: _dim_str(report.e2_pq(p, q)))
