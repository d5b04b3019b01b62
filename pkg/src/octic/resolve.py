"""Blow-up schedules over the w-line and the central-fiber trace.

The generic fiber of a degenerating arrangement is resolved by a fixed
four-phase schedule: fivefold points, triple lines, quadruple points,
double lines (plane-plane lines first, then the double curves created on
exceptional components).  Carrying the schedule across the family and
restricting to a special fiber turns every step into one diagram
rewrite.  This module decides which rewrite fires at each step by
comparing generic and central multiplicities of the center, drives
:func:`octic.diagram.apply_blowup`, and collects the residual report.

A scenario may transcribe individual steps explicitly (``directives``)
when two fiber curves of one tower collide in the central fiber; that
situation is outside the derivable rule set and the transcribed rewrite
is applied verbatim.

:func:`near_pencil_check` is the combinatorial crepant-resolution
certificate for the branch divisor of the whole family, viewed as a
fourfold over the w-line.  Equational smoothness of the blow-up centers
is not verified; the certificate is the documented substitute.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from . import incidence
from .classify import FIVEFOLD_POINT, TRIPLE_LINE
from .diagram import (
    NODE_PAIR,
    PLAIN_EVEN,
    PLAIN_ODD,
    POINT_GEOM,
    SPLIT_REWRITE,
    TWO_CROSSING_CURVES,
    CenterContext,
    CenterNotInDiagram,
    Diagram,
    RuleConflict,
    apply_blowup,
    initial_diagram,
    residual_report,
)
from .exact import ExactMatrix, Poly, RationalFunction, fraction_str, rref
from .forms import ParamArrangement, specialize

QUADRUPLE_POINT = "quadruple_point"
DOUBLE_LINE = "double_line"

LEXICOGRAPHIC = "lexicographic"
EXPLICIT_LIST = "explicit_list"

NODE_MARKER = "small_resolution"


class NotOctic(ValueError):
    """The arrangement violates the multiplicity bounds (q <= 3, p <= 5)."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("arrangement is not octic: %r" % (self.violations,))


class TraceAborted(RuntimeError):
    """A step matched no rewrite rule; carries the partial trace."""

    def __init__(self, step: str, reason: str, trace):
        self.step = step
        self.reason = reason
        self.trace = tuple(trace)
        super().__init__("trace aborted at %s: %s" % (step, reason))


# ---------------------------------------------------------------------------
# schedule


@dataclass(frozen=True)
class Center:
    """One blow-up center, named the way the trace tables name it."""

    name: str
    kind: str        # fivefold_point | triple_line | quadruple_point | double_line
    phase: int
    planes: tuple    # surface labels involved
    role: str        # p5 | l3 | p4 | pair | trace | section | fiber | meet
    indices: tuple = ()          # 1-based plane indices (geometric roles)
    point: Optional[tuple] = None    # Vec4 of a point center
    tower: Optional[str] = None      # exceptional surface this center lives on
    base_point: Optional[tuple] = None   # fiber curves: crossing point
    towers: tuple = ()               # meet curves: the two towers

    def to_json(self):
        out = {
            "name": self.name,
            "kind": self.kind,
            "phase": self.phase,
            "planes": list(self.planes),
            "role": self.role,
        }
        if self.indices:
            out["indices"] = list(self.indices)
        if self.point is not None:
            out["point"] = incidence.point_text(self.point)
        if self.tower:
            out["tower"] = self.tower
        if self.base_point is not None:
            out["base_point"] = incidence.point_text(self.base_point)
        if self.towers:
            out["towers"] = list(self.towers)
        return out


@dataclass(frozen=True)
class BlowUpSchedule:
    steps: tuple

    def __post_init__(self):
        last = 0
        for c in self.steps:
            if c.phase not in (1, 2, 3, 4):
                raise RuleConflict("phase %r out of range" % (c.phase,))
            if c.phase < last:
                raise RuleConflict(
                    "schedule phases out of order at %s" % c.name)
            last = c.phase

    def names(self):
        return [c.name for c in self.steps]

    def by_name(self, name: str) -> Center:
        for c in self.steps:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self):
        return {"steps": [c.to_json() for c in self.steps]}


@dataclass(frozen=True)
class OrderPolicy:
    """Double-line ordering: lexicographic default, or an explicit name list."""

    kind: str = LEXICOGRAPHIC
    order: tuple = ()

    def __post_init__(self):
        if self.kind not in (LEXICOGRAPHIC, EXPLICIT_LIST):
            raise ValueError("unknown order policy %r" % (self.kind,))
        if self.kind == EXPLICIT_LIST and not self.order:
            raise ValueError("explicit order policy needs a center list")


def _point_with_planes(profile, wanted) -> incidence.MultiplePoint:
    for pt in profile.points:
        if wanted <= set(pt.planes):
            return pt
    raise RuleConflict("no profile point through planes %r" % (sorted(wanted),))


def schedule(generic: incidence.IncidenceProfile,
             order_policy: Optional[OrderPolicy] = None) -> BlowUpSchedule:
    """Four-phase blow-up schedule of the generic fiber.

    Quadruple points on a triple line are consumed by the line blow-up
    and are not separate centers; a plane crossing a blown triple line
    away from a fivefold point leaves a fiber curve on the line's tower,
    and a fivefold point on a blown triple line leaves a curve where the
    two exceptional towers meet.
    """
    policy = order_policy or OrderPolicy()
    bad = [("line", l.planes) for l in generic.lines if l.q >= 4]
    bad += [("point", pt.planes) for pt in generic.points if pt.p >= 6]
    if bad:
        raise NotOctic(bad)

    centers: list[Center] = []
    tower_count = 0

    def next_tower() -> str:
        nonlocal tower_count
        label = chr(ord("A") + tower_count)
        tower_count += 1
        return label

    p5_centers = []
    for pt in generic.points:
        if pt.p != 5:
            continue
        label = next_tower()
        c = Center(
            name="P" + "".join(str(i) for i in pt.planes),
            kind=FIVEFOLD_POINT, phase=1,
            planes=tuple("P%d" % i for i in pt.planes),
            role="p5", indices=pt.planes, point=pt.point, tower=label)
        p5_centers.append(c)
        centers.append(c)

    l3_centers = []
    for line in generic.lines:
        if line.q != 3:
            continue
        label = next_tower()
        c = Center(
            name="L" + "".join(str(i) for i in line.planes),
            kind=TRIPLE_LINE, phase=2,
            planes=tuple("P%d" % i for i in line.planes),
            role="l3", indices=line.planes, tower=label)
        l3_centers.append(c)
        centers.append(c)
    for c1, c2 in combinations(l3_centers, 2):
        b1 = generic.line_by_planes(c1.indices).basis
        b2 = generic.line_by_planes(c2.indices).basis
        stacked = [incidence._vector_scalars(v) for v in b1 + b2]
        if incidence._matrix_rank(stacked) > 3:
            continue  # disjoint
        combined = set(c1.indices) | set(c2.indices)
        if not any(combined <= set(p5.indices) for p5 in p5_centers):
            raise RuleConflict(
                "triple lines %s and %s meet away from a fivefold point"
                % (c1.name, c2.name))

    for pt in generic.points:
        if pt.p == 4 and pt.j == 0:
            centers.append(Center(
                name="P" + "".join(str(i) for i in pt.planes),
                kind=QUADRUPLE_POINT, phase=3,
                planes=tuple("P%d" % i for i in pt.planes),
                role="p4", indices=pt.planes, point=pt.point))

    # phase 4: plane-plane double lines, then the tower curves
    for line in generic.lines:
        if line.q != 2:
            continue
        i, j = line.planes
        centers.append(Center(
            name="L%d%d" % (i, j), kind=DOUBLE_LINE, phase=4,
            planes=("P%d" % i, "P%d" % j), role="pair", indices=line.planes))
    for c in p5_centers:
        for i in c.indices:
            centers.append(Center(
                name="L%d%s" % (i, c.tower), kind=DOUBLE_LINE, phase=4,
                planes=("P%d" % i, c.tower), role="trace",
                indices=(i,), tower=c.tower))
    for c in l3_centers:
        for i in c.indices:
            centers.append(Center(
                name="L%d%s" % (i, c.tower), kind=DOUBLE_LINE, phase=4,
                planes=("P%d" % i, c.tower), role="section",
                indices=(i,), tower=c.tower))
    for c in l3_centers:
        for j in range(1, generic.n_forms + 1):
            if j in c.indices:
                continue
            crossing = _point_with_planes(generic, set(c.indices) | {j})
            if crossing.p == 5:
                continue  # separated with the fivefold point
            centers.append(Center(
                name="L%d%s" % (j, c.tower), kind=DOUBLE_LINE, phase=4,
                planes=("P%d" % j, c.tower), role="fiber",
                indices=(j,), tower=c.tower, base_point=crossing.point))
    for cp in p5_centers:
        for cl in l3_centers:
            line = generic.line_by_planes(cl.indices)
            if incidence.point_on_line(cp.point, line.basis):
                centers.append(Center(
                    name="L%s%s" % (cp.tower, cl.tower), kind=DOUBLE_LINE,
                    phase=4, planes=(cp.tower, cl.tower), role="meet",
                    point=cp.point, towers=(cp.tower, cl.tower)))

    if policy.kind == EXPLICIT_LIST:
        known = {c.name for c in centers}
        for name in policy.order:
            if name not in known:
                raise ValueError("explicit order names unknown center %s" % name)
        pos = {name: k for k, name in enumerate(policy.order)}
        fallback = len(policy.order)
        centers = sorted(
            enumerate(centers),
            key=lambda kv: (kv[1].phase, pos.get(kv[1].name, fallback), kv[0]))
        centers = [c for _, c in centers]
    return BlowUpSchedule(steps=tuple(centers))


# ---------------------------------------------------------------------------
# central-fiber trace


def _frac_point(vec) -> tuple:
    """Vec4 of constant polynomials as a hashable Fraction 4-tuple."""
    out = []
    for p in vec:
        if p.degree > 0:
            raise RuleConflict("point coordinate still depends on w: %s" % p)
        out.append(p.coeffs[0] if p.coeffs else Fraction(0))
    return tuple(out)


def _is_constant(x) -> bool:
    if isinstance(x, RationalFunction):
        return x.num.degree <= 0 and x.den.degree <= 0
    if isinstance(x, Poly):
        return x.degree <= 0
    return True


@dataclass
class _LineData:
    members: tuple   # central planes containing the central pair line
    key: tuple       # canonical kernel of the central rows, hashable
    rows: tuple      # the two central rows spanning the pencil


class _Driver:
    """Applies one schedule to one special fiber, deriving each rewrite."""

    def __init__(self, a: ParamArrangement, w0, sched: BlowUpSchedule,
                 directives=None):
        self.w0 = Fraction(w0)
        self.a = a
        self.sched = sched
        self.directives = dict(directives or {})
        self.central = specialize(a, self.w0)
        self.g_rows = incidence._scalar_rows(a)
        self.c_rows = incidence._scalar_rows(self.central)
        self.n = len(self.c_rows)
        self.d = initial_diagram(self.central)
        self.trace = [self.d]
        self.blown: set = set()
        self.blown_points: list = []   # chronological point-center records
        self.blown_lines: dict = {}    # central line key -> record
        self.flagged: set = set()      # pair names marked for a node rewrite
        self.flag_points: set = set()  # crossing points consumed by the scan
        self.pending: dict = {}        # center name -> [curve ids to pinch]
        self._line_cache: dict = {}

    # -- central geometry ----------------------------------------------------

    def _central_point(self, vec) -> tuple:
        return _frac_point(incidence.evaluate_vector(vec, self.w0))

    def _planes_through(self, q: tuple) -> tuple:
        hits = []
        for k in range(self.n):
            if not sum(r * c for r, c in zip(self.c_rows[k], q)):
                hits.append(k + 1)
        return tuple(hits)

    def _line_data(self, planes) -> _LineData:
        i, j = sorted(planes)[:2]
        if (i, j) in self._line_cache:
            return self._line_cache[(i, j)]
        ri, rj = self.c_rows[i - 1], self.c_rows[j - 1]
        members = [i, j]
        for k in range(1, self.n + 1):
            if k in (i, j):
                continue
            if incidence._matrix_rank([ri, rj, self.c_rows[k - 1]]) == 2:
                members.append(k)
        _, kernel, _ = rref(ExactMatrix([ri, rj]))
        data = _LineData(
            members=tuple(sorted(members)),
            key=tuple(tuple(v) for v in kernel),
            rows=(ri, rj))
        self._line_cache[(i, j)] = data
        return data

    def _on_central_line(self, q: tuple, data: _LineData) -> bool:
        return all(not sum(r * c for r, c in zip(row, q)) for row in data.rows)

    def _constant_pair_line(self, planes) -> bool:
        i, j = planes
        _, kernel, _ = rref(ExactMatrix([self.g_rows[i - 1], self.g_rows[j - 1]]))
        return all(_is_constant(x) for v in kernel for x in v)

    def _resolve_curve(self, surfaces) -> int:
        c = self.d.curve_by_surfaces(surfaces)
        if c is None:
            raise CenterNotInDiagram(tuple(surfaces))
        return c.id

    def _diagram_point(self, q: tuple):
        text = incidence.point_text(
            incidence.primitive_vector(list(q)))
        pt = self.d.point_at(text)
        return pt.id if pt is not None else None

    def _fire(self, name: str) -> tuple:
        counts = Counter(self.pending.pop(name, ()))
        return tuple(sorted(counts.items()))

    def _virgin(self, q: tuple) -> bool:
        return all(bp["point"] != q for bp in self.blown_points)

    def _on_blown_line(self, q: tuple, keys) -> bool:
        # a point on an earlier line center was separated by that blow-up
        for key in keys:
            rows = [list(v) for v in key]
            if incidence._matrix_rank(rows + [list(q)]) == 2:
                return True
        return False

    # -- rule applications ---------------------------------------------------

    def run(self):
        for c in self.sched.steps:
            self._step(c)
        if self.pending:
            raise TraceAborted(
                "end", "pinch attributions never fired: %r"
                % sorted(self.pending), self.trace)
        return tuple(self.trace), residual_report(self.d)

    def _step(self, c: Center):
        try:
            if c.name in self.directives:
                ctx, post = self._directive_ctx(c, self.directives[c.name])
            else:
                ctx, post = self._auto_ctx(c)
            new_d = apply_blowup(self.d, ctx)
        except (RuleConflict, CenterNotInDiagram) as e:
            raise TraceAborted(c.name, str(e), self.trace) from e
        self.d = new_d
        self.trace.append(new_d)
        self.blown.add(c.name)
        if post is not None:
            post(new_d)

    def _auto_ctx(self, c: Center):
        if c.role == "p5":
            return self._point_tower_ctx(c)
        if c.role == "l3":
            return self._line_tower_ctx(c)
        if c.role == "p4":
            return self._quadruple_ctx(c)
        if c.role == "pair":
            return self._pair_ctx(c)
        return self._tower_curve_ctx(c)

    def _point_tower_ctx(self, c: Center):
        q = self._central_point(c.point)
        m = len(self._planes_through(q))
        if m != 5:
            raise RuleConflict(
                "fivefold point %s has central multiplicity %d" % (c.name, m))
        ctx = CenterContext(
            name=c.name, kind="point", generic_multiplicity=5,
            central_multiplicity=m, rewrite=PLAIN_ODD,
            central_geometry=POINT_GEOM, tower_label=c.tower,
            tower_traces=c.planes, target_point=self._diagram_point(q))

        def post(_):
            self.blown_points.append({
                "name": c.name, "point": q, "jump": False,
                "tower": c.tower, "parent": None, "split_label": None})
        return ctx, post

    def _line_tower_ctx(self, c: Center):
        data = self._line_data(c.indices[:2])
        m = len(data.members)
        if m != 3:
            raise RuleConflict(
                "triple line %s has central multiplicity %d" % (c.name, m))
        fibers = tuple(
            "P%d" % s.indices[0] for s in self.sched.steps
            if s.role == "fiber" and s.tower == c.tower)
        meets = tuple(
            t for s in self.sched.steps if s.role == "meet"
            and c.tower in s.towers
            for t in s.towers if t != c.tower)
        target = self._resolve_curve(c.planes)
        ctx = CenterContext(
            name=c.name, kind="line", generic_multiplicity=3,
            central_multiplicity=m, rewrite=PLAIN_ODD, tower_label=c.tower,
            target_curves=(target,), tower_sections=c.planes,
            tower_fibers=fibers, tower_meets=meets)

        def post(_):
            self.blown_lines[data.key] = {"jump": False, "name": c.name}
        return ctx, post

    def _quadruple_ctx(self, c: Center):
        q = self._central_point(c.point)
        members = self._planes_through(q)
        m = len(members)
        pid = self._diagram_point(q)
        if m == 4:
            ctx = CenterContext(
                name=c.name, kind="point", generic_multiplicity=4,
                central_multiplicity=4, rewrite=PLAIN_EVEN,
                central_geometry=POINT_GEOM, target_point=pid,
                pinches=self._fire(c.name))

            def post(_):
                self.blown_points.append({
                    "name": c.name, "point": q, "jump": False,
                    "tower": None, "parent": None, "split_label": None})
            return ctx, post
        if m != 5:
            raise RuleConflict(
                "quadruple point %s has central multiplicity %d" % (c.name, m))
        extra = set(members) - set(c.indices)
        if len(extra) != 1:
            raise RuleConflict(
                "no single extra plane at %s: %r" % (c.name, sorted(extra)))
        e = extra.pop()
        parent = "P%d" % e
        label = self.d.next_prime_label(parent)
        ctx = CenterContext(
            name=c.name, kind="point", generic_multiplicity=4,
            central_multiplicity=5, rewrite=SPLIT_REWRITE,
            central_geometry=POINT_GEOM, split_surface=parent,
            split_over=FIVEFOLD_POINT, section_surfaces=c.planes,
            target_point=pid, pinches=self._fire(c.name))

        def post(new_d):
            split_cid = new_d.curve_by_surfaces((parent, label)).id
            self._register_crossing_pairs(
                e, split_cid, tuple(self.blown_lines), point=q)
            self.blown_points.append({
                "name": c.name, "point": q, "jump": True,
                "tower": None, "parent": parent, "split_label": label})
        return ctx, post

    def _pair_ctx(self, c: Center):
        data = self._line_data(c.indices)
        if c.name in self.flagged:
            target = self._resolve_curve(c.planes)
            if self.pending.get(c.name):
                raise RuleConflict("pinch attribution on a node pair %s" % c.name)
            ctx = CenterContext(
                name=c.name, kind="line", generic_multiplicity=2,
                central_multiplicity=len(data.members), rewrite=NODE_PAIR,
                central_geometry=TWO_CROSSING_CURVES, target_curves=(target,),
                nodes=2, node_marker=NODE_MARKER)
            return ctx, None
        if data.key in self.blown_lines:
            return self._successor_ctx(c, data)
        m = len(data.members)
        if m == 2:
            return self._plain_pair_ctx(c, data)
        if m == 3:
            return self._jump_ctx(c, data)
        raise RuleConflict(
            "double line %s has central multiplicity %d" % (c.name, m))

    def _plain_pair_ctx(self, c: Center, data: _LineData):
        target = self._resolve_curve(c.planes)
        ctx = CenterContext(
            name=c.name, kind="line", generic_multiplicity=2,
            central_multiplicity=2, rewrite=PLAIN_EVEN,
            target_curves=(target,), pinches=self._fire(c.name))

        def post(_):
            prior = tuple(self.blown_lines)
            self.blown_lines[data.key] = {"jump": False, "name": c.name}
            self._node_scan(c, data, prior)
        return ctx, post

    def _node_scan(self, c: Center, data: _LineData, prior):
        # a blown double line may reveal that a later center degenerated
        # into two curves crossing at a fresh central point
        for c2 in self.sched.steps:
            if c2.role != "pair" or c2.name in self.blown:
                continue
            if set(c2.indices) & set(c.indices):
                continue
            g_stack = [self.g_rows[k - 1] for k in c.indices + c2.indices]
            if incidence._matrix_rank(g_stack) != 4:
                continue  # the generic lines already meet
            d2 = self._line_data(c2.indices)
            if len(d2.members) != 2:
                continue
            c_stack = ExactMatrix(list(data.rows) + list(d2.rows))
            rank, kernel, _ = rref(c_stack)
            if rank != 3:
                continue
            q = _frac_point(incidence.primitive_vector(kernel[0]))
            if q in self.flag_points or not self._virgin(q):
                continue
            if self._on_blown_line(q, prior):
                continue
            self.flagged.add(c2.name)
            self.flag_points.add(q)

    def _successor_ctx(self, c: Center, data: _LineData):
        entry = self.blown_lines[data.key]
        if not entry.get("jump"):
            raise RuleConflict(
                "double line %s lies on the blown line %s"
                % (c.name, entry["name"]))
        e = entry["extra"]
        if e not in c.indices:
            raise RuleConflict(
                "successor %s misses the split plane P%d" % (c.name, e))
        x = c.indices[0] if c.indices[1] == e else c.indices[1]
        targets = []
        for piece in self.d.split_family("P%d" % e):
            cv = self.d.curve_by_surfaces(("P%d" % x, piece.label))
            if cv is not None:
                targets.append(cv.id)
        ctx = CenterContext(
            name=c.name, kind="line", generic_multiplicity=2,
            central_multiplicity=len(data.members), rewrite=PLAIN_EVEN,
            target_curves=tuple(targets), pinches=self._fire(c.name))
        return ctx, None

    def _jump_ctx(self, c: Center, data: _LineData):
        e = (set(data.members) - set(c.indices)).pop()
        parent = "P%d" % e
        label = self.d.next_prime_label(parent)
        target = self._resolve_curve(
            tuple("P%d" % k for k in data.members))
        points_on = [bp for bp in self.blown_points
                     if self._on_central_line(bp["point"], data)]
        fiber_with = None
        for bp in points_on:
            if bp["jump"] and bp["parent"] == parent:
                fiber_with = bp["split_label"]
                break
        ctx = CenterContext(
            name=c.name, kind="line", generic_multiplicity=2,
            central_multiplicity=3, rewrite=SPLIT_REWRITE,
            split_surface=parent, split_over=TRIPLE_LINE,
            target_curves=(target,),
            section_surfaces=c.planes, fiber_with=fiber_with,
            pinches=self._fire(c.name))

        def post(new_d):
            prior = tuple(self.blown_lines)
            self.blown_lines[data.key] = {
                "jump": True, "extra": e, "parent": parent, "name": c.name}
            split_cid = new_d.curve_by_surfaces((parent, label)).id
            successors = [
                c2 for c2 in self.sched.steps
                if c2.role == "pair" and c2.name not in self.blown
                and set(c2.indices) <= set(data.members)]
            if fiber_with is not None:
                fiber_cid = new_d.curve_by_surfaces((fiber_with, label)).id
                for c2 in successors:
                    self.pending.setdefault(c2.name, []).append(fiber_cid)
            else:
                # a pinch needs a blown point on the line to sit over
                constant = [c2 for c2 in successors
                            if self._constant_pair_line(c2.indices)] \
                    if points_on else []
                if constant:
                    self.pending.setdefault(
                        constant[0].name, []).append(split_cid)
                else:
                    for bp in points_on:
                        if bp["tower"] is None:
                            continue
                        trace_name = "L%d%s" % (e, bp["tower"])
                        if any(s.name == trace_name for s in self.sched.steps) \
                                and trace_name not in self.blown:
                            self.pending.setdefault(
                                trace_name, []).append(split_cid)
                            break
            self._register_crossing_pairs(e, split_cid, prior, line=data)
        return ctx, post

    def _register_crossing_pairs(self, e: int, split_cid: int, prior,
                                 point=None, line=None):
        """Pinch attribution for plain double lines through the jump locus.

        A later plain double line containing the split plane and crossing
        the blown center at a point no earlier center touched carries one
        pinch of the new split curve.
        """
        for c2 in self.sched.steps:
            if c2.role != "pair" or c2.name in self.blown:
                continue
            if e not in c2.indices:
                continue
            d2 = self._line_data(c2.indices)
            if len(d2.members) != 2:
                continue
            if point is not None:
                if not self._on_central_line(point, d2):
                    continue
                q = point
            else:
                stack = ExactMatrix(list(line.rows) + list(d2.rows))
                rank, kernel, _ = rref(stack)
                if rank != 3:
                    continue
                q = _frac_point(incidence.primitive_vector(kernel[0]))
            if not self._virgin(q) or self._on_blown_line(q, prior):
                continue
            self.pending.setdefault(c2.name, []).append(split_cid)

    def _tower_curve_ctx(self, c: Center):
        if c.role == "fiber":
            base = self._central_point(c.base_point)
            for c2 in self.sched.steps:
                if c2.role == "fiber" and c2.tower == c.tower \
                        and c2.name != c.name \
                        and self._central_point(c2.base_point) == base:
                    raise RuleConflict(
                        "fiber curves %s and %s share the central point %s; "
                        "the scenario must transcribe these steps"
                        % (c.name, c2.name, incidence.point_text(
                            incidence.evaluate_vector(c.base_point, self.w0))))
        target = self._resolve_curve(c.planes)
        ctx = CenterContext(
            name=c.name, kind="line", generic_multiplicity=2,
            central_multiplicity=2, rewrite=PLAIN_EVEN,
            target_curves=(target,), pinches=self._fire(c.name))
        return ctx, None

    # -- transcribed steps ---------------------------------------------------

    def _directive_ctx(self, c: Center, spec: dict):
        kind = "point" if c.role in ("p5", "p4") else "line"
        targets = tuple(self._resolve_curve(tuple(labels))
                        for labels in spec.get("targets", ()))
        counts = Counter(self.pending.pop(c.name, ()))
        for labels in spec.get("pinches", ()):
            counts[self._resolve_curve(tuple(labels))] += 1
        pinches = tuple(sorted(counts.items()))
        rewrite = spec.get("rewrite", "plain")
        if rewrite == "plain":
            ctx = CenterContext(
                name=c.name, kind=kind, generic_multiplicity=2,
                central_multiplicity=2, rewrite=PLAIN_EVEN,
                target_curves=targets, pinches=pinches)
            return ctx, None
        if rewrite == "split":
            over = spec.get("over")
            if over not in (TRIPLE_LINE, FIVEFOLD_POINT):
                raise RuleConflict(
                    "transcribed split at %s needs a singular-locus tag"
                    % c.name)
            ctx = CenterContext(
                name=c.name, kind=kind, generic_multiplicity=2,
                central_multiplicity=3, rewrite=SPLIT_REWRITE,
                split_surface=spec["parent"], split_over=over,
                target_curves=targets,
                section_surfaces=tuple(spec.get("sections", ())),
                fiber_with=spec.get("fiber_with"), pinches=pinches)
            return ctx, None
        raise RuleConflict(
            "transcribed step %s has unknown rewrite %r" % (c.name, rewrite))


def trace_central_fiber(a: ParamArrangement, w0, s: BlowUpSchedule,
                        directives=None):
    """Carry the schedule across the family, restricted to the fiber at w0.

    Returns ``(trace, residual)``: every intermediate diagram (the fiber's
    initial diagram first) and the residual-singularity report of the last
    one.  A step that matches no rewrite rule raises :class:`TraceAborted`
    carrying the partial trace; parse and incidence errors propagate.
    """
    return _Driver(a, w0, s, directives).run()


# ---------------------------------------------------------------------------
# crepant certificate for the branch fourfold


@dataclass(frozen=True)
class Stratum:
    """Irreducible intersection stratum of the branch divisor fourfold."""

    label: str
    planes: tuple        # divisors containing the stratum
    dim: int             # dimension inside the fourfold
    vertical: bool       # contained in one special fiber
    at: Optional[Fraction]   # that fiber's w, vertical strata only
    verdict: str         # near_pencil | dimension_identity | fail
    witness: tuple = ()  # planes of the containing stratum, near-pencil only

    @property
    def m(self) -> int:
        return len(self.planes)

    def to_json(self):
        out = {
            "label": self.label,
            "planes": list(self.planes),
            "dim": self.dim,
            "m": self.m,
            "vertical": self.vertical,
            "verdict": self.verdict,
        }
        if self.at is not None:
            out["at"] = fraction_str(self.at)
        if self.witness:
            out["witness"] = list(self.witness)
        return out


@dataclass(frozen=True)
class Observation:
    name: str
    ok: bool
    instances: tuple = ()

    def to_json(self):
        return {"name": self.name, "ok": self.ok,
                "instances": list(self.instances)}


@dataclass(frozen=True)
class NearPencilReport:
    ok: bool
    strata: tuple
    failures: tuple
    observations: tuple
    special_first_blowup: bool
    notes: tuple

    def to_json(self):
        return {
            "ok": self.ok,
            "strata": [s.to_json() for s in self.strata],
            "failures": list(self.failures),
            "observations": [o.to_json() for o in self.observations],
            "special_first_blowup": self.special_first_blowup,
            "notes": list(self.notes),
        }


class _RawStratum:
    def __init__(self, label, planes, dim, vertical, at, rows):
        self.label = label
        self.planes = tuple(planes)
        self.dim = dim
        self.vertical = vertical
        self.at = at
        self.rows = rows    # defining rows over Q(w) or, vertical, over Q

    @property
    def m(self):
        return len(self.planes)


def _contains(outer: _RawStratum, inner: _RawStratum) -> bool:
    """Whether the inner stratum lies inside the outer one."""
    if inner.vertical and not outer.vertical:
        at = inner.at
        rows = [[x.evaluate(at) if isinstance(x, RationalFunction)
                 else x for x in row] for row in outer.rows]
    elif inner.vertical == outer.vertical:
        if inner.vertical and inner.at != outer.at:
            return False
        rows = outer.rows
    else:
        return False  # a horizontal stratum never sits in one fiber
    base = incidence._matrix_rank(inner.rows)
    for row in rows:
        if incidence._matrix_rank(list(inner.rows) + [row]) != base:
            return False
    return True


def near_pencil_check(a: ParamArrangement) -> NearPencilReport:
    """Crepant-resolution certificate for the family's branch divisor.

    Enumerates the intersection strata of the eight (or fewer) divisor
    hypersurfaces over the w-line: the horizontal strata traced by the
    generic multiple lines and points, and the vertical strata appearing
    inside special fibers.  Every stratum on three or more divisors must
    either be near-pencil (contained in a stratum of one more dimension
    on one fewer divisor) or satisfy floor(m/2) = 3 - dim.  Fatal values
    where two planes coincide fall outside the certificate and are noted.
    """
    generic = incidence.profile(a)
    g_rows = incidence._scalar_rows(a)
    scan = incidence.degenerate_values(a)

    strata: list[_RawStratum] = []
    for line in generic.lines:
        rows = [g_rows[k - 1] for k in line.planes]
        strata.append(_RawStratum(
            "C" + "".join(str(i) for i in line.planes),
            line.planes, 2, False, None, rows))
    for pt in generic.points:
        rows = [g_rows[k - 1] for k in pt.planes]
        strata.append(_RawStratum(
            "C" + "".join(str(i) for i in pt.planes),
            pt.planes, 1, False, None, rows))

    notes: list[str] = []
    for fv in scan.fatal:
        notes.append(
            "w=%s: %s; that fiber is outside the certificate"
            % (fraction_str(fv.w0), fv.reason))

    for dv in scan.values:
        w0 = dv.w0
        cprof = dv.profile
        suffix = "@" + fraction_str(w0)
        for line in cprof.lines:
            g_rank = incidence._matrix_rank(
                [g_rows[k - 1] for k in line.planes])
            if g_rank < 3:
                continue  # the whole pencil already exists generically
            rows = [[x.evaluate(w0) if isinstance(x, RationalFunction) else x
                     for x in g_rows[k - 1]] for k in line.planes]
            strata.append(_RawStratum(
                "C" + "".join(str(i) for i in line.planes) + suffix,
                line.planes, 1, True, w0, rows))
        for pt in cprof.points:
            g_rank = incidence._matrix_rank(
                [g_rows[k - 1] for k in pt.planes])
            if g_rank < 4:
                continue  # fiber of a horizontal point family
            rows = [[x.evaluate(w0) if isinstance(x, RationalFunction) else x
                     for x in g_rows[k - 1]] for k in pt.planes]
            strata.append(_RawStratum(
                "C" + "".join(str(i) for i in pt.planes) + suffix,
                pt.planes, 0, True, w0, rows))

    judged: list[Stratum] = []
    failures: list[str] = []
    for s in strata:
        verdict, witness = "dimension_identity", ()
        if s.m >= 3:
            found = None
            for t in strata:
                if t is s or t.dim != s.dim + 1 or t.m != s.m - 1:
                    continue
                if _contains(t, s):
                    found = t
                    break
            if found is not None:
                verdict, witness = "near_pencil", found.planes
            elif s.m // 2 == 3 - s.dim:
                verdict = "dimension_identity"
            else:
                verdict = "fail"
                failures.append(s.label)
        judged.append(Stratum(
            label=s.label, planes=s.planes, dim=s.dim, vertical=s.vertical,
            at=s.at, verdict=verdict, witness=witness))

    def _check(name, want_dim, want_m, outer_test):
        instances, ok = [], True
        for s in strata:
            if not s.vertical or s.dim != want_dim or s.m != want_m:
                continue
            instances.append(s.label)
            if not any(outer_test(t) and _contains(t, s)
                       for t in strata if t is not s):
                ok = False
        return Observation(name=name, ok=ok, instances=tuple(instances))

    observations = (
        _check("triple_curve_on_double_surface", 1, 3,
               lambda t: t.dim == 2),
        _check("quadruple_point_on_triple_curve", 0, 4,
               lambda t: t.dim == 1 and t.m == 3),
        _check("quintuple_point_on_quadruple_curve", 0, 5,
               lambda t: t.dim == 1 and t.m == 4),
    )

    for s in judged:
        if s.m == 5 and s.vertical and s.verdict == "near_pencil":
            notes.append(
                "quintuple point %s lies on the quadruple curve C%s"
                % (s.label, "".join(str(i) for i in s.witness)))
        elif s.m == 5 and not s.vertical:
            notes.append(
                "quintuple locus %s is a curve of the family and passes "
                "by the dimension identity" % s.label)

    special = any(
        f.coeffs[k].degree > 0 for f in a.forms for k in range(3))
    if special:
        notes.append(
            "a projective coordinate coefficient varies with w: the first "
            "blow-up center sweeps through the degenerate fiber and its "
            "strict transforms need the separate smoothness argument")

    return NearPencilReport(
        ok=not failures and all(o.ok for o in observations),
        strata=tuple(judged),
        failures=tuple(failures),
        observations=observations,
        special_first_blowup=special,
        notes=tuple(notes))
