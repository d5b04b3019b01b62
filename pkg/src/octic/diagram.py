"""Configuration diagrams of central fibers and their blow-up rewrites.

A diagram records the branch-divisor combinatorics of a central fiber
while the resolution of the nearby fibers is pulled across the family:
one node per surface (plane, exceptional component, or piece split off a
plane), one record per double or triple curve, and marked points for
pinches, separations and node pairs.  ``apply_blowup`` consumes one
blow-up step described by a :class:`CenterContext` and returns the
rewritten diagram; the geometric analysis that decides which rewrite
applies lives in :mod:`octic.resolve`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .classify import (
    FIVEFOLD_POINT,
    TRIPLE_LINE,
    DoubleCurve,
    ResidualSingularities,
)


class CenterNotInDiagram(Exception):
    """A blow-up step referenced a curve or point the diagram does not hold."""

    def __init__(self, what):
        self.what = what
        super().__init__("center not present in diagram: %r" % (what,))


class RuleConflict(Exception):
    """The described step matches no rewrite rule (or is self-contradictory)."""


PLANE = "plane"
EXCEPTIONAL = "exceptional"
SPLIT = "split"

# curve kinds
STRICT = "strict"            # intersection of two (or more) original planes
SPLIT_CURVE = "split"        # P meets the piece P' split off it
SECTION = "section"          # plane meets a split piece along a section
SPLIT_FIBER = "split_fiber"  # fiber curve joining two split pieces
TRACE = "trace"              # trace of a plane on a point tower
TOWER_SECTION = "tower_section"  # sections of a line tower
TOWER_FIBER = "tower_fiber"
TOWER_MEET = "tower_meet"    # two exceptional towers meet

_CURVE_KINDS = (
    STRICT,
    SPLIT_CURVE,
    SECTION,
    SPLIT_FIBER,
    TRACE,
    TOWER_SECTION,
    TOWER_FIBER,
    TOWER_MEET,
)

MARK_PINCH = "pinch"
MARK_SEPARATED = "separated"
MARK_NODE_PAIR = "node_pair"

# rewrite selectors used by CenterContext
PLAIN_EVEN = "plain_even"
PLAIN_ODD = "plain_odd"
SPLIT_REWRITE = "split"
NODE_PAIR = "node_pair"

POINT_GEOM = "point"
CURVE_GEOM = "curve"
TWO_CROSSING_CURVES = "two_crossing_curves"


def _surface_key(label: str):
    """Deterministic ordering: planes by index and prime count, towers after."""
    if label.startswith("P"):
        body = label[1:]
        base = body.rstrip("'")
        return (0, int(base), len(body) - len(base))
    return (1, label)


def _short(label: str) -> str:
    return label[1:] if label.startswith("P") else label


def curve_label(surfaces: Iterable[str]) -> str:
    return "".join(_short(s) for s in sorted(surfaces, key=_surface_key))


@dataclass(frozen=True)
class Surface:
    label: str
    origin: str                      # plane | exceptional | split
    parent: Optional[str] = None     # the plane a split piece came from

    def __post_init__(self):
        if self.origin not in (PLANE, EXCEPTIONAL, SPLIT):
            raise ValueError("unknown surface origin %r" % (self.origin,))
        if (self.origin == SPLIT) != (self.parent is not None):
            raise ValueError("split surfaces (exactly) carry a parent")

    def to_json(self):
        out = {"label": self.label, "origin": self.origin}
        if self.parent is not None:
            out["parent"] = self.parent
        return out


@dataclass(frozen=True)
class DiagramCurve:
    id: int
    surfaces: tuple               # sorted surface labels, len >= 2
    kind: str
    exceptional_on: tuple = ()    # surfaces on which the curve is drawn dashed
    over: Optional[str] = None    # triple_line | fivefold_point for split-type curves
    pinch_count: int = 0

    def __post_init__(self):
        if self.kind not in _CURVE_KINDS:
            raise ValueError("unknown curve kind %r" % (self.kind,))
        if len(self.surfaces) < 2:
            raise ValueError("a diagram curve joins at least two surfaces")
        if self.over is not None and self.over not in (TRIPLE_LINE, FIVEFOLD_POINT):
            raise ValueError("unknown over tag %r" % (self.over,))

    @property
    def label(self) -> str:
        return curve_label(self.surfaces)

    def to_json(self):
        out = {
            "id": self.id,
            "surfaces": list(self.surfaces),
            "kind": self.kind,
            "label": self.label,
        }
        if self.over is not None:
            out["over"] = self.over
        if self.pinch_count:
            out["pinches"] = self.pinch_count
        if self.exceptional_on:
            out["exceptional_on"] = list(self.exceptional_on)
        return out


@dataclass(frozen=True)
class DiagramPoint:
    id: int
    curves: tuple                 # curve ids meeting at the point
    marks: tuple = ()
    location: Optional[str] = None  # printed coordinates, when known

    def to_json(self):
        out = {"id": self.id, "curves": list(self.curves)}
        if self.marks:
            out["marks"] = list(self.marks)
        if self.location is not None:
            out["location"] = self.location
        return out


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class NewExceptionalSurface:
    center: str
    label: str

    def to_json(self):
        return {"event": "new_exceptional_surface", "center": self.center,
                "label": self.label}


@dataclass(frozen=True)
class SplitComponent:
    center: str
    parent: str
    label: str
    over: str

    def to_json(self):
        return {"event": "split_component", "center": self.center,
                "parent": self.parent, "label": self.label, "over": self.over}


@dataclass(frozen=True)
class NewPinch:
    center: str
    curve: int
    count: int = 1

    def to_json(self):
        return {"event": "new_pinch", "center": self.center,
                "curve": self.curve, "count": self.count}


@dataclass(frozen=True)
class NewNodePair:
    center: str
    count: int
    marker: str

    def to_json(self):
        return {"event": "new_node_pair", "center": self.center,
                "count": self.count, "marker": self.marker}


# ---------------------------------------------------------------------------
# step description handed over by the driver


@dataclass(frozen=True)
class CenterContext:
    """Geometric summary of one blow-up step restricted to the central fiber.

    The driver compares generic and central multiplicities of the center,
    decides which rewrite applies, and fills in the structural data; the
    diagram performs the rewrite without re-deriving any geometry.
    """

    name: str
    kind: str                                 # "point" | "line"
    generic_multiplicity: int
    central_multiplicity: int
    rewrite: str
    central_geometry: str = CURVE_GEOM
    target_curves: tuple = ()                 # curve ids consumed by the step
    target_point: Optional[int] = None        # diagram point blown or separated
    # plain odd blow-ups (new exceptional tower)
    tower_label: Optional[str] = None
    tower_traces: tuple = ()                  # planes traced on a point tower
    tower_sections: tuple = ()                # planes with sections on a line tower
    tower_fibers: tuple = ()                  # planes with fiber curves on a line tower
    tower_meets: tuple = ()                   # earlier towers met along a curve
    # split rewrites
    split_surface: Optional[str] = None
    split_over: Optional[str] = None
    section_surfaces: tuple = ()
    fiber_with: Optional[str] = None          # earlier split piece joined by a fiber
    # pinches fired by this step: (curve id, count)
    pinches: tuple = ()
    # node pairs
    nodes: int = 0
    node_marker: Optional[str] = None

    def __post_init__(self):
        if self.central_multiplicity < self.generic_multiplicity:
            raise RuleConflict(
                "central multiplicity %d below generic %d at %s"
                % (self.central_multiplicity, self.generic_multiplicity, self.name))
        if self.rewrite not in (PLAIN_EVEN, PLAIN_ODD, SPLIT_REWRITE, NODE_PAIR):
            raise RuleConflict("unknown rewrite %r" % (self.rewrite,))
        if self.rewrite == SPLIT_REWRITE and not self.split_surface:
            raise RuleConflict("split rewrite with no surface to split")
        if self.rewrite == PLAIN_ODD and not self.tower_label:
            raise RuleConflict("odd blow-up must name its exceptional surface")
        if self.rewrite == NODE_PAIR and self.nodes <= 0:
            raise RuleConflict("node rewrite with no nodes")


# ---------------------------------------------------------------------------
# the diagram itself


@dataclass
class Diagram:
    surfaces: dict = field(default_factory=dict)   # label -> Surface
    curves: dict = field(default_factory=dict)     # id -> DiagramCurve
    points: dict = field(default_factory=dict)     # id -> DiagramPoint
    events: list = field(default_factory=list)
    triple_meetings: list = field(default_factory=list)  # [(cid, cid, cid)]
    nodes: int = 0
    node_marker: Optional[str] = None
    next_curve_id: int = 0
    next_point_id: int = 0

    def clone(self) -> "Diagram":
        return Diagram(
            surfaces=dict(self.surfaces),
            curves=dict(self.curves),
            points=dict(self.points),
            events=list(self.events),
            triple_meetings=list(self.triple_meetings),
            nodes=self.nodes,
            node_marker=self.node_marker,
            next_curve_id=self.next_curve_id,
            next_point_id=self.next_point_id,
        )

    # -- construction helpers ------------------------------------------------

    def add_surface(self, s: Surface):
        if s.label in self.surfaces:
            raise RuleConflict("surface %s added twice" % s.label)
        self.surfaces[s.label] = s

    def add_curve(self, surfaces, kind, exceptional_on=(), over=None) -> int:
        labels = tuple(sorted(surfaces, key=_surface_key))
        for s in labels:
            if s not in self.surfaces:
                raise CenterNotInDiagram(s)
        cid = self.next_curve_id
        self.next_curve_id += 1
        self.curves[cid] = DiagramCurve(
            id=cid, surfaces=labels, kind=kind,
            exceptional_on=tuple(sorted(exceptional_on, key=_surface_key)),
            over=over)
        return cid

    def add_point(self, curve_ids, marks=(), location=None) -> int:
        for cid in curve_ids:
            if cid not in self.curves:
                raise CenterNotInDiagram(cid)
        pid = self.next_point_id
        self.next_point_id += 1
        self.points[pid] = DiagramPoint(id=pid, curves=tuple(curve_ids),
                                        marks=tuple(marks), location=location)
        return pid

    def point_at(self, location: str) -> Optional[DiagramPoint]:
        for pt in self.points.values():
            if pt.location == location:
                return pt
        return None

    def curve_by_surfaces(self, surfaces) -> Optional[DiagramCurve]:
        want = tuple(sorted(surfaces, key=_surface_key))
        for c in self.curves.values():
            if c.surfaces == want:
                return c
        return None

    def split_family(self, base_label: str):
        """All split pieces carved off ``base_label``, in creation order."""
        return [s for s in self.surfaces.values()
                if s.origin == SPLIT and s.parent == base_label]

    def next_prime_label(self, base_label: str) -> str:
        return base_label + "'" * (len(self.split_family(base_label)) + 1)

    # -- internal rewrite pieces --------------------------------------------

    def _remove_curve(self, cid: int):
        if cid not in self.curves:
            raise CenterNotInDiagram(cid)
        del self.curves[cid]
        for pid in list(self.points):
            pt = self.points[pid]
            if cid not in pt.curves:
                continue
            rest = tuple(c for c in pt.curves if c != cid)
            if len(rest) >= 2 or pt.marks:
                marks = pt.marks
                if len(rest) < 2 and MARK_SEPARATED not in marks:
                    marks = marks + (MARK_SEPARATED,)
                self.points[pid] = replace(pt, curves=rest, marks=marks)
            else:
                del self.points[pid]

    def _separate_point(self, pid: int):
        if pid not in self.points:
            raise CenterNotInDiagram(pid)
        pt = self.points[pid]
        if MARK_SEPARATED not in pt.marks:
            self.points[pid] = replace(pt, marks=pt.marks + (MARK_SEPARATED,))

    def _apply_pinches(self, ctx: CenterContext):
        for cid, count in ctx.pinches:
            if cid not in self.curves:
                raise CenterNotInDiagram(cid)
            c = self.curves[cid]
            if c.kind not in (SPLIT_CURVE, SPLIT_FIBER):
                raise RuleConflict(
                    "pinch emitted on %s curve %s" % (c.kind, c.label))
            self.curves[cid] = replace(c, pinch_count=c.pinch_count + count)
            # pinch points sit on a single curve, one marked point per pinch
            for _ in range(count):
                pid = self.next_point_id
                self.next_point_id += 1
                self.points[pid] = DiagramPoint(id=pid, curves=(cid,),
                                                marks=(MARK_PINCH,))
            self.events.append(NewPinch(ctx.name, cid, count))


def initial_diagram(arrangement) -> Diagram:
    """Diagram of an arrangement's branch divisor before any blow-up.

    One surface per plane, one curve per multiple line of the incidence
    profile, one marked point per multiple point (p >= 3) carrying the
    curves through it.
    """
    from . import incidence

    prof = incidence.profile(arrangement)
    d = Diagram()
    labels = []
    for i in range(1, prof.n_forms + 1):
        lab = "P%d" % i
        labels.append(lab)
        d.add_surface(Surface(label=lab, origin=PLANE))
    line_ids = []
    for line in prof.lines:
        cid = d.add_curve(["P%d" % i for i in line.planes], STRICT)
        line_ids.append((line, cid))
    for pt in prof.points:
        through = []
        for line, cid in line_ids:
            if incidence.point_on_line(pt.point, line.basis):
                through.append(cid)
        if through:
            d.add_point(tuple(through), location=incidence.point_text(pt.point))
    return d


def apply_blowup(d: Diagram, ctx: CenterContext) -> Diagram:
    """Rewrite ``d`` by one blow-up step; returns a new diagram.

    Emits at most two events.  Rewrites:

    * ``plain_even``   separation only; may fire pinches on split curves
    * ``plain_odd``    new exceptional tower with its traces/sections/fibers
    * ``split``        a plane sheds a new piece along the center
    * ``node_pair``    the center degenerated into two crossing curves
    """
    out = d.clone()
    events_before = len(out.events)

    if ctx.rewrite == PLAIN_EVEN:
        for cid in ctx.target_curves:
            out._remove_curve(cid)
        if ctx.target_point is not None:
            out._separate_point(ctx.target_point)
        out._apply_pinches(ctx)

    elif ctx.rewrite == PLAIN_ODD:
        label = ctx.tower_label
        out.add_surface(Surface(label=label, origin=EXCEPTIONAL))
        out.events.append(NewExceptionalSurface(ctx.name, label))
        for cid in ctx.target_curves:
            out._remove_curve(cid)
        if ctx.target_point is not None:
            out._separate_point(ctx.target_point)
        for p in ctx.tower_traces:
            out.add_curve((p, label), TRACE, exceptional_on=(p,))
        for p in ctx.tower_sections:
            out.add_curve((p, label), TOWER_SECTION)
        for p in ctx.tower_fibers:
            out.add_curve((p, label), TOWER_FIBER, exceptional_on=(p,))
        for t in ctx.tower_meets:
            out.add_curve((t, label), TOWER_MEET, exceptional_on=(t,))

    elif ctx.rewrite == SPLIT_REWRITE:
        parent = ctx.split_surface
        if parent not in out.surfaces:
            raise CenterNotInDiagram(parent)
        over = ctx.split_over
        if over not in (TRIPLE_LINE, FIVEFOLD_POINT):
            raise RuleConflict("split curve needs a singular-locus tag")
        label = out.next_prime_label(parent)
        out.add_surface(Surface(label=label, origin=SPLIT, parent=parent))
        out.events.append(SplitComponent(ctx.name, parent, label, over))
        for cid in ctx.target_curves:
            out._remove_curve(cid)
        if ctx.target_point is not None:
            out._separate_point(ctx.target_point)
        split_cid = out.add_curve((parent, label), SPLIT_CURVE,
                                  exceptional_on=(parent,), over=over)
        for s in ctx.section_surfaces:
            out.add_curve((s, label), SECTION, exceptional_on=(s,))
        if ctx.fiber_with is not None:
            if ctx.fiber_with not in out.surfaces:
                raise CenterNotInDiagram(ctx.fiber_with)
            prev = out.curve_by_surfaces((parent, ctx.fiber_with))
            if prev is None or prev.kind != SPLIT_CURVE:
                raise RuleConflict(
                    "fiber curve requires the earlier split curve %s"
                    % curve_label((parent, ctx.fiber_with)))
            fiber_cid = out.add_curve((ctx.fiber_with, label), SPLIT_FIBER,
                                      exceptional_on=(ctx.fiber_with, label),
                                      over=FIVEFOLD_POINT)
            out.add_point((prev.id, split_cid, fiber_cid))
            out.triple_meetings.append((prev.id, split_cid, fiber_cid))
        out._apply_pinches(ctx)

    elif ctx.rewrite == NODE_PAIR:
        if ctx.central_geometry != TWO_CROSSING_CURVES:
            raise RuleConflict("node rewrite outside a reducible center")
        for cid in ctx.target_curves:
            out._remove_curve(cid)
        marker = ctx.node_marker or "small_resolution"
        out.nodes += ctx.nodes
        out.node_marker = marker
        out.events.append(NewNodePair(ctx.name, ctx.nodes, marker))

    if len(out.events) - events_before > 2:
        raise RuleConflict("blow-up step emitted more than two events")
    return out


def residual_report(d: Diagram) -> ResidualSingularities:
    """Collect what is still singular: split curves, pinches, node pairs."""
    residual = []
    index_of = {}
    for c in d.curves.values():          # insertion order == creation order
        if c.kind in (SPLIT_CURVE, SPLIT_FIBER):
            index_of[c.id] = len(residual)
            residual.append(DoubleCurve(pinch_points=c.pinch_count, over=c.over))
    triples = []
    for (a, b, c) in d.triple_meetings:
        if a in index_of and b in index_of and c in index_of:
            triples.append(tuple(sorted((index_of[a], index_of[b], index_of[c]))))
    adjacency = set()
    for t in triples:
        for i in range(3):
            for j in range(i + 1, 3):
                adjacency.add((t[i], t[j]))
    return ResidualSingularities(
        double_curves=tuple(residual),
        nodes=d.nodes,
        node_surface_marker=d.node_marker if d.nodes else None,
        triple_meeting_points=tuple(sorted(triples)),
        adjacency=tuple(sorted(adjacency)),
    )


def to_json(d: Diagram) -> dict:
    return {
        "surfaces": [s.to_json() for s in d.surfaces.values()],
        "curves": [c.to_json() for c in d.curves.values()],
        "points": [p.to_json() for p in d.points.values()],
        "triple_meetings": [list(t) for t in d.triple_meetings],
        "nodes": d.nodes,
        "node_marker": d.node_marker,
        "events": [e.to_json() for e in d.events],
    }


def render_dot(d: Diagram, name: str = "central_fiber") -> str:
    """Graphviz source for the diagram; output is deterministic.

    One cluster per surface; each curve appears as a node inside every
    surface it lies on (dashed where the curve is exceptional there), with
    dotted cross-links tying the appearances together.  Pinch points show
    as diamond glyphs, node pairs as a doubled circle on the diagram root.
    """
    lines = ["graph %s {" % name]
    lines.append('  graph [compound=true, fontname="Helvetica"];')
    lines.append('  node [shape=box, fontname="Helvetica"];')
    for label in sorted(d.surfaces, key=_surface_key):
        surf = d.surfaces[label]
        lines.append('  subgraph "cluster_%s" {' % label)
        style = {PLANE: "solid", EXCEPTIONAL: "dashed", SPLIT: "dashed"}[surf.origin]
        lines.append('    label="%s"; style=%s;' % (label, style))
        members = [c for c in sorted(d.curves.values(), key=lambda c: c.id)
                   if label in c.surfaces]
        if not members:
            lines.append('    "anchor_%s" [shape=point, style=invis];' % label)
        for c in members:
            dash = ', style=dashed' if label in c.exceptional_on else ''
            lines.append('    "c%d@%s" [label="%s"%s];' % (c.id, label, c.label, dash))
        lines.append("  }")
    for c in sorted(d.curves.values(), key=lambda c: c.id):
        surfs = list(c.surfaces)
        for a, b in zip(surfs, surfs[1:]):
            lines.append('  "c%d@%s" -- "c%d@%s" [style=dotted];'
                         % (c.id, a, c.id, b))
    pinch_idx = 0
    for c in sorted(d.curves.values(), key=lambda c: c.id):
        for _ in range(c.pinch_count):
            home = c.surfaces[0]
            lines.append('  "pinch%d" [shape=diamond, label="", width=0.15, '
                         'height=0.15];' % pinch_idx)
            lines.append('  "pinch%d" -- "c%d@%s";' % (pinch_idx, c.id, home))
            pinch_idx += 1
    if d.nodes:
        lines.append('  "nodes" [shape=doublecircle, label="%d nodes\\n%s"];'
                     % (d.nodes, d.node_marker or ""))
    lines.append("}")
    return "\n".join(lines) + "\n"
