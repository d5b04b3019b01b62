"""Components of the semistable model and the nerve of their intersections.

Fiberwise resolution replaces the degenerate fiber by a reduced normal
crossing divisor: the resolved threefold Y plus one new component per
residual double curve (a bundle over the curve) or per node-bearing
surface.  The catalogue of component geometries is closed -- each entry in
the residual report maps to a known bundle type with a known Betti vector,
and every double or triple intersection locus is one of three surface
geometries or a smooth conic.  Configurations the rules never produce are
rejected rather than guessed at.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .classify import (
    FIVEFOLD_POINT,
    TRIPLE_LINE,
    DoubleCurve,
    ResidualSingularities,
)
from .resolve import NODE_MARKER


class UnsupportedConfiguration(ValueError):
    """Residual shape outside the catalogue of worked component models."""


def _check_count(value: int, what: str) -> None:
    if not isinstance(value, int) or value < 0:
        raise ValueError(f"{what} must be a non-negative integer, got {value!r}")


# ---------------------------------------------------------------------------
# component geometries (threefolds)


@dataclass(frozen=True)
class ResolvedCY:
    """The resolved central fiber itself; its Betti vector is an input."""

    betti: tuple

    def __post_init__(self):
        b = tuple(int(x) for x in self.betti)
        object.__setattr__(self, "betti", b)
        if len(b) != 7:
            raise ValueError("a threefold carries seven Betti numbers")
        if b[0] != 1 or b[6] != 1 or b[1] != 0 or b[5] != 0:
            raise ValueError(f"not the Betti vector of a connected Calabi-Yau: {b}")
        if b[2] != b[4]:
            raise ValueError(f"Betti vector is not palindromic: {b}")

    def to_json(self):
        return {"kind": "resolved_cy", "betti": list(self.betti)}


@dataclass(frozen=True)
class QuadricBundle:
    """Bundle of quadric surfaces over a rational double curve.

    ``split_fibers`` lists, per completely reducible fiber, how many
    components it breaks into; ``cone_fibers`` counts fibers degenerating
    to a quadric cone.  A cone fiber makes the two rulings of the generic
    fiber homologous, which is what drops the rank below the split case.
    """

    split_fibers: tuple = ()
    cone_fibers: int = 0

    def __post_init__(self):
        object.__setattr__(self, "split_fibers", tuple(int(c) for c in self.split_fibers))
        _check_count(self.cone_fibers, "cone fiber count")
        for c in self.split_fibers:
            if c < 2:
                raise ValueError(f"a split fiber has at least two components, got {c}")

    def to_json(self):
        return {"kind": "quadric_bundle",
                "split_fibers": list(self.split_fibers),
                "cone_fibers": self.cone_fibers}


@dataclass(frozen=True)
class DoubleCoverP2xP1:
    """Double cover of P2 x P1 branched along a conic bundle with pinches."""

    pinch_fibers: int

    def __post_init__(self):
        _check_count(self.pinch_fibers, "pinch fiber count")
        if self.pinch_fibers < 2:
            # b3 = pinch_fibers - 2 in this family; fewer pinches never occur
            raise UnsupportedConfiguration(
                f"double cover with {self.pinch_fibers} pinch fibers is outside the catalogue")

    def to_json(self):
        return {"kind": "double_cover_p2xp1", "pinch_fibers": self.pinch_fibers}


@dataclass(frozen=True)
class NodeResolution:
    """Component replacing a surface that carries ordinary double points."""

    node_count_on_surface: int

    def __post_init__(self):
        _check_count(self.node_count_on_surface, "node count")
        if self.node_count_on_surface == 0:
            raise ValueError("a node-resolution component needs at least one node")

    def to_json(self):
        return {"kind": "node_resolution", "nodes": self.node_count_on_surface}


# ---------------------------------------------------------------------------
# stratum geometries (surfaces and curves)


@dataclass(frozen=True)
class ConicBundle:
    """Conic bundle over P1; ``split_fibers`` lists component counts of the
    reducible fibers (two for a pinch, three over a split quadric fiber)."""

    split_fibers: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "split_fibers", tuple(int(c) for c in self.split_fibers))
        for c in self.split_fibers:
            if c < 2:
                raise ValueError(f"a split fiber has at least two components, got {c}")

    def to_json(self):
        return {"kind": "conic_bundle", "split_fibers": list(self.split_fibers)}


@dataclass(frozen=True)
class SmoothQuadric:
    def to_json(self):
        return {"kind": "smooth_quadric"}


@dataclass(frozen=True)
class BlownP1xP1:
    """P1 x P1 blown up in a set of points."""

    points: int

    def __post_init__(self):
        _check_count(self.points, "blown-up point count")

    def to_json(self):
        return {"kind": "blown_p1xp1", "points": self.points}


@dataclass(frozen=True)
class SmoothConic:
    def to_json(self):
        return {"kind": "smooth_conic"}


ComponentGeometry = Union[ResolvedCY, QuadricBundle, DoubleCoverP2xP1, NodeResolution]
SurfaceGeometry = Union[ConicBundle, SmoothQuadric, BlownP1xP1]
CurveGeometry = SmoothConic


# ---------------------------------------------------------------------------
# Betti numbers


def betti(geometry) -> tuple:
    """Betti vector of a catalogue geometry (7, 5 or 3 entries)."""
    if isinstance(geometry, ResolvedCY):
        return geometry.betti
    if isinstance(geometry, QuadricBundle):
        r = 2 if geometry.cone_fibers == 0 else 1
        mid = 1 + r + sum(c - 1 for c in geometry.split_fibers)
        return (1, 0, mid, 0, mid, 0, 1)
    if isinstance(geometry, DoubleCoverP2xP1):
        return (1, 0, 2, geometry.pinch_fibers - 2, 2, 0, 1)
    if isinstance(geometry, NodeResolution):
        return (1, 0, 3, 0, 3, 0, 1)
    if isinstance(geometry, ConicBundle):
        mid = 2 + sum(c - 1 for c in geometry.split_fibers)
        return (1, 0, mid, 0, 1)
    if isinstance(geometry, SmoothQuadric):
        return (1, 0, 2, 0, 1)
    if isinstance(geometry, BlownP1xP1):
        return (1, 0, 2 + geometry.points, 0, 1)
    if isinstance(geometry, SmoothConic):
        return (1, 0, 1)
    raise TypeError(f"not a catalogue geometry: {geometry!r}")


def euler(geometry) -> int:
    b = betti(geometry)
    return sum((-1) ** i * x for i, x in enumerate(b))


# ---------------------------------------------------------------------------
# the strata complex


@dataclass(frozen=True)
class Component:
    label: str
    geometry: ComponentGeometry

    def to_json(self):
        out = {"label": self.label}
        out.update(self.geometry.to_json())
        out["betti"] = list(betti(self.geometry))
        return out


@dataclass(frozen=True)
class DoubleStratum:
    pair: tuple            # two component labels, in component order
    geometry: SurfaceGeometry

    def to_json(self):
        out = {"pair": list(self.pair)}
        out.update(self.geometry.to_json())
        out["betti"] = list(betti(self.geometry))
        return out


@dataclass(frozen=True)
class TripleStratum:
    triple: tuple          # three component labels, in component order
    geometry: CurveGeometry = field(default_factory=SmoothConic)

    def to_json(self):
        out = {"triple": list(self.triple)}
        out.update(self.geometry.to_json())
        out["betti"] = list(betti(self.geometry))
        return out


@dataclass(frozen=True)
class StrataComplex:
    """Nerve of the semistable fiber: components, double and triple loci.

    The component order (Y first, new components in creation order) is part
    of the data; differential signs downstream depend on it.
    """

    components: tuple
    double_strata: tuple = ()
    triple_strata: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "double_strata", tuple(self.double_strata))
        object.__setattr__(self, "triple_strata", tuple(self.triple_strata))
        order = {c.label: i for i, c in enumerate(self.components)}
        if len(order) != len(self.components):
            raise ValueError("component labels repeat")
        for c in self.components:
            if not isinstance(c.geometry, (ResolvedCY, QuadricBundle,
                                           DoubleCoverP2xP1, NodeResolution)):
                raise ValueError(f"{c.label}: not a component geometry")
        pairs = set()
        for d in self.double_strata:
            if len(d.pair) != 2 or any(l not in order for l in d.pair):
                raise ValueError(f"double stratum {d.pair} not among the components")
            if order[d.pair[0]] >= order[d.pair[1]]:
                raise ValueError(f"double stratum {d.pair} not in component order")
            if d.pair in pairs:
                raise ValueError(f"double stratum {d.pair} repeats")
            if not isinstance(d.geometry, (ConicBundle, SmoothQuadric, BlownP1xP1)):
                raise ValueError(f"{d.pair}: not a double-stratum geometry")
            pairs.add(tuple(d.pair))
        triples = set()
        for t in self.triple_strata:
            if len(t.triple) != 3 or any(l not in order for l in t.triple):
                raise ValueError(f"triple stratum {t.triple} not among the components")
            if not order[t.triple[0]] < order[t.triple[1]] < order[t.triple[2]]:
                raise ValueError(f"triple stratum {t.triple} not in component order")
            if t.triple in triples:
                raise ValueError(f"triple stratum {t.triple} repeats")
            if not isinstance(t.geometry, SmoothConic):
                raise ValueError(f"{t.triple}: not a triple-stratum geometry")
            triples.add(tuple(t.triple))
            a, b, c = t.triple
            for face in ((a, b), (a, c), (b, c)):
                if face not in pairs:
                    # simplicial-complex condition on the nerve
                    raise ValueError(
                        f"triple stratum {t.triple} misses its face {face}")

    # -- views ----------------------------------------------------------

    def level(self, m: int):
        """Strata of depth m as (name, geometry) pairs, in canonical order.

        Depth 1 are the components themselves, depth 2 the double strata,
        depth 3 the triple strata.
        """
        if m == 1:
            return [(c.label, c.geometry) for c in self.components]
        if m == 2:
            return [("&".join(d.pair), d.geometry) for d in self.double_strata]
        if m == 3:
            return [("&".join(t.triple), t.geometry) for t in self.triple_strata]
        return []

    def component_order(self) -> dict:
        return {c.label: i for i, c in enumerate(self.components)}

    def counts(self) -> tuple:
        return (len(self.components), len(self.double_strata), len(self.triple_strata))

    def to_json(self):
        return {
            "components": [c.to_json() for c in self.components],
            "double_strata": [d.to_json() for d in self.double_strata],
            "triple_strata": [t.to_json() for t in self.triple_strata],
        }


# ---------------------------------------------------------------------------
# assembly from a residual report


def _first_counts(residual: ResidualSingularities) -> list:
    """How many triple meeting points each curve is the earliest-blown member of."""
    firsts = [0] * len(residual.double_curves)
    for t in residual.triple_meeting_points:
        firsts[min(t)] += 1
    return firsts


def build_components(residual: ResidualSingularities, y_betti) -> StrataComplex:
    """Assemble the strata complex for a residual report.

    ``y_betti`` is the Betti vector of the resolved central fiber; it is an
    input because it comes from the fiberwise resolution, not from the
    combinatorics handled here.
    """
    y = Component("Y", ResolvedCY(tuple(y_betti)))

    if residual.nodes:
        if residual.double_curves or residual.triple_meeting_points:
            raise UnsupportedConfiguration(
                "nodes mixed with residual double curves have no worked model")
        if residual.node_surface_marker != NODE_MARKER:
            raise UnsupportedConfiguration(
                f"nodes marked {residual.node_surface_marker!r} are not resolved by "
                "blowing up the surface")
        q = Component("Q1", NodeResolution(residual.nodes))
        cross = DoubleStratum(("Y", "Q1"), BlownP1xP1(points=residual.nodes))
        return StrataComplex((y, q), (cross,))

    for t in residual.triple_meeting_points:
        for i in t:
            if residual.double_curves[i].over != TRIPLE_LINE:
                raise UnsupportedConfiguration(
                    f"triple meeting point {t} involves curve {i} over "
                    f"{residual.double_curves[i].over}; only curves over triple "
                    "lines meet in the worked models")

    firsts = _first_counts(residual)
    components = [y]
    doubles = []
    for i, curve in enumerate(residual.double_curves):
        label = f"Q{i + 1}"
        if curve.over == TRIPLE_LINE:
            geom = QuadricBundle(split_fibers=(4,) * firsts[i],
                                 cone_fibers=curve.pinch_points)
        elif curve.over == FIVEFOLD_POINT:
            geom = DoubleCoverP2xP1(pinch_fibers=curve.pinch_points)
        else:
            raise UnsupportedConfiguration(f"curve {i} lies over {curve.over!r}")
        components.append(Component(label, geom))
        # the trace of Y on the new component: conics over the double curve,
        # splitting into two lines at a pinch and into three components over
        # a completely reducible quadric fiber
        fibers = (2,) * curve.pinch_points + (3,) * firsts[i]
        doubles.append(DoubleStratum(("Y", label), ConicBundle(fibers)))

    triples = []
    quadric_pairs = set()
    for t in sorted(residual.triple_meeting_points):
        f = min(t)
        for o in sorted(set(t) - {f}):
            pair = (f"Q{f + 1}", f"Q{o + 1}")
            if pair in quadric_pairs:
                raise UnsupportedConfiguration(
                    f"components {pair} would meet along two distinct quadrics")
            quadric_pairs.add(pair)
            doubles.append(DoubleStratum(pair, SmoothQuadric()))
            triples.append(TripleStratum(("Y",) + pair))

    return StrataComplex(tuple(components), tuple(doubles), tuple(triples))
