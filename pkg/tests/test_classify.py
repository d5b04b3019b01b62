"""Local classification of the degenerations and their residual outcomes."""

from fractions import Fraction

import pytest

from octic import classify, incidence
from octic.classify import (FIVEFOLD_POINT, TRIPLE_LINE, DoubleCurve,
                            ResidualSingularities, Unclassifiable,
                            classification_json, classify_local,
                            residual_outcome)
from octic.forms import parse_equation, specialize

FAMILY = [
    ("NewL3", "xy(x+y+w)"),
    ("NewP40", "xyz(x+y+z+w)"),
    ("P51toP52", "xy(x+y)z(x+wy+z)"),
    ("TwoP41toP52", "xy(x+y)z(x+z+w)"),
    ("TwoP41toP51", "xy(x+y)z(x+y+z+w)"),
    ("P40toP52", "xyz(x+y+z)(x+y+w)"),
    ("NewP41", "xy(x+y+w)z"),
    ("P40toP41", "xy(x+y+zw)z"),
    ("P40toP51", "xyz(x+y+z)(x-y+w)"),
    ("P50toP52", "xyz(x+y+wz)(x+wy+z)"),
    ("P50toP51", "xyz(x+y+wz)(x+2y+z)"),
]

PINCHES = {
    "NewL3": (0,),
    "NewP40": (),
    "P51toP52": (1,),
    "TwoP41toP52": (1, 3),
    "TwoP41toP51": (4,),
    "P40toP52": (0, 0, 0, 2, 2),
    "NewP41": (1,),
    "P40toP41": (0,),
    "P40toP51": (0, 2, 2),
    "P50toP52": (1, 1),
    "P50toP51": (1,),
}


def _changes_at_zero(text):
    a = parse_equation(text)
    generic = incidence.profile(a)
    special = incidence.profile(specialize(a, Fraction(0)), at=Fraction(0))
    return incidence.profile_diff(generic, special), generic, special


@pytest.mark.parametrize("tag,text", FAMILY)
def test_each_member_classifies_to_its_tag(tag, text):
    changes, generic, special = _changes_at_zero(text)
    assert len(changes) == 1
    t = classify_local(changes[0], generic, special)
    assert t.tag == tag


@pytest.mark.parametrize("tag,text", FAMILY)
def test_residual_pinch_multisets(tag, text):
    assert residual_outcome(tag).pinch_multiset() == PINCHES[tag]


def test_node_outcome_is_special():
    r = residual_outcome("NewP40")
    assert r.nodes == 2
    assert r.node_surface_marker == "small_resolution"
    assert r.double_curves == ()


def test_triple_meeting_structures():
    r = residual_outcome("P40toP52")
    assert r.triple_meeting_points == ((0, 1, 2), (0, 3, 4))
    assert len(r.double_curves) == 5
    assert [c.over for c in r.double_curves] == [
        FIVEFOLD_POINT, TRIPLE_LINE, FIVEFOLD_POINT, TRIPLE_LINE,
        FIVEFOLD_POINT]
    r2 = residual_outcome("P40toP51")
    assert r2.triple_meeting_points == ((0, 1, 2),)
    assert r2.adjacency == ((0, 1), (0, 2), (1, 2))


def test_classification_json_shape():
    j = classification_json("NewL3")
    assert j["type"] == "NewL3"
    assert j["residual"]["curves"] == [{"pinch": 0, "over": TRIPLE_LINE}]
    assert j["residual"]["nodes"] == 0


def test_residual_json_round_trip_fields():
    for tag, _ in FAMILY:
        r = residual_outcome(tag)
        j = r.to_json()
        assert isinstance(j["curves"], list)
        assert isinstance(j["nodes"], int)
        if r.triple_meeting_points:
            assert j["triple_points"] == [list(t)
                                          for t in r.triple_meeting_points]


def test_unknown_tag_rejected():
    with pytest.raises(ValueError):
        residual_outcome("NotAThing")
    with pytest.raises(ValueError):
        classify.LocalDegenerationType(tag="NotAThing")


@pytest.mark.parametrize("text", [
    "xy(x+y+w)(x-y+w)",          # four planes collapse onto one line
    "xyz(x+y+w)(x-y+w)(2x+y+w)",  # sixfold point collision
])
def test_unclassifiable_change_raises(text):
    a = parse_equation(text)
    generic = incidence.profile(a)
    special = incidence.profile(specialize(a, Fraction(0)), at=Fraction(0))
    changes = incidence.profile_diff(generic, special)
    assert changes
    for c in changes:
        with pytest.raises(Unclassifiable):
            classify_local(c, generic, special)


def test_curve_validation():
    with pytest.raises(ValueError):
        DoubleCurve(-1, TRIPLE_LINE)
    with pytest.raises(ValueError):
        DoubleCurve(0, "nowhere")


def test_outcomes_cover_all_tags():
    for tag in classify.TAGS:
        assert residual_outcome(tag) is not None
