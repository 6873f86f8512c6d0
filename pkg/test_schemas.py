import math

import pytest
from pydantic import ValidationError

from phtlab.schemas.schemas import (
    DiagramPoint, Direction, Point, PolygonRecord, Section, SectionSegment, StandardResponse, TWO_PI,
    normalize_angle,
)


def test_normalize_angle():
    assert normalize_angle(-math.pi / 2) == pytest.approx(3 * math.pi / 2)
    assert normalize_angle(TWO_PI) == 0.0
    assert normalize_angle(5 * math.pi) == pytest.approx(math.pi)


def test_direction_wraps_and_rejects_nan():
    assert Direction(theta=-math.pi).theta == pytest.approx(math.pi)
    assert Direction.from_vector(0.0, -1.0).theta == pytest.approx(3 * math.pi / 2)
    with pytest.raises(ValidationError):
        Direction(theta=math.nan)


def test_point_must_be_finite():
    with pytest.raises(ValidationError):
        Point(x=math.inf, y=0.0)


def test_diagram_point_validation():
    assert DiagramPoint(birth=0.0, death="inf", essential=True).death == math.inf
    with pytest.raises(ValidationError):
        DiagramPoint(birth=1.0, death=0.0)
    with pytest.raises(ValidationError):
        DiagramPoint(birth=0.0, death=math.inf)
    with pytest.raises(ValidationError):
        DiagramPoint(birth=0.0, death=1.0, essential=True)


def test_diagram_point_serializes_infinity():
    dumped = DiagramPoint(birth=-1.5, death=math.inf, birth_vertex=3, essential=True).model_dump(mode="json")
    assert dumped["death"] == "inf"
    assert DiagramPoint(birth=0.0, death=2.0).model_dump(mode="json")["death"] == 2.0


def test_section_evaluates_per_segment():
    first = SectionSegment(arc=(0.0, 1.0), birth_vertex=0, death_vertex=1, birth_point=Point(x=1.0, y=0.0), death_point=Point(x=2.0, y=0.0))
    wrapped = SectionSegment(arc=(6.0, TWO_PI + 0.5), birth_vertex=0, birth_point=Point(x=0.0, y=1.0))
    section = Section(section_id=1, support=(0.0, 1.0), segments=[first])
    assert section.evaluate(0.0) == pytest.approx((1.0, 2.0))
    assert section.evaluate(2.0) is None
    assert section.labels() == [(0, 1)]
    assert wrapped.contains(0.25)
    assert wrapped.value(0.0) == (0.0, math.inf)


def test_polygon_record_needs_vertices():
    with pytest.raises(ValidationError):
        PolygonRecord(vertices=[])
    assert PolygonRecord(vertices=[(0, 0), (1, 0), (0, 1)], center=(0.2, 0.2)).center == (0.2, 0.2)


def test_standard_response_envelope():
    body = StandardResponse[dict](status=True, data={"angles": 4}, message="ok").model_dump()
    assert body == {"status": True, "data": {"angles": 4}, "error": None, "message": "ok"}
