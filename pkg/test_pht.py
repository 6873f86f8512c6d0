import math

import numpy as np
import pytest

from conftest import THREE_HALVES_PI
from phtlab.core.errors import CenterNotInKernel
from phtlab.schemas.schemas import Direction, GeneralPositionResult, PersistenceDiagram, PHTEntry, PHTSample, Point
from phtlab.services.corpus import CorpusService
from phtlab.services.geometry import GeometryService
from phtlab.services.monodromy import MonodromyService
from phtlab.services.persistence import PersistenceService
from phtlab.services.pht import PHTService, arc_samples


def center_of(polygon):
    return GeometryService.choose_center(GeometryService.kernel(polygon))


def test_plan_counts(square, triangle):
    plan = PHTService.plan_directions(square, 0)
    assert len(plan.arcs) == 8
    assert all(len(s) == 1 for s in plan.samples)
    assert len(PHTService.plan_directions(triangle, 0).arcs) == 6

    refined = PHTService.plan_directions(square, 3)
    for (start, end), samples in zip(refined.arcs, refined.samples):
        assert len(samples) == 4
        assert (start + end) / 2.0 in samples
        assert all(start < t < end for t in samples)


def test_plan_rejects_negative_refinement(square):
    with pytest.raises(ValueError):
        PHTService.plan_directions(square, -1)


def test_last_arc_wraps(square):
    plan = PHTService.plan_directions(square, 0)
    start, end = plan.arcs[-1]
    assert end >= 2 * math.pi - 1e-12
    assert end - start == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("refinement, spacing", [(0, 1 / 2), (3, 3 / 10), (7, 1 / 6)])
def test_sample_spacing(refinement, spacing):
    samples = arc_samples(0.0, 1.0, refinement)
    gaps = np.diff([0.0, *samples, 1.0])
    assert gaps.max() == pytest.approx(spacing)
    assert 0.5 in samples


def test_square_pht_is_one_class_everywhere(square):
    plan = PHTService.plan_directions(square, 0)
    sample = PHTService.pht(square, plan)
    assert len(sample.entries) == 16
    assert all(len(e.diagram) == 1 and e.diagram.points[0].essential for e in sample.entries)
    assert sample.lipschitz_K == pytest.approx(math.sqrt(2.0))


def test_arrowhead_pht_with_center(arrowhead, arrowhead_center):
    plan = PHTService.plan_directions(arrowhead, 0)
    sample = PHTService.pht(arrowhead, plan, center=arrowhead_center)
    diagram = sample.diagram_at(THREE_HALVES_PI, tol=1e-9)
    assert diagram is not None
    finite, = diagram.finite()
    assert (finite.birth, finite.death) == pytest.approx((-3.0, -1.0), abs=1e-9)

    without_center = PHTService.pht(arrowhead, plan)
    for fast, slow in zip(sample.entries, without_center.entries):
        assert PersistenceService.bottleneck(fast.diagram, slow.diagram)[0] <= 1e-9


def test_spiral_has_several_classes():
    spiral = CorpusService.named("spiral")
    assert GeometryService.kernel(spiral).is_empty
    sample = PHTService.pht(spiral, PHTService.plan_directions(spiral, 0))
    assert max(len(e.diagram) for e in sample.entries) >= 2


def test_decompose_arrowhead(arrowhead, arrowhead_center):
    report = PHTService.decompose_check(arrowhead, arrowhead_center, PHTService.plan_directions(arrowhead, 1))
    assert report.verdict
    assert report.max_gap <= 1e-9
    record = next(r for r in report.records if abs(r.angle - THREE_HALVES_PI) <= 1e-9)
    point, = record.reduced_shape.points
    assert (point.birth, point.death) == pytest.approx((-3.0, -1.0))


def test_decompose_with_center_on_the_notch(arrowhead):
    notch = Point(x=2.0, y=1.0)
    report = PHTService.decompose_check(arrowhead, notch, PHTService.plan_directions(arrowhead, 1))
    assert report.verdict
    assert report.max_gap <= 1e-9
    record = min(report.records, key=lambda r: abs(r.angle - 0.8563))
    assert len(record.reduced_shape) == len(record.sector_union)

    for sector in GeometryService.sectors(arrowhead, notch, GeometryService.convex_hull(arrowhead)):
        v = PHTService.sector_trivial_direction(sector)
        assert len(PersistenceService.reduce(PHTService.sector_diagrams(arrowhead, notch, v)[sector.index])) == 0


def test_decompose_square(square):
    report = PHTService.decompose_check(square, Point(x=0.5, y=0.5), PHTService.plan_directions(square, 0))
    assert report.verdict
    assert all(len(r.reduced_shape) == 0 and len(r.sector_union) == 0 for r in report.records)


def test_decompose_rejects_outside_center(arrowhead):
    with pytest.raises(CenterNotInKernel):
        PHTService.decompose_check(arrowhead, Point(x=0.5, y=0.5), PHTService.plan_directions(arrowhead, 0))


def test_decompose_corpus(star_shapes):
    for polygon in star_shapes[:6]:
        report = PHTService.decompose_check(polygon, center_of(polygon), PHTService.plan_directions(polygon, 0))
        assert report.verdict, report.max_gap


def test_sampled_stage_agrees_with_general_position(monkeypatch, perturbed_arrowhead, star_shapes):
    shapes = [perturbed_arrowhead] + [p for p in star_shapes[:6] if GeometryService.is_general_position(p).general_position]
    assert len(shapes) > 1
    monkeypatch.setattr(
        GeometryService, "is_general_position", staticmethod(lambda p, tol=None: GeneralPositionResult(general_position=False))
    )
    for polygon in shapes:
        result = PHTService.is_simple_dgm0(polygon, PHTService.plan_directions(polygon, 0))
        assert result.stage == "sampled"
        assert result.simple, result.witness


def test_sector_diagrams_reduce_to_nothing_on_square(square):
    for diagram in PHTService.sector_diagrams(square, Point(x=0.5, y=0.5), Direction(theta=0.7)):
        assert len(PersistenceService.reduce(diagram)) == 0


def test_is_simple_examples(perturbed_arrowhead, square, crown):
    result = PHTService.is_simple_dgm0(perturbed_arrowhead, PHTService.plan_directions(perturbed_arrowhead, 0))
    assert result.simple and result.stage == "general_position"

    result = PHTService.is_simple_dgm0(square, PHTService.plan_directions(square, 0))
    assert result.simple and result.stage == "sampled"

    result = PHTService.is_simple_dgm0(crown, PHTService.plan_directions(crown, 0))
    assert not result.simple
    assert result.witness.angle == pytest.approx(THREE_HALVES_PI, abs=1e-9)
    assert (result.witness.point.birth, result.witness.point.death) == pytest.approx((-3.0, -2.0), abs=1e-9)


def test_sector_trivial_direction_examples(square, arrowhead, arrowhead_center):
    sectors = GeometryService.sectors(square, Point(x=0.5, y=0.5), GeometryService.convex_hull(square))
    assert PHTService.sector_trivial_direction(sectors[0]).theta == pytest.approx(THREE_HALVES_PI)

    sectors = GeometryService.sectors(arrowhead, arrowhead_center, GeometryService.convex_hull(arrowhead))
    assert PHTService.sector_trivial_direction(sectors[2]).theta == pytest.approx(math.pi / 2)


def test_every_corpus_sector_has_a_trivial_direction(star_shapes):
    for polygon in star_shapes[:6]:
        for sector in GeometryService.sectors(polygon, center_of(polygon), GeometryService.convex_hull(polygon)):
            v = PHTService.sector_trivial_direction(sector)
            tri = PersistenceService.triangulate(sector.polygon(), sector.vertex_ids)
            assert len(PersistenceService.reduce(PersistenceService.lower_star_diagram(tri, v))) == 0


def test_sector_of_labels(arrowhead, arrowhead_center):
    sectors = GeometryService.sectors(arrowhead, arrowhead_center, GeometryService.convex_hull(arrowhead))
    assert PHTService.sector_of_labels(sectors, [(4, 3)]) == 2
    assert PHTService.sector_of_labels(sectors, [(0, 3)]) is None


def max_adjacent_gap(sample):
    entries = sorted(sample.entries, key=lambda e: e.angle)
    pairs = zip(entries, entries[1:] + entries[:1])
    return max(PersistenceService.bottleneck(a.diagram, b.diagram)[0] for a, b in pairs)


@pytest.mark.parametrize("polygon", [CorpusService.named("square"), CorpusService.regular_ngon(5), CorpusService.regular_ngon(6)])
def test_adjacent_gaps_shrink_with_refinement(polygon):
    gaps = [max_adjacent_gap(PHTService.pht(polygon, PHTService.plan_directions(polygon, r))) for r in (0, 3, 7)]
    assert gaps[0] > gaps[1] > gaps[2] > 0.0


def test_stability_audit_on_square(square):
    report = PHTService.stability_audit(PHTService.pht(square, PHTService.plan_directions(square, 0)))
    assert report.ok
    assert report.pairs == 16
    assert report.worst_ratio <= 1.0 + 1e-9


def test_stability_audit_identical_directions(square):
    diagram = PersistenceService.lower_star_diagram(PersistenceService.triangulate(square), Direction(theta=0.0))
    sample = PHTSample(entries=(PHTEntry(angle=0.0, diagram=diagram), PHTEntry(angle=0.0, diagram=diagram)), lipschitz_K=1.0)
    report = PHTService.stability_audit(sample)
    assert report.ok
    assert report.worst_ratio == 0.0


def test_stability_audit_single_sample():
    sample = PHTSample(entries=(PHTEntry(angle=0.0, diagram=PersistenceDiagram()),), lipschitz_K=1.0)
    assert PHTService.stability_audit(sample).pairs == 0


def test_stability_audit_on_arrowhead(arrowhead, arrowhead_center):
    sample = PHTService.pht(arrowhead, PHTService.plan_directions(arrowhead, 3), center=arrowhead_center)
    assert PHTService.stability_audit(sample).ok


def test_labels_constant_inside_arcs(arrowhead, star_shapes):
    for polygon in [arrowhead, *star_shapes[:3]]:
        plan = PHTService.plan_directions(polygon, 3)
        labeled = MonodromyService.total_space(polygon, plan)
        by_arc = {}
        for entry in labeled:
            labels = sorted((q.birth_vertex, q.death_vertex) for q in entry.diagram.points)
            by_arc.setdefault(entry.arc_index, set()).add(tuple(labels))
        assert all(len(v) == 1 for v in by_arc.values())
