import math

import numpy as np
import pytest

from conftest import THREE_HALVES_PI
from phtlab.core.errors import NoEssentialClass, NotACenter
from phtlab.schemas.schemas import DiagramPoint, Direction, PersistenceDiagram, Point
from phtlab.services.geometry import GeometryService
from phtlab.services.persistence import PersistenceService

ORACLE_DIRECTIONS = 32
STABILITY_PAIRS = 32


def dgm(*pairs):
    points = []
    for birth, death in pairs:
        points.append(DiagramPoint(birth=birth, death=death, essential=math.isinf(death)))
    return PersistenceDiagram(points=tuple(points))


def star_center(polygon):
    return GeometryService.choose_center(GeometryService.kernel(polygon))


def test_arrowhead_golden_diagram(arrowhead):
    diagram = PersistenceService.lower_star_diagram(PersistenceService.triangulate(arrowhead), Direction(theta=THREE_HALVES_PI))
    essential, = diagram.essentials()
    finite, = diagram.finite()
    assert essential.birth == pytest.approx(-3.0, abs=1e-12)
    assert arrowhead.vertices[essential.birth_vertex].as_tuple() == (4.0, 3.0)
    assert (finite.birth, finite.death) == pytest.approx((-3.0, -1.0), abs=1e-12)
    assert arrowhead.vertices[finite.birth_vertex].as_tuple() == (0.0, 3.0)
    assert arrowhead.vertices[finite.death_vertex].as_tuple() == (2.0, 1.0)


def test_boundary_sweep_matches_golden(arrowhead, arrowhead_center):
    diagram = PersistenceService.boundary_sweep_diagram(arrowhead, arrowhead_center, Direction(theta=THREE_HALVES_PI))
    assert len(diagram) == 2
    finite, = diagram.finite()
    assert (finite.birth, finite.death) == pytest.approx((-3.0, -1.0), abs=1e-12)

    upward = PersistenceService.boundary_sweep_diagram(arrowhead, arrowhead_center, Direction(theta=math.pi / 2))
    assert len(upward) == 1
    assert upward.points[0].birth == pytest.approx(0.0, abs=1e-12)
    assert upward.points[0].essential


def test_clamped_death_keeps_its_vertex(arrowhead):
    # just above the notch, inside the kernel within tolerance
    center = Point(x=2.0, y=1.0 + 4e-9)
    assert GeometryService.in_kernel(arrowhead, center)
    diagram = PersistenceService.boundary_sweep_diagram(arrowhead, center, Direction(theta=THREE_HALVES_PI))
    finite, = diagram.finite()
    assert finite.death < -1.0
    assert finite.death == pytest.approx(-1.0, abs=1e-8)
    assert finite.birth_vertex in (2, 4)
    assert finite.death_vertex == 3


def test_every_boundary_point_is_labelled(arrowhead, star_shapes):
    shapes = [(arrowhead, Point(x=2.0, y=1.0))] + [(p, star_center(p)) for p in star_shapes[:4]]
    for polygon, center in shapes:
        for theta in np.linspace(0.0, 2 * math.pi, 24, endpoint=False):
            diagram = PersistenceService.boundary_sweep_diagram(polygon, center, Direction(theta=theta))
            assert all(q.birth_vertex is not None for q in diagram.points)
            assert all(q.death_vertex is not None for q in diagram.finite())


def test_boundary_sweep_requires_center(arrowhead):
    with pytest.raises(NotACenter):
        PersistenceService.boundary_sweep_diagram(arrowhead, Point(x=0.5, y=0.5), Direction(theta=0.0))


def test_square_is_a_single_essential_class(square):
    tri = PersistenceService.triangulate(square)
    for theta in np.linspace(0.0, 2 * math.pi, 17):
        diagram = PersistenceService.lower_star_diagram(tri, Direction(theta=theta))
        assert len(diagram) == 1
        assert diagram.points[0].essential
    assert PersistenceService.lower_star_diagram(tri, Direction(theta=0.0)).points[0].birth == 0.0


def test_triangulation_sizes(square, arrowhead, small_spiral):
    for polygon in (square, arrowhead, small_spiral):
        tri = PersistenceService.triangulate(polygon)
        assert len(tri.triangles) == polygon.k - 2
        assert len(tri.edges) == 2 * polygon.k - 3
        boundary = {tuple(sorted(e)) for e in polygon.edges()}
        assert boundary <= set(tri.edges)


def test_lower_star_matches_component_count(small_spiral):
    tri = PersistenceService.triangulate(small_spiral)
    coords = small_spiral.coords()
    for theta in (0.3, 1.7, 4.0):
        v = Direction(theta=theta)
        diagram = PersistenceService.lower_star_diagram(tri, v)
        heights = coords @ np.array(v.vector)
        for t in np.linspace(heights.min(), heights.max(), 52)[1:-1] + 1e-7:
            alive = sum(1 for q in diagram.points if q.birth <= t < q.death)
            assert alive == PersistenceService.component_count(tri, v, t)


def test_reduce_examples():
    assert len(PersistenceService.reduce(dgm((0.0, math.inf)))) == 0
    reduced = PersistenceService.reduce(dgm((-3.0, math.inf), (-3.0, -1.0)))
    assert [(q.birth, q.death) for q in reduced.points] == [(-3.0, -1.0)]
    with pytest.raises(NoEssentialClass):
        PersistenceService.reduce(dgm())


def test_unreduce_restores_the_essential_class():
    full = dgm((-3.0, math.inf), (-3.0, -1.0))
    essential = full.essentials()[0]
    restored = PersistenceService.unreduce(PersistenceService.reduce(full), essential)
    assert PersistenceService.multiset_equal(restored, full, 0.0)


def test_bottleneck_examples():
    assert PersistenceService.bottleneck(dgm((0.0, math.inf)), dgm((0.0, math.inf)))[0] == 0.0
    assert PersistenceService.bottleneck(dgm((1.0, 3.0)), dgm())[0] == pytest.approx(1.0)
    cost, matching = PersistenceService.bottleneck(
        dgm((0.0, 2.0), (0.0, math.inf)), dgm((0.5, 2.5), (0.0, math.inf))
    )
    assert cost == pytest.approx(0.5)
    assert matching.cost == cost
    assert len(matching.pairs) == 2
    assert PersistenceService.bottleneck(dgm((0.0, math.inf)), dgm())[0] == math.inf


def test_bottleneck_of_identical_diagrams():
    a = dgm((-3.0, -1.0), (-2.0, -1.5), (-4.0, math.inf))
    b = dgm((-2.0, -1.5), (-3.0, -1.0), (-4.0, math.inf))
    cost, matching = PersistenceService.bottleneck(a, b, allow_diagonal=False)
    assert cost == 0.0
    assert all(p == q for p, q in matching.pairs)
    assert len(matching.pairs) == 3


def test_bottleneck_without_diagonal():
    assert PersistenceService.bottleneck(dgm((1.0, 3.0)), dgm(), allow_diagonal=False)[0] == math.inf
    cost, _ = PersistenceService.bottleneck(dgm((1.0, 3.0), (0.0, 5.0)), dgm((0.0, 5.5), (1.0, 3.2)), allow_diagonal=False)
    assert cost == pytest.approx(0.5)


def test_matching_covers_every_point():
    a = dgm((0.0, 1.0), (2.0, 6.0), (0.0, math.inf))
    b = dgm((2.1, 6.2), (4.0, 4.05), (0.1, math.inf))
    cost, matching = PersistenceService.bottleneck(a, b)
    lefts = [p for p, _ in matching.pairs if p is not None]
    rights = [q for _, q in matching.pairs if q is not None]
    assert sorted((p.birth, p.death) for p in lefts) == sorted((p.birth, p.death) for p in a.points)
    assert sorted((q.birth, q.death) for q in rights) == sorted((q.birth, q.death) for q in b.points)
    assert cost == pytest.approx(0.5)


def test_bottleneck_is_a_metric_on_random_diagrams():
    rng = np.random.default_rng(11)

    def random_diagram():
        births = rng.uniform(0.0, 5.0, rng.integers(0, 5))
        pairs = [(b, b + rng.uniform(0.01, 3.0)) for b in births]
        return dgm(*pairs, (rng.uniform(-1.0, 0.0), math.inf))

    for _ in range(20):
        a, b, c = random_diagram(), random_diagram(), random_diagram()
        ab = PersistenceService.bottleneck(a, b)[0]
        assert ab == PersistenceService.bottleneck(b, a)[0]
        ac = PersistenceService.bottleneck(a, c)[0]
        cb = PersistenceService.bottleneck(c, b)[0]
        assert ab <= ac + cb + 1e-9


def test_multiset_equal_examples():
    assert PersistenceService.multiset_equal(dgm((-3.0, -1.0)), dgm((-3.0, -1.0)), 1e-9)
    assert not PersistenceService.multiset_equal(dgm((-3.0, -1.0)), dgm(), 1e-9)
    assert PersistenceService.multiset_equal(dgm((-3.0, -1.0 + 1e-12)), dgm((-3.0, -1.0)), 1e-9)


def test_boundary_sweep_matches_oracle_on_corpus(star_shapes):
    for polygon in star_shapes:
        center = star_center(polygon)
        tri = PersistenceService.triangulate(polygon)
        for theta in np.linspace(0.0, 2 * math.pi, ORACLE_DIRECTIONS, endpoint=False):
            v = Direction(theta=theta)
            fast = PersistenceService.boundary_sweep_diagram(polygon, center, v)
            oracle = PersistenceService.lower_star_diagram(tri, v)
            assert PersistenceService.bottleneck(fast, oracle)[0] <= 1e-9
            clamp = GeometryService.height(center, v)
            assert all(q.death <= clamp + 1e-12 for q in fast.finite())
            assert all(q.death <= clamp + 1e-12 for q in oracle.finite())


def test_one_essential_class_and_stable_labels(star_shapes):
    for polygon in star_shapes[:4]:
        tri = PersistenceService.triangulate(polygon)
        for theta in (0.1, 2.2, 5.0):
            first = PersistenceService.lower_star_diagram(tri, Direction(theta=theta))
            second = PersistenceService.lower_star_diagram(tri, Direction(theta=theta))
            assert len(first.essentials()) == 1
            assert first == second


def test_stability_bound(star_shapes):
    for polygon in star_shapes[:5]:
        tri = PersistenceService.triangulate(polygon)
        K = float(np.max(np.hypot(*polygon.coords().T)))
        angles = np.linspace(0.0, 2 * math.pi, STABILITY_PAIRS + 1)
        for u, w in zip(angles, angles[1:]):
            gap = PersistenceService.bottleneck(
                PersistenceService.lower_star_diagram(tri, Direction(theta=u)),
                PersistenceService.lower_star_diagram(tri, Direction(theta=w)),
            )[0]
            chord = math.hypot(math.cos(u) - math.cos(w), math.sin(u) - math.sin(w))
            assert gap <= K * chord + 1e-9


def test_diagram_record_round_trip(arrowhead):
    diagram = PersistenceService.lower_star_diagram(PersistenceService.triangulate(arrowhead), Direction(theta=THREE_HALVES_PI))
    record = PersistenceService.diagram_record(diagram, THREE_HALVES_PI)
    assert record["direction"] == THREE_HALVES_PI
    assert any(point["death"] == "inf" for point in record["points"])
    assert set(record["points"][0]) == {"birth", "death", "birth_vertex", "death_vertex"}
    theta, parsed = PersistenceService.diagram_from_record(record)
    assert theta == pytest.approx(THREE_HALVES_PI)
    assert parsed == diagram


def test_segment_sweep_of_a_flat_sector():
    points = [Point(x=0.0, y=0.0), Point(x=1.0, y=0.0), Point(x=2.0, y=0.0)]
    diagram = PersistenceService.sweep_segments(points, [(0, 1), (1, 2), (2, 0)], Direction(theta=math.pi / 2))
    assert len(diagram) == 1
    assert diagram.points[0].birth_vertex == 0
