import logging
import math
from functools import partial
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from phtlab.core.config import settings
from phtlab.core.errors import CenterNotInKernel, DegenerateSector
from phtlab.core.parallel import parallel_map
from phtlab.schemas.schemas import (
    DecompositionRecord, DecompositionReport, DiagramPoint, Direction, DirectionPlan, PersistenceDiagram,
    PHTEntry, PHTSample, Point, Polygon, Sector, SimplicityResult, SimplicityWitness, StabilityPair,
    StabilityReport, TWO_PI, Triangulation, normalize_angle, points_array,
)
from phtlab.services.geometry import GeometryService, bbox_scale, shoelace
from phtlab.services.persistence import PersistenceService, linf

logger = logging.getLogger(__name__)


def lipschitz_constant(p: Polygon) -> float:
    """Largest vertex norm"""
    coords = p.coords()
    return float(np.max(np.hypot(coords[:, 0], coords[:, 1])))


def arc_samples(start: float, end: float, refinement: int) -> Tuple[float, ...]:
    """refinement + 1 interior samples of an arc, always including its midpoint"""
    samples = np.linspace(start, end, refinement + 3)[1:-1]
    middle = (start + end) / 2.0
    samples[len(samples) // 2] = middle
    return tuple(float(t) for t in samples)


def _diagram_at(tri, center: Optional[Point], p: Polygon, theta: float) -> PersistenceDiagram:
    v = Direction(theta=theta)
    if center is not None:
        return PersistenceService.boundary_sweep_diagram(p, center, v)
    return PersistenceService.lower_star_diagram(tri, v)


def _split_loops(ring: Sequence[int]) -> List[List[int]]:
    """Split a closed walk into simple loops at its repeated nodes"""
    loops: List[List[int]] = []
    path: List[int] = []
    seen: Dict[int, int] = {}
    for node in [*ring, ring[0]]:
        if node in seen:
            k = seen[node]
            loops.append(path[k:])
            for dropped in path[k + 1:]:
                del seen[dropped]
            path = path[: k + 1]
        else:
            seen[node] = len(path)
            path.append(node)
    return [loop for loop in loops if len(loop) > 1]


def _sector_complex(sector: Sector) -> Triangulation:
    """
    Complex of a sector. Ring nodes sharing a polygon id become one node;
    every loop with area is ear clipped, the rest keep their boundary edges.
    """
    if not (sector.zero_area or sector.pinched):
        return PersistenceService.triangulate(sector.polygon(), sector.vertex_ids)

    node_of: Dict[object, int] = {}
    points: List[Point] = []
    ids: List[Optional[int]] = []
    ring: List[int] = []
    for local, (q, vid) in enumerate(zip(sector.region, sector.vertex_ids)):
        key = ("center", local) if vid is None else vid
        if key not in node_of:
            node_of[key] = len(points)
            points.append(q)
            ids.append(vid)
        ring.append(node_of[key])

    scale = bbox_scale(points_array(points))
    triangles: List[Tuple[int, int, int]] = []
    edges = set()
    for loop in _split_loops(ring):
        lobe = [points[i] for i in loop]
        if len(loop) >= 3 and shoelace(points_array(lobe)) > settings.AREA_TOL * scale * scale:
            tri = PersistenceService.triangulate(Polygon(vertices=tuple(lobe)))
            triangles.extend(tuple(loop[i] for i in t) for t in tri.triangles)
            edges.update(tuple(sorted((loop[a], loop[b]))) for a, b in tri.edges)
        else:
            edges.update(tuple(sorted((loop[i], loop[(i + 1) % len(loop)]))) for i in range(len(loop)))
    return Triangulation(vertices=tuple(points), triangles=tuple(triangles), edges=tuple(sorted(edges)), vertex_ids=tuple(ids))


def _sector_diagram(sector: Sector, tri: Triangulation, v: Direction) -> PersistenceDiagram:
    if sector.zero_area or sector.pinched:
        return PersistenceService.sweep_segments(tri.vertices, tri.edges, v, tri.vertex_ids)
    return PersistenceService.lower_star_diagram(tri, v)


def _sector_triangulations(sectors: Sequence[Sector]) -> List[Triangulation]:
    return [_sector_complex(sector) for sector in sectors]


def _decomposition_record(tri, sectors, sector_tris, theta: float) -> DecompositionRecord:
    v = Direction(theta=theta)
    reduced_shape = PersistenceService.reduce(PersistenceService.lower_star_diagram(tri, v))
    union: List[DiagramPoint] = []
    for sector, sector_tri in zip(sectors, sector_tris):
        union.extend(PersistenceService.reduce(_sector_diagram(sector, sector_tri, v)).points)
    sector_union = PersistenceDiagram(points=tuple(sorted(union, key=lambda q: (q.birth, q.death))))
    gap, _ = PersistenceService.bottleneck(reduced_shape, sector_union, allow_diagonal=False)
    return DecompositionRecord(angle=theta, reduced_shape=reduced_shape, sector_union=sector_union, gap=gap)


def _collision(tri, tol: float, theta: float) -> Optional[SimplicityWitness]:
    finite = PersistenceService.lower_star_diagram(tri, Direction(theta=theta)).finite()
    for p, q in combinations(finite, 2):
        if linf(p, q) <= tol:
            return SimplicityWitness(angle=theta, point=p)
    return None


class PHTService:

    @staticmethod
    def plan_directions(p: Polygon, refinement: Optional[int] = None) -> DirectionPlan:
        refinement = settings.REFINE if refinement is None else refinement
        if refinement < 0:
            raise ValueError("refinement must be non-negative")
        critical = GeometryService.critical_angles(p)
        values = critical.values()
        arcs = [(values[i], values[i + 1]) for i in range(len(values) - 1)]
        arcs.append((values[-1], values[0] + TWO_PI))
        samples = tuple(arc_samples(start, end, refinement) for start, end in arcs)
        logger.debug("Planned %d arcs with %d samples each", len(arcs), refinement + 1)
        return DirectionPlan(critical=critical, arcs=tuple(arcs), samples=samples, refinement=refinement)

    @staticmethod
    def pht(
        p: Polygon,
        plan: DirectionPlan,
        center: Optional[Point] = None,
        n_jobs: Optional[int] = None,
    ) -> PHTSample:
        """Diagram at every critical and sample angle of the plan"""
        angles = plan.all_angles()
        tri = None if center is not None else PersistenceService.triangulate(p)
        diagrams = parallel_map(partial(_diagram_at, tri, center, p), angles, n_jobs)
        entries = tuple(PHTEntry(angle=a, diagram=d) for a, d in zip(angles, diagrams))
        return PHTSample(entries=entries, lipschitz_K=lipschitz_constant(p))

    @staticmethod
    def sector_diagrams(p: Polygon, c: Point, v: Direction, sectors: Optional[Sequence[Sector]] = None) -> List[PersistenceDiagram]:
        if sectors is None:
            sectors = GeometryService.sectors(p, c, GeometryService.convex_hull(p))
        return [_sector_diagram(s, t, v) for s, t in zip(sectors, _sector_triangulations(sectors))]

    @staticmethod
    def decompose_check(
        p: Polygon,
        c: Point,
        plan: DirectionPlan,
        tol: Optional[float] = None,
        n_jobs: Optional[int] = None,
    ) -> DecompositionReport:
        """Compare the reduced diagram of the shape with the union over its sectors"""
        tol = settings.TOL if tol is None else tol
        if not GeometryService.in_kernel(p, c):
            raise CenterNotInKernel(f"Point ({c.x}, {c.y}) is not a center of the shape")
        sectors = GeometryService.sectors(p, c, GeometryService.convex_hull(p))
        sector_tris = _sector_triangulations(sectors)
        tri = PersistenceService.triangulate(p)

        records = parallel_map(partial(_decomposition_record, tri, sectors, sector_tris), plan.all_angles(), n_jobs)
        max_gap = max((r.gap for r in records), default=0.0)
        verdict = max_gap <= tol
        logger.info("Decomposition over %d angles and %d sectors: max gap %.3g", len(records), len(sectors), max_gap)
        return DecompositionReport(center=c, tol=tol, records=records, verdict=verdict, max_gap=max_gap)

    @staticmethod
    def is_simple_dgm0(p: Polygon, plan: DirectionPlan, tol: Optional[float] = None) -> SimplicityResult:
        """
        Combinatorial stage first: general position is sufficient.
        Otherwise every sample, every critical angle and both sides of
        each critical angle are checked for repeated off-diagonal points.
        """
        tol = settings.TOL if tol is None else tol
        if GeometryService.is_general_position(p).general_position:
            return SimplicityResult(simple=True, stage="general_position")

        delta = plan.min_arc_length() / 4.0
        angles = set(plan.sample_angles())
        for theta in plan.critical.values():
            angles.update((theta, normalize_angle(theta - delta), normalize_angle(theta + delta)))
        tri = PersistenceService.triangulate(p)
        for theta in sorted(angles):
            witness = _collision(tri, tol, theta)
            if witness is not None:
                logger.info("Repeated diagram point at angle %.6f", theta)
                return SimplicityResult(simple=False, stage="sampled", witness=witness)
        return SimplicityResult(simple=True, stage="sampled")

    @staticmethod
    def sector_trivial_direction(s: Sector, tol: Optional[float] = None) -> Direction:
        """Direction from the center to the foot of its perpendicular on the hull edge"""
        tol = settings.TOL if tol is None else tol
        a = np.array(s.hull_edge[0].as_tuple())
        b = np.array(s.hull_edge[1].as_tuple())
        c = np.array(s.center.as_tuple())
        d = b - a
        foot = a + d * float(np.dot(c - a, d) / np.dot(d, d))
        offset = foot - c
        scale = bbox_scale(np.vstack([a, b, c]))
        if np.hypot(*offset) <= tol * scale:
            # center on the edge: outward normal of a counter-clockwise edge
            direction = Direction.from_vector(d[1], -d[0])
        else:
            direction = Direction.from_vector(offset[0], offset[1])

        tri = _sector_complex(s)
        diagram = _sector_diagram(s, tri, direction)
        reduced = PersistenceService.reduce(diagram)
        if len(reduced) > 0:
            logger.warning("Sector %d keeps %d reduced classes at angle %.6f", s.index, len(reduced), direction.theta)
            raise DegenerateSector(f"Sector {s.index} has a non-empty reduced diagram at its trivializing direction")
        return direction

    @staticmethod
    def sector_of_labels(sectors: Sequence[Sector], labels: Sequence[Tuple[int, Optional[int]]]) -> Optional[int]:
        """Index of the first sector whose vertex set holds every label"""
        wanted = {v for pair in labels for v in pair if v is not None}
        for sector in sectors:
            if wanted <= set(sector.polygon_ids()):
                return sector.index
        return None

    @staticmethod
    def stability_audit(s: PHTSample, tol: Optional[float] = None) -> StabilityReport:
        """Adjacent samples, wraparound pair included, against the Lipschitz bound"""
        tol = settings.TOL if tol is None else tol
        entries = sorted(s.entries, key=lambda e: e.angle)
        if len(entries) < 2:
            logger.warning("Stability audit needs at least two samples")
            return StabilityReport(pairs=0, lipschitz_K=s.lipschitz_K, worst_ratio=0.0)

        K = s.lipschitz_K
        worst = 0.0
        violations = []
        neighbours = list(zip(entries, entries[1:] + entries[:1])) if len(entries) > 2 else [(entries[0], entries[1])]
        for first, second in neighbours:
            chord = 2.0 * abs(math.sin((second.angle - first.angle) / 2.0))
            gap, _ = PersistenceService.bottleneck(first.diagram, second.diagram)
            bound = K * chord + tol
            if K * chord > 0:
                worst = max(worst, gap / (K * chord))
            elif gap > tol:
                worst = math.inf
            if gap > bound:
                violations.append(StabilityPair(angle_a=first.angle, angle_b=second.angle, gap=gap, bound=bound))
        if violations:
            logger.warning("%d adjacent pairs break the stability bound", len(violations))
        return StabilityReport(pairs=len(neighbours), lipschitz_K=K, worst_ratio=worst, violations=violations)
