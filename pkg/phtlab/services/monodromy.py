import logging
import math
from functools import partial
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from phtlab.core.config import settings
from phtlab.core.errors import AmbiguousStitch, NotSimple
from phtlab.core.parallel import parallel_map
from phtlab.schemas.schemas import (
    DiagramPoint, Direction, DirectionPlan, LabeledDiagram, MonodromyVerdict, PersistenceDiagram,
    Point, Polygon, Section, SectionSegment, TWO_PI, WitnessLoop, normalize_angle,
)
from phtlab.services.persistence import PersistenceService, linf
from phtlab.services.pht import PHTService, lipschitz_constant

logger = logging.getLogger(__name__)

Label = Tuple[int, Optional[int]]
Node = Tuple[int, Label]

VINE_COLUMNS = ("section_id", "theta", "birth", "death", "birth_vertex", "death_vertex", "essential")


def _unreduced_at(tri, theta: float) -> PersistenceDiagram:
    return PersistenceService.lower_star_diagram(tri, Direction(theta=theta))


def _labels(diagram: PersistenceDiagram) -> List[Label]:
    return sorted((q.birth_vertex, q.death_vertex) for q in diagram.finite())


def _evaluate_labels(labels: Sequence[Label], coords: np.ndarray, theta: float) -> List[DiagramPoint]:
    v = np.array([math.cos(theta), math.sin(theta)])
    points = []
    for b, d in labels:
        birth = float(coords[b] @ v)
        death = max(float(coords[d] @ v), birth)
        points.append(DiagramPoint(birth=birth, death=death, birth_vertex=b, death_vertex=d))
    return points


class MonodromyService:

    @staticmethod
    def total_space(
        p: Polygon,
        plan: DirectionPlan,
        tol: Optional[float] = None,
        n_jobs: Optional[int] = None,
    ) -> List[LabeledDiagram]:
        """Reduced, vertex-labeled diagrams at every sample, in circle order from the first critical angle"""
        simple = PHTService.is_simple_dgm0(p, plan, tol)
        if not simple.simple:
            raise NotSimple(
                f"Diagram bundle is not simple: repeated point at angle {simple.witness.angle:.6f}",
                witness=simple.witness,
            )
        tri = PersistenceService.triangulate(p)
        angles = [(arc, normalize_angle(t)) for arc, samples in enumerate(plan.samples) for t in samples]
        diagrams = parallel_map(partial(_unreduced_at, tri), [theta for _, theta in angles], n_jobs)
        return [
            LabeledDiagram(angle=theta, arc_index=arc, diagram=PersistenceService.reduce(d))
            for (arc, theta), d in zip(angles, diagrams)
        ]

    @staticmethod
    def stitch(
        left: Sequence[DiagramPoint],
        right: Sequence[DiagramPoint],
        K: float,
        delta: float,
        final: bool = False,
    ) -> Optional[List[Tuple[int, Optional[int]]]]:
        """
        Pair off-diagonal points across an event within radius 2*K*delta.

        Returns (left index, right index or None) pairs; None on the right
        terminates that section onto the diagonal and right points left
        unpaired start new sections. Returns None when delta is too coarse
        to decide; with `final` set the pairing is forced or AmbiguousStitch
        is raised.
        """
        radius = 2.0 * K * delta
        gaps = [linf(a, b) for a, b in combinations(left, 2)]
        if gaps and radius >= min(gaps) / 2.0 and not final:
            return None

        pairs: List[Tuple[int, Optional[int]]] = []
        claimed: Dict[int, int] = {}
        for i, point in enumerate(left):
            candidates = [j for j, q in enumerate(right) if linf(point, q) <= radius]
            touching = point.persistence / 2.0 <= radius
            if not touching:
                if len(candidates) != 1:
                    if not final:
                        return None
                    raise AmbiguousStitch(
                        f"Point ({point.birth:.6g}, {point.death:.6g}) has {len(candidates)} continuations"
                    )
                choice: Optional[int] = candidates[0]
            elif not candidates:
                choice = None
            else:
                if not final:
                    return None
                solid = [j for j in candidates if right[j].persistence / 2.0 > radius]
                choice = solid[0] if len(solid) == 1 else None
            if choice is not None:
                if choice in claimed:
                    if not final:
                        return None
                    raise AmbiguousStitch(f"Right point {choice} continues two sections")
                claimed[choice] = i
            pairs.append((i, choice))
        return pairs

    @staticmethod
    def build_sections(
        p: Polygon,
        plan: DirectionPlan,
        tol: Optional[float] = None,
        n_jobs: Optional[int] = None,
        labeled: Optional[Sequence[LabeledDiagram]] = None,
    ) -> List[Section]:
        """Stitch the per-arc labels across every critical angle into sections"""
        if labeled is None:
            labeled = MonodromyService.total_space(p, plan, tol, n_jobs)
        n_arcs = len(plan.arcs)
        coords = p.coords()
        K = lipschitz_constant(p)

        arc_labels: List[List[Label]] = [[] for _ in range(n_arcs)]
        seen = [False] * n_arcs
        for entry in labeled:
            labels = _labels(entry.diagram)
            if not seen[entry.arc_index]:
                arc_labels[entry.arc_index] = labels
                seen[entry.arc_index] = True
            elif labels != arc_labels[entry.arc_index]:
                logger.warning("Labels change inside arc %d at angle %.6f", entry.arc_index, entry.angle)

        graph = nx.DiGraph()
        for arc, labels in enumerate(arc_labels):
            graph.add_nodes_from((arc, label) for label in labels)
        for arc in range(n_arcs):
            nxt = (arc + 1) % n_arcs
            for a, b in MonodromyService._event_pairs(arc_labels[arc], arc_labels[nxt], plan, arc, coords, K):
                graph.add_edge((arc, a), (nxt, b))

        tri = PersistenceService.triangulate(p)
        essential = MonodromyService._essential_section(plan, tri, coords)
        sections = [essential]
        for chain, cyclic in MonodromyService._chains(graph):
            sections.append(MonodromyService._section_from_chain(len(sections), chain, cyclic, plan, coords))
        logger.info("Built %d sections over %d arcs", len(sections), n_arcs)
        return sections

    @staticmethod
    def _event_pairs(
        left: List[Label], right: List[Label], plan: DirectionPlan, arc: int, coords: np.ndarray, K: float
    ) -> List[Tuple[Label, Label]]:
        if left == right:
            return [(label, label) for label in left]
        if not left:
            return []
        nxt = (arc + 1) % len(plan.arcs)
        theta_c = plan.arcs[arc][1]
        len_l = plan.arcs[arc][1] - plan.arcs[arc][0]
        len_r = plan.arcs[nxt][1] - plan.arcs[nxt][0]
        delta = min(len_l, len_r) / 4.0
        max_halvings = settings.STITCH_MAX_HALVINGS
        for attempt in range(max_halvings + 1):
            final = attempt == max_halvings
            left_points = _evaluate_labels(left, coords, theta_c - delta)
            right_points = _evaluate_labels(right, coords, theta_c + delta)
            pairs = MonodromyService.stitch(left_points, right_points, K, delta, final=final)
            if pairs is not None:
                if final:
                    logger.warning("Stitch at angle %.6f forced after %d halvings", normalize_angle(theta_c), max_halvings)
                return [(left[i], right[j]) for i, j in pairs if j is not None]
            delta /= 2.0
        return []

    @staticmethod
    def _chains(graph: nx.DiGraph) -> List[Tuple[List[Node], bool]]:
        chains = []
        for component in sorted(nx.weakly_connected_components(graph), key=min):
            starts = sorted(n for n in component if graph.in_degree(n) == 0)
            cyclic = not starts
            node = starts[0] if starts else min(component)
            chain = [node]
            while True:
                successors = list(graph.successors(node))
                if not successors or successors[0] == chain[0]:
                    break
                node = successors[0]
                chain.append(node)
            chains.append((chain, cyclic))
        chains.sort(key=lambda item: item[0][0])
        return chains

    @staticmethod
    def _essential_section(plan: DirectionPlan, tri, coords: np.ndarray) -> Section:
        segments = []
        for arc, samples in zip(plan.arcs, plan.samples):
            theta = normalize_angle(samples[len(samples) // 2])
            birth_vertex = _unreduced_at(tri, theta).essentials()[0].birth_vertex
            segments.append(
                SectionSegment(arc=arc, birth_vertex=birth_vertex, birth_point=Point.of(coords[birth_vertex]))
            )
        start = plan.arcs[0][0]
        return Section(section_id=0, essential=True, full_circle=True, support=(start, start + TWO_PI), wraps=True, segments=segments)

    @staticmethod
    def _section_from_chain(section_id: int, chain: List[Node], cyclic: bool, plan: DirectionPlan, coords: np.ndarray) -> Section:
        segments = [
            SectionSegment(
                arc=plan.arcs[arc],
                birth_vertex=b,
                death_vertex=d,
                birth_point=Point.of(coords[b]),
                death_point=Point.of(coords[d]),
            )
            for arc, (b, d) in chain
        ]
        n_arcs = len(plan.arcs)
        first_arc = chain[0][0]
        start = plan.arcs[first_arc][0]
        length = sum(plan.arcs[arc][1] - plan.arcs[arc][0] for arc, _ in chain)
        full_circle = cyclic or len(chain) > n_arcs
        return Section(
            section_id=section_id,
            full_circle=full_circle,
            support=(start, start + length),
            wraps=start + length > TWO_PI,
            segments=segments,
        )

    @staticmethod
    def sample_sections(sections: Sequence[Section], angles: Sequence[float]) -> List[dict]:
        """One row per section value at each angle; sections on the diagonal give no row"""
        rows = []
        for section in sections:
            for theta in angles:
                theta = normalize_angle(theta)
                hits = [s for s in section.segments if s.contains(theta)]
                interior = [s for s in hits if s.arc[0] < theta < s.arc[1] or s.arc[0] < theta + TWO_PI < s.arc[1]]
                for segment in interior or hits[:1]:
                    birth, death = segment.value(theta)
                    rows.append(
                        {
                            "section_id": section.section_id,
                            "theta": theta,
                            "birth": birth,
                            "death": death,
                            "birth_vertex": segment.birth_vertex,
                            "death_vertex": segment.death_vertex,
                            "essential": section.essential,
                        }
                    )
        return rows

    @staticmethod
    def monodromy_decision(
        sections: Sequence[Section],
        labeled: Sequence[LabeledDiagram],
        tol: Optional[float] = None,
    ) -> MonodromyVerdict:
        """
        Trivial when no section returns to a different point after one
        loop and the sections reproduce every sampled reduced diagram.
        """
        tol = settings.TOL if tol is None else tol
        witness = None
        for section in sections:
            if section.essential or not section.full_circle:
                continue
            witness = MonodromyService._witness(section, labeled)
            break
        return_map_ok = witness is None

        covering_ok = True
        rows = MonodromyService.sample_sections([s for s in sections if not s.essential], [e.angle for e in labeled])
        by_angle: Dict[float, List[DiagramPoint]] = {}
        for row in rows:
            by_angle.setdefault(row["theta"], []).append(DiagramPoint(birth=row["birth"], death=max(row["death"], row["birth"])))
        for entry in labeled:
            covered = PersistenceDiagram(points=tuple(by_angle.get(entry.angle, [])))
            finite = PersistenceDiagram(points=tuple(entry.diagram.finite()))
            if not PersistenceService.multiset_equal(finite, covered, tol):
                logger.warning("Sections miss the diagram at angle %.6f", entry.angle)
                covering_ok = False
                break

        trivial = return_map_ok and covering_ok
        logger.info("Monodromy is %s", "trivial" if trivial else "non-trivial")
        return MonodromyVerdict(
            trivial=trivial,
            sections=list(sections),
            witness_loop=witness,
            covering_ok=covering_ok,
            return_map_ok=return_map_ok,
        )

    @staticmethod
    def _witness(section: Section, labeled: Sequence[LabeledDiagram]) -> WitnessLoop:
        """Follow a section once around the circle from its first sample"""
        n_arcs = len({e.arc_index for e in labeled})
        first = section.segments[0]
        # arc midpoints are always samples
        theta = normalize_angle((first.arc[0] + first.arc[1]) / 2.0)
        if len(section.segments) > n_arcs:
            last = section.segments[n_arcs]
            reason = "return_map"
        else:
            last = first
            reason = "full_circle_non_essential"
        return WitnessLoop(
            angle=theta,
            start=first.value(theta),
            end=last.value(theta),
            start_labels=(first.birth_vertex, first.death_vertex),
            end_labels=(last.birth_vertex, last.death_vertex),
            reason=reason,
        )

    @staticmethod
    def export_vines(sections: Sequence[Section], angles: Sequence[float]) -> List[dict]:
        """Vine rows for CSV; an empty section list gives no rows"""
        return MonodromyService.sample_sections(sections, sorted(normalize_angle(t) for t in angles))

    @staticmethod
    def monodromy(
        p: Polygon,
        plan: DirectionPlan,
        tol: Optional[float] = None,
        n_jobs: Optional[int] = None,
    ) -> Tuple[MonodromyVerdict, List[LabeledDiagram]]:
        labeled = MonodromyService.total_space(p, plan, tol, n_jobs)
        sections = MonodromyService.build_sections(p, plan, tol, n_jobs, labeled=labeled)
        return MonodromyService.monodromy_decision(sections, labeled, tol), labeled
