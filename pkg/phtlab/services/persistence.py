import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.cluster.hierarchy import DisjointSet
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from phtlab.core.config import settings
from phtlab.core.errors import NoEssentialClass, NotACenter, TriangulationFailed
from phtlab.schemas.schemas import (
    DiagramPoint, Direction, Matching, PersistenceDiagram, Point, Polygon, Triangulation,
    _parse_extended_float, normalize_angle,
)
from phtlab.services.geometry import GeometryService, cross2d

logger = logging.getLogger(__name__)


def _heights(coords: np.ndarray, v: Direction) -> np.ndarray:
    return coords @ np.array([math.cos(v.theta), math.sin(v.theta)])


def _ranks(vertex_ids: Sequence[Optional[int]]) -> List[int]:
    """Tie-break rank: source polygon id, extra points after every polygon vertex"""
    top = max([i for i in vertex_ids if i is not None], default=-1) + 1
    return [vid if vid is not None else top + local for local, vid in enumerate(vertex_ids)]


def _sweep(
    heights: np.ndarray,
    edges: Sequence[Tuple[int, int]],
    vertex_ids: Sequence[Optional[int]],
    eps: Optional[float] = None,
) -> List[DiagramPoint]:
    """Degree-0 sublevel persistence of a vertex-filtered graph by the elder rule"""
    eps = settings.PERSISTENCE_EPS if eps is None else eps
    heights = np.asarray(heights, dtype=float).tolist()
    n = len(heights)
    rank = _ranks(vertex_ids)
    neighbours: List[List[int]] = [[] for _ in range(n)]
    for a, b in edges:
        neighbours[a].append(b)
        neighbours[b].append(a)
    for adjacent in neighbours:
        adjacent.sort(key=rank.__getitem__)
    age = [(heights[i], rank[i]) for i in range(n)]
    order = sorted(range(n), key=age.__getitem__)

    uf = DisjointSet(range(n))
    # oldest member of each component, indexed by current root
    oldest = list(range(n))
    processed = [False] * n
    points: List[DiagramPoint] = []

    for u in order:
        processed[u] = True
        for w in neighbours[u]:
            if not processed[w]:
                continue
            ru, rw = uf[u], uf[w]
            if ru == rw:
                continue
            eu, ew = oldest[ru], oldest[rw]
            elder, younger = (eu, ew) if age[eu] <= age[ew] else (ew, eu)
            if heights[u] - heights[younger] > eps:
                points.append(
                    DiagramPoint(
                        birth=heights[younger],
                        death=heights[u],
                        birth_vertex=vertex_ids[younger],
                        death_vertex=vertex_ids[u],
                    )
                )
            uf.merge(ru, rw)
            oldest[uf[u]] = elder

    for subset in uf.subsets():
        root = oldest[uf[next(iter(subset))]]
        points.append(
            DiagramPoint(birth=heights[root], death=math.inf, birth_vertex=vertex_ids[root], essential=True)
        )
    return points


def _sorted_diagram(points) -> PersistenceDiagram:
    return PersistenceDiagram(
        points=tuple(sorted(points, key=lambda p: (p.birth, p.death, -1 if p.birth_vertex is None else p.birth_vertex)))
    )


def linf(a: DiagramPoint, b: DiagramPoint) -> float:
    if a.essential or b.essential:
        return abs(a.birth - b.birth) if a.essential == b.essential else math.inf
    return max(abs(a.birth - b.birth), abs(a.death - b.death))


class PersistenceService:

    # -------------------------
    # DIAGRAMS
    # -------------------------
    @staticmethod
    def boundary_sweep_diagram(p: Polygon, c: Point, v: Direction, eps: Optional[float] = None) -> PersistenceDiagram:
        """
        Star-shaped fast path: sweep the boundary cycle, then clamp every
        death at the height of the center and drop classes born above it
        """
        if not GeometryService.in_kernel(p, c):
            raise NotACenter(f"Point ({c.x}, {c.y}) is not a center of the shape")
        eps = settings.PERSISTENCE_EPS if eps is None else eps
        heights = _heights(p.coords(), v)
        points = _sweep(heights, p.edges(), list(range(p.k)), eps)

        clamp = GeometryService.height(c, v)
        kept = []
        for point in points:
            if point.essential:
                kept.append(point)
                continue
            if point.death > clamp:
                # the merge vertex keeps labelling a clamped death
                point = point.model_copy(update={"death": clamp})
            if point.death - point.birth > eps:
                kept.append(point)
        return _sorted_diagram(kept)

    @staticmethod
    def triangulate(p: Polygon, vertex_ids: Optional[Sequence[Optional[int]]] = None) -> Triangulation:
        """Ear clipping, always clipping the eligible ear with the lowest vertex index"""
        coords = p.coords()
        ids = tuple(vertex_ids) if vertex_ids is not None else tuple(range(p.k))
        remaining = list(range(p.k))
        triangles: List[Tuple[int, int, int]] = []

        def inside(q, a, b, c) -> bool:
            d1 = cross2d(coords[b] - coords[a], coords[q] - coords[a])
            d2 = cross2d(coords[c] - coords[b], coords[q] - coords[b])
            d3 = cross2d(coords[a] - coords[c], coords[q] - coords[c])
            return d1 >= 0 and d2 >= 0 and d3 >= 0

        while len(remaining) > 3:
            n = len(remaining)
            clipped = False
            for pos in sorted(range(n), key=lambda i: remaining[i]):
                a, b, c = remaining[pos - 1], remaining[pos], remaining[(pos + 1) % n]
                if cross2d(coords[b] - coords[a], coords[c] - coords[b]) <= 0:
                    continue
                blocked = any(
                    inside(q, a, b, c)
                    for q in remaining
                    if q not in (a, b, c) and not np.array_equal(coords[q], coords[a]) and not np.array_equal(coords[q], coords[c])
                )
                if blocked:
                    continue
                triangles.append((a, b, c))
                del remaining[pos]
                clipped = True
                break
            if not clipped:
                raise TriangulationFailed(f"No ear found with {n} vertices left")
        triangles.append(tuple(remaining))

        edges = sorted({tuple(sorted(e)) for t in triangles for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2]))})
        return Triangulation(vertices=p.vertices, triangles=tuple(triangles), edges=tuple(edges), vertex_ids=ids)

    @staticmethod
    def lower_star_diagram(t: Triangulation, v: Direction, eps: Optional[float] = None) -> PersistenceDiagram:
        heights = _heights(t.coords(), v)
        return _sorted_diagram(_sweep(heights, t.edges, t.vertex_ids, eps))

    @staticmethod
    def sweep_segments(
        points: Sequence[Point],
        edges: Sequence[Tuple[int, int]],
        v: Direction,
        vertex_ids: Optional[Sequence[Optional[int]]] = None,
        eps: Optional[float] = None,
    ) -> PersistenceDiagram:
        """Sublevel persistence of a 1-complex, used for zero-area sectors"""
        coords = np.array([(q.x, q.y) for q in points], dtype=float).reshape(-1, 2)
        ids = list(vertex_ids) if vertex_ids is not None else list(range(len(points)))
        return _sorted_diagram(_sweep(_heights(coords, v), edges, ids, eps))

    @staticmethod
    def component_count(t: Triangulation, v: Direction, threshold: float) -> int:
        """Breadth-first count of the components of the subcomplex below threshold"""
        heights = _heights(t.coords(), v)
        graph = nx.Graph()
        graph.add_nodes_from(i for i in range(len(heights)) if heights[i] <= threshold)
        graph.add_edges_from((a, b) for a, b in t.edges if heights[a] <= threshold and heights[b] <= threshold)
        return nx.number_connected_components(graph)

    # -------------------------
    # REDUCED DIAGRAMS
    # -------------------------
    @staticmethod
    def reduce(d: PersistenceDiagram) -> PersistenceDiagram:
        essentials = [i for i, q in enumerate(d.points) if q.essential]
        if not essentials:
            raise NoEssentialClass("Diagram has no essential class to remove")
        drop = min(
            essentials,
            key=lambda i: (d.points[i].birth, math.inf if d.points[i].birth_vertex is None else d.points[i].birth_vertex),
        )
        return PersistenceDiagram(points=tuple(q for i, q in enumerate(d.points) if i != drop))

    @staticmethod
    def unreduce(d: PersistenceDiagram, point: DiagramPoint) -> PersistenceDiagram:
        if not point.essential:
            raise NoEssentialClass("Only an essential class can be re-inserted")
        return _sorted_diagram(list(d.points) + [point])

    # -------------------------
    # MATCHING
    # -------------------------
    @staticmethod
    def bottleneck(
        a: PersistenceDiagram, b: PersistenceDiagram, allow_diagonal: bool = True
    ) -> Tuple[float, Matching]:
        """
        Exact bottleneck distance by binary search over candidate costs.
        Feasibility at a radius is a perfect matching on the graph of
        points plus one diagonal copy per point of the opposite side.
        """
        ea = sorted(a.essentials(), key=lambda q: q.birth)
        eb = sorted(b.essentials(), key=lambda q: q.birth)
        if len(ea) != len(eb):
            return math.inf, Matching(cost=math.inf)
        essential_cost = max((abs(p.birth - q.birth) for p, q in zip(ea, eb)), default=0.0)
        essential_pairs = list(zip(ea, eb))

        fa, fb = a.finite(), b.finite()
        n, m = len(fa), len(fb)
        if not allow_diagonal and n != m:
            return math.inf, Matching(cost=math.inf)
        if n == 0 and m == 0:
            return essential_cost, Matching(pairs=tuple(essential_pairs), cost=essential_cost)
        if n == m:
            key = lambda q: (q.birth, q.death)
            paired = list(zip(sorted(fa, key=key), sorted(fb, key=key)))
            # identical finite parts match at zero cost
            if all(p.birth == q.birth and p.death == q.death for p, q in paired):
                return essential_cost, Matching(pairs=tuple(essential_pairs + paired), cost=essential_cost)

        dist = np.zeros((n, m))
        for i, p in enumerate(fa):
            for j, q in enumerate(fb):
                dist[i, j] = linf(p, q)
        gap_a = np.array([p.persistence / 2.0 for p in fa])
        gap_b = np.array([q.persistence / 2.0 for q in fb])

        candidates = [0.0] + dist.ravel().tolist()
        if allow_diagonal:
            candidates += gap_a.tolist() + gap_b.tolist()
        candidates = np.unique(np.array(candidates))

        def feasible(r: float):
            rows, cols = [], []
            ii, jj = np.nonzero(dist <= r)
            rows += ii.tolist()
            cols += jj.tolist()
            size = n
            if allow_diagonal:
                size = n + m
                for i in np.nonzero(gap_a <= r)[0]:
                    rows.append(int(i))
                    cols.append(m + int(i))
                for j in np.nonzero(gap_b <= r)[0]:
                    rows.append(n + int(j))
                    cols.append(int(j))
                for j in range(m):
                    for i in range(n):
                        rows.append(n + j)
                        cols.append(m + i)
            if not rows:
                return None
            graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size if allow_diagonal else m))
            match = maximum_bipartite_matching(graph, perm_type="column")
            if np.count_nonzero(match >= 0) < size:
                return None
            return match

        lo, hi = 0, len(candidates) - 1
        best = feasible(float(candidates[hi]))
        while lo < hi:
            mid = (lo + hi) // 2
            match = feasible(float(candidates[mid]))
            if match is not None:
                hi, best = mid, match
            else:
                lo = mid + 1
        finite_cost = float(candidates[hi])

        pairs: List[Tuple[Optional[DiagramPoint], Optional[DiagramPoint]]] = list(essential_pairs)
        for i in range(n):
            j = int(best[i])
            pairs.append((fa[i], fb[j] if j < m else None))
        if allow_diagonal:
            for j in range(m):
                row = int(best[n + j])
                if row == j:
                    pairs.append((None, fb[j]))
        cost = max(finite_cost, essential_cost)
        return cost, Matching(pairs=tuple(pairs), cost=cost)

    @staticmethod
    def multiset_equal(a: PersistenceDiagram, b: PersistenceDiagram, tol: Optional[float] = None) -> bool:
        tol = settings.TOL if tol is None else tol
        if len(a) != len(b):
            return False
        # greedy pass over sorted points settles the common case
        key = lambda q: (q.birth, q.death)
        if all(linf(p, q) <= tol for p, q in zip(sorted(a.points, key=key), sorted(b.points, key=key))):
            return True
        cost, _ = PersistenceService.bottleneck(a, b, allow_diagonal=False)
        return cost <= tol

    # -------------------------
    # RECORDS
    # -------------------------
    @staticmethod
    def diagram_record(d: PersistenceDiagram, theta: float) -> dict:
        return {
            "direction": theta,
            "points": [q.model_dump(mode="json", exclude={"essential"}) for q in d.points],
        }

    @staticmethod
    def diagram_from_record(record: dict) -> Tuple[float, PersistenceDiagram]:
        points = []
        for raw in record.get("points", []):
            death = float(_parse_extended_float(raw["death"]))
            points.append(DiagramPoint(**{**raw, "death": death, "essential": math.isinf(death)}))
        return normalize_angle(float(record["direction"])), PersistenceDiagram(points=tuple(points))
