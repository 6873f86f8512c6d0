import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from shapely.geometry import LinearRing, LineString
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.validation import explain_validity

from phtlab.core.config import settings
from phtlab.core.errors import (
    CenterNotInKernel, DegenerateArea, EmptyKernel, NonFiniteCoordinates, SelfIntersecting, TooFewVertices,
)
from phtlab.schemas.schemas import (
    CriticalAngle, CriticalAngleSet, Direction, GeneralPositionResult, Hull, KernelPolygon,
    Point, Polygon, Sector, TWO_PI, normalize_angle, points_array,
)

logger = logging.getLogger(__name__)


def shoelace(coords: np.ndarray) -> float:
    """Signed area, positive for counter-clockwise rings"""
    x, y = coords[:, 0], coords[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def cross2d(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def bbox_scale(coords: np.ndarray) -> float:
    """Diagonal of the bounding box, never zero"""
    span = coords.max(axis=0) - coords.min(axis=0)
    return max(float(np.hypot(span[0], span[1])), 1e-300)


def _drop_consecutive_duplicates(coords: np.ndarray, ids: list, tol: float) -> Tuple[np.ndarray, list]:
    keep_c, keep_i = [], []
    for xy, vid in zip(coords, ids):
        if keep_c and np.max(np.abs(xy - keep_c[-1])) <= tol:
            continue
        keep_c.append(xy)
        keep_i.append(vid)
    while len(keep_c) > 1 and np.max(np.abs(keep_c[0] - keep_c[-1])) <= tol:
        keep_c.pop()
        keep_i.pop()
    return np.array(keep_c, dtype=float).reshape(-1, 2), keep_i


def _drop_collinear(coords: np.ndarray, ids: list, tol: float, protect: Optional[set] = None) -> Tuple[np.ndarray, list]:
    """Remove vertices lying on the segment joining their ring neighbours"""
    coords, ids = list(coords), list(ids)
    protect = protect or set()
    changed = True
    while changed and len(coords) > 3:
        changed = False
        n = len(coords)
        for i in range(n):
            if ids[i] in protect:
                continue
            a, b, c = coords[i - 1], coords[i], coords[(i + 1) % n]
            ab, bc = b - a, c - b
            scale = np.hypot(*ab) * np.hypot(*bc)
            if abs(cross2d(ab, bc)) <= tol * max(scale, 1e-300) and float(np.dot(ab, bc)) > 0.0:
                del coords[i]
                del ids[i]
                changed = True
                break
    return np.array(coords, dtype=float).reshape(-1, 2), ids


def _clip_halfplane(poly: np.ndarray, a: np.ndarray, b: np.ndarray, slack: float) -> np.ndarray:
    """Sutherland-Hodgman step keeping the closed left side of the directed line a->b"""
    if len(poly) == 0:
        return poly
    d = b - a
    norm = math.hypot(d[0], d[1])
    side = (d[0] * (poly[:, 1] - a[1]) - d[1] * (poly[:, 0] - a[0])) / norm
    inside = side >= -slack
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        p, q = poly[i], poly[j]
        sp, sq = side[i], side[j]
        if inside[i]:
            out.append(p)
        if inside[i] != inside[j]:
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out, dtype=float).reshape(-1, 2)


class GeometryService:

    @staticmethod
    def validate_polygon(raw: Sequence) -> Polygon:
        """Validate raw points into a simple counter-clockwise polygon"""
        coords = np.array([(p.x, p.y) if isinstance(p, Point) else tuple(p) for p in raw], dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(coords)):
            raise NonFiniteCoordinates("Polygon coordinates must be finite")
        coords, _ = _drop_consecutive_duplicates(coords, list(range(len(coords))), 0.0)
        if len(coords) < 3:
            raise TooFewVertices(f"Polygon needs at least 3 distinct vertices, got {len(coords)}")

        scale = bbox_scale(coords)
        area = shoelace(coords)
        centered = coords - coords.mean(axis=0)
        if np.linalg.matrix_rank(centered, tol=settings.AREA_TOL * scale) < 2:
            raise DegenerateArea(f"Polygon area {area:.3g} is below tolerance")

        ring = LinearRing(coords)
        if not ring.is_simple:
            reason = explain_validity(ShapelyPolygon(coords))
            raise SelfIntersecting(f"Polygon boundary is not simple: {reason}")
        if abs(area) < settings.AREA_TOL * scale * scale:
            raise DegenerateArea(f"Polygon area {area:.3g} is below tolerance")

        if area < 0:
            logger.debug("Reorienting clockwise polygon")
            coords = coords[::-1].copy()

        before = len(coords)
        coords, _ = _drop_collinear(coords, list(range(len(coords))), settings.PARALLEL_TOL)
        if len(coords) < before:
            logger.info("Dropped %d collinear vertices", before - len(coords))
        return Polygon.from_coords(coords)

    @staticmethod
    def area(p: Polygon) -> float:
        return shoelace(p.coords())

    @staticmethod
    def height(x: Point, v: Direction) -> float:
        return x.x * math.cos(v.theta) + x.y * math.sin(v.theta)

    @staticmethod
    def convex_hull(p: Polygon) -> Hull:
        """Monotone chain hull; collinear hull points are dropped"""
        coords = p.coords()
        tol = settings.PARALLEL_TOL * bbox_scale(coords) ** 2
        order = sorted(range(p.k), key=lambda i: (coords[i, 0], coords[i, 1]))

        def turn(o, a, b):
            return cross2d(coords[a] - coords[o], coords[b] - coords[o])

        lower: List[int] = []
        for i in order:
            while len(lower) >= 2 and turn(lower[-2], lower[-1], i) <= tol:
                lower.pop()
            lower.append(i)
        upper: List[int] = []
        for i in reversed(order):
            while len(upper) >= 2 and turn(upper[-2], upper[-1], i) <= tol:
                upper.pop()
            upper.append(i)
        ids = lower[:-1] + upper[:-1]
        return Hull(vertices=tuple(p.vertices[i] for i in ids), vertex_ids=tuple(ids))

    @staticmethod
    def kernel(p: Polygon) -> KernelPolygon:
        """Intersection of the inner half-planes of all edges, clipped to the bounding box"""
        coords = p.coords()
        scale = bbox_scale(coords)
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        region = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]], dtype=float)
        slack = settings.AREA_TOL * scale
        for i, j in p.edges():
            region = _clip_halfplane(region, coords[i], coords[j], slack)
            if len(region) == 0:
                logger.debug("Kernel emptied by edge (%d, %d)", i, j)
                return KernelPolygon()
        region, _ = _drop_consecutive_duplicates(region, list(range(len(region))), slack)
        if len(region) == 0:
            return KernelPolygon()
        area = shoelace(region) if len(region) >= 3 else 0.0
        return KernelPolygon(vertices=tuple(Point.of(xy) for xy in region), area=max(area, 0.0))

    @staticmethod
    def in_kernel(p: Polygon, q: Point, tol: Optional[float] = None) -> bool:
        """True when q lies on the inner side of every edge line"""
        coords = p.coords()
        tol = settings.TOL if tol is None else tol
        slack = tol * bbox_scale(coords)
        a = coords
        d = np.roll(coords, -1, axis=0) - coords
        side = (d[:, 0] * (q.y - a[:, 1]) - d[:, 1] * (q.x - a[:, 0])) / np.hypot(d[:, 0], d[:, 1])
        return bool(np.all(side >= -slack))

    @staticmethod
    def contains_segment(p: Polygon, a: Point, b: Point, tol: Optional[float] = None) -> bool:
        coords = p.coords()
        tol = settings.TOL if tol is None else tol
        shape = ShapelyPolygon(coords).buffer(tol * bbox_scale(coords))
        return bool(shape.covers(LineString([a.as_tuple(), b.as_tuple()])))

    @staticmethod
    def choose_center(k: KernelPolygon) -> Point:
        """Chebyshev center of the kernel with a lexicographic tie-break"""
        if k.is_empty:
            raise EmptyKernel("Shape is not star-shaped: its kernel is empty")
        coords = k.coords()
        scale = bbox_scale(coords) if len(coords) > 1 else 1.0
        if len(coords) < 3 or k.area <= settings.AREA_TOL * scale * scale:
            # zero-area kernel: midpoint of its longest chord
            diffs = coords[:, None, :] - coords[None, :, :]
            dist = np.hypot(diffs[..., 0], diffs[..., 1])
            i, j = np.unravel_index(int(np.argmax(dist)), dist.shape)
            return Point.of((coords[i] + coords[j]) / 2.0)

        d = np.roll(coords, -1, axis=0) - coords
        normals = np.column_stack([-d[:, 1], d[:, 0]])
        norms = np.hypot(normals[:, 0], normals[:, 1])
        keep = norms > 0
        normals, norms, anchors = normals[keep], norms[keep], coords[keep]
        # inside: n . x >= n . a  ->  -n . x + r |n| <= -n . a
        A_ub = np.column_stack([-normals, norms])
        b_ub = -np.einsum("ij,ij->i", normals, anchors)
        bounds = [(None, None), (None, None), (0, None)]

        res = linprog([0.0, 0.0, -1.0], A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if not res.success:
            raise EmptyKernel(f"Chebyshev center LP failed: {res.message}")
        radius = float(res.x[2])
        eps = 1e-9 * max(radius, scale * 1e-6)

        # lexicographic tie-break among deepest points: smallest x, then smallest y
        tight = [(None, None), (None, None), (max(radius - eps, 0.0), None)]
        res_x = linprog([1.0, 0.0, 0.0], A_ub=A_ub, b_ub=b_ub, bounds=tight, method="highs")
        x_star = float(res_x.x[0]) if res_x.success else float(res.x[0])
        tight_y = [(None, x_star + eps), (None, None), (max(radius - eps, 0.0), None)]
        res_y = linprog([0.0, 1.0, 0.0], A_ub=A_ub, b_ub=b_ub, bounds=tight_y, method="highs")
        if res_y.success:
            return Point(x=float(res_y.x[0]), y=float(res_y.x[1]))
        return Point(x=float(res.x[0]), y=float(res.x[1]))

    @staticmethod
    def sectors(p: Polygon, c: Point, h: Hull) -> List[Sector]:
        """One sector per hull edge, enumerated counter-clockwise"""
        if not GeometryService.in_kernel(p, c):
            raise CenterNotInKernel(f"Point ({c.x}, {c.y}) is not a center of the shape")
        coords = p.coords()
        scale = bbox_scale(coords)
        center = np.array([c.x, c.y])
        result = []
        for i in range(h.m):
            a, b = h.vertex_ids[i], h.vertex_ids[(i + 1) % h.m]
            ids: List[Optional[int]] = [None, a]
            j = (a + 1) % p.k
            while j != b:
                ids.append(j)
                j = (j + 1) % p.k
            ids.append(b)
            # a center sitting on a vertex of the arc is that vertex
            on_vertex = [v for v in ids[1:] if np.max(np.abs(coords[v] - center)) <= settings.AREA_TOL * scale]
            if on_vertex:
                ids[0] = on_vertex[0]
            ring = np.array([center] + [coords[v] for v in ids[1:]], dtype=float)
            ring, ring_ids = _drop_consecutive_duplicates(ring, ids, settings.AREA_TOL * scale)
            if len(ring) >= 3:
                ring, ring_ids = _drop_collinear(ring, ring_ids, settings.PARALLEL_TOL, protect={a, b})
            area = shoelace(ring) if len(ring) >= 3 else 0.0
            zero_area = area <= settings.AREA_TOL * scale * scale
            result.append(
                Sector(
                    index=i,
                    hull_edge=(p.vertices[a], p.vertices[b]),
                    center=c,
                    region=tuple(Point.of(xy) for xy in ring),
                    vertex_ids=tuple(ring_ids),
                    zero_area=zero_area,
                    area=max(area, 0.0),
                )
            )
        return result

    @staticmethod
    def is_general_position(p: Polygon, tol: Optional[float] = None) -> GeneralPositionResult:
        """No two distinct vertex pairs may span parallel, distinct lines"""
        tol = settings.PARALLEL_TOL if tol is None else tol
        coords = p.coords()
        scale = bbox_scale(coords)
        pairs = [(i, j) for i in range(p.k) for j in range(i + 1, p.k)]
        D = np.array([coords[j] - coords[i] for i, j in pairs])
        norms = np.hypot(D[:, 0], D[:, 1])
        C = np.abs(np.outer(D[:, 0], D[:, 1]) - np.outer(D[:, 1], D[:, 0]))
        parallel = np.triu(C <= tol * np.outer(norms, norms), k=1)
        for s, t in zip(*np.nonzero(parallel)):
            (i, j), (k, l) = pairs[s], pairs[t]
            offset = coords[k] - coords[i] if k != i else coords[l] - coords[i]
            if abs(cross2d(D[s], offset)) > tol * norms[s] * scale:
                return GeneralPositionResult(general_position=False, witness=((i, j), (k, l)))
        return GeneralPositionResult(general_position=True)

    @staticmethod
    def critical_angles(p: Polygon, tol: Optional[float] = None) -> CriticalAngleSet:
        """Directions where two vertices share a height"""
        tol = settings.ANGLE_TOL if tol is None else tol
        coords = p.coords()
        raw = []
        for i in range(p.k):
            for j in range(i + 1, p.k):
                d = coords[j] - coords[i]
                phi = math.atan2(d[1], d[0])
                raw.append((normalize_angle(phi + math.pi / 2.0), (i, j)))
                raw.append((normalize_angle(phi - math.pi / 2.0), (i, j)))
        raw.sort(key=lambda item: item[0])

        merged: List[Tuple[float, List[Tuple[int, int]]]] = []
        for angle, pair in raw:
            if merged and angle - merged[-1][0] <= tol:
                merged[-1][1].append(pair)
            else:
                merged.append((angle, [pair]))
        if len(merged) > 1 and merged[0][0] + TWO_PI - merged[-1][0] <= tol:
            angle, pairs = merged.pop()
            merged[0] = (merged[0][0], merged[0][1] + pairs)
        return CriticalAngleSet(
            angles=tuple(CriticalAngle(angle=a, pairs=tuple(sorted(set(ps)))) for a, ps in merged)
        )
