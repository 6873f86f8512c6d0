import math
from enum import Enum
from typing import Generic, List, Optional, Tuple, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

T = TypeVar("T")

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Map an angle into [0, 2π)"""
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return theta


def _parse_extended_float(v):
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return v

# -------------------------
# STANDARD RESPONSE
# -------------------------
class StandardResponse(BaseModel, Generic[T]):
    status: bool
    data: Optional[T] = None
    error: Optional[str] = None
    message: Optional[str] = None

    model_config = ConfigDict(from_attributes=True)

# -------------------------
# GEOMETRY SCHEMAS
# -------------------------
class Point(BaseModel):
    x: float
    y: float

    model_config = ConfigDict(frozen=True)

    @field_validator("x", "y")
    @classmethod
    def finite_coordinate(cls, v):
        if not math.isfinite(v):
            raise ValueError("Point coordinates must be finite")
        return v

    @classmethod
    def of(cls, xy) -> "Point":
        return cls(x=float(xy[0]), y=float(xy[1]))

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


class Direction(BaseModel):
    theta: float

    model_config = ConfigDict(frozen=True)

    @field_validator("theta")
    @classmethod
    def wrap_theta(cls, v):
        if not math.isfinite(v):
            raise ValueError("Direction angle must be finite")
        return normalize_angle(v)

    @classmethod
    def from_vector(cls, vx: float, vy: float) -> "Direction":
        return cls(theta=math.atan2(vy, vx))

    @property
    def vector(self) -> Tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))


def points_array(points) -> np.ndarray:
    return np.array([(p.x, p.y) for p in points], dtype=float).reshape(-1, 2)


class Polygon(BaseModel):
    vertices: Tuple[Point, ...]

    model_config = ConfigDict(frozen=True)

    @field_validator("vertices")
    @classmethod
    def at_least_three(cls, v):
        if len(v) < 3:
            raise ValueError("A polygon needs at least 3 vertices")
        return v

    @classmethod
    def from_coords(cls, coords) -> "Polygon":
        return cls(vertices=tuple(Point.of(xy) for xy in coords))

    @property
    def k(self) -> int:
        return len(self.vertices)

    def coords(self) -> np.ndarray:
        return points_array(self.vertices)

    def edges(self) -> List[Tuple[int, int]]:
        return [(i, (i + 1) % self.k) for i in range(self.k)]


class KernelPolygon(BaseModel):
    vertices: Tuple[Point, ...] = ()
    area: float = 0.0

    model_config = ConfigDict(frozen=True)

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    def coords(self) -> np.ndarray:
        return points_array(self.vertices)


class Hull(BaseModel):
    vertices: Tuple[Point, ...]
    vertex_ids: Tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @property
    def m(self) -> int:
        return len(self.vertices)

    def coords(self) -> np.ndarray:
        return points_array(self.vertices)


class Sector(BaseModel):
    index: int
    hull_edge: Tuple[Point, Point]
    center: Point
    # c -> x_i -> boundary arc -> x_{i+1}; vertex_ids[0] is None for the center,
    # or the id of the arc vertex the center sits on
    region: Tuple[Point, ...]
    vertex_ids: Tuple[Optional[int], ...]
    zero_area: bool = False
    area: float = 0.0

    model_config = ConfigDict(frozen=True)

    def coords(self) -> np.ndarray:
        return points_array(self.region)

    def polygon(self) -> Polygon:
        return Polygon(vertices=self.region)

    def polygon_ids(self) -> Tuple[int, ...]:
        return tuple(i for i in self.vertex_ids if i is not None)

    @property
    def pinched(self) -> bool:
        """The region touches itself at a vertex the center sits on"""
        ids = self.polygon_ids()
        return len(set(ids)) < len(ids)


class CriticalAngle(BaseModel):
    angle: float
    pairs: Tuple[Tuple[int, int], ...]

    model_config = ConfigDict(frozen=True)


class CriticalAngleSet(BaseModel):
    angles: Tuple[CriticalAngle, ...]

    model_config = ConfigDict(frozen=True)

    def values(self) -> List[float]:
        return [a.angle for a in self.angles]


class GeneralPositionResult(BaseModel):
    general_position: bool
    witness: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None

# -------------------------
# PERSISTENCE SCHEMAS
# -------------------------
class DiagramPoint(BaseModel):
    birth: float
    death: float
    birth_vertex: Optional[int] = None
    death_vertex: Optional[int] = None
    essential: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("birth", "death", mode="before")
    @classmethod
    def parse_infinity(cls, v):
        return _parse_extended_float(v)

    @model_validator(mode="after")
    def check_interval(self):
        if math.isnan(self.birth) or math.isnan(self.death) or not math.isfinite(self.birth):
            raise ValueError("Birth must be finite and death must be a number")
        if self.death < self.birth:
            raise ValueError(f"Death {self.death} precedes birth {self.birth}")
        if self.essential != math.isinf(self.death):
            raise ValueError("A point is essential exactly when it never dies")
        return self

    @field_serializer("death")
    def serialize_death(self, death: float):
        return "inf" if math.isinf(death) else death

    @property
    def persistence(self) -> float:
        return self.death - self.birth


class PersistenceDiagram(BaseModel):
    # the diagonal element is implicit
    points: Tuple[DiagramPoint, ...] = ()

    model_config = ConfigDict(frozen=True)

    def finite(self) -> List[DiagramPoint]:
        return [p for p in self.points if not p.essential]

    def essentials(self) -> List[DiagramPoint]:
        return [p for p in self.points if p.essential]

    def __len__(self) -> int:
        return len(self.points)


class Matching(BaseModel):
    # None stands for the diagonal element
    pairs: Tuple[Tuple[Optional[DiagramPoint], Optional[DiagramPoint]], ...] = ()
    cost: float = 0.0

    @field_serializer("cost")
    def serialize_cost(self, cost: float):
        return "inf" if math.isinf(cost) else cost


class Triangulation(BaseModel):
    vertices: Tuple[Point, ...]
    triangles: Tuple[Tuple[int, int, int], ...]
    edges: Tuple[Tuple[int, int], ...]
    # ids of the source polygon's vertices, None for extra points such as a sector center
    vertex_ids: Tuple[Optional[int], ...]

    model_config = ConfigDict(frozen=True)

    def coords(self) -> np.ndarray:
        return points_array(self.vertices)

# -------------------------
# PHT SCHEMAS
# -------------------------
class DirectionPlan(BaseModel):
    critical: CriticalAngleSet
    # (start, end) with start < end; the last arc may end past 2π
    arcs: Tuple[Tuple[float, float], ...]
    samples: Tuple[Tuple[float, ...], ...]
    refinement: int = 0

    model_config = ConfigDict(frozen=True)

    def sample_angles(self) -> List[float]:
        return sorted(normalize_angle(t) for arc in self.samples for t in arc)

    def all_angles(self) -> List[float]:
        return sorted(set(self.sample_angles()) | set(self.critical.values()))

    def min_arc_length(self) -> float:
        return min(end - start for start, end in self.arcs)


class PHTEntry(BaseModel):
    angle: float
    diagram: PersistenceDiagram


class PHTSample(BaseModel):
    entries: Tuple[PHTEntry, ...]
    lipschitz_K: float

    def angles(self) -> List[float]:
        return [e.angle for e in self.entries]

    def diagram_at(self, angle: float, tol: float = 1e-12) -> Optional[PersistenceDiagram]:
        for entry in self.entries:
            if abs(entry.angle - angle) <= tol:
                return entry.diagram
        return None


class DecompositionRecord(BaseModel):
    angle: float
    reduced_shape: PersistenceDiagram
    sector_union: PersistenceDiagram
    gap: float

    @field_serializer("gap")
    def serialize_gap(self, gap: float):
        return "inf" if math.isinf(gap) else gap


class DecompositionReport(BaseModel):
    center: Point
    tol: float
    records: List[DecompositionRecord]
    verdict: bool
    max_gap: float
    scope: str = "critical angles and arc samples of the direction plan"

    @field_serializer("max_gap")
    def serialize_max_gap(self, gap: float):
        return "inf" if math.isinf(gap) else gap


class SimplicityWitness(BaseModel):
    angle: float
    point: DiagramPoint


class SimplicityResult(BaseModel):
    simple: bool
    stage: str
    witness: Optional[SimplicityWitness] = None


class StabilityPair(BaseModel):
    angle_a: float
    angle_b: float
    gap: float
    bound: float


class StabilityReport(BaseModel):
    pairs: int
    lipschitz_K: float
    worst_ratio: float
    violations: List[StabilityPair] = []

    @property
    def ok(self) -> bool:
        return not self.violations

# -------------------------
# MONODROMY SCHEMAS
# -------------------------
class LabeledDiagram(BaseModel):
    angle: float
    arc_index: int
    diagram: PersistenceDiagram


class SectionSegment(BaseModel):
    arc: Tuple[float, float]
    birth_vertex: int
    death_vertex: Optional[int] = None
    birth_point: Point
    death_point: Optional[Point] = None

    @property
    def essential(self) -> bool:
        return self.death_vertex is None

    def contains(self, theta: float) -> bool:
        start, end = self.arc
        return start <= theta <= end or start <= theta + TWO_PI <= end

    def value(self, theta: float) -> Tuple[float, float]:
        c, s = math.cos(theta), math.sin(theta)
        birth = c * self.birth_point.x + s * self.birth_point.y
        if self.death_point is None:
            return birth, math.inf
        return birth, c * self.death_point.x + s * self.death_point.y


class Section(BaseModel):
    section_id: int
    essential: bool = False
    full_circle: bool = False
    support: Tuple[float, float]
    wraps: bool = False
    segments: List[SectionSegment]

    def segment_at(self, theta: float) -> Optional[SectionSegment]:
        theta = normalize_angle(theta)
        for segment in self.segments:
            if segment.contains(theta):
                return segment
        return None

    def evaluate(self, theta: float) -> Optional[Tuple[float, float]]:
        """(birth, death) at theta, or None where the section sits on the diagonal"""
        segment = self.segment_at(theta)
        if segment is None:
            return None
        return segment.value(theta)

    def labels(self) -> List[Tuple[int, Optional[int]]]:
        return [(s.birth_vertex, s.death_vertex) for s in self.segments]


class WitnessLoop(BaseModel):
    angle: float
    start: Tuple[float, float]
    end: Tuple[float, float]
    start_labels: Tuple[int, Optional[int]]
    end_labels: Tuple[int, Optional[int]]
    reason: str


class MonodromyVerdict(BaseModel):
    trivial: bool
    sections: List[Section]
    witness_loop: Optional[WitnessLoop] = None
    covering_ok: bool = True
    return_map_ok: bool = True

# -------------------------
# CLI SCHEMAS
# -------------------------
class GeneratorKind(str, Enum):
    REGULAR_NGON = "regular_ngon"
    RANDOM_STAR = "random_star"
    SPIRAL = "spiral"
    CONVEX = "convex"
    NAMED = "named"


class CorpusSpec(BaseModel):
    kind: GeneratorKind
    n: Optional[int] = None
    k: Optional[int] = None
    seed: int = 0
    turns: Optional[float] = None
    growth: Optional[float] = None
    name: Optional[str] = None

    @field_validator("kind", mode="before")
    @classmethod
    def normalize_kind(cls, v):
        if isinstance(v, GeneratorKind):
            return v
        v_str = str(v).strip().lower()
        for kind in GeneratorKind:
            if v_str == kind.value:
                return kind
        raise ValueError(f"Invalid generator '{v}'. Allowed values: {[k.value for k in GeneratorKind]}")


class ShapeFile(BaseModel):
    path: str
    polygon: Polygon
    center: Optional[Point] = None


class CheckReport(BaseModel):
    star_shaped: bool
    kernel: KernelPolygon
    center: Optional[Point] = None
    general_position: bool
    general_position_witness: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None
    simple: bool
    simple_stage: str
    simple_witness: Optional[SimplicityWitness] = None


class PolygonRecord(BaseModel):
    vertices: List[Tuple[float, float]]
    center: Optional[Tuple[float, float]] = None

    @field_validator("vertices")
    @classmethod
    def vertices_present(cls, v):
        if len(v) == 0:
            raise ValueError("vertices must not be empty")
        return v
