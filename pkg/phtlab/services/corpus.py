import logging
import math
from typing import Dict, List, Optional

import numpy as np

from phtlab.core.config import settings
from phtlab.core.errors import GenerationFailed, PHTError
from phtlab.schemas.schemas import CorpusSpec, GeneratorKind, Point, Polygon, TWO_PI
from phtlab.services.geometry import GeometryService, bbox_scale

logger = logging.getLogger(__name__)

# -------------------------
# BUNDLED SHAPES
# -------------------------
SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
ARROWHEAD = [(0.0, 0.0), (4.0, 0.0), (4.0, 3.0), (2.0, 1.0), (0.0, 3.0)]
PERTURBED_ARROWHEAD = [(0.0, 0.0), (4.0, 0.0), (4.1, 3.2), (2.0, 1.1), (-0.1, 2.9)]
# three equal prongs; the two outer classes coincide for the downward direction
CROWN = [(0.0, 0.0), (6.0, 0.0), (6.0, 3.0), (4.5, 2.0), (3.0, 3.0), (1.5, 2.0), (0.0, 3.0)]
CROWN_CENTER = (3.0, 0.5)
ARROWHEAD_CENTER = (2.0, 0.5)

STAR_TIP_RADII = (1.0, 0.93, 1.07, 0.96, 1.04)
STAR_NOTCH_RADII = (0.42, 0.38, 0.45, 0.40, 0.37)
STAR_TIP_JITTER = (0.0, 3.0, -2.0, 4.0, -3.0)
STAR_NOTCH_JITTER = (1.0, -2.0, 2.0, -1.0, 3.0)

SPIRAL_WIDTH = 0.25


def _five_star() -> List[tuple]:
    coords = []
    for j in range(5):
        tip = math.radians(90.0 + 72.0 * j + STAR_TIP_JITTER[j])
        notch = math.radians(126.0 + 72.0 * j + STAR_NOTCH_JITTER[j])
        coords.append((STAR_TIP_RADII[j] * math.cos(tip), STAR_TIP_RADII[j] * math.sin(tip)))
        coords.append((STAR_NOTCH_RADII[j] * math.cos(notch), STAR_NOTCH_RADII[j] * math.sin(notch)))
    return coords


class CorpusService:

    @staticmethod
    def regular_ngon(n: int, radius: float = 1.0) -> Polygon:
        if n < 3:
            raise GenerationFailed(f"A regular polygon needs n >= 3, got {n}")
        angles = TWO_PI * np.arange(n) / n
        return GeometryService.validate_polygon(np.column_stack([radius * np.cos(angles), radius * np.sin(angles)]))

    @staticmethod
    def random_star(k: int, seed: int = 0, r_min: float = 0.4, r_max: float = 1.0) -> Polygon:
        """
        Radial polygon around the origin: sorted random angles with no gap
        of pi or more, radii drawn from [r_min, r_max]. Rejected samples are
        redrawn up to the resample cap.
        """
        if k < 3:
            raise GenerationFailed(f"A star polygon needs k >= 3, got {k}")
        rng = np.random.default_rng(seed)
        for attempt in range(settings.GENERATOR_RESAMPLE_CAP):
            angles = np.sort(rng.uniform(0.0, TWO_PI, k))
            radii = rng.uniform(r_min, r_max, k)
            gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
            if gaps.max() >= math.pi:
                continue
            coords = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
            try:
                polygon = GeometryService.validate_polygon(coords)
            except PHTError as e:
                logger.debug("Rejected star sample %d: %s", attempt, e.detail)
                continue
            kernel = GeometryService.kernel(polygon)
            if polygon.k != k or kernel.area <= 1e-6 * bbox_scale(coords) ** 2:
                logger.debug("Rejected star sample %d: kernel area %.3g", attempt, kernel.area)
                continue
            return polygon
        logger.warning("random_star k=%d seed=%d exhausted %d samples", k, seed, settings.GENERATOR_RESAMPLE_CAP)
        raise GenerationFailed(f"No star-shaped sample after {settings.GENERATOR_RESAMPLE_CAP} attempts")

    @staticmethod
    def convex(k: int, seed: int = 0) -> Polygon:
        """Random points on an ellipse"""
        if k < 3:
            raise GenerationFailed(f"A convex polygon needs k >= 3, got {k}")
        rng = np.random.default_rng(seed)
        for _ in range(settings.GENERATOR_RESAMPLE_CAP):
            angles = np.sort(rng.uniform(0.0, TWO_PI, k))
            a, b = 1.0, rng.uniform(0.5, 1.0)
            try:
                polygon = GeometryService.validate_polygon(np.column_stack([a * np.cos(angles), b * np.sin(angles)]))
            except PHTError:
                continue
            if polygon.k == k:
                return polygon
        raise GenerationFailed(f"No convex sample after {settings.GENERATOR_RESAMPLE_CAP} attempts")

    @staticmethod
    def spiral(turns: float = 1.5, k: int = 12, growth: float = 0.45, width: float = SPIRAL_WIDTH) -> Polygon:
        """
        Band around the logarithmic spiral r = exp(growth * phi): the outer
        side in order, then the inner side reversed, k/2 points per side.
        """
        if k < 6 or k % 2:
            raise GenerationFailed(f"A spiral needs an even k >= 6, got {k}")
        n = k // 2
        phi = np.linspace(0.0, TWO_PI * turns, n)
        r = np.exp(growth * phi)
        direction = np.column_stack([np.cos(phi), np.sin(phi)])
        outer = (r * (1.0 + width))[:, None] * direction
        inner = (r * (1.0 - width))[:, None] * direction
        try:
            return GeometryService.validate_polygon(np.vstack([outer, inner[::-1]]))
        except PHTError as e:
            raise GenerationFailed(f"Spiral with turns={turns}, k={k} is not simple: {e.detail}")

    @staticmethod
    def named(name: str) -> Polygon:
        shapes: Dict[str, object] = {
            "square": lambda: GeometryService.validate_polygon(SQUARE),
            "arrowhead": lambda: GeometryService.validate_polygon(ARROWHEAD),
            "perturbed_arrowhead": lambda: GeometryService.validate_polygon(PERTURBED_ARROWHEAD),
            "crown": lambda: GeometryService.validate_polygon(CROWN),
            "five_star": lambda: GeometryService.validate_polygon(_five_star()),
            "spiral": lambda: CorpusService.spiral(turns=2.5, k=42, growth=0.22),
            "pentagon": lambda: CorpusService.regular_ngon(5),
        }
        if name not in shapes:
            raise GenerationFailed(f"Unknown shape '{name}'. Available: {sorted(shapes)}")
        return shapes[name]()

    @staticmethod
    def named_center(name: str) -> Optional[Point]:
        centers = {"arrowhead": ARROWHEAD_CENTER, "crown": CROWN_CENTER}
        return Point.of(centers[name]) if name in centers else None

    @staticmethod
    def generate(spec: CorpusSpec) -> Polygon:
        if spec.kind == GeneratorKind.REGULAR_NGON:
            return CorpusService.regular_ngon(spec.n or 6)
        if spec.kind == GeneratorKind.RANDOM_STAR:
            return CorpusService.random_star(spec.k or 12, spec.seed)
        if spec.kind == GeneratorKind.CONVEX:
            return CorpusService.convex(spec.k or 8, spec.seed)
        if spec.kind == GeneratorKind.SPIRAL:
            return CorpusService.spiral(
                turns=spec.turns if spec.turns is not None else 1.5,
                k=spec.k or 12,
                growth=spec.growth if spec.growth is not None else 0.45,
            )
        if not spec.name:
            raise GenerationFailed("Named generator needs a shape name")
        return CorpusService.named(spec.name)

    @staticmethod
    def star_corpus(count: int, seed: int = 0, k_min: int = 8, k_max: int = 24) -> List[Polygon]:
        """Seeded random star-shaped polygons with k_min..k_max vertices"""
        span = k_max - k_min + 1
        return [CorpusService.random_star(k_min + (seed + i) % span, seed + i) for i in range(count)]

    @staticmethod
    def convex_corpus(count: int, seed: int = 0, k_min: int = 5, k_max: int = 12) -> List[Polygon]:
        span = k_max - k_min + 1
        return [CorpusService.convex(k_min + (seed + i) % span, seed + i) for i in range(count)]
