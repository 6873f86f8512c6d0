import logging

from phtlab.core.errors import PHTError
from phtlab.core.file_io import FileService
from phtlab.routes.common import fail, load_shape, succeed
from phtlab.services.export import ExportService
from phtlab.services.geometry import GeometryService
from phtlab.services.monodromy import MonodromyService
from phtlab.services.pht import PHTService

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("pht", parents=parents, help="Diagrams at every planned direction")
    parser.add_argument("shape", help="Polygon JSON file")
    parser.add_argument("--out", help="PHT JSON output")
    parser.add_argument("--svg", help="SVG rendering of the shape and its diagrams")
    parser.set_defaults(func=cmd_pht)


def cmd_pht(args) -> int:
    try:
        for path in (args.out, args.svg):
            if path:
                FileService.check_writable(path)
        shape = load_shape(args)
        polygon = shape.polygon
        plan = PHTService.plan_directions(polygon, args.refine)
        sample = PHTService.pht(polygon, plan, center=shape.center, n_jobs=args.jobs)
        logger.info("Computed %d diagrams over %d arcs", len(sample.entries), len(plan.arcs))

        if args.out:
            ExportService.write_pht(args.out, sample)
        if args.svg:
            ExportService.write_svg(args.svg, polygon, sample, *_decorations(shape, plan, args))
    except PHTError as e:
        return fail(e, "Error computing PHT")

    data = {"angles": len(sample.entries), "lipschitz_K": sample.lipschitz_K, "out": args.out, "svg": args.svg}
    if not args.out:
        data["entries"] = ExportService.pht_records(sample)
    return succeed(data, "PHT computed successfully")


def _decorations(shape, plan, args):
    """Sections and sector outlines when the shape allows them"""
    polygon = shape.polygon
    sections, regions = None, None
    kernel = GeometryService.kernel(polygon)
    if not kernel.is_empty:
        center = shape.center or GeometryService.choose_center(kernel)
        hull = GeometryService.convex_hull(polygon)
        regions = [[q.as_tuple() for q in s.region] for s in GeometryService.sectors(polygon, center, hull)]
    try:
        sections = MonodromyService.build_sections(polygon, plan, args.tol, args.jobs)
    except PHTError as e:
        logger.warning("Drawing diagrams without sections: %s", e.detail)
    return sections, regions
