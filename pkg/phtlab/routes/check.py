import logging

from phtlab.core.errors import EXIT_OK, EXIT_PREDICATE, PHTError
from phtlab.routes.common import fail, load_shape, respond
from phtlab.schemas.schemas import CheckReport
from phtlab.services.geometry import GeometryService
from phtlab.services.pht import PHTService

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("check", parents=parents, help="Report star shape, general position and simplicity")
    parser.add_argument("shape", help="Polygon JSON file")
    parser.add_argument("--require-star", action="store_true")
    parser.add_argument("--require-general-position", action="store_true")
    parser.add_argument("--require-simple", action="store_true")
    parser.set_defaults(func=cmd_check)


def cmd_check(args) -> int:
    try:
        shape = load_shape(args)
        polygon = shape.polygon
        kernel = GeometryService.kernel(polygon)
        star = not kernel.is_empty
        center = shape.center
        if center is None and star:
            center = GeometryService.choose_center(kernel)

        position = GeometryService.is_general_position(polygon)
        plan = PHTService.plan_directions(polygon, args.refine)
        simple = PHTService.is_simple_dgm0(polygon, plan, args.tol)
        report = CheckReport(
            star_shaped=star,
            kernel=kernel,
            center=center,
            general_position=position.general_position,
            general_position_witness=position.witness,
            simple=simple.simple,
            simple_stage=simple.stage,
            simple_witness=simple.witness,
        )
    except PHTError as e:
        return fail(e, "Error checking shape")

    failures = []
    if args.require_star and not report.star_shaped:
        failures.append("not star-shaped")
    if args.require_general_position and not report.general_position:
        failures.append("not in general position")
    if args.require_simple and not report.simple:
        failures.append("diagram bundle not simple")

    data = report.model_dump(mode="json")
    if failures:
        respond(False, data=data, error=", ".join(failures), message="Required predicates failed")
        return EXIT_PREDICATE
    respond(True, data=data, message="Shape checked successfully")
    return EXIT_OK
