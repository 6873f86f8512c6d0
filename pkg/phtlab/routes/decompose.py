import logging

from phtlab.core.errors import EXIT_PREDICATE, PHTError
from phtlab.core.file_io import FileService
from phtlab.routes.common import fail, load_shape, resolve_center, respond, succeed
from phtlab.services.export import ExportService
from phtlab.services.pht import PHTService

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("decompose", parents=parents, help="Compare the shape with the union of its sectors")
    parser.add_argument("shape", help="Polygon JSON file")
    parser.add_argument("--out", help="Decomposition report JSON output")
    parser.set_defaults(func=cmd_decompose)


def cmd_decompose(args) -> int:
    try:
        if args.out:
            FileService.check_writable(args.out)
        shape = load_shape(args)
        center = resolve_center(shape)
        plan = PHTService.plan_directions(shape.polygon, args.refine)
        report = PHTService.decompose_check(shape.polygon, center, plan, args.tol, args.jobs)
        if args.out:
            ExportService.write_decomposition(args.out, report)
    except PHTError as e:
        return fail(e, "Error checking decomposition")

    data = report.model_dump(mode="json", exclude={"records"} if args.out else None)
    if not report.verdict:
        # sectoriality always holds in the plane
        respond(
            False,
            data=data,
            error=f"Max gap {report.max_gap!r} exceeds tolerance {report.tol!r}",
            message="Decomposition failed; this indicates a defect in the implementation",
        )
        return EXIT_PREDICATE
    return succeed(data, "Decomposition verified ✅")
