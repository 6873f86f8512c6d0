import logging

from phtlab.core.errors import PHTError
from phtlab.core.file_io import FileService
from phtlab.routes.common import fail, load_shape, succeed
from phtlab.services.export import ExportService
from phtlab.services.monodromy import MonodromyService
from phtlab.services.pht import PHTService

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("monodromy", parents=parents, help="Extract sections and decide monodromy")
    parser.add_argument("shape", help="Polygon JSON file")
    parser.add_argument("--out", help="Vines CSV output")
    parser.add_argument("--verdict", help="Verdict JSON output")
    parser.set_defaults(func=cmd_monodromy)


def cmd_monodromy(args) -> int:
    try:
        for path in (args.out, args.verdict):
            if path:
                FileService.check_writable(path)
        shape = load_shape(args)
        plan = PHTService.plan_directions(shape.polygon, args.refine)
        verdict, _ = MonodromyService.monodromy(shape.polygon, plan, args.tol, args.jobs)
        if args.out:
            ExportService.write_vines(args.out, verdict.sections, plan.sample_angles())
        if args.verdict:
            ExportService.write_verdict(args.verdict, verdict)
    except PHTError as e:
        return fail(e, "Error deciding monodromy")

    data = {
        "trivial": verdict.trivial,
        "sections": len(verdict.sections),
        "covering_ok": verdict.covering_ok,
        "return_map_ok": verdict.return_map_ok,
        "witness_loop": verdict.witness_loop.model_dump(mode="json") if verdict.witness_loop else None,
    }
    message = "Monodromy is trivial" if verdict.trivial else "Monodromy is non-trivial"
    return succeed(data, message)
