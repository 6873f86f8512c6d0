import logging

from pydantic import ValidationError

from phtlab.core.errors import EXIT_INPUT, PHTError
from phtlab.core.file_io import FileService
from phtlab.routes.common import fail, respond, succeed
from phtlab.schemas.schemas import CorpusSpec, GeneratorKind
from phtlab.services.corpus import CorpusService

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("generate", parents=parents, help="Write a corpus shape")
    parser.add_argument("kind", help=f"One of {[k.value for k in GeneratorKind]}")
    parser.add_argument("--n", type=int, help="Vertex count of a regular polygon")
    parser.add_argument("--k", type=int, help="Vertex count of random, convex and spiral shapes")
    parser.add_argument("--turns", type=float)
    parser.add_argument("--growth", type=float)
    parser.add_argument("--name", help="Bundled shape name")
    parser.add_argument("--out", help="Polygon JSON output")
    parser.set_defaults(func=cmd_generate)


def cmd_generate(args) -> int:
    try:
        spec = CorpusSpec(
            kind=args.kind, n=args.n, k=args.k, seed=args.seed, turns=args.turns, growth=args.growth, name=args.name
        )
    except ValidationError as e:
        respond(False, error=str(e), message="Invalid generator spec")
        return EXIT_INPUT

    try:
        if args.out:
            FileService.check_writable(args.out)
        polygon = CorpusService.generate(spec)
        center = CorpusService.named_center(spec.name) if spec.kind == GeneratorKind.NAMED else None
        record = FileService.shape_record(polygon.vertices, center)
        if args.out:
            FileService.write_json(args.out, record)
    except PHTError as e:
        return fail(e, "Error generating shape")

    logger.info("Generated %s with %d vertices", spec.kind.value, polygon.k)
    return succeed(record if not args.out else {"out": args.out, "vertices": polygon.k}, "Shape generated successfully")
