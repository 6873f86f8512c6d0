import argparse
import sys
from typing import List, Optional

from phtlab.core.config import settings
from phtlab.core.log_config import configure_logging
from phtlab.routes import check, decompose, generate, monodromy, pht

COMMANDS = (check, pht, decompose, monodromy, generate)


def build_parser() -> argparse.ArgumentParser:
    # Shared flags, accepted after any command
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=settings.TOL, help="Diagram comparison tolerance")
    common.add_argument("--refine", type=int, default=settings.REFINE, help="Extra samples per arc")
    common.add_argument("--seed", type=int, default=0, help="Generator seed")
    common.add_argument("--jobs", type=int, default=settings.JOBS, help="Parallel per-angle workers")
    common.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level")

    parser = argparse.ArgumentParser(
        prog="phtlab",
        description="Degree-0 persistent homology transform of planar polygons",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers, [common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.refine < 0:
        parser.error("--refine must be non-negative")
    configure_logging(args.log_level)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
