import logging
from typing import Any, Optional

from phtlab.core.errors import EXIT_OK, PHTError
from phtlab.core.file_io import FileService
from phtlab.schemas.schemas import Point, ShapeFile, StandardResponse
from phtlab.services.geometry import GeometryService

logger = logging.getLogger(__name__)


def respond(status: bool, data: Any = None, message: Optional[str] = None, error: Optional[str] = None) -> None:
    """Print the response envelope on stdout"""
    print(StandardResponse[Any](status=status, data=data, error=error, message=message).model_dump_json(indent=2))


def succeed(data: Any, message: str) -> int:
    respond(True, data=data, message=message)
    return EXIT_OK


def fail(e: PHTError, message: str) -> int:
    logger.error("%s: %s", message, e.detail)
    data = e.witness.model_dump(mode="json") if hasattr(e.witness, "model_dump") else e.witness
    respond(False, data=data, error=e.detail, message=message)
    return e.status_code


def load_shape(args) -> ShapeFile:
    return FileService.read_shape(args.shape)


def resolve_center(shape: ShapeFile) -> Point:
    """Declared center, else the Chebyshev center of the kernel"""
    if shape.center is not None:
        return shape.center
    return GeometryService.choose_center(GeometryService.kernel(shape.polygon))
