import csv
import json
import logging
import math
import os
from typing import Any, Iterable, Optional, Sequence

from pydantic import ValidationError

from phtlab.core.errors import CenterNotInKernel, OutputError, ShapeFileError
from phtlab.schemas.schemas import Point, PolygonRecord, ShapeFile
from phtlab.services.geometry import GeometryService

logger = logging.getLogger(__name__)


def _field_errors(e: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in e.errors())


class FileService:
    ALLOWED_EXTENSIONS = {".json"}

    @staticmethod
    def read_shape(path: str) -> ShapeFile:
        """
        Parse a polygon file, validate the polygon and check a declared center
        """
        extension = os.path.splitext(path)[1].lower()
        if extension not in FileService.ALLOWED_EXTENSIONS:
            logger.debug("Reading shape file with unexpected extension %s", extension)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        except FileNotFoundError:
            raise ShapeFileError(f"{path}: file not found")
        except OSError as e:
            raise ShapeFileError(f"{path}: {e.strerror}")
        except json.JSONDecodeError as e:
            raise ShapeFileError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}")

        try:
            record = PolygonRecord.model_validate(raw)
        except ValidationError as e:
            raise ShapeFileError(f"{path}: {_field_errors(e)}")
        for index, (x, y) in enumerate(record.vertices):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ShapeFileError(f"{path}: vertices.{index}: coordinates must be finite")

        polygon = GeometryService.validate_polygon(record.vertices)
        center = None
        if record.center is not None:
            center = Point.of(record.center)
            if not GeometryService.in_kernel(polygon, center):
                raise CenterNotInKernel(f"{path}: declared center ({center.x}, {center.y}) does not see the whole shape")
        return ShapeFile(path=path, polygon=polygon, center=center)

    @staticmethod
    def shape_record(vertices: Iterable[Point], center: Optional[Point] = None) -> dict:
        record: dict = {"vertices": [[p.x, p.y] for p in vertices]}
        if center is not None:
            record["center"] = [center.x, center.y]
        return record

    @staticmethod
    def check_writable(path: str) -> None:
        """Output directories are never created"""
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory):
            raise OutputError(f"Output directory does not exist: {directory}")

    @staticmethod
    def write_json(path: str, payload: Any) -> str:
        FileService.check_writable(path)
        try:
            with open(path, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, indent=2)
                handle.write("\n")
        except OSError as e:
            raise OutputError(f"Could not write {path}: {e.strerror}")
        logger.info("Wrote %s", path)
        return path

    @staticmethod
    def write_csv(path: str, columns: Sequence[str], rows: Iterable[dict]) -> str:
        FileService.check_writable(path)
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                writer = csv.DictWriter(handle, fieldnames=list(columns))
                writer.writeheader()
                for row in rows:
                    writer.writerow({key: FileService._cell(value) for key, value in row.items()})
        except OSError as e:
            raise OutputError(f"Could not write {path}: {e.strerror}")
        logger.info("Wrote %s", path)
        return path

    @staticmethod
    def _cell(value: Any) -> Any:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return "inf" if math.isinf(value) else repr(value)
        return value
