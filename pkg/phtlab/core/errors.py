from typing import Any, Optional

# Exit codes shared by every command
EXIT_OK = 0
EXIT_PREDICATE = 1
EXIT_INPUT = 2


class PHTError(Exception):
    """Base error carrying a CLI exit code and a human readable detail"""

    status_code: int = EXIT_INPUT

    def __init__(self, detail: str, status_code: Optional[int] = None, witness: Any = None):
        super().__init__(detail)
        self.detail = detail
        if status_code is not None:
            self.status_code = status_code
        self.witness = witness


# -------------------------
# GEOMETRY
# -------------------------
class TooFewVertices(PHTError):
    pass

class NonFiniteCoordinates(PHTError):
    pass

class SelfIntersecting(PHTError):
    pass

class DegenerateArea(PHTError):
    pass

class EmptyKernel(PHTError):
    pass

class CenterNotInKernel(PHTError):
    pass

class NotACenter(PHTError):
    pass

class DegenerateSector(PHTError):
    pass

# -------------------------
# PERSISTENCE
# -------------------------
class TriangulationFailed(PHTError):
    pass

class NoEssentialClass(PHTError):
    pass

# -------------------------
# MONODROMY
# -------------------------
class NotSimple(PHTError):
    status_code = EXIT_PREDICATE

class AmbiguousStitch(PHTError):
    status_code = EXIT_PREDICATE

# -------------------------
# CLI / IO
# -------------------------
class ShapeFileError(PHTError):
    pass

class OutputError(PHTError):
    pass

class GenerationFailed(PHTError):
    pass
