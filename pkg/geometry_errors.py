# geometry_errors.py

from typing import Any, Optional


class GeometryError(Exception):
    """Base class for every failure raised by the geometry library."""
    exit_code = 1


class MeshParseError(GeometryError):
    """Malformed OBJ, CSV, JSON or INI input."""
    exit_code = 2


class MeshValidationError(GeometryError):
    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Any] = None):
        super().__init__(message)
        self.diagnostics = diagnostics


class PreconditionError(GeometryError):
    """An operation was called outside its preconditions."""
    exit_code = 4


class ResourceError(PreconditionError):
    pass


class InvalidGeometryError(PreconditionError):
    pass


class InvalidProfileError(PreconditionError):
    pass


class ParametrizationError(InvalidProfileError):
    pass


class DegenerateGeometryError(PreconditionError):
    pass


class OrientationError(PreconditionError):
    pass


class InversionCenterError(PreconditionError):
    pass


class PoleError(PreconditionError):
    pass


class UnreachableTargetError(PreconditionError):
    pass


class RayBlockedError(PreconditionError):
    pass


class SpheresIntersectError(PreconditionError):
    pass


class HandleOverlapError(PreconditionError):
    pass


class PoleClearanceError(PreconditionError):
    pass


class PatchError(PreconditionError):
    pass


class TargetUnreachedError(PreconditionError):
    pass


class IllConditionedError(PreconditionError):
    pass


class ParameterError(PreconditionError):
    pass


class SphereDegenerateError(PreconditionError):
    """The constraint gradient vanishes, which only happens on round spheres."""
    pass


class ConstructionError(PreconditionError):
    pass


class NonConvergenceError(GeometryError):
    """The flow stopped without converging; the partial trace is attached."""
    exit_code = 5

    def __init__(self, message: str, trace: Optional[Any] = None, mesh: Optional[Any] = None):
        super().__init__(message)
        self.trace = trace
        self.mesh = mesh


class StagnationError(NonConvergenceError):
    pass


class QualityError(NonConvergenceError):
    pass
