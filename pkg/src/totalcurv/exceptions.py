"""Exception types raised across the package."""


class TotalCurvError(Exception):
    """Base class for all package errors."""


class DegenerateTriangle(TotalCurvError):
    pass


class SizeMismatch(TotalCurvError, ValueError):
    pass


class EmptyInput(TotalCurvError, ValueError):
    pass


class IsolatedVertex(TotalCurvError):
    """Raised when a vertex has no incident face and no normal can be formed."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"{len(self.indices)} isolated vertices: {self.indices[:10]}")


class EmptyCloud(TotalCurvError, ValueError):
    pass


class TooFewNeighbors(TotalCurvError, ValueError):
    pass


class DisconnectedGraph(TotalCurvError, UserWarning):
    """Issued as a warning; each component is still oriented on its own."""

    def __init__(self, n_components):
        self.n_components = n_components
        super().__init__(f"kNN graph has {n_components} connected components")


class CollinearInput(TotalCurvError):
    pass


class TooFewPoints(TotalCurvError, ValueError):
    pass


class IsolatedCenter(TotalCurvError):
    pass


class InvalidRadii(TotalCurvError, ValueError):
    pass


class SelfIntersectingTube(TotalCurvError, ValueError):
    pass


class MissingUV(TotalCurvError, ValueError):
    pass


class UnreachableTarget(TotalCurvError):
    pass


class TargetUnreachable(TotalCurvError, UserWarning):
    """No valid collapse remains while the face count is still above target."""


class EmptyMesh(TotalCurvError, ValueError):
    pass


class ParseError(TotalCurvError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
