"""Exception types shared across the package."""


class GridSplitError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(GridSplitError):
    """Tensor rank/dimension mismatch."""


class FormatError(GridSplitError):
    """Malformed binary tensor file."""


class AnnotationError(GridSplitError):
    """Schema or consistency violation in an annotation document.

    Carries the JSON path of the offending element when known.
    """

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DegenerateSeparatorError(GridSplitError):
    """A separator band collapsed to non-positive width."""

    def __init__(self, axis, boundary):
        self.axis = axis
        self.boundary = boundary
        super().__init__(f"{axis} boundary {boundary}: separator band has no width at 1/4 scale")


class LabelCollisionError(GridSplitError):
    """Two separator instances project onto the same start index."""


class TopologyError(GridSplitError):
    """Detected separator lines cross or are otherwise unusable as a grid."""


class GenerationError(GridSplitError):
    """Synthetic table spec is geometrically infeasible."""


class ConfigError(GridSplitError):
    """Bad configuration file or option value."""
