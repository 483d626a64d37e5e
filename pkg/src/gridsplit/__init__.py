"""Table structure recovery: split separators, merge cells, score grids."""

__version__ = "0.1.0"

from .annotation import TableAnnotation, parse_annotation, serialize_annotation
from .config import PipelineConfig, parse_overrides
from .errors import GridSplitError
from .merger import Cell, CellSet
from .splitter import GridStructure

__all__ = [
    "Cell",
    "CellSet",
    "GridSplitError",
    "GridStructure",
    "PipelineConfig",
    "TableAnnotation",
    "__version__",
    "parse_annotation",
    "parse_overrides",
    "serialize_annotation",
]
