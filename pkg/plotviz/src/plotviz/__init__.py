"""Figure rendering for the benchmark CSV contract."""

from .csvdata import DataError, Table, read_table
from .figures import FIGURE_KINDS, PlotSpec, render

__version__ = "0.1.0"

__all__ = ["DataError", "Table", "read_table", "PlotSpec", "render",
           "FIGURE_KINDS", "__version__"]
