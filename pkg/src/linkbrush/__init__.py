"""linkbrush: a reactive linked-views plotting engine.

Data lives in observable tables (:func:`augment` appends the ``.brushed`` and
``.color`` interaction columns); plot models subscribe to the columns they
bind and to their own reactive metadata; links forward brush changes across
tables. Everything downstream of an assignment happens through listeners, so
brushing, transforming or re-scaling one view updates every dependent view
automatically.
"""

from .binning import bin_membership, compute_breaks
from .interaction import (Brush, BrushState, InputEvent, PlotController,
                          api_get, api_set, handle_cue_drag,
                          handle_drag_select, handle_pan, handle_wheel_zoom)
from .links import (LinkEngine, LinkSpec, resolve_categorical, resolve_knn,
                    transfer_categorical)
from .meta import Limits, MetaObject, new_meta
from .plots import (BarPlot, HistogramPlot, PlotModel, ScatterPlot, SceneDiff,
                    bar_chart, histogram, hit_test_rect, mark_dirty,
                    normalize_rect, query_payload, scatter_plot)
from .session import Session
from .table import (ALL_ROWS, ChangeNotice, Column, ReactiveTable, augment)

__version__ = "0.1.0"

__all__ = [
    "ALL_ROWS", "augment", "api_get", "api_set", "bar_chart", "bin_membership",
    "Brush", "BrushState", "ChangeNotice", "Column", "compute_breaks",
    "handle_cue_drag", "handle_drag_select", "handle_pan", "handle_wheel_zoom",
    "histogram", "hit_test_rect", "InputEvent", "Limits", "LinkEngine",
    "LinkSpec", "mark_dirty", "MetaObject", "new_meta", "normalize_rect",
    "PlotController", "PlotModel", "BarPlot", "HistogramPlot", "ScatterPlot",
    "query_payload", "ReactiveTable", "resolve_categorical", "resolve_knn",
    "scatter_plot", "SceneDiff", "Session", "transfer_categorical",
]
