"""Input handling: pointer, wheel and key events become data or meta writes.

The pattern throughout is one step of backtracking: a gesture is resolved
into row membership (or a meta value), written once, and the repaint falls
out of the listeners. Handlers never paint.

Combine modes other than replace resolve against the state captured at drag
start, so a drag's final effect depends only on its final rectangle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .meta import Limits
from .plots import HistogramPlot, PlotModel, normalize_rect
from .table import BRUSH_COL, ReactiveTable

COMBINE_MODES = ("replace", "union", "intersect", "toggle")
ZOOM_BASE = 1.25
MIN_SPAN_FRACTION = 1e-9
BINWIDTH_FLOOR_FRACTION = 1e-3

MODIFIER_COMBINE = {"shift": "union", "control": "intersect", "alt": "toggle"}

DEFAULT_BINDINGS = {
    "m": "mode-toggle",
    "c": "clear",
    "g": "color-cycle",
}

ACTIONS = ("mode-toggle", "clear", "color-cycle")

HIGHLIGHT_CYCLE = ("#ffff00ff", "#ff0000ff", "#00c864ff", "#00a0ffff")


@dataclass
class BrushState:
    """Current selection gesture of one plot.

    brushing keeps the rectangle on screen after release; selecting clears
    it. Either way the brushed rows persist in the data.
    """

    mode: str = "brushing"            # or "selecting"
    combine: str = "replace"
    rect: Optional[tuple] = None      # (x0, x1, y0, y1) data space
    active: bool = False


@dataclass
class InputEvent:
    """A protocol input event after pixel-to-data conversion."""

    kind: str                         # pointer-down/move/up, wheel, key, query
    pos: Optional[tuple[float, float]] = None
    wheel: float = 0.0
    key: Optional[str] = None
    modifiers: tuple[str, ...] = ()


def combine_rows(base: np.ndarray, rows: np.ndarray, mode: str) -> np.ndarray:
    """Row set resulting from combining a hit set with a base brush vector."""
    mask = np.zeros(len(base), dtype=bool)
    mask[rows] = True
    if mode == "replace":
        out = mask
    elif mode == "union":
        out = base | mask
    elif mode == "intersect":
        out = base & mask
    elif mode == "toggle":
        out = base ^ mask
    else:
        raise ValueError(f"unknown combine mode {mode!r}")
    return np.flatnonzero(out)


def resolve_brush(plot: PlotModel, rect, combine: str,
                  base: Optional[np.ndarray] = None) -> None:
    """Hit-test a rectangle and write ``.brushed`` once."""
    rows = plot.hit_test_rect(rect)
    if combine == "replace" and base is None:
        plot.table.set_brushed(rows, "replace")
        return
    if base is None:
        base = plot.table.column(BRUSH_COL).values.copy()
    plot.table.set_brushed(combine_rows(base, rows, combine), "replace")


def handle_drag_select(plot: PlotModel, state: BrushState, down_pos,
                       move_positions, up_pos=None) -> None:
    """Run a full drag: every move is one ``.brushed`` assignment."""
    brush = Brush(plot, state)
    brush.pointer_down(down_pos)
    for pos in move_positions:
        brush.pointer_move(pos)
    brush.pointer_up(up_pos if up_pos is not None else
                     (move_positions[-1] if move_positions else down_pos))


def _inside_rect(rect, pos) -> bool:
    x0, x1, y0, y1 = rect
    return x0 <= pos[0] <= x1 and y0 <= pos[1] <= y1


class Brush:
    """Drag state machine for one plot.

    In brushing mode the persistent rectangle can be grabbed by its interior
    and dragged; each move translates it and re-resolves. A pointer-down
    outside it starts a fresh rectangle.
    """

    def __init__(self, plot: PlotModel, state: Optional[BrushState] = None):
        self.plot = plot
        self.state = state or BrushState()
        self._base: Optional[np.ndarray] = None
        self._down: Optional[tuple] = None
        self._grab: Optional[tuple] = None  # (grab pos, rect at grab)

    def pointer_down(self, pos, combine: Optional[str] = None) -> None:
        if combine is not None:
            self.state.combine = combine
        self._down = tuple(pos)
        self.state.active = True
        self._base = (None if self.state.combine == "replace"
                      else self.plot.table.column(BRUSH_COL).values.copy())
        if (self.state.mode == "brushing" and self.state.rect is not None
                and _inside_rect(self.state.rect, pos)):
            self._grab = (tuple(pos), self.state.rect)
        else:
            self._grab = None
            self.state.rect = normalize_rect(pos, pos)
        resolve_brush(self.plot, self.state.rect, self.state.combine, self._base)

    def pointer_move(self, pos) -> None:
        if not self.state.active:
            return
        self.state.rect = self._rect_for(pos)
        resolve_brush(self.plot, self.state.rect, self.state.combine, self._base)

    def pointer_up(self, pos) -> None:
        if not self.state.active:
            return
        self.state.rect = self._rect_for(pos)
        resolve_brush(self.plot, self.state.rect, self.state.combine, self._base)
        self.state.active = False
        self._base = None
        self._grab = None
        if self.state.mode == "selecting":
            self.state.rect = None  # transient rectangle; data keeps the rows

    def _rect_for(self, pos) -> tuple:
        if self._grab is not None:
            (gx, gy), (x0, x1, y0, y1) = self._grab
            dx, dy = pos[0] - gx, pos[1] - gy
            return (x0 + dx, x1 + dx, y0 + dy, y1 + dy)
        return normalize_rect(self._down, pos)

    def reresolve(self) -> None:
        """Re-run the active rectangle; used when data shifts mid-drag."""
        if self.state.active and self.state.rect is not None:
            resolve_brush(self.plot, self.state.rect, self.state.combine, self._base)


def handle_wheel_zoom(plot: PlotModel, center, delta: float) -> None:
    """Scale the limits about ``center`` by 1.25 per wheel step.

    Zoom is plot-local: only this plot's meta changes. Spans are floored at
    1e-9 of the data span; once pinned at the floor, further zoom-in fires no
    event.
    """
    if delta == 0:
        return
    limits: Limits = plot.meta.get("limits")
    span_x, span_y = plot.data_span()
    f = ZOOM_BASE ** (-delta)
    cx, cy = center

    def scale(lo, hi, c, floor):
        fx = f
        if (hi - lo) * f < floor:
            fx = floor / (hi - lo)
        return c - (c - lo) * fx, c + (hi - c) * fx

    x0, x1 = scale(limits.xmin, limits.xmax, cx, span_x * MIN_SPAN_FRACTION)
    y0, y1 = scale(limits.ymin, limits.ymax, cy, span_y * MIN_SPAN_FRACTION)
    if (x0, x1, y0, y1) == limits.as_tuple():
        return
    plot.meta.set("limits", Limits(x0, x1, y0, y1))


def handle_pan(plot: PlotModel, dx: float, dy: float) -> None:
    """Translate the limits opposite the drag vector; one assignment."""
    limits: Limits = plot.meta.get("limits")
    plot.meta.set("limits", Limits(
        limits.xmin - dx, limits.xmax - dx,
        limits.ymin - dy, limits.ymax - dy))


def handle_cue_drag(plot: HistogramPlot, cue: str, dx: float) -> None:
    """Horizontal cue displacement -> new breaks, one breaksChanged event.

    Anchor shifts additively (wrapped modulo the bin width by break
    canonicalization); bin width scales multiplicatively and is floored at
    1/1000 of the data span.
    """
    if not isinstance(plot, HistogramPlot):
        raise ValueError("cue drags only apply to histograms")
    anchor = float(plot.meta.get("anchor"))
    binwidth = float(plot.meta.get("binwidth"))
    lo, hi = plot._data_range()
    span = hi - lo if hi > lo else 1.0
    if cue == "anchor":
        anchor = anchor + dx
    elif cue == "binwidth":
        binwidth = binwidth * (2.0 ** (dx / span))
        binwidth = max(binwidth, span * BINWIDTH_FLOOR_FRACTION)
    else:
        raise ValueError(f"unknown cue {cue!r}")
    plot.set_breaks_from(anchor, binwidth)


class PlotController:
    """Routes one plot's raw input events to the right handler.

    Pointer-down decides the gesture: a histogram cue hit starts a cue drag,
    a "pan" modifier starts a pan, anything else starts a brush (combine mode
    from modifiers). Keys go through a binding table; unbound keys are
    ignored.
    """

    def __init__(self, plot: PlotModel, bindings: Optional[dict] = None):
        self.plot = plot
        self.brush = Brush(plot)
        self.bindings = dict(DEFAULT_BINDINGS if bindings is None else bindings)
        self._gesture: Optional[str] = None
        self._cue: Optional[str] = None
        self._last_pos: Optional[tuple] = None
        self._highlight_i = 0
        if plot.bound_columns:
            # streaming data under an active rectangle: re-resolve in place
            plot.table.add_listener(
                lambda notice: self.brush.reresolve(),
                watched=set(plot.bound_columns))

    def handle(self, event: InputEvent) -> None:
        kind = event.kind
        if kind == "pointer-down":
            self._pointer_down(event)
        elif kind == "pointer-move":
            self._pointer_move(event)
        elif kind == "pointer-up":
            self._pointer_up(event)
        elif kind == "wheel":
            handle_wheel_zoom(self.plot, event.pos, event.wheel)
        elif kind == "key":
            self.handle_key(event.key)
        elif kind == "query":
            pass  # resolved by the session, which owns the reply channel
        else:
            raise ValueError(f"unknown input event kind {kind!r}")

    def _pointer_down(self, event: InputEvent) -> None:
        pos = event.pos
        if isinstance(self.plot, HistogramPlot):
            for region in self.plot.cue_regions():
                if region.contains(pos):
                    self._gesture = "cue"
                    self._cue = region.cue
                    self._last_pos = pos
                    return
        if "pan" in event.modifiers:
            self._gesture = "pan"
            self._last_pos = pos
            return
        self._gesture = "brush"
        combine = "replace"
        for mod in event.modifiers:
            if mod in MODIFIER_COMBINE:
                combine = MODIFIER_COMBINE[mod]
                break
        self.brush.pointer_down(pos, combine=combine)

    def _pointer_move(self, event: InputEvent) -> None:
        pos = event.pos
        if self._gesture == "cue":
            handle_cue_drag(self.plot, self._cue, pos[0] - self._last_pos[0])
            self._last_pos = pos
        elif self._gesture == "pan":
            handle_pan(self.plot, pos[0] - self._last_pos[0], pos[1] - self._last_pos[1])
            self._last_pos = pos
        elif self._gesture == "brush":
            self.brush.pointer_move(pos)

    def _pointer_up(self, event: InputEvent) -> None:
        if self._gesture == "brush":
            self.brush.pointer_up(event.pos)
        self._gesture = None
        self._cue = None
        self._last_pos = None

    def handle_key(self, key: Optional[str]) -> None:
        if key is None:
            return
        action = self.bindings.get(key, key if key in ACTIONS else None)
        if action is None:
            return
        if action == "mode-toggle":
            state = self.brush.state
            state.mode = "selecting" if state.mode == "brushing" else "brushing"
        elif action == "clear":
            self.plot.table.set_brushed([], "replace")
        elif action == "color-cycle":
            self._highlight_i = (self._highlight_i + 1) % len(HIGHLIGHT_CYCLE)
            self.plot.meta.set("highlight", HIGHLIGHT_CYCLE[self._highlight_i])


def handle_key(controller: PlotController, key: str) -> None:
    controller.handle_key(key)


# -- functional access (indirect manipulation) ----------------------------


def api_set(target, path: str, value) -> None:
    """Write a column or meta field by name; propagation is identical to the
    direct operation.

    Tables accept a full column vector or ``{"rows": [...], "value": ...}``
    for partial writes. Plots address their meta fields.
    """
    if isinstance(target, ReactiveTable):
        if path not in target.columns:
            raise KeyError(f"table {target.id!r} has no column {path!r}")
        if isinstance(value, dict) and "rows" in value:
            target.set_cells(path, value["rows"], value["value"])
        else:
            target.set_column(path, value)
        return
    meta = target.meta if isinstance(target, PlotModel) else target
    meta.set(path, value)


def api_get(target, path: str):
    """Read a column (as a list, None marking missing cells) or meta field."""
    if isinstance(target, ReactiveTable):
        col = target.column(path)
        if col.kind == "categorical":
            return col.labels()
        if col.kind == "color":
            from .colors import unpack_array
            return unpack_array(col.values)
        values = col.values.tolist()
        if col.missing.any():
            return [None if m else v for v, m in zip(values, col.missing.tolist())]
        return values
    meta = target.meta if isinstance(target, PlotModel) else target
    return meta.get(path)
