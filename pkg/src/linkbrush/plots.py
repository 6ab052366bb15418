"""View-side plot models: scatter, histogram, bar and spine.

A plot model binds table columns and meta fields to two layers, ``main`` and
``brush``. Listeners only flip layer dirty flags; geometry is recomputed
lazily when a scene is emitted, and emission clears the flags. Brushing a
million points therefore never touches the main layer: the brush layer alone
is recomputed and shipped.

All primitive coordinates are in data space; clients project through the
plot's current limits.
"""
from __future__ import annotations

import json
from typing import Optional

import numpy as np

from . import colors
from .binning import (bin_counts, bin_membership, bins_intersecting,
                      compute_breaks, default_anchor, default_binwidth)
from .meta import Limits, MetaObject
from .spatial import GridIndex
from .table import BRUSH_COL, COLOR_COL, ReactiveTable

LIMITS_MARGIN = 0.04
PICK_RADIUS_PX = 8.0
DEFAULT_VIEWPORT = (640.0, 480.0)
HIST_FILL = "#9aa7b8ff"
BAR_FILL = "#7c9dbfff"


def normalize_rect(p, q) -> tuple[float, float, float, float]:
    """Two corners -> (x0, x1, y0, y1) with mins first."""
    (xa, ya), (xb, yb) = p, q
    return (min(xa, xb), max(xa, xb), min(ya, yb), max(ya, yb))


def padded_limits(xmin, xmax, ymin, ymax, margin: float = LIMITS_MARGIN) -> Limits:
    def pad(lo, hi):
        span = hi - lo
        p = span * margin if span > 0 else 0.5
        return lo - p, hi + p

    x0, x1 = pad(float(xmin), float(xmax))
    y0, y1 = pad(float(ymin), float(ymax))
    return Limits(x0, x1, y0, y1)


class Layer:
    __slots__ = ("name", "z", "dirty")

    def __init__(self, name: str, z: int):
        self.name = name
        self.z = z
        self.dirty = True  # everything needs a first paint


class SceneDiff:
    """Changed layers of one plot with fully recomputed primitives.

    Immutable once emitted; numpy payloads are converted to JSON-able lists
    only when serialized, so emitting a diff stays cheap on the hot path.
    """

    def __init__(self, plot_id: str, kind: str, limits: Limits,
                 layers: dict, full: bool = False, cues: Optional[list] = None,
                 meta: Optional[dict] = None):
        self.plot_id = plot_id
        self.kind = kind
        self.limits = limits
        self.layers = layers
        self.full = full
        self.cues = cues or []
        self.meta = meta or {}

    def layer_names(self) -> list[str]:
        return list(self.layers)

    def is_empty(self) -> bool:
        return not self.layers

    def to_obj(self) -> dict:
        layers = {}
        for name, payload in self.layers.items():
            groups = []
            for group in payload["primitives"]:
                out = {}
                for key, value in group.items():
                    if isinstance(value, np.ndarray):
                        if key == "colors":
                            out[key] = colors.unpack_array(value)
                        else:
                            out[key] = value.tolist()
                    else:
                        out[key] = value
                groups.append(out)
            layers[name] = {"z": payload["z"], "primitives": groups}
        return {
            "plot": self.plot_id,
            "kind": self.kind,
            "limits": list(self.limits.as_tuple()),
            "layers": layers,
            "cues": self.cues,
            "meta": self.meta,
            "full": self.full,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True)


class PlotModel:
    """Base: layer bookkeeping, meta wiring, dirty tracking."""

    kind = "plot"
    bound_columns: tuple[str, ...] = ()

    def __init__(self, plot_id: str, table: ReactiveTable):
        self.id = plot_id
        self.table = table
        self.layers = {"main": Layer("main", 0), "brush": Layer("brush", 1)}
        self.meta = MetaObject(meta_id=f"{plot_id}.meta")
        self._table_lids: list[int] = []
        self._meta_lids: list[int] = []

    # -- dirty bookkeeping ----------------------------------------------

    def mark_dirty(self, layer_name: str) -> None:
        self.layers[layer_name].dirty = True

    def dirty_layers(self) -> list[str]:
        return [name for name, layer in self.layers.items() if layer.dirty]

    def _watch(self, columns, layer_names) -> None:
        names = tuple(layer_names)

        def on_change(_notice):
            for name in names:
                self.layers[name].dirty = True

        self._table_lids.append(self.table.add_listener(on_change, watched=columns))

    def _watch_limits(self) -> None:
        self._meta_lids.append(self.meta.on_changed(
            "limits", lambda old, new: [self.mark_dirty(n) for n in self.layers]))

    def close(self) -> None:
        for lid in self._table_lids:
            self.table.remove_listener(lid)
        self._table_lids.clear()
        for lid in self._meta_lids:
            self.meta.remove_listener(lid)
        self._meta_lids.clear()

    # -- scene emission ---------------------------------------------------

    def scene(self, full: bool = False) -> SceneDiff:
        """Diff of the dirty layers (or all layers when ``full``); clears flags."""
        names = list(self.layers) if full else self.dirty_layers()
        layers = {}
        for name in names:
            layer = self.layers[name]
            layers[name] = {"z": layer.z, "primitives": self._primitives(name)}
            layer.dirty = False
        return SceneDiff(self.id, self.kind, self.meta.get("limits"), layers,
                         full=full, cues=self._cue_payload(),
                         meta=self.meta.snapshot())

    def _primitives(self, layer_name: str) -> list:
        raise NotImplementedError

    def _cue_payload(self) -> list:
        return []

    def hit_test_rect(self, rect) -> np.ndarray:
        raise NotImplementedError

    def query(self, pos, radius=None) -> Optional[dict]:
        raise NotImplementedError

    def data_span(self) -> tuple[float, float]:
        """Extent of the data in each axis; floor for zoom clamping."""
        limits: Limits = self.meta.get("limits")
        return limits.xspan, limits.yspan

    # -- helpers ----------------------------------------------------------

    def _pick_radius(self, radius):
        if radius is not None:
            return radius
        limits: Limits = self.meta.get("limits")
        return (PICK_RADIUS_PX / DEFAULT_VIEWPORT[0] * limits.xspan,
                PICK_RADIUS_PX / DEFAULT_VIEWPORT[1] * limits.yspan)

    def _label_text(self, payload: dict) -> str:
        label = self.meta.get("label")
        return str(label(payload))


def _default_label(payload: dict) -> str:
    parts = []
    for key, value in payload.items():
        if key in ("text",):
            continue
        parts.append(f"{key}: {value}")
    return "\n".join(parts)


class ScatterPlot(PlotModel):
    """One point per row; points colored by ``.color``, brushed points echoed
    on the brush layer in the highlight color."""

    kind = "scatter"

    def __init__(self, plot_id: str, table: ReactiveTable, x: str, y: str):
        super().__init__(plot_id, table)
        for name in (x, y):
            if table.column(name).kind != "numeric":
                raise ValueError(f"scatter axis {name!r} must be numeric")
        self.x = x
        self.y = y
        self.bound_columns = (x, y)
        self._index: Optional[GridIndex] = None
        self.meta.add_field("limits", self._data_limits())
        self.meta.add_field("highlight", colors.DEFAULT_HIGHLIGHT)
        self.meta.add_field("label", _default_label)
        self._watch({x, y, COLOR_COL}, ["main"])
        self._watch({x, y, BRUSH_COL}, ["brush"])

        def invalidate(_notice):
            self._index = None

        self._table_lids.append(self.table.add_listener(invalidate, watched={x, y}))
        self._watch_limits()

    def _data_limits(self) -> Limits:
        xv, yv = self._valid_xy()
        if xv.size == 0:
            return Limits(0.0, 1.0, 0.0, 1.0)
        return padded_limits(xv.min(), xv.max(), yv.min(), yv.max())

    def data_span(self) -> tuple[float, float]:
        xv, yv = self._valid_xy()
        if xv.size == 0:
            return 1.0, 1.0
        return (max(float(xv.max() - xv.min()), 1e-300),
                max(float(yv.max() - yv.min()), 1e-300))

    def _valid_mask(self) -> np.ndarray:
        cx, cy = self.table.column(self.x), self.table.column(self.y)
        return (~cx.missing & ~cy.missing
                & np.isfinite(cx.values) & np.isfinite(cy.values))

    def _valid_xy(self):
        mask = self._valid_mask()
        return self.table.peek(self.x)[mask], self.table.peek(self.y)[mask]

    def _grid(self) -> GridIndex:
        if self._index is None:
            cx, cy = self.table.column(self.x), self.table.column(self.y)
            self._index = GridIndex(cx.values, cy.values, cx.missing | cy.missing)
        return self._index

    def hit_test_rect(self, rect) -> np.ndarray:
        x0, x1, y0, y1 = rect
        if x1 < x0:
            x0, x1 = x1, x0
        if y1 < y0:
            y0, y1 = y1, y0
        return self._grid().query(x0, x1, y0, y1)

    def _primitives(self, layer_name: str) -> list:
        mask = self._valid_mask()
        xs = self.table.peek(self.x)
        ys = self.table.peek(self.y)
        if layer_name == "main":
            return [{
                "kind": "points",
                "x": xs[mask],
                "y": ys[mask],
                "colors": self.table.peek(COLOR_COL)[mask],
            }]
        sel = mask & self.table.peek(BRUSH_COL)
        return [{
            "kind": "points",
            "x": xs[sel],
            "y": ys[sel],
            "color": self.meta.get("highlight"),
        }]

    def query(self, pos, radius=None) -> Optional[dict]:
        rx, ry = self._pick_radius(radius)
        px, py = pos
        cand = self._grid().query(px - rx, px + rx, py - ry, py + ry)
        if cand.size == 0:
            return None
        xs = self.table.peek(self.x)[cand]
        ys = self.table.peek(self.y)[cand]
        d2 = ((xs - px) / rx) ** 2 + ((ys - py) / ry) ** 2
        row = int(cand[int(np.argmin(d2))])
        payload = {"row": row}
        for name, col in self.table.columns.items():
            if name.startswith("."):
                continue
            if col.kind == "categorical":
                payload[name] = col.labels()[row]
            elif col.kind == "numeric":
                payload[name] = None if col.missing[row] else float(col.values[row])
            else:
                payload[name] = col.values[row].item()
        payload["text"] = self._label_text(payload)
        return payload


class HistogramPlot(PlotModel):
    """Counts of a numeric column over equal-width bins.

    The brush layer superimposes per-bin brushed counts on the main bars.
    Anchor and bin width live in the meta object; dragging their cue handles
    rewrites ``breaks`` in a single assignment.
    """

    kind = "histogram"

    def __init__(self, plot_id: str, table: ReactiveTable, var: str,
                 binwidth: Optional[float] = None, anchor: Optional[float] = None):
        super().__init__(plot_id, table)
        if table.column(var).kind != "numeric":
            raise ValueError(f"histogram variable {var!r} must be numeric")
        if binwidth is not None and binwidth <= 0:
            raise ValueError(f"binwidth must be positive, got {binwidth}")
        self.var = var
        self.bound_columns = (var,)
        lo, hi = self._data_range()
        bw = default_binwidth(lo, hi) if binwidth is None else float(binwidth)
        a = default_anchor(lo, bw) if anchor is None else float(anchor)
        breaks = compute_breaks(a, bw, lo, hi)
        self.meta.add_field("binwidth", bw)
        self.meta.add_field("anchor", float(breaks[0]))
        self.meta.add_field("breaks", breaks)
        self.meta.add_field("highlight", colors.DEFAULT_HIGHLIGHT)
        self.meta.add_field("label", _default_label)
        self.meta.add_field("limits", self._full_limits(breaks))
        self._watch({BRUSH_COL}, ["brush"])
        self._table_lids.append(self.table.add_listener(
            self._on_var_change, watched={var}))
        self._meta_lids.append(self.meta.on_changed(
            "breaks", lambda old, new: [self.mark_dirty(n) for n in self.layers]))
        self._watch_limits()

    def _data_range(self):
        col = self.table.column(self.var)
        vals = col.values[~col.missing & np.isfinite(col.values)]
        if vals.size == 0:
            raise ValueError(f"histogram variable {self.var!r} has no usable values")
        return float(vals.min()), float(vals.max())

    def _full_limits(self, breaks) -> Limits:
        counts = self.counts(breaks)
        top = max(1, int(counts.max()) if counts.size else 1)
        return padded_limits(breaks[0], breaks[-1], 0.0, top)

    def breaks(self) -> np.ndarray:
        return np.asarray(self.meta.get("breaks"), dtype=np.float64)

    def data_span(self) -> tuple[float, float]:
        breaks = self.breaks()
        counts = self.counts(breaks)
        top = float(counts.max()) if counts.size else 1.0
        return float(breaks[-1] - breaks[0]), max(top, 1.0)

    def counts(self, breaks=None) -> np.ndarray:
        col = self.table.column(self.var)
        return bin_counts(col.values, self.breaks() if breaks is None else breaks,
                          col.missing)

    def brushed_counts(self) -> np.ndarray:
        col = self.table.column(self.var)
        return bin_counts(col.values, self.breaks(), col.missing,
                          select=self.table.peek(BRUSH_COL))

    def _on_var_change(self, _notice) -> None:
        for name in self.layers:
            self.mark_dirty(name)
        lo, hi = self._data_range()
        self.meta.set("breaks", compute_breaks(
            self.meta.get("anchor"), self.meta.get("binwidth"), lo, hi))

    def set_breaks_from(self, anchor: float, binwidth: float) -> None:
        """Recompute and assign breaks once; breaksChanged fires once."""
        lo, hi = self._data_range()
        breaks = compute_breaks(anchor, binwidth, lo, hi)
        self.meta.set_silent("binwidth", float(binwidth))
        self.meta.set_silent("anchor", float(breaks[0]))
        self.meta.set("breaks", breaks)

    def hit_test_rect(self, rect) -> np.ndarray:
        x0, x1, y0, y1 = rect
        if x1 < x0:
            x0, x1 = x1, x0
        if y1 < y0:
            y0, y1 = y1, y0
        breaks = self.breaks()
        hit_bins = bins_intersecting(breaks, self.counts(), x0, x1, y0, y1)
        if hit_bins.size == 0:
            return np.empty(0, dtype=np.int64)
        col = self.table.column(self.var)
        membership = bin_membership(col.values, breaks, col.missing)
        return np.flatnonzero(np.isin(membership, hit_bins))

    def _primitives(self, layer_name: str) -> list:
        breaks = self.breaks()
        counts = self.counts(breaks)
        if layer_name == "main":
            tops = counts
            color = HIST_FILL
            fill = np.ones(len(counts))
        else:
            tops = self.brushed_counts()
            color = self.meta.get("highlight")
            with np.errstate(invalid="ignore"):
                fill = np.where(counts > 0, tops / np.maximum(counts, 1), 0.0)
        return [{
            "kind": "rects",
            "x0": breaks[:-1],
            "x1": breaks[1:],
            "y0": np.zeros(len(counts)),
            "y1": tops.astype(np.float64),
            "color": color,
            "fill": fill.astype(np.float64),
        }]

    def _cue_payload(self) -> list:
        return [
            {"cue": region.cue, "x0": region.x0, "x1": region.x1,
             "y0": region.y0, "y1": region.y1}
            for region in self.cue_regions()
        ]

    def cue_regions(self) -> list["CueRegion"]:
        breaks = self.breaks()
        bw = float(self.meta.get("binwidth"))
        counts = self.counts(breaks)
        depth = 0.06 * max(1.0, float(counts.max()) if counts.size else 1.0)
        regions = []
        for cue, xc in (("anchor", float(breaks[0])), ("binwidth", float(breaks[1]))):
            regions.append(CueRegion(
                plot_id=self.id, cue=cue,
                x0=xc - 0.25 * bw, x1=xc + 0.25 * bw, y0=-depth, y1=0.0))
        return regions

    def query(self, pos, radius=None) -> Optional[dict]:
        px, py = pos
        breaks = self.breaks()
        counts = self.counts(breaks)
        idx = bin_membership(np.array([px]), breaks)[0]
        if idx < 0 or py < 0 or py > counts[idx]:
            return None
        brushed = self.brushed_counts()
        col = self.table.column(self.var)
        total = int((~col.missing & np.isfinite(col.values)).sum())
        payload = {
            "bin": [float(breaks[idx]), float(breaks[idx + 1])],
            "count": int(counts[idx]),
            "brushed": int(brushed[idx]),
            "proportion": (int(counts[idx]) / total) if total else 0.0,
        }
        payload["text"] = self._label_text(payload)
        return payload


class CueRegion:
    """Hot zone on a histogram advertising a draggable plot parameter."""

    __slots__ = ("plot_id", "cue", "x0", "x1", "y0", "y1")

    def __init__(self, plot_id, cue, x0, x1, y0, y1):
        self.plot_id = plot_id
        self.cue = cue
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1

    def contains(self, pos) -> bool:
        x, y = pos
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


class BarPlot(PlotModel):
    """Level counts of a categorical column; spine mode trades height for
    width so the brushed share reads as a filled fraction."""

    kind = "bar"

    def __init__(self, plot_id: str, table: ReactiveTable, var: str,
                 spine: bool = False):
        super().__init__(plot_id, table)
        if table.column(var).kind != "categorical":
            raise ValueError(f"bar variable {var!r} must be categorical")
        self.var = var
        self.bound_columns = (var,)
        self.spine = spine
        if spine:
            self.kind = "spine"
        self.meta.add_field("limits", self._data_limits())
        self.meta.add_field("highlight", colors.DEFAULT_HIGHLIGHT)
        self.meta.add_field("label", _default_label)
        self._watch({var}, ["main", "brush"])
        self._watch({BRUSH_COL}, ["brush"])
        self._watch_limits()

    @property
    def levels(self) -> list[str]:
        return list(self.table.column(self.var).levels)

    def counts(self) -> np.ndarray:
        col = self.table.column(self.var)
        codes = col.values[~col.missing]
        return np.bincount(codes, minlength=len(col.levels))

    def brushed_counts(self) -> np.ndarray:
        col = self.table.column(self.var)
        keep = ~col.missing & self.table.peek(BRUSH_COL)
        return np.bincount(col.values[keep], minlength=len(col.levels))

    def _data_limits(self) -> Limits:
        if self.spine:
            return padded_limits(0.0, 1.0, 0.0, 1.0)
        counts = self.counts()
        top = max(1, int(counts.max()) if counts.size else 1)
        return padded_limits(-0.5, len(self.levels) - 0.5, 0.0, top)

    def data_span(self) -> tuple[float, float]:
        if self.spine:
            return 1.0, 1.0
        counts = self.counts()
        top = float(counts.max()) if counts.size else 1.0
        return max(float(len(self.levels)), 1.0), max(top, 1.0)

    def bar_geometry(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per level: (x0, x1, height_scale). Spine widths are proportional
        to counts over [0, 1]; bar slots are unit-spaced with 0.8 width."""
        counts = self.counts().astype(np.float64)
        if self.spine:
            total = counts.sum()
            shares = counts / total if total > 0 else np.zeros_like(counts)
            edges = np.concatenate([[0.0], np.cumsum(shares)])
            return edges[:-1], edges[1:], np.ones(len(counts))
        centers = np.arange(len(counts), dtype=np.float64)
        return centers - 0.4, centers + 0.4, counts

    def _bar_tops(self) -> np.ndarray:
        return np.ones(len(self.levels)) if self.spine else self.counts().astype(float)

    def hit_test_rect(self, rect) -> np.ndarray:
        x0, x1, y0, y1 = rect
        if x1 < x0:
            x0, x1 = x1, x0
        if y1 < y0:
            y0, y1 = y1, y0
        bx0, bx1, _ = self.bar_geometry()
        tops = self._bar_tops()
        hit = (x0 <= bx1) & (x1 >= bx0) & (y0 <= tops) & (y1 >= 0)
        hit &= self.counts() > 0  # empty levels own no rows, zero-width spine slots
        levels = np.flatnonzero(hit)
        if levels.size == 0:
            return np.empty(0, dtype=np.int64)
        col = self.table.column(self.var)
        return np.flatnonzero(np.isin(col.values, levels) & ~col.missing)

    def _primitives(self, layer_name: str) -> list:
        counts = self.counts().astype(np.float64)
        brushed = self.brushed_counts().astype(np.float64)
        bx0, bx1, _ = self.bar_geometry()
        with np.errstate(invalid="ignore", divide="ignore"):
            fraction = np.where(counts > 0, brushed / np.maximum(counts, 1), 0.0)
        if self.spine:
            main_tops = np.ones(len(counts))
            brush_tops = fraction
        else:
            main_tops = counts
            brush_tops = brushed
        if layer_name == "main":
            groups = [{
                "kind": "rects",
                "x0": bx0, "x1": bx1,
                "y0": np.zeros(len(counts)), "y1": main_tops,
                "color": BAR_FILL,
                "fill": np.ones(len(counts)),
            }]
            groups.append({
                "kind": "text",
                "x": (bx0 + bx1) / 2.0,
                "y": np.zeros(len(counts)),
                "text": self.levels,
            })
            return groups
        return [{
            "kind": "rects",
            "x0": bx0, "x1": bx1,
            "y0": np.zeros(len(counts)), "y1": brush_tops,
            "color": self.meta.get("highlight"),
            "fill": fraction,
        }]

    def query(self, pos, radius=None) -> Optional[dict]:
        px, py = pos
        bx0, bx1, _ = self.bar_geometry()
        tops = self._bar_tops()
        counts = self.counts()
        inside = (bx0 <= px) & (px <= bx1) & (py >= 0) & (py <= tops) & (counts > 0)
        levels = np.flatnonzero(inside)
        if levels.size == 0:
            return None
        i = int(levels[0])
        total = int(counts.sum())
        payload = {
            "level": self.levels[i],
            "count": int(counts[i]),
            "brushed": int(self.brushed_counts()[i]),
            "proportion": int(counts[i]) / total if total else 0.0,
        }
        payload["text"] = self._label_text(payload)
        return payload


def scatter_plot(table: ReactiveTable, x: str, y: str,
                 plot_id: str = "scatter") -> ScatterPlot:
    return ScatterPlot(plot_id, table, x, y)


def histogram(table: ReactiveTable, var: str, binwidth=None, anchor=None,
              plot_id: str = "histogram") -> HistogramPlot:
    return HistogramPlot(plot_id, table, var, binwidth, anchor)


def bar_chart(table: ReactiveTable, var: str, spine: bool = False,
              plot_id: str = "bar") -> BarPlot:
    return BarPlot(plot_id, table, var, spine)


def hit_test_rect(plot: PlotModel, rect) -> np.ndarray:
    """Row indices of the plot's table selected by a data-space rectangle."""
    return plot.hit_test_rect(rect)


def query_payload(plot: PlotModel, pos, radius=None) -> Optional[dict]:
    """Structured label for the element under ``pos``, or None."""
    return plot.query(pos, radius)


def mark_dirty(plot: PlotModel, layer_name: str) -> None:
    plot.mark_dirty(layer_name)
