"""Uniform-grid spatial index for rectangle queries on scatter points.

Points are bucketed into a cells-by-cells grid (CSR layout: one argsort at
build time, contiguous row slices at query time). A query gathers the
candidate rows of every cell overlapping the rectangle and applies the exact
closed-interval test, so results are identical to a brute-force scan, just
cheaper for small rectangles over large tables.

Rows with a non-finite or missing coordinate are excluded at build time and
can never match.
"""
from __future__ import annotations

import math

import numpy as np


def brute_force_rect(x: np.ndarray, y: np.ndarray,
                     x0: float, x1: float, y0: float, y1: float,
                     missing: np.ndarray | None = None) -> np.ndarray:
    """Reference point-in-rect scan (closed intervals on both axes)."""
    inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
    inside &= np.isfinite(x) & np.isfinite(y)
    if missing is not None:
        inside &= ~missing
    return np.flatnonzero(inside)


class GridIndex:
    def __init__(self, x: np.ndarray, y: np.ndarray,
                 missing: np.ndarray | None = None):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        valid = np.isfinite(self.x) & np.isfinite(self.y)
        if missing is not None:
            valid &= ~missing
        self._rows = np.flatnonzero(valid)
        n = self._rows.size
        if n == 0:
            self._ncx = self._ncy = 1
            self._order = np.empty(0, dtype=np.int64)
            self._starts = np.zeros(2, dtype=np.int64)
            self._xmin = self._ymin = 0.0
            self._cw = self._ch = 1.0
            return
        xs, ys = self.x[self._rows], self.y[self._rows]
        self._xmin, xmax = float(xs.min()), float(xs.max())
        self._ymin, ymax = float(ys.min()), float(ys.max())
        cells = max(1, min(1024, int(math.sqrt(n / 4)) or 1))
        self._ncx = self._ncy = cells
        self._cw = (xmax - self._xmin) / cells or 1.0
        self._ch = (ymax - self._ymin) / cells or 1.0
        cx = np.clip(((xs - self._xmin) / self._cw).astype(np.int64), 0, cells - 1)
        cy = np.clip(((ys - self._ymin) / self._ch).astype(np.int64), 0, cells - 1)
        cell_id = cy * cells + cx
        sorter = np.argsort(cell_id, kind="stable")
        self._order = self._rows[sorter]
        counts = np.bincount(cell_id, minlength=cells * cells)
        self._starts = np.zeros(cells * cells + 1, dtype=np.int64)
        np.cumsum(counts, out=self._starts[1:])

    def _cell_x(self, v: float) -> int:
        return int(min(self._ncx - 1, max(0, (v - self._xmin) // self._cw)))

    def _cell_y(self, v: float) -> int:
        return int(min(self._ncy - 1, max(0, (v - self._ymin) // self._ch)))

    def query(self, x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
        """Sorted row indices with x in [x0, x1] and y in [y0, y1]."""
        if self._order.size == 0 or x1 < x0 or y1 < y0:
            return np.empty(0, dtype=np.int64)
        cx0, cx1 = self._cell_x(x0), self._cell_x(x1)
        cy0, cy1 = self._cell_y(y0), self._cell_y(y1)
        chunks = []
        ncx = self._ncx
        for cy in range(cy0, cy1 + 1):
            lo = self._starts[cy * ncx + cx0]
            hi = self._starts[cy * ncx + cx1 + 1]
            if hi > lo:
                chunks.append(self._order[lo:hi])
        if not chunks:
            return np.empty(0, dtype=np.int64)
        cand = np.concatenate(chunks)
        cx, cyv = self.x[cand], self.y[cand]
        hit = (cx >= x0) & (cx <= x1) & (cyv >= y0) & (cyv <= y1)
        out = cand[hit]
        out.sort()
        return out
