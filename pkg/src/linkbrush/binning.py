"""Histogram break computation and bin assignment.

Breaks are an arithmetic sequence ``anchor + i * binwidth``. The anchor is
canonicalized into ``(data_min - binwidth, data_min]`` so that any two anchors
in the same residue class modulo the bin width produce identical breaks; the
visible bin counts are therefore periodic in the anchor.

Bins are left-closed/right-open, except the last bin which is closed on both
sides.
"""
from __future__ import annotations

import math

import numpy as np


def canonical_anchor(anchor: float, binwidth: float, data_min: float) -> float:
    """Shift the anchor by whole bin widths into ``(data_min - bw, data_min]``."""
    if binwidth <= 0:
        raise ValueError(f"binwidth must be positive, got {binwidth}")
    shifted = anchor - math.ceil((anchor - data_min) / binwidth) * binwidth
    # guards against float rounding at exact multiples
    while shifted > data_min:
        shifted -= binwidth
    while shifted + binwidth <= data_min:
        shifted += binwidth
    return shifted


def compute_breaks(anchor: float, binwidth: float,
                   data_min: float, data_max: float) -> np.ndarray:
    """Equally spaced breaks covering [data_min, data_max].

    The first break is the canonicalized anchor; the last break is the
    smallest element of the sequence strictly greater than ``data_max``.
    """
    if binwidth <= 0:
        raise ValueError(f"binwidth must be positive, got {binwidth}")
    if data_min > data_max:
        raise ValueError(f"empty data range [{data_min}, {data_max}]")
    start = canonical_anchor(anchor, binwidth, data_min)
    m = max(1, math.floor((data_max - start) / binwidth) + 1)
    while start + m * binwidth <= data_max:
        m += 1
    return start + binwidth * np.arange(m + 1, dtype=np.float64)


def default_binwidth(data_min: float, data_max: float) -> float:
    span = data_max - data_min
    return span / 30.0 if span > 0 else 1.0


def default_anchor(data_min: float, binwidth: float) -> float:
    return binwidth * math.floor(data_min / binwidth)


def bin_membership(values: np.ndarray, breaks: np.ndarray,
                   missing: np.ndarray | None = None) -> np.ndarray:
    """Per-row bin index, -1 where missing or out of range.

    Value v lands in bin i iff breaks[i] <= v < breaks[i+1]; the last bin is
    closed on the right.
    """
    breaks = np.asarray(breaks, dtype=np.float64)
    if len(breaks) < 2 or not bool(np.all(np.diff(breaks) > 0)):
        raise ValueError("breaks must be strictly increasing with >= 2 entries")
    values = np.asarray(values, dtype=np.float64)
    idx = np.searchsorted(breaks, values, side="right") - 1
    nbins = len(breaks) - 1
    idx[values == breaks[-1]] = nbins - 1  # right-closed last bin
    out_of_range = (values < breaks[0]) | (values > breaks[-1]) | ~np.isfinite(values)
    idx[out_of_range] = -1
    if missing is not None:
        idx[missing] = -1
    return idx.astype(np.int64)


def bin_counts(values: np.ndarray, breaks: np.ndarray,
               missing: np.ndarray | None = None,
               select: np.ndarray | None = None) -> np.ndarray:
    """Row counts per bin, optionally restricted to a boolean row selection."""
    idx = bin_membership(values, breaks, missing)
    keep = idx >= 0
    if select is not None:
        keep &= select
    return np.bincount(idx[keep], minlength=len(breaks) - 1)


def bins_intersecting(breaks: np.ndarray, counts: np.ndarray,
                      x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
    """Indices of bins whose bar rectangle meets the selection rectangle.

    The x test mirrors bin membership: a bin owns [breaks[i], breaks[i+1])
    (last bin right-closed), so a selection starting exactly at a bin's upper
    edge does not select it. Bars span [0, count] vertically.
    """
    breaks = np.asarray(breaks, dtype=np.float64)
    lo, hi = breaks[:-1], breaks[1:]
    nbins = len(lo)
    hits_x = (x1 >= lo) & (x0 < hi)
    if nbins > 0 and x0 <= hi[-1] and x1 >= lo[-1]:
        hits_x[-1] = True  # closed right edge of the last bin
    hits_y = (y0 <= np.asarray(counts)) & (y1 >= 0)
    return np.flatnonzero(hits_x & hits_y)
