"""Observable columnar tables.

A ReactiveTable is a mutable column store whose assignments notify registered
listeners. Views never poll: they install listeners on the columns they bind
and repaint when told. Interaction state rides along in two engine-owned
columns, ``.brushed`` (bool) and ``.color`` (packed RGBA), appended by
:func:`augment`.

Notifications follow assignment semantics: setting a column fires its
listeners even when the new values equal the old ones. Listeners registered
with ``suppress_unchanged=True`` opt out of no-op assignments.

Single-writer contract: all mutations and listener dispatch for a table happen
on one logical event loop; callbacks must not block.
"""
from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .colors import DEFAULT_COLOR, pack, pack_array

BRUSH_COL = ".brushed"
COLOR_COL = ".color"
RESERVED_PREFIX = "."

BRUSH_MODES = ("replace", "union", "intersect", "toggle")


class _AllRows:
    """Sentinel: an assignment touched every row."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "ALL_ROWS"


ALL_ROWS = _AllRows()

RowSet = Union[_AllRows, np.ndarray]


class _EpochSource:
    """Monotone counter shared by every table in a process.

    Cross-table propagation compares epochs, so they must come from one
    sequence.
    """

    def __init__(self) -> None:
        self._counter = itertools.count(1)

    def next(self) -> int:
        return next(self._counter)


EPOCHS = _EpochSource()


@dataclass(frozen=True)
class ChangeNotice:
    """What a listener learns about one assignment."""

    table_id: str
    columns: frozenset[str]
    rows: RowSet
    epoch: int
    values_changed: bool


@dataclass
class _Listener:
    lid: int
    watched: Optional[frozenset[str]]  # None = all columns
    callback: Callable[[ChangeNotice], None]
    suppress_unchanged: bool = False


class Column:
    """One typed column: numeric, categorical, boolean or color.

    Categorical values are stored as int32 codes into ``levels``; missing
    cells carry code -1 and a True missing-mask entry. ``.brushed`` and
    ``.color`` never have missing entries.
    """

    __slots__ = ("name", "kind", "values", "levels", "missing")

    def __init__(self, name, kind, values, missing=None, levels=None):
        self.name = name
        self.kind = kind
        self.values = values
        self.levels = list(levels) if levels is not None else None
        n = len(values)
        self.missing = (
            np.zeros(n, dtype=bool) if missing is None else np.asarray(missing, dtype=bool)
        )
        if len(self.missing) != n:
            raise ValueError(f"column {name!r}: missing mask length {len(self.missing)} != {n}")
        if kind == "categorical":
            if self.levels is None:
                raise ValueError(f"categorical column {name!r} needs levels")
            codes = self.values
            ok = self.missing | ((codes >= 0) & (codes < len(self.levels)))
            if not bool(np.all(ok)):
                raise ValueError(f"column {name!r}: level code out of range")
        elif kind not in ("numeric", "boolean", "color"):
            raise ValueError(f"unknown column kind {kind!r}")

    def __len__(self) -> int:
        return len(self.values)

    def labels(self) -> list[Optional[str]]:
        """Categorical values as label strings (None where missing)."""
        if self.kind != "categorical":
            raise ValueError(f"column {self.name!r} is not categorical")
        return [
            None if m else self.levels[c]
            for c, m in zip(self.values.tolist(), self.missing.tolist())
        ]

    def copy(self) -> "Column":
        return Column(
            self.name, self.kind, self.values.copy(), self.missing.copy(), self.levels
        )


def _coerce_values(kind, values, levels=None, nrow=None):
    """Normalize arbitrary input to (ndarray, missing, levels) for a kind."""
    if kind == "numeric":
        out = np.empty(len(values), dtype=np.float64)
        missing = np.zeros(len(values), dtype=bool)
        arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
        if isinstance(arr, np.ndarray) and arr.dtype.kind in "fiu":
            out[:] = arr.astype(np.float64)
            missing[:] = np.isnan(out)
        else:
            for i, v in enumerate(values):
                if v is None or (isinstance(v, float) and np.isnan(v)):
                    out[i] = np.nan
                    missing[i] = True
                else:
                    out[i] = float(v)
        return out, missing, None
    if kind == "boolean":
        arr = np.asarray(values)
        if arr.dtype != np.bool_:
            if arr.dtype.kind not in "biu":
                raise ValueError("boolean column expects bool values")
            arr = arr.astype(bool)
        return arr.astype(bool), np.zeros(len(arr), dtype=bool), None
    if kind == "color":
        return pack_array(values), np.zeros(len(values), dtype=bool), None
    if kind == "categorical":
        if isinstance(values, np.ndarray) and values.dtype.kind in "iu" and levels is not None:
            codes = values.astype(np.int32)
            return codes, codes < 0, list(levels)
        level_index: dict[str, int] = {}
        out_levels: list[str] = []
        codes = np.empty(len(values), dtype=np.int32)
        missing = np.zeros(len(values), dtype=bool)
        for i, v in enumerate(values):
            if v is None:
                codes[i] = -1
                missing[i] = True
                continue
            label = v if isinstance(v, str) else str(v)
            if label not in level_index:
                level_index[label] = len(out_levels)
                out_levels.append(label)
            codes[i] = level_index[label]
        return codes, missing, out_levels
    raise ValueError(f"unknown column kind {kind!r}")


def _infer_column(name, values) -> Column:
    if isinstance(values, Column):
        return values
    if isinstance(values, np.ndarray):
        if values.dtype == np.bool_:
            kind = "boolean"
        elif values.dtype.kind in "fiu":
            kind = "numeric"
        else:
            kind = "categorical"
    else:
        items = [v for v in values if v is not None]
        if items and all(isinstance(v, bool) for v in items):
            kind = "boolean"
        elif items and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in items):
            kind = "numeric"
        else:
            kind = "categorical"
    vals, missing, levels = _coerce_values(kind, values)
    return Column(name, kind, vals, missing, levels)


def _as_row_array(rows, nrow) -> np.ndarray:
    """Validate an index set against [0, nrow): sorted, deduplicated."""
    return np.unique(_as_ordered_rows(rows, nrow, allow_duplicates=True))


def _as_ordered_rows(rows, nrow, allow_duplicates: bool = False) -> np.ndarray:
    """Validate row indices, preserving caller order. Accepts ints, bool masks."""
    if isinstance(rows, np.ndarray) and rows.dtype == np.bool_:
        if len(rows) != nrow:
            raise ValueError(f"boolean row mask length {len(rows)} != nrow {nrow}")
        return np.flatnonzero(rows)
    arr = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= nrow):
        bad = arr[(arr < 0) | (arr >= nrow)][0]
        raise IndexError(f"row index {bad} out of range for {nrow} rows")
    if not allow_duplicates and len(np.unique(arr)) != arr.size:
        raise ValueError("row indices must be unique")
    return arr


class ReactiveTable:
    """Mutable columnar table with assignment-triggered listeners.

    Subset views (see :meth:`subset_view`) share interaction state with their
    parent: child writes go through to the mapped parent rows and parent
    notifications are re-emitted in child coordinates.
    """

    def __init__(self, table_id: str, columns: Sequence[Column],
                 parent: Optional["ReactiveTable"] = None,
                 rowmap: Optional[np.ndarray] = None):
        if not columns:
            raise ValueError("a table needs at least one column")
        self.id = table_id
        self.columns: dict[str, Column] = {}
        nrow = len(columns[0])
        for col in columns:
            if col.name in self.columns:
                raise ValueError(f"duplicate column name {col.name!r}")
            if len(col) != nrow:
                raise ValueError(
                    f"column {col.name!r} has {len(col)} rows, expected {nrow}")
            self.columns[col.name] = col
        self._nrow = nrow
        self.parent = parent
        self.rowmap = rowmap
        self._listeners: list[_Listener] = []
        self._lids = itertools.count(1)
        self._txn_depth = 0
        self._txn_columns: set[str] = set()
        self._txn_rows: Optional[RowSet] = None
        self._txn_changed = False
        self._txn_touched = False
        self.stats = {"notices": 0, "listener_calls": 0}

    # -- introspection -------------------------------------------------

    @property
    def nrow(self) -> int:
        return self._nrow

    def column_names(self) -> list[str]:
        return list(self.columns)

    def column(self, name: str) -> Column:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"table {self.id!r} has no column {name!r}") from None

    def values(self, name: str) -> np.ndarray:
        """Immutable snapshot of a column's values."""
        return self.column(name).values.copy()

    def peek(self, name: str) -> np.ndarray:
        """Live value array, engine-internal: callers must not mutate."""
        return self.column(name).values

    def missing(self, name: str) -> np.ndarray:
        return self.column(name).missing.copy()

    @property
    def brushed(self) -> np.ndarray:
        return self.values(BRUSH_COL)

    def brushed_rows(self) -> np.ndarray:
        return np.flatnonzero(self.column(BRUSH_COL).values)

    # -- listeners -----------------------------------------------------

    def add_listener(self, callback, watched: Optional[Iterable[str]] = None,
                     suppress_unchanged: bool = False) -> int:
        """Register a callback for assignments touching ``watched`` columns.

        ``watched=None`` (or an empty set) watches everything. Listeners fire
        in registration order. Returns the listener id.
        """
        watched_set: Optional[frozenset[str]] = None
        if watched is not None:
            watched_set = frozenset(watched)
            for name in watched_set:
                if name not in self.columns:
                    raise KeyError(f"cannot watch unknown column {name!r}")
            if not watched_set:
                watched_set = None
        lid = next(self._lids)
        self._listeners.append(_Listener(lid, watched_set, callback, suppress_unchanged))
        return lid

    def remove_listener(self, lid: int) -> None:
        for i, listener in enumerate(self._listeners):
            if listener.lid == lid:
                del self._listeners[i]
                return
        raise KeyError(f"no listener {lid} on table {self.id!r}")

    # -- notification machinery ----------------------------------------

    def _emit(self, columns: set[str], rows: RowSet, values_changed: bool,
              epoch: Optional[int] = None) -> None:
        if self._txn_depth > 0:
            self._txn_touched = True
            self._txn_columns |= columns
            if self._txn_rows is ALL_ROWS or rows is ALL_ROWS:
                self._txn_rows = ALL_ROWS
            elif self._txn_rows is None:
                self._txn_rows = rows
            else:
                self._txn_rows = np.union1d(self._txn_rows, rows)
            self._txn_changed = self._txn_changed or values_changed
            return
        notice = ChangeNotice(
            table_id=self.id,
            columns=frozenset(columns),
            rows=rows,
            epoch=EPOCHS.next() if epoch is None else epoch,
            values_changed=values_changed,
        )
        self._dispatch(notice)

    def _dispatch(self, notice: ChangeNotice) -> None:
        self.stats["notices"] += 1
        for listener in list(self._listeners):
            if listener.watched is not None and not (listener.watched & notice.columns):
                continue
            if listener.suppress_unchanged and not notice.values_changed:
                continue
            self.stats["listener_calls"] += 1
            listener.callback(notice)

    @contextmanager
    def transaction(self):
        """Coalesce every mutation in the body into one notification.

        Nested transactions flatten into the outermost. An empty body emits
        nothing.
        """
        if self.parent is not None:
            with self.parent.transaction():
                yield self
            return
        self._txn_depth += 1
        try:
            yield self
        finally:
            self._txn_depth -= 1
            if self._txn_depth == 0 and self._txn_touched:
                columns, rows = self._txn_columns, self._txn_rows
                changed = self._txn_changed
                self._txn_columns, self._txn_rows = set(), None
                self._txn_changed = self._txn_touched = False
                self._emit(columns, rows if rows is not None else ALL_ROWS, changed)

    # -- mutation ------------------------------------------------------

    def set_column(self, name: str, values, epoch: Optional[int] = None) -> None:
        """Replace a whole column. Notifies with rows=ALL_ROWS."""
        col = self.column(name)
        if self.parent is not None:
            self.parent.set_cells(name, self.rowmap, values, epoch=epoch)
            return
        new_values, new_missing, new_levels = _coerce_values(col.kind, values, col.levels)
        if len(new_values) != self._nrow:
            raise ValueError(
                f"set_column({name!r}): {len(new_values)} values for {self._nrow} rows")
        changed = not (
            np.array_equal(new_values, col.values)
            and np.array_equal(new_missing, col.missing)
        )
        col.values = new_values
        col.missing = new_missing
        if col.kind == "categorical":
            col.levels = new_levels
        self._emit({name}, ALL_ROWS, changed, epoch)

    def set_cells(self, name: str, rows, values, epoch: Optional[int] = None) -> None:
        """Assign values to rows (parallel to the given order). Empty row set
        is a silent no-op."""
        col = self.column(name)
        row_arr = _as_ordered_rows(rows, self._nrow)
        if row_arr.size == 0:
            return
        if self.parent is not None:
            self.parent.set_cells(name, self.rowmap[row_arr], values, epoch=epoch)
            return
        if np.isscalar(values) or values is None or isinstance(values, str):
            values = [values] * row_arr.size
        new_values, new_missing, fresh_levels = _coerce_values(col.kind, values, col.levels)
        if len(new_values) != row_arr.size:
            raise ValueError(
                f"set_cells({name!r}): {len(new_values)} values for {row_arr.size} rows")
        if col.kind == "categorical":
            # map fresh codes into the existing level list, extending it
            new_values = self._remap_codes(col, new_values, fresh_levels)
        changed = not (
            np.array_equal(col.values[row_arr], new_values)
            and np.array_equal(col.missing[row_arr], new_missing)
        )
        col.values[row_arr] = new_values
        col.missing[row_arr] = new_missing
        self._emit({name}, row_arr, changed, epoch)

    @staticmethod
    def _remap_codes(col: Column, codes: np.ndarray, levels) -> np.ndarray:
        if levels is None or levels == col.levels:
            return codes
        index = {label: i for i, label in enumerate(col.levels)}
        remapped = np.empty_like(codes)
        for i, c in enumerate(codes.tolist()):
            if c < 0:
                remapped[i] = -1
                continue
            label = levels[c]
            if label not in index:
                index[label] = len(col.levels)
                col.levels.append(label)
            remapped[i] = index[label]
        return remapped

    def set_brushed(self, rows, mode: str = "replace",
                    epoch: Optional[int] = None) -> None:
        """Recompute ``.brushed`` from a row set under a combine mode.

        replace: true exactly on ``rows``; union: old OR rows; intersect:
        old AND rows; toggle: XOR. One notification per call; its row set is
        the rows whose boolean flipped (ALL_ROWS under replace).
        """
        if mode not in BRUSH_MODES:
            raise ValueError(f"unknown brush mode {mode!r}")
        row_arr = _as_row_array(rows, self._nrow)
        if self.parent is not None:
            current = self.parent.column(BRUSH_COL).values[self.rowmap]
            new = _apply_brush_mode(current, row_arr, mode)
            self.parent.set_cells(BRUSH_COL, self.rowmap, new, epoch=epoch)
            return
        col = self.column(BRUSH_COL)
        old = col.values
        new = _apply_brush_mode(old, row_arr, mode)
        if mode == "replace":
            flipped: RowSet = ALL_ROWS
            changed = not np.array_equal(old, new)
        else:
            flip_mask = old != new
            flipped = np.flatnonzero(flip_mask)
            changed = flipped.size > 0
        col.values = new
        self._emit({BRUSH_COL}, flipped, changed, epoch)

    # -- subset views ----------------------------------------------------

    def subset_view(self, rows) -> "ReactiveTable":
        """Child table over a row subset, sharing state with the parent.

        Mutations of any column in the child write through to the mapped
        parent rows; parent assignments touching mapped rows re-notify the
        child's listeners in child coordinates.
        """
        arr = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows,
                         dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self._nrow):
            raise IndexError(f"subset rows out of range for {self._nrow} rows")
        if len(np.unique(arr)) != arr.size:
            raise ValueError("subset rows must be unique")
        child_cols = []
        for name, col in self.columns.items():
            child_cols.append(Column(
                name, col.kind, col.values[arr].copy(), col.missing[arr].copy(), col.levels))
        child = ReactiveTable(f"{self.id}/subset", child_cols, parent=self, rowmap=arr)
        position = {int(p): i for i, p in enumerate(arr.tolist())}

        def relay(notice: ChangeNotice) -> None:
            # refresh the child's materialized columns, then re-notify
            for name in notice.columns:
                pcol = self.columns[name]
                ccol = child.columns[name]
                ccol.values = pcol.values[arr].copy()
                ccol.missing = pcol.missing[arr].copy()
                ccol.levels = pcol.levels
            if notice.rows is ALL_ROWS:
                child_rows: RowSet = ALL_ROWS
            else:
                hits = [position[int(r)] for r in notice.rows.tolist() if int(r) in position]
                if not hits:
                    return
                child_rows = np.array(sorted(hits), dtype=np.int64)
            child._dispatch(ChangeNotice(
                table_id=child.id,
                columns=notice.columns,
                rows=child_rows,
                epoch=notice.epoch,
                values_changed=notice.values_changed,
            ))

        self.add_listener(relay)
        return child


def _apply_brush_mode(old: np.ndarray, rows: np.ndarray, mode: str) -> np.ndarray:
    mask = np.zeros(len(old), dtype=bool)
    mask[rows] = True
    if mode == "replace":
        return mask
    if mode == "union":
        return old | mask
    if mode == "intersect":
        return old & mask
    return old ^ mask  # toggle


def augment(data, table_id: str = "table",
            default_color: str = DEFAULT_COLOR) -> ReactiveTable:
    """Build a ReactiveTable from raw columns, appending ``.brushed``/``.color``.

    ``data`` is a mapping or sequence of (name, values) pairs; values may be
    numpy arrays, lists of numbers/strings/bools, with None (or NaN) marking
    missing cells. Column kinds are inferred. User column names must not start
    with ".".
    """
    if isinstance(data, Mapping):
        items = list(data.items())
    else:
        items = list(data)
    if not items:
        raise ValueError("cannot augment a table with no columns")
    seen = set()
    columns = []
    for name, values in items:
        if name in seen:
            raise ValueError(f"duplicate column name {name!r}")
        seen.add(name)
        if name.startswith(RESERVED_PREFIX):
            raise ValueError(
                f"column name {name!r} collides with the reserved '.' prefix")
        columns.append(_infer_column(name, values))
    nrow = len(columns[0])
    columns.append(Column(BRUSH_COL, "boolean", np.zeros(nrow, dtype=bool)))
    columns.append(Column(
        COLOR_COL, "color", np.full(nrow, pack(default_color), dtype=np.uint32)))
    return ReactiveTable(table_id, columns)
