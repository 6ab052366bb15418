"""Reactive metadata records.

Plot-local state (axis limits, histogram breaks, label generators) lives in a
MetaObject: a record of named fields with per-field change events. Field kinds
are fixed at creation and closed (scalar, vector, rect, procedure) so every
non-procedure field can cross the wire.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional

import numpy as np


@dataclass(frozen=True)
class Limits:
    """Axis limits rectangle in data space."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(
                f"degenerate limits: x [{self.xmin}, {self.xmax}], "
                f"y [{self.ymin}, {self.ymax}]")

    @property
    def xspan(self) -> float:
        return self.xmax - self.xmin

    @property
    def yspan(self) -> float:
        return self.ymax - self.ymin

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xmin, self.xmax, self.ymin, self.ymax)


FIELD_KINDS = ("scalar", "vector", "rect", "procedure")


def _infer_kind(value) -> str:
    if isinstance(value, Limits):
        return "rect"
    if callable(value):
        return "procedure"
    if isinstance(value, (str, bool, int, float, np.integer, np.floating)):
        return "scalar"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "vector"
    raise ValueError(f"cannot store value of type {type(value).__name__} in a meta field")


def _normalize(kind: str, value):
    if kind == "vector":
        return tuple(float(v) for v in value)
    if kind == "scalar" and isinstance(value, (np.integer, np.floating)):
        return value.item()
    return value


class MetaObject:
    """Record of named fields; assigning a field fires its listeners.

    Listeners are scoped to one field, fire in registration order and receive
    ``(old, new)``. As with table columns, assignment fires even when the new
    value equals the old one.
    """

    def __init__(self, fields: Optional[Mapping[str, Any]] = None, meta_id: str = "meta"):
        self.id = meta_id
        self._kinds: dict[str, str] = {}
        self._values: dict[str, Any] = {}
        self._listeners: dict[str, list[tuple[int, Callable]]] = {}
        self._lids = itertools.count(1)
        self._lid_field: dict[int, str] = {}
        items = fields.items() if isinstance(fields, Mapping) else (fields or [])
        for name, value in items:
            self.add_field(name, value)

    def add_field(self, name: str, value) -> None:
        if name in self._kinds:
            raise ValueError(f"duplicate meta field {name!r}")
        kind = _infer_kind(value)
        self._kinds[name] = kind
        self._values[name] = _normalize(kind, value)
        self._listeners[name] = []

    def field_names(self) -> list[str]:
        return list(self._kinds)

    def kind(self, name: str) -> str:
        self._check(name)
        return self._kinds[name]

    def _check(self, name: str) -> None:
        if name not in self._kinds:
            raise KeyError(f"meta {self.id!r} has no field {name!r}")

    def get(self, name: str):
        self._check(name)
        return self._values[name]

    def set(self, name: str, value) -> None:
        self._check(name)
        kind = self._kinds[name]
        if _infer_kind(value) != kind:
            raise ValueError(
                f"field {name!r} holds a {kind}, got {type(value).__name__}")
        old = self._values[name]
        new = _normalize(kind, value)
        self._values[name] = new
        for _, callback in list(self._listeners[name]):
            callback(old, new)

    def set_silent(self, name: str, value) -> None:
        """Store a value without firing the field's event.

        Reserved for parameter syncing where a sibling field's single event is
        the contract (cue drags rewrite anchor/binwidth silently and fire only
        breaksChanged).
        """
        self._check(name)
        kind = self._kinds[name]
        if _infer_kind(value) != kind:
            raise ValueError(
                f"field {name!r} holds a {kind}, got {type(value).__name__}")
        self._values[name] = _normalize(kind, value)

    def on_changed(self, name: str, callback: Callable[[Any, Any], None]) -> int:
        """Subscribe to assignments of one field; returns a listener id."""
        self._check(name)
        lid = next(self._lids)
        self._listeners[name].append((lid, callback))
        self._lid_field[lid] = name
        return lid

    def remove_listener(self, lid: int) -> None:
        name = self._lid_field.pop(lid, None)
        if name is None:
            raise KeyError(f"no meta listener {lid}")
        self._listeners[name] = [
            (i, cb) for i, cb in self._listeners[name] if i != lid]

    def snapshot(self) -> dict:
        """JSON-able view of the non-procedure fields."""
        out = {}
        for name, kind in self._kinds.items():
            if kind == "procedure":
                continue
            value = self._values[name]
            if kind == "rect":
                out[name] = list(value.as_tuple())
            elif kind == "vector":
                out[name] = list(value)
            else:
                out[name] = value
        return out


def new_meta(fields: Optional[Mapping[str, Any]] = None, meta_id: str = "meta") -> MetaObject:
    return MetaObject(fields, meta_id)
