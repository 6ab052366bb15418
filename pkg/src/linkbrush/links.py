"""Cross-table brush propagation.

Plots sharing one table are linked for free through the shared ``.brushed``
column. Everything else goes through registered links: identity (row index),
categorical (shared key values) and kNN (metric neighborhood expansion,
self-link only).

Propagation rides the tables' own notifications. A user brush starts an
epoch; every link-engine write is stamped with that epoch, and per epoch each
table is engine-written at most once (the origin table only by its own
self-link). Cyclic link graphs therefore quiesce after at most one write per
table, regardless of topology.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .table import BRUSH_COL, ChangeNotice, ReactiveTable

log = logging.getLogger(__name__)

LINK_KINDS = ("identity", "categorical", "knn")
METRICS = ("euclidean", "manhattan")


@dataclass(frozen=True)
class LinkSpec:
    """Declaration of how a brush change in ``source`` lands in ``target``."""

    link_id: str
    kind: str
    source: str
    target: str
    source_key: Optional[str] = None
    target_key: Optional[str] = None
    vars: tuple[str, ...] = ()
    k: int = 1
    metric: str = "euclidean"
    standardize: bool = False


def resolve_categorical(table: ReactiveTable, key: str, seed_rows) -> np.ndarray:
    """Expand a row set to every row sharing a category with it.

    Superset of the seeds, idempotent. Seed rows with a missing key stay in
    the result but recruit nothing.
    """
    col = table.column(key)
    if col.kind != "categorical":
        raise ValueError(f"column {key!r} is not categorical")
    seeds = np.asarray(sorted(set(int(r) for r in seed_rows)), dtype=np.int64)
    if seeds.size == 0:
        return seeds
    codes = col.values
    seed_codes = np.unique(codes[seeds][~col.missing[seeds]])
    expanded = np.isin(codes, seed_codes) & ~col.missing
    expanded[seeds] = True
    return np.flatnonzero(expanded)


def resolve_knn(table: ReactiveTable, vars: Sequence[str], k: int, metric: str,
                seed_rows, standardize: bool = False) -> np.ndarray:
    """Seeds plus the k nearest rows of each seed.

    Distances use raw values (optionally per-variable standardized); ties
    break toward the lower row index. Rows with a missing value in any of the
    variables are excluded from candidacy (and recruit nothing as seeds).
    """
    if not vars:
        raise ValueError("kNN expansion needs at least one variable")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    cols = [table.column(v) for v in vars]
    for col in cols:
        if col.kind != "numeric":
            raise ValueError(f"kNN variable {col.name!r} must be numeric")
    X = np.column_stack([c.values for c in cols])
    usable = ~np.any([c.missing for c in cols], axis=0) & np.all(np.isfinite(X), axis=1)
    if standardize:
        mu = X[usable].mean(axis=0)
        sd = X[usable].std(axis=0)
        sd[sd == 0] = 1.0
        X = (X - mu) / sd
    seeds = np.asarray(sorted(set(int(r) for r in seed_rows)), dtype=np.int64)
    result = set(seeds.tolist())
    candidates = np.flatnonzero(usable)
    for s in seeds.tolist():
        if not usable[s]:
            continue
        others = candidates[candidates != s]
        if others.size == 0:
            continue
        diff = X[others] - X[s]
        if metric == "euclidean":
            dist = np.sqrt(np.sum(diff * diff, axis=1))
        else:
            dist = np.sum(np.abs(diff), axis=1)
        order = np.lexsort((others, dist))
        result.update(others[order[:k]].tolist())
    return np.asarray(sorted(result), dtype=np.int64)


def transfer_categorical(source: ReactiveTable, source_key: str,
                         target: ReactiveTable, target_key: str,
                         source_rows) -> np.ndarray:
    """Target rows whose key label matches any brushed source row's label.

    Matching is exact string equality on level labels, so the two tables may
    order their levels differently.
    """
    scol = source.column(source_key)
    tcol = target.column(target_key)
    if scol.kind != "categorical" or tcol.kind != "categorical":
        raise ValueError("categorical transfer needs categorical keys on both sides")
    rows = np.asarray(sorted(set(int(r) for r in source_rows)), dtype=np.int64)
    if rows.size == 0:
        return rows
    labels = {scol.levels[c] for c in scol.values[rows][~scol.missing[rows]].tolist()}
    wanted = np.array([lvl in labels for lvl in tcol.levels], dtype=bool)
    if not wanted.any():
        return np.empty(0, dtype=np.int64)
    hit = np.zeros(target.nrow, dtype=bool)
    ok = ~tcol.missing
    hit[ok] = wanted[tcol.values[ok]]
    return np.flatnonzero(hit)


@dataclass
class _EpochState:
    epoch: int
    origin: str
    written: set = field(default_factory=set)
    fired: set = field(default_factory=set)


class LinkEngine:
    """Owns the registered links of a session and runs propagation."""

    def __init__(self, tables: Mapping[str, ReactiveTable]):
        self._tables = tables
        self._links: dict[str, LinkSpec] = {}
        self._by_source: dict[str, list[str]] = {}
        self._listening: set[str] = set()
        self._state: Optional[_EpochState] = None

    def register_link(self, spec: LinkSpec) -> str:
        """Validate and activate a link; installs a ``.brushed`` listener on
        the source table."""
        if spec.link_id in self._links:
            raise ValueError(f"duplicate link id {spec.link_id!r}")
        if spec.kind not in LINK_KINDS:
            raise ValueError(f"unknown link kind {spec.kind!r}")
        source = self._table(spec.source)
        target = self._table(spec.target)
        if spec.kind == "categorical":
            if not spec.source_key or not spec.target_key:
                raise ValueError("categorical link needs source_key and target_key")
            if source.column(spec.source_key).kind != "categorical":
                raise ValueError(f"source key {spec.source_key!r} is not categorical")
            if target.column(spec.target_key).kind != "categorical":
                raise ValueError(f"target key {spec.target_key!r} is not categorical")
        elif spec.kind == "knn":
            if spec.source != spec.target:
                raise ValueError("kNN links expand within one table (source must equal target)")
            if not spec.vars:
                raise ValueError("kNN link needs a variable list")
            for v in spec.vars:
                if source.column(v).kind != "numeric":
                    raise ValueError(f"kNN variable {v!r} must be numeric")
            if not 1 <= spec.k < source.nrow:
                raise ValueError(f"k must be in [1, nrow), got {spec.k}")
            if spec.metric not in METRICS:
                raise ValueError(f"unknown metric {spec.metric!r}")
        elif spec.kind == "identity":
            if spec.source != spec.target and source.nrow != target.nrow:
                raise ValueError("identity link needs equal row counts")
        self._links[spec.link_id] = spec
        self._by_source.setdefault(spec.source, []).append(spec.link_id)
        if spec.source not in self._listening:
            self._listening.add(spec.source)
            source.add_listener(
                lambda notice, sid=spec.source: self._on_brush(sid, notice),
                watched={BRUSH_COL})
        return spec.link_id

    def links(self) -> list[LinkSpec]:
        return list(self._links.values())

    def _table(self, table_id: str) -> ReactiveTable:
        try:
            return self._tables[table_id]
        except KeyError:
            raise KeyError(f"unknown table {table_id!r}") from None

    # -- propagation -----------------------------------------------------

    def _on_brush(self, source_id: str, notice: ChangeNotice) -> None:
        state = self._state
        if state is None or state.epoch != notice.epoch:
            state = self._state = _EpochState(epoch=notice.epoch, origin=source_id)
        self.propagate(source_id, notice, state)

    def propagate(self, source_id: str, notice: ChangeNotice,
                  state: _EpochState) -> None:
        for link_id in list(self._by_source.get(source_id, [])):
            spec = self._links[link_id]
            if link_id in state.fired:
                continue
            if spec.target in state.written:
                log.debug("epoch %s: %s already written, skipping link %s",
                          state.epoch, spec.target, link_id)
                continue
            if spec.target == state.origin and spec.target != spec.source:
                log.debug("epoch %s: not writing back to origin %s via %s",
                          state.epoch, spec.target, link_id)
                continue
            if spec.kind == "identity" and spec.source == spec.target:
                state.fired.add(link_id)
                continue  # implicit: same .brushed column already shared
            source = self._table(source_id)
            target = self._table(spec.target)
            rows = source.brushed_rows()
            expanded = self._resolve(spec, source, target, rows)
            state.fired.add(link_id)
            state.written.add(spec.target)
            # recursive notifications reuse this epoch and hit the guards
            target.set_brushed(expanded, "replace", epoch=state.epoch)

    def _resolve(self, spec: LinkSpec, source, target, rows) -> np.ndarray:
        if spec.kind == "identity":
            return rows
        if spec.kind == "categorical":
            if spec.source == spec.target and spec.source_key == spec.target_key:
                return resolve_categorical(source, spec.source_key, rows)
            return transfer_categorical(
                source, spec.source_key, target, spec.target_key, rows)
        return resolve_knn(source, list(spec.vars), spec.k, spec.metric, rows,
                           spec.standardize)
