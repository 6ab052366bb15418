"""Sessions: tables, plots and links behind a JSON message protocol.

Client messages: hello, input_event, api_set, api_get, register_link.
Engine messages: scene_full, scene_diff, query_result, api_value, error.

Every message carries an envelope {type, session, seq}; client seq must be
strictly increasing per connection. After each handled message the session
emits one scene_diff per plot holding dirty layers, which makes one
propagation cycle per input event observable on the wire.

All handling is synchronous on the caller's thread: the session is the
single writer for its tables and metas.
"""
from __future__ import annotations

import itertools
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .csvio import load_csv
from .interaction import InputEvent, PlotController, api_get, api_set
from .links import LinkEngine, LinkSpec
from .meta import Limits
from .plots import (BarPlot, HistogramPlot, PlotModel, ScatterPlot, SceneDiff)
from .table import ReactiveTable, augment

CLIENT_TYPES = ("hello", "input_event", "api_set", "api_get", "register_link")
POINTER_KINDS = ("pointer-down", "pointer-move", "pointer-up")


class ProtocolError(ValueError):
    pass


def generate_synthetic(spec: dict) -> dict:
    """Deterministic synthetic columns from a config entry."""
    rows = int(spec["rows"])
    rng = np.random.default_rng(spec.get("seed", 0))
    data = {}
    for name, col in spec["columns"].items():
        dist = col.get("dist", "uniform")
        if dist == "uniform":
            data[name] = rng.uniform(col.get("low", 0.0), col.get("high", 1.0), rows)
        elif dist == "normal":
            data[name] = rng.normal(col.get("mean", 0.0), col.get("sd", 1.0), rows)
        elif dist == "choice":
            values = [str(v) for v in col["values"]]
            probs = col.get("probs")
            picks = rng.choice(len(values), size=rows, p=probs)
            data[name] = [values[i] for i in picks]
        else:
            raise ValueError(f"unknown synthetic distribution {dist!r}")
    return data


class Session:
    def __init__(self, session_id: str = "default"):
        self.id = session_id
        self.tables: dict[str, ReactiveTable] = {}
        self.plots: dict[str, PlotModel] = {}
        self.links = LinkEngine(self.tables)
        self.controllers: dict[str, PlotController] = {}
        self._out_seq = itertools.count(1)
        self._conn_seq: dict[str, int] = {}

    # -- construction ------------------------------------------------------

    def add_table(self, table_id: str, data) -> ReactiveTable:
        if table_id in self.tables:
            raise ValueError(f"duplicate table id {table_id!r}")
        table = data if isinstance(data, ReactiveTable) else augment(data, table_id)
        self.tables[table_id] = table
        return table

    def add_plot(self, plot: PlotModel) -> PlotModel:
        if plot.id in self.plots:
            raise ValueError(f"duplicate plot id {plot.id!r}")
        self.plots[plot.id] = plot
        self.controllers[plot.id] = PlotController(plot)
        return plot

    def scatter(self, plot_id: str, table_id: str, x: str, y: str) -> ScatterPlot:
        return self.add_plot(ScatterPlot(plot_id, self._table(table_id), x, y))

    def histogram(self, plot_id: str, table_id: str, var: str,
                  binwidth=None, anchor=None) -> HistogramPlot:
        return self.add_plot(
            HistogramPlot(plot_id, self._table(table_id), var, binwidth, anchor))

    def bar(self, plot_id: str, table_id: str, var: str, spine=False) -> BarPlot:
        return self.add_plot(BarPlot(plot_id, self._table(table_id), var, spine))

    def register_link(self, spec) -> str:
        if isinstance(spec, dict):
            spec = LinkSpec(
                link_id=spec.get("id") or spec.get("link_id") or f"link{len(self.links.links()) + 1}",
                kind=spec["kind"],
                source=spec["source"],
                target=spec["target"],
                source_key=spec.get("source_key"),
                target_key=spec.get("target_key"),
                vars=tuple(spec.get("vars", ())),
                k=int(spec.get("k", 1)),
                metric=spec.get("metric", "euclidean"),
                standardize=bool(spec.get("standardize", False)),
            )
        return self.links.register_link(spec)

    @classmethod
    def from_config(cls, config: dict, base_dir: Optional[Path] = None) -> "Session":
        base = Path(base_dir) if base_dir else Path.cwd()
        session = cls(config.get("session", "default"))
        for entry in config.get("tables", []):
            table_id = entry["id"]
            if "csv" in entry:
                path = Path(entry["csv"])
                if not path.is_absolute():
                    path = base / path
                session.add_table(table_id, load_csv(path))
            elif "synthetic" in entry:
                session.add_table(table_id, generate_synthetic(entry["synthetic"]))
            else:
                raise ValueError(f"table {table_id!r} needs a csv path or synthetic spec")
        for entry in config.get("plots", []):
            kind = entry["kind"]
            if kind == "scatter":
                session.scatter(entry["id"], entry["table"], entry["x"], entry["y"])
            elif kind == "histogram":
                session.histogram(entry["id"], entry["table"], entry["var"],
                                  entry.get("binwidth"), entry.get("anchor"))
            elif kind in ("bar", "spine"):
                session.bar(entry["id"], entry["table"], entry["var"],
                            spine=(kind == "spine" or entry.get("spine", False)))
            else:
                raise ValueError(f"unknown plot kind {kind!r}")
        for entry in config.get("links", []):
            session.register_link(entry)
        for plot in session.plots.values():
            plot.scene(full=True)  # settle the initial dirty flags
        return session

    @classmethod
    def from_config_file(cls, path) -> "Session":
        path = Path(path)
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
        return cls.from_config(config, base_dir=path.parent)

    def _table(self, table_id: str) -> ReactiveTable:
        try:
            return self.tables[table_id]
        except KeyError:
            raise KeyError(f"unknown table {table_id!r}") from None

    def _plot(self, plot_id: str) -> PlotModel:
        try:
            return self.plots[plot_id]
        except KeyError:
            raise KeyError(f"unknown plot {plot_id!r}") from None

    # -- outbound ------------------------------------------------------------

    def _msg(self, mtype: str, payload, reply_to: Optional[int] = None) -> dict:
        msg = {"type": mtype, "session": self.id, "seq": next(self._out_seq),
               "payload": payload}
        if reply_to is not None:
            msg["reply_to"] = reply_to
        return msg

    def scenes_full(self) -> list[dict]:
        return [self._msg("scene_full", plot.scene(full=True))
                for plot in self.plots.values()]

    def collect_diffs(self) -> list[dict]:
        out = []
        for plot in self.plots.values():
            if plot.dirty_layers():
                out.append(self._msg("scene_diff", plot.scene()))
        return out

    # -- inbound ---------------------------------------------------------------

    def handle_message(self, msg: dict, connection: str = "default") -> list[dict]:
        """Process one client message; returns the engine's replies.

        Protocol violations and engine rejections come back as error messages;
        the connection survives.
        """
        try:
            mtype, seq = self._check_envelope(msg, connection)
        except ProtocolError as exc:
            return [self._msg("error", {"message": str(exc)})]
        try:
            return self._dispatch(mtype, seq, msg.get("payload") or {})
        except (ValueError, KeyError, TypeError) as exc:
            return [self._msg("error", {"message": str(exc)}, reply_to=seq)]

    def _check_envelope(self, msg: dict, connection: str):
        if not isinstance(msg, dict):
            raise ProtocolError("message must be a JSON object")
        mtype = msg.get("type")
        if mtype not in CLIENT_TYPES:
            raise ProtocolError(f"unknown message type {mtype!r}")
        if "session" in msg and msg["session"] != self.id:
            raise ProtocolError(f"unknown session {msg['session']!r}")
        seq = msg.get("seq")
        if not isinstance(seq, int):
            raise ProtocolError("missing integer seq")
        last = self._conn_seq.get(connection, 0)
        if seq <= last:
            raise ProtocolError(f"seq {seq} not greater than {last}")
        self._conn_seq[connection] = seq
        return mtype, seq

    def _dispatch(self, mtype: str, seq: int, payload: dict) -> list[dict]:
        if mtype == "hello":
            return self.scenes_full()
        if mtype == "api_set":
            target = self._api_target(payload["target"])
            api_set(target, payload["path"], payload["value"])
            return self.collect_diffs()
        if mtype == "api_get":
            target = self._api_target(payload["target"])
            value = api_get(target, payload["path"])
            reply = self._msg("api_value", {
                "target": payload["target"], "path": payload["path"],
                "value": value}, reply_to=seq)
            return [reply] + self.collect_diffs()
        if mtype == "register_link":
            link_id = self.register_link(payload)
            reply = self._msg("api_value", {"link": link_id}, reply_to=seq)
            return [reply] + self.collect_diffs()
        # input_event
        plot = self._plot(payload["plot"])
        event = self._decode_event(plot, payload)
        if event.kind == "query":
            radius = self._pick_radius(plot, payload)
            result = plot.query(event.pos, radius)
            reply = self._msg("query_result", {
                "plot": plot.id, "pos": list(event.pos), "result": result},
                reply_to=seq)
            return [reply] + self.collect_diffs()
        self.controllers[plot.id].handle(event)
        return self.collect_diffs()

    def _api_target(self, target_id: str):
        if target_id in self.tables:
            return self.tables[target_id]
        if target_id in self.plots:
            return self.plots[target_id]
        raise KeyError(f"unknown api target {target_id!r}")

    def _decode_event(self, plot: PlotModel, payload: dict) -> InputEvent:
        kind = payload.get("kind")
        if kind not in POINTER_KINDS + ("wheel", "key", "query"):
            raise ValueError(f"unknown input event kind {kind!r}")
        pos = None
        if kind != "key":
            pos = self._to_data(plot, payload)
        return InputEvent(
            kind=kind,
            pos=pos,
            wheel=float(payload.get("wheel", 0.0)),
            key=payload.get("key"),
            modifiers=tuple(payload.get("modifiers", ())),
        )

    def _to_data(self, plot: PlotModel, payload: dict) -> tuple[float, float]:
        """Engine-authoritative pixel-to-data conversion through the plot's
        current limits. Scripts may bypass it with a data_pos."""
        if "data_pos" in payload:
            x, y = payload["data_pos"]
        else:
            if "pos" not in payload or "viewport" not in payload:
                raise ValueError("input event needs pos+viewport (or data_pos)")
            px, py = payload["pos"]
            vw, vh = payload["viewport"]
            if vw <= 0 or vh <= 0:
                raise ValueError(f"bad viewport [{vw}, {vh}]")
            limits: Limits = plot.meta.get("limits")
            x = limits.xmin + (px / vw) * limits.xspan
            y = limits.ymax - (py / vh) * limits.yspan
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite event position [{x}, {y}]")
        return x, y

    def _pick_radius(self, plot: PlotModel, payload: dict):
        if "viewport" not in payload:
            return None
        vw, vh = payload["viewport"]
        limits: Limits = plot.meta.get("limits")
        return (8.0 / vw * limits.xspan, 8.0 / vh * limits.yspan)

    # -- utilities -----------------------------------------------------------

    def stats(self) -> dict:
        return {
            "notices": sum(t.stats["notices"] for t in self.tables.values()),
            "listener_calls": sum(t.stats["listener_calls"] for t in self.tables.values()),
        }


def wire(msg: dict) -> dict:
    """Make a session message JSON-able (SceneDiff payloads serialize late)."""
    payload = msg.get("payload")
    if isinstance(payload, SceneDiff):
        msg = dict(msg)
        msg["payload"] = payload.to_obj()
    return msg


def wire_json(msg: dict) -> str:
    return json.dumps(wire(msg), sort_keys=True)
