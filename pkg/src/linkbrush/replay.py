"""Headless drivers: script replay with a metrics report, and the brush
latency benchmark.

Both paths write delimited output plus matplotlib figures next to it when an
output path is given, and are deterministic for a fixed config/seed (wall
clock timings aside).
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .plots import ScatterPlot
from .session import Session, wire_json
from .table import augment


@dataclass
class EventRecord:
    index: int
    mtype: str
    kind: str
    latency_ms: float
    scene_diffs: int
    dirty_layers: dict[str, int]
    listener_calls: int
    error: Optional[str] = None


@dataclass
class ReplayReport:
    records: list[EventRecord] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    def latencies(self) -> np.ndarray:
        return np.array([r.latency_ms for r in self.records], dtype=np.float64)

    def percentiles(self) -> dict:
        lat = self.latencies()
        if lat.size == 0:
            return {"p50": 0.0, "p95": 0.0, "max": 0.0}
        return {
            "p50": float(np.percentile(lat, 50)),
            "p95": float(np.percentile(lat, 95)),
            "max": float(lat.max()),
        }

    def total_dirty(self, layer: str) -> int:
        return sum(r.dirty_layers.get(layer, 0) for r in self.records)

    def to_csv(self, path) -> None:
        layer_names = sorted({n for r in self.records for n in r.dirty_layers})
        with open(path, "w", encoding="utf-8") as fh:
            header = ["event", "type", "kind", "latency_ms", "scene_diffs",
                      "listener_calls"]
            header += [f"dirty_{name}" for name in layer_names]
            header.append("error")
            fh.write(",".join(header) + "\n")
            for r in self.records:
                row = [str(r.index), r.mtype, r.kind, f"{r.latency_ms:.3f}",
                       str(r.scene_diffs), str(r.listener_calls)]
                row += [str(r.dirty_layers.get(name, 0)) for name in layer_names]
                row.append(r.error or "")
                fh.write(",".join(row) + "\n")

    def save_figures(self, stem: Path) -> list[Path]:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        written = []
        lat = self.latencies()
        if lat.size:
            fig, ax = plt.subplots(figsize=(7, 3.5))
            ax.plot(np.arange(1, lat.size + 1), lat, lw=1.0, color="#31688e")
            ax.set_xlabel("event")
            ax.set_ylabel("latency [ms]")
            ax.set_title("propagation latency per event")
            fig.tight_layout()
            path = stem.with_name(stem.name + "_latency.png")
            fig.savefig(path, dpi=110)
            plt.close(fig)
            written.append(path)

            layer_names = sorted({n for r in self.records for n in r.dirty_layers})
            if layer_names:
                fig, ax = plt.subplots(figsize=(5, 3.5))
                totals = [self.total_dirty(name) for name in layer_names]
                ax.bar(layer_names, totals, color="#9aa7b8")
                ax.set_ylabel("dirty layer emissions")
                ax.set_title("layer redraw pressure")
                fig.tight_layout()
                path = stem.with_name(stem.name + "_layers.png")
                fig.savefig(path, dpi=110)
                plt.close(fig)
                written.append(path)
        return written


def _dirty_counts(replies: list[dict]) -> tuple[int, dict[str, int]]:
    diffs = 0
    dirty: dict[str, int] = {}
    for msg in replies:
        if msg["type"] in ("scene_diff", "scene_full"):
            diffs += 1
            for name in msg["payload"].layer_names():
                dirty[name] = dirty.get(name, 0) + 1
    return diffs, dirty


def run_replay(session: Session, script_lines, collect_messages: bool = False) -> ReplayReport:
    """Execute a line-delimited JSON script against a session.

    Each line is one client message. The report carries one record per line:
    latency (receipt to all SceneDiffs computed), scene diff count, per-layer
    dirty counts and listener invocations.
    """
    report = ReplayReport()
    for index, line in enumerate(script_lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"script line {index}: bad JSON ({exc})") from None
        calls_before = session.stats()["listener_calls"]
        t0 = time.perf_counter()
        replies = session.handle_message(msg)
        latency_ms = (time.perf_counter() - t0) * 1000.0
        diffs, dirty = _dirty_counts(replies)
        error = None
        for reply in replies:
            if reply["type"] == "error":
                error = reply["payload"]["message"]
        report.records.append(EventRecord(
            index=index,
            mtype=msg.get("type", "?"),
            kind=(msg.get("payload") or {}).get("kind", ""),
            latency_ms=latency_ms,
            scene_diffs=diffs,
            dirty_layers=dirty,
            listener_calls=session.stats()["listener_calls"] - calls_before,
            error=error,
        ))
        if collect_messages:
            report.messages.extend(wire_json(reply) for reply in replies)
    return report


def replay_command(config_path, script_path, out_path=None,
                   figures: bool = True) -> ReplayReport:
    session = Session.from_config_file(config_path)
    with open(script_path, "r", encoding="utf-8") as fh:
        report = run_replay(session, fh)
    if out_path is not None:
        out = Path(out_path)
        report.to_csv(out)
        if figures:
            report.save_figures(out.with_suffix(""))
    return report


@dataclass
class BenchReport:
    points: int
    steps: int
    samples_ms: list[float]
    main_dirty: int  # must stay 0: brushing never touches the main layer

    def summary(self) -> dict:
        arr = np.array(self.samples_ms, dtype=np.float64)
        return {
            "points": self.points,
            "steps": self.steps,
            "p50_ms": float(np.percentile(arr, 50)) if arr.size else 0.0,
            "p95_ms": float(np.percentile(arr, 95)) if arr.size else 0.0,
            "max_ms": float(arr.max()) if arr.size else 0.0,
            "main_dirty": self.main_dirty,
        }

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("step,latency_ms\n")
            for i, ms in enumerate(self.samples_ms, start=1):
                fh.write(f"{i},{ms:.3f}\n")

    def save_figures(self, stem: Path) -> list[Path]:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        arr = np.array(self.samples_ms)
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.hist(arr, bins=min(30, max(5, len(arr) // 3)), color="#31688e")
        ax.set_xlabel("latency [ms]")
        ax.set_ylabel("steps")
        ax.set_title(f"brush resolution latency, n={self.points}")
        fig.tight_layout()
        path = stem.with_name(stem.name + "_bench.png")
        fig.savefig(path, dpi=110)
        plt.close(fig)
        return [path]


def run_bench(points: int, steps: int, seed: int = 0) -> BenchReport:
    """Random brush resolutions over a uniform scatter of ``points`` rows.

    Per step: hit-test a random rectangle, assign ``.brushed``, dispatch
    listeners, emit the brush-layer SceneDiff. The sample is the wall time of
    those four stages together.
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    rng = np.random.default_rng(seed)
    table = augment({
        "x": rng.uniform(0.0, 1.0, points),
        "y": rng.uniform(0.0, 1.0, points),
    }, table_id="bench")
    plot = ScatterPlot("bench_scatter", table, "x", "y")
    plot.scene(full=True)
    plot.hit_test_rect((0.0, 1.0, 0.0, 1.0))  # build the index outside the clock
    samples = []
    main_dirty = 0
    for _ in range(steps):
        xs = np.sort(rng.uniform(0.0, 1.0, 2))
        ys = np.sort(rng.uniform(0.0, 1.0, 2))
        t0 = time.perf_counter()
        rows = plot.hit_test_rect((xs[0], xs[1], ys[0], ys[1]))
        table.set_brushed(rows, "replace")
        if plot.layers["main"].dirty:
            main_dirty += 1
        diff = plot.scene()
        samples.append((time.perf_counter() - t0) * 1000.0)
        assert "brush" in diff.layers
    return BenchReport(points=points, steps=steps, samples_ms=samples,
                       main_dirty=main_dirty)


def bench_command(points: int, steps: int, seed: int = 0,
                  out_path=None, figures: bool = True) -> BenchReport:
    report = run_bench(points, steps, seed)
    if out_path is not None:
        out = Path(out_path)
        report.to_csv(out)
        if figures:
            report.save_figures(out.with_suffix(""))
    return report
