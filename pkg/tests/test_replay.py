import json

import pytest

from linkbrush.replay import (bench_command, replay_command, run_bench,
                              run_replay)
from linkbrush.session import Session


def script_lines(messages):
    return [json.dumps(m) for m in messages]


def brush_script():
    return script_lines([
        {"type": "hello", "session": "demo", "seq": 1},
        {"type": "input_event", "session": "demo", "seq": 2, "payload": {
            "plot": "cars_scatter", "kind": "pointer-down", "data_pos": [3.5, 125.0]}},
        {"type": "input_event", "session": "demo", "seq": 3, "payload": {
            "plot": "cars_scatter", "kind": "pointer-move", "data_pos": [7.5, 0.0]}},
        {"type": "input_event", "session": "demo", "seq": 4, "payload": {
            "plot": "cars_scatter", "kind": "pointer-up", "data_pos": [7.5, 0.0]}},
    ])


def make_session(demo_dir):
    return Session.from_config_file(demo_dir / "config.json")


class TestReplay:
    def test_brush_script_dirties_brush_layers_only(self, demo_dir):
        session = make_session(demo_dir)
        report = run_replay(session, brush_script())
        assert session.tables["cars"].brushed_rows().tolist() == [0, 1, 2, 3]
        brush_events = report.records[1:]
        assert all(r.dirty_layers.get("main", 0) == 0 for r in brush_events)
        assert all(r.dirty_layers.get("brush", 0) >= 1 for r in brush_events)
        assert all(r.listener_calls >= 1 for r in brush_events)

    def test_empty_script_empty_report(self, demo_dir):
        session = make_session(demo_dir)
        report = run_replay(session, [])
        assert report.records == []
        assert report.percentiles() == {"p50": 0.0, "p95": 0.0, "max": 0.0}

    def test_bad_line_reports_line_number(self, demo_dir):
        session = make_session(demo_dir)
        with pytest.raises(ValueError, match="line 2"):
            run_replay(session, ['{"type": "hello", "seq": 1}', "{nope"])

    def test_protocol_error_recorded_not_fatal(self, demo_dir):
        session = make_session(demo_dir)
        lines = script_lines([
            {"type": "hello", "seq": 1},
            {"type": "api_set", "seq": 2,
             "payload": {"target": "cars", "path": "bad", "value": 1}},
            {"type": "api_get", "seq": 3,
             "payload": {"target": "cars", "path": "speed"}},
        ])
        report = run_replay(session, lines)
        assert report.records[1].error is not None
        assert report.records[2].error is None

    def test_command_writes_csv_and_figures(self, demo_dir, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text("\n".join(brush_script()) + "\n")
        out = tmp_path / "report.csv"
        report = replay_command(demo_dir / "config.json", script, out)
        assert out.exists()
        header = out.read_text().splitlines()[0]
        assert header.startswith("event,type,kind,latency_ms")
        assert (tmp_path / "report_latency.png").exists()
        assert (tmp_path / "report_layers.png").exists()
        assert len(report.records) == 4

    def test_demo_script_runs(self, demo_dir, tmp_path):
        out = tmp_path / "demo.csv"
        report = replay_command(demo_dir / "config.json",
                                demo_dir / "brush_cars.jsonl", out)
        assert not any(r.error for r in report.records)
        assert (tmp_path / "demo_latency.png").exists()

    def test_determinism_identical_message_streams(self, demo_dir):
        first = run_replay(make_session(demo_dir), brush_script(),
                           collect_messages=True)
        second = run_replay(make_session(demo_dir), brush_script(),
                            collect_messages=True)
        assert first.messages == second.messages
        assert len(first.messages) > 0


@pytest.mark.slow
def test_large_replay_emits_latency_percentiles():
    config = {
        "session": "big",
        "tables": [{"id": "pts", "synthetic": {
            "rows": 1_000_000, "seed": 5,
            "columns": {"x": {"dist": "uniform"}, "y": {"dist": "uniform"}}}}],
        "plots": [{"id": "sc", "kind": "scatter", "table": "pts",
                   "x": "x", "y": "y"}],
    }
    session = Session.from_config(config)
    rng = __import__("numpy").random.default_rng(6)
    messages = [{"type": "hello", "session": "big", "seq": 1}]
    seq = 1
    for i in range(100):
        seq += 1
        kind = "pointer-down" if i % 2 == 0 else "pointer-move"
        pos = rng.uniform(0.05, 0.95, 2).tolist()
        messages.append({"type": "input_event", "session": "big", "seq": seq,
                         "payload": {"plot": "sc", "kind": kind,
                                     "data_pos": pos}})
    report = run_replay(session, script_lines(messages))
    move_records = report.records[1:]
    assert len(move_records) == 100
    assert all(r.dirty_layers.get("main", 0) == 0 for r in move_records)
    stats = report.percentiles()
    assert 0 < stats["p50"] <= stats["p95"] <= stats["max"]
    assert stats["p95"] <= 100.0  # same desk-scale budget as the benchmark


class TestBench:
    def test_shape(self):
        report = run_bench(points=1000, steps=10, seed=1)
        assert len(report.samples_ms) == 10
        assert report.main_dirty == 0
        summary = report.summary()
        assert summary["points"] == 1000
        assert summary["p95_ms"] >= summary["p50_ms"] >= 0

    def test_single_point(self):
        report = run_bench(points=1, steps=3)
        assert len(report.samples_ms) == 3

    def test_bad_points_rejected(self):
        with pytest.raises(ValueError):
            run_bench(points=0, steps=1)

    def test_bench_command_outputs(self, tmp_path):
        out = tmp_path / "bench.csv"
        report = bench_command(2000, 5, seed=2, out_path=out)
        assert out.exists()
        assert (tmp_path / "bench_bench.png").exists()
        assert len(out.read_text().splitlines()) == 6
        assert report.main_dirty == 0
