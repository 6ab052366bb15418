import json

import numpy as np
import pytest

from linkbrush.session import Session, generate_synthetic, wire_json


def make_session(demo_dir):
    config = json.loads((demo_dir / "config.json").read_text())
    return Session.from_config(config, base_dir=demo_dir)


def msg(mtype, seq, payload=None, session="demo"):
    out = {"type": mtype, "session": session, "seq": seq}
    if payload is not None:
        out["payload"] = payload
    return out


class TestConfig:
    def test_demo_config_builds(self, demo_dir):
        session = make_session(demo_dir)
        assert set(session.tables) == {"cars", "homes"}
        assert len(session.plots) == 5
        assert session.tables["homes"].nrow == 400

    def test_synthetic_determinism(self):
        spec = {"rows": 50, "seed": 9,
                "columns": {"x": {"dist": "uniform"},
                            "g": {"dist": "choice", "values": ["a", "b"]}}}
        a, b = generate_synthetic(spec), generate_synthetic(spec)
        assert np.array_equal(a["x"], b["x"])
        assert a["g"] == b["g"]

    def test_bad_plot_kind_rejected(self, demo_dir):
        with pytest.raises(ValueError):
            Session.from_config({
                "tables": [{"id": "t", "csv": str(demo_dir / "cars.csv")}],
                "plots": [{"id": "p", "kind": "mosaic", "table": "t"}],
            })


class TestProtocol:
    def test_hello_returns_full_scenes(self, demo_dir):
        session = make_session(demo_dir)
        replies = session.handle_message(msg("hello", 1))
        assert [r["type"] for r in replies] == ["scene_full"] * 5
        decoded = json.loads(wire_json(replies[0]))
        assert decoded["payload"]["full"] is True

    def test_brush_event_diffs_brush_layers_of_same_table_plots(self, demo_dir):
        session = make_session(demo_dir)
        session.handle_message(msg("hello", 1))
        replies = session.handle_message(msg("input_event", 2, {
            "plot": "cars_scatter", "kind": "pointer-down",
            "data_pos": [3.5, 125.0]}))
        replies += session.handle_message(msg("input_event", 3, {
            "plot": "cars_scatter", "kind": "pointer-move",
            "data_pos": [7.5, 0.0]}))
        diffs = [r for r in replies if r["type"] == "scene_diff"]
        plots = {r["payload"].plot_id for r in diffs}
        assert plots <= {"cars_scatter", "cars_hist"}
        for r in diffs:
            assert r["payload"].layer_names() == ["brush"]
        assert session.tables["cars"].brushed_rows().tolist() == [0, 1, 2, 3]

    def test_one_diff_per_dirty_plot(self, demo_dir):
        session = make_session(demo_dir)
        session.handle_message(msg("hello", 1))
        replies = session.handle_message(msg("api_set", 2, {
            "target": "cars", "path": ".brushed", "value": [True] * 50}))
        dirty_plots = [r["payload"].plot_id for r in replies
                       if r["type"] == "scene_diff"]
        assert sorted(dirty_plots) == ["cars_hist", "cars_scatter"]

    def test_pixel_conversion_through_limits(self, demo_dir):
        session = make_session(demo_dir)
        session.handle_message(msg("hello", 1))
        plot = session.plots["cars_scatter"]
        limits = plot.meta.get("limits")
        # pixel (0, vh) is the data-space bottom-left corner
        session.handle_message(msg("input_event", 2, {
            "plot": "cars_scatter", "kind": "pointer-down",
            "pos": [0, 480], "viewport": [640, 480]}))
        brush = session.controllers["cars_scatter"].brush
        assert brush.state.rect[0] == pytest.approx(limits.xmin)
        assert brush.state.rect[2] == pytest.approx(limits.ymin)

    def test_query_event_returns_result(self, demo_dir):
        session = make_session(demo_dir)
        session.handle_message(msg("hello", 1))
        replies = session.handle_message(msg("input_event", 2, {
            "plot": "cars_scatter", "kind": "query",
            "data_pos": [4.0, 2.0], "viewport": [640, 480]}))
        result = [r for r in replies if r["type"] == "query_result"][0]
        assert result["payload"]["result"]["row"] == 0
        assert result["reply_to"] == 2

    def test_api_get_value(self, demo_dir):
        session = make_session(demo_dir)
        replies = session.handle_message(msg("api_get", 1, {
            "target": "cars", "path": "speed"}))
        value = replies[0]["payload"]["value"]
        assert value[:3] == [4.0, 4.0, 7.0]

    def test_register_link_via_protocol(self, demo_dir):
        session = make_session(demo_dir)
        replies = session.handle_message(msg("register_link", 1, {
            "id": "beds_self", "kind": "categorical", "source": "homes",
            "target": "homes", "source_key": "beds", "target_key": "beds"}))
        assert replies[0]["payload"]["link"] == "beds_self"
        codes = session.tables["homes"].column("beds")
        session.tables["homes"].set_brushed([0], "replace")
        brushed = session.tables["homes"].brushed_rows()
        label0 = codes.labels()[0]
        expected = [i for i, lab in enumerate(codes.labels()) if lab == label0]
        assert brushed.tolist() == expected

    def test_malformed_message_error_keeps_session_usable(self, demo_dir):
        session = make_session(demo_dir)
        replies = session.handle_message({"type": "nope", "seq": 1})
        assert replies[0]["type"] == "error"
        replies = session.handle_message(msg("hello", 1))
        assert replies[0]["type"] == "scene_full"

    def test_engine_rejection_becomes_error_reply(self, demo_dir):
        session = make_session(demo_dir)
        replies = session.handle_message(msg("api_set", 1, {
            "target": "cars", "path": "nope", "value": [1]}))
        assert replies[0]["type"] == "error"
        assert replies[0]["reply_to"] == 1

    def test_seq_must_increase(self, demo_dir):
        session = make_session(demo_dir)
        session.handle_message(msg("hello", 5))
        replies = session.handle_message(msg("api_get", 5, {
            "target": "cars", "path": "speed"}))
        assert replies[0]["type"] == "error"
        assert "seq" in replies[0]["payload"]["message"]
        # independent connections have independent seq spaces
        replies = session.handle_message(msg("hello", 1), connection="other")
        assert replies[0]["type"] == "scene_full"

    def test_non_finite_position_rejected(self, demo_dir):
        session = make_session(demo_dir)
        replies = session.handle_message(msg("input_event", 1, {
            "plot": "cars_scatter", "kind": "pointer-down",
            "data_pos": [float("nan"), 0.0]}))
        assert replies[0]["type"] == "error"

    def test_wire_is_json_clean(self, demo_dir):
        session = make_session(demo_dir)
        for reply in session.handle_message(msg("hello", 1)):
            encoded = wire_json(reply)
            decoded = json.loads(encoded)
            assert decoded["type"] == "scene_full"
            assert decoded["seq"] == reply["seq"]
