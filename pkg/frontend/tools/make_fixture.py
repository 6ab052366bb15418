"""Record an engine transcript for the browser-client round-trip test.

Builds a two-plot session (scatter + bar over one table), replays the exact
client messages the test will produce (a drag on the scatter, then a hover
query on the bar chart), and snapshots every engine reply. The test drives
the real client code against this transcript through a fake socket.

Run from the repository root:

    python frontend/tools/make_fixture.py
"""
import json
from pathlib import Path

from linkbrush.session import Session, wire

VIEWPORT = [800, 600]
OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "session_transcript.json"

CONFIG = {
    "session": "fixture",
    "tables": [{
        "id": "pts",
        "synthetic": {
            "rows": 80,
            "seed": 2024,
            "columns": {
                "x": {"dist": "uniform", "low": 0.0, "high": 1.0},
                "y": {"dist": "uniform", "low": 0.0, "high": 1.0},
                "g": {"dist": "choice", "values": ["a", "b", "c"],
                      "probs": [0.5, 0.3, 0.2]},
            },
        },
    }],
    "plots": [
        {"id": "sc", "kind": "scatter", "table": "pts", "x": "x", "y": "y"},
        {"id": "bars", "kind": "bar", "table": "pts", "var": "g"},
    ],
}


def data_to_pixel(limits, x, y, vw, vh):
    xmin, xmax, ymin, ymax = limits
    px = (x - xmin) / (xmax - xmin) * vw
    py = (ymax - y) / (ymax - ymin) * vh
    return [px, py]


def main():
    session = Session.from_config(CONFIG)
    connect = [wire(m) for m in session.scenes_full()]

    drag = {"down": [160, 120], "move": [480, 360], "up": [480, 360]}
    bars = session.plots["bars"]
    counts = bars.counts()
    level = bars.levels.index("a")
    hover_pixel = data_to_pixel(bars.meta.get("limits").as_tuple(),
                                float(level), float(counts[level]) / 2.0,
                                VIEWPORT[0], VIEWPORT[1])
    hover_pixel = [round(hover_pixel[0], 3), round(hover_pixel[1], 3)]

    sends = []
    for seq, (kind, pos) in enumerate([
        ("pointer-down", drag["down"]),
        ("pointer-move", drag["move"]),
        ("pointer-up", drag["up"]),
    ], start=1):
        sends.append({
            "type": "input_event", "session": "fixture", "seq": seq,
            "payload": {"plot": "sc", "kind": kind, "pos": pos,
                        "viewport": VIEWPORT, "modifiers": []},
        })
    sends.append({
        "type": "input_event", "session": "fixture", "seq": 4,
        "payload": {"plot": "bars", "kind": "query", "pos": hover_pixel,
                    "viewport": VIEWPORT, "modifiers": []},
    })

    steps = []
    for msg in sends:
        replies = [wire(r) for r in session.handle_message(msg)]
        steps.append({"send": msg, "replies": replies})

    table = session.tables["pts"]
    labels = table.column("g").labels()
    brushed = table.brushed
    count_a = sum(1 for lab in labels if lab == "a")
    brushed_a = sum(1 for lab, b in zip(labels, brushed) if lab == "a" and b)
    expected = {
        "level": "a",
        "count": count_a,
        "brushed": int(brushed_a),
        "proportion": count_a / len(labels),
        "brushed_rows": int(brushed.sum()),
    }
    assert expected["brushed_rows"] > 0, "drag must select something"
    assert 0 < brushed_a, "some 'a' rows must be brushed for the tooltip check"

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "viewport": VIEWPORT,
        "drag": drag,
        "hover_pixel": hover_pixel,
        "expected": expected,
        "connect": connect,
        "steps": steps,
    }, indent=1, sort_keys=True))
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes), "
          f"{expected['brushed_rows']} rows brushed, "
          f"tooltip oracle {expected}")


if __name__ == "__main__":
    main()
