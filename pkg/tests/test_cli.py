import json
import subprocess
import sys

from linkbrush.cli import main


def test_bench_cli(capsys, tmp_path):
    code = main(["bench", "--points", "500", "--steps", "5",
                 "--out", str(tmp_path / "b.csv"), "--no-figures"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["points"] == 500 and summary["main_dirty"] == 0
    assert (tmp_path / "b.csv").exists()


def test_replay_cli(capsys, tmp_path, demo_dir):
    out = tmp_path / "r.csv"
    code = main(["replay", "--config", str(demo_dir / "config.json"),
                 "--script", str(demo_dir / "brush_cars.jsonl"),
                 "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["events"] == 8
    assert summary["errors"] == 0
    assert out.exists()
    assert (tmp_path / "r_latency.png").exists()


def test_replay_cli_bad_config(capsys, tmp_path):
    code = main(["replay", "--config", str(tmp_path / "missing.json"),
                 "--script", str(tmp_path / "missing.jsonl"),
                 "--out", str(tmp_path / "out.csv")])
    assert code == 1
    assert "replay" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "linkbrush.cli", "bench", "--points", "100",
         "--steps", "2", "--no-figures"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["steps"] == 2
