"""Command line: serve a session, replay a script, or benchmark brushing."""
from __future__ import annotations

import argparse
import json
import sys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkbrush",
        description="Reactive linked-views plotting engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="serve a session over websockets")
    p_serve.add_argument("--config", required=True, help="session config (JSON)")
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--host", default="127.0.0.1")

    p_replay = sub.add_parser(
        "replay", help="run a protocol script headlessly and report metrics")
    p_replay.add_argument("--config", required=True)
    p_replay.add_argument("--script", required=True,
                          help="line-delimited JSON, one message per line")
    p_replay.add_argument("--out", required=True,
                          help="CSV report path; figures land beside it")
    p_replay.add_argument("--no-figures", action="store_true")

    p_bench = sub.add_parser(
        "bench", help="measure brush resolution latency on synthetic points")
    p_bench.add_argument("--points", type=int, required=True)
    p_bench.add_argument("--steps", type=int, required=True)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", help="optional CSV of per-step latencies")
    p_bench.add_argument("--no-figures", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            from .server import serve
            serve(args.config, args.port, args.host)
            return 0
        if args.command == "replay":
            from .replay import replay_command
            report = replay_command(args.config, args.script, args.out,
                                    figures=not args.no_figures)
            summary = report.percentiles()
            summary["events"] = len(report.records)
            errors = [r for r in report.records if r.error]
            summary["errors"] = len(errors)
            print(json.dumps(summary, sort_keys=True))
            return 0
        if args.command == "bench":
            from .replay import bench_command
            report = bench_command(args.points, args.steps, args.seed,
                                   args.out, figures=not args.no_figures)
            print(json.dumps(report.summary(), sort_keys=True))
            return 0
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # diagnostics over tracebacks for operators
        print(f"linkbrush {args.command}: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
