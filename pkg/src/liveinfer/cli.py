"""Command-line entry points: benchmark sweeps, trace replay, and the
session service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .config import ConfigError, RunConfig, apply_overrides, load_run_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUN = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liveinfer",
        description="Simultaneous inference on streaming input: benchmark, replay, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("bench", help="run live/baseline benchmark sweeps")
    p_bench.add_argument(
        "--config", "--models", dest="config", required=True, help="TOML run config"
    )
    p_bench.add_argument("--mode", choices=["live", "baseline", "both"])
    p_bench.add_argument("--format", help="prompt format, e.g. UA-SPI")
    p_bench.add_argument("--granularity", help="sentence | clause | word | char")
    p_bench.add_argument("--n", type=int, help="questions to sample")
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--cpm", type=float, dest="chars_per_min", help="typing speed")
    p_bench.add_argument("--clock", choices=["virtual", "real"])
    p_bench.add_argument("--workers", type=int)
    p_bench.add_argument("--out", dest="out_dir", help="report output directory")
    p_bench.add_argument("--dataset", help="question JSONL (overrides config)")

    p_replay = sub.add_parser("replay", help="pretty-print a session trace")
    p_replay.add_argument("trace", help="SessionResult JSON file")

    p_serve = sub.add_parser("serve", help="run the live session service")
    p_serve.add_argument("--config", "--models", dest="config", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    return parser


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        cfg = load_run_config(args.config)
        apply_overrides(
            cfg,
            mode=args.mode,
            format=args.format,
            granularity=args.granularity,
            n=args.n,
            seed=args.seed,
            chars_per_min=args.chars_per_min,
            clock=args.clock,
            workers=args.workers,
            out_dir=args.out_dir,
            dataset=args.dataset,
        )
        cfg.validate()
        if cfg.dataset is None:
            raise ConfigError("no dataset configured (set 'dataset' or pass --dataset)")
        if not Path(cfg.dataset).exists():
            raise ConfigError(f"dataset not found: {cfg.dataset}")
        questions = bench.load_dataset(cfg.dataset)
        session_cfg = cfg.session_config()
        bank = bench.load_script_bank(cfg.scripts) if cfg.scripts else None
        if bank is None and any(
            cfg.models[m].backend == "mock" for m in (cfg.inference_model, cfg.output_model)
        ):
            raise ConfigError("mock models need a script bank (set 'scripts')")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    modes = ["baseline", "live"] if cfg.mode == "both" else [cfg.mode]
    out_dir = Path(cfg.out_dir)
    reports = {}
    try:
        for mode in modes:
            reports[mode] = bench.evaluate(
                questions,
                session_cfg,
                mode,
                cfg.n,
                cfg.seed,
                chars_per_min=cfg.chars_per_min,
                clock_mode=cfg.clock,
                script_bank=bank,
                mock_latencies=cfg.mock_latencies,
                workers=cfg.workers,
                trace_dir=out_dir / "traces" / mode,
                config_echo=cfg.echo(),
            )
    except Exception as exc:  # noqa: BLE001 - sweep-level failure is a coded exit
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN

    if "live" in reports and "baseline" in reports:
        bench.attach_speedup(reports["live"], reports["baseline"])

    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"{'mode':8s} {'format':7s} {'gran.':8s} results")
    for mode, report in reports.items():
        report.write_json(out_dir / f"report_{mode}.json")
        report.write_csv(out_dir / f"report_{mode}.csv")
        print(report.summary_line())
    print(f"reports written to {out_dir}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        trace = json.loads(Path(args.trace).read_text(encoding="utf-8"))
        steps = trace["steps"]
        if not steps:
            raise ValueError("trace has no steps")
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot replay {args.trace}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"{'step':>4s}  {'stage':9s} {'action':9s} {'model':14s} "
          f"{'start':>9s} {'end':>9s} {'busy':>7s}  text")
    for i, step in enumerate(steps):
        completion = step["completion"]
        text = (step["action"].get("text") or completion["text"]).replace("\n", " ")
        if len(text) > 48:
            text = text[:45] + "..."
        print(
            f"{i:>4d}  {step['stage']:9s} {step['action']['kind']:9s} "
            f"{step['model_id']:14s} {completion['t_start']:>9.3f} "
            f"{completion['t_end']:>9.3f} {completion['busy_s']:>7.3f}  {text}"
        )
    print(
        f"\nresponse: {trace['response']!r}\n"
        f"latency {trace['latency_s']:.3f}s | compute {trace['compute_s']:.3f}s | "
        f"input {trace['input_s']:.3f}s"
    )
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    try:
        cfg = load_run_config(args.config)
        app = build_app(cfg, ui_dir=cfg.ui_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except OSError as exc:
        print(f"error: server failed to start: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit:
        print(
            f"error: server failed to start (is {args.host}:{args.port} already in use?)",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench":
        return cmd_bench(args)
    if args.command == "replay":
        return cmd_replay(args)
    if args.command == "serve":
        return cmd_serve(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
