"""Command-line entry points: evaluation, reliability probing, serving.

Subcommands:
  eval score  --pairs PAIRS.csv           score a true/pred manifest
  eval infer  --manifest M.csv --backend  run images through a backend, then score
  probe run   --base-url URL              reliability + latency trials
  serve       --port N [--config FILE]    run the local service
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics, probe


def _add_json_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json-out", type=Path, default=None,
                        help="also write the machine-readable report here")


def _write_json(path: Path | None, payload: dict) -> None:
    if path is not None:
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"\nJSON report written to {path}")


def _cmd_eval_score(args: argparse.Namespace) -> int:
    manifest = metrics.load_manifest(args.pairs)
    if manifest.mode != "scoring":
        print("eval score expects a true_label,pred_label manifest", file=sys.stderr)
        return 2
    report = metrics.run_inference_eval(manifest)
    print(metrics.format_report(report))
    _write_json(args.json_out, report.to_json())
    return 0


def _cmd_eval_infer(args: argparse.Namespace) -> int:
    from .emotion import load_backend

    manifest = metrics.load_manifest(args.manifest)
    backend = load_backend(args.backend)
    report = metrics.run_inference_eval(manifest, backend)
    print(metrics.format_report(report))
    _write_json(args.json_out, report.to_json())
    return 0


def _cmd_probe_run(args: argparse.Namespace) -> int:
    if args.plan is not None:
        entries = json.loads(Path(args.plan).read_text(encoding="utf-8"))
        plan = [probe.ProbeSpec(e["endpoint"], int(e["trials"])) for e in entries]
    else:
        plan = probe.default_plan(trials=args.trials, voice_trials=args.voice_trials)
        if args.endpoints:
            wanted = {name.strip() for name in args.endpoints.split(",")}
            plan = [spec for spec in plan if spec.endpoint in wanted]
    report = probe.run_reliability_suite(args.base_url, plan)
    print(probe.format_reliability_table(report))
    if report.voice_traces:
        print()
        print(probe.format_voice_latency_table(report.voice_traces))
    _write_json(args.json_out, report.to_json())
    failed = any(r.failures for r in report.results)
    return 1 if failed else 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import (
        components_from_config,
        create_app,
        default_components,
        start_temp_sweeper,
    )

    if args.config is not None:
        components = components_from_config(args.config)
    else:
        components = default_components(args.data_root)
    app = create_app(components)
    if args.sweep_interval > 0:
        start_temp_sweeper(components, interval_s=args.sweep_interval)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mindmirror")
    commands = parser.add_subparsers(dest="command", required=True)

    eval_cmd = commands.add_parser("eval", help="classification evaluation")
    eval_sub = eval_cmd.add_subparsers(dest="subcommand", required=True)

    score = eval_sub.add_parser("score", help="score a true/pred pairs manifest")
    score.add_argument("--pairs", type=Path, required=True,
                       help="CSV with header true_label,pred_label")
    _add_json_out(score)
    score.set_defaults(fn=_cmd_eval_score)

    infer = eval_sub.add_parser("infer", help="classify manifest images, then score")
    infer.add_argument("--manifest", type=Path, required=True,
                       help="CSV with header path,true_label")
    infer.add_argument("--backend", type=Path, required=True,
                       help="backend config JSON (kind stub|torchscript)")
    _add_json_out(infer)
    infer.set_defaults(fn=_cmd_eval_infer)

    probe_cmd = commands.add_parser("probe", help="endpoint reliability trials")
    probe_sub = probe_cmd.add_subparsers(dest="subcommand", required=True)
    run = probe_sub.add_parser("run", help="run the reliability suite")
    run.add_argument("--base-url", default="http://127.0.0.1:8765")
    run.add_argument("--trials", type=int, default=30)
    run.add_argument("--voice-trials", type=int, default=10)
    run.add_argument("--endpoints", default="",
                     help="comma-separated subset of: " + ",".join(probe.PROBE_COMPONENTS))
    run.add_argument("--plan", type=Path, default=None,
                     help="JSON list of {endpoint, trials} overriding the flags")
    _add_json_out(run)
    run.set_defaults(fn=_cmd_probe_run)

    serve = commands.add_parser("serve", help="run the local service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--config", type=Path, default=None)
    serve.add_argument("--data-root", default="mindmirror-data",
                       help="store root when no config file is given")
    serve.add_argument("--sweep-interval", type=float, default=600.0,
                       help="seconds between temp-file safety sweeps (0 disables)")
    serve.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
