"""Command-line entry points: new, run, serve, scaffold, examples."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .engine import CONFIG_NAME, PipelineEngine, build_default_registry
from .engine import new_pipeline as _new_pipeline
from .engine import scaffold_custom_function
from .errors import ConfigError, PipelineError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

logger = logging.getLogger(__name__)


def cmd_new(args: argparse.Namespace) -> int:
    try:
        config_path = _new_pipeline(args.dir, build_default_registry())
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"initialized pipeline at {config_path.parent}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    pipeline_dir = Path(args.dir)
    if not (pipeline_dir / CONFIG_NAME).exists():
        print(f"error: no {CONFIG_NAME} in {pipeline_dir}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        engine = PipelineEngine(pipeline_dir)
        engine.schedule()  # fail fast on unresolvable entries
        total = engine.total_frames
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if not args.headless:
        engine.frame_listeners.append(
            lambda frame: print(f"frame {frame.index:>6} {frame.stem}: "
                                f"{0 if frame.point_cloud is None else len(frame.point_cloud)} pts, "
                                f"{len(frame.labels)} labels")
        )
    try:
        stats = engine.run_headless()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"processed {len(stats.frames)} of {total} frames")
    print(f"errors: {stats.error_count}, warnings: {stats.warning_count}")
    if stats.fn_seconds:
        print("per-function timings:")
        for key in sorted(stats.fn_seconds, key=lambda k: -stats.fn_seconds[k]):
            calls = stats.fn_calls.get(key, 0)
            mean_ms = 1000.0 * stats.fn_seconds[key] / max(calls, 1)
            print(f"  {key:<40} {calls:>5} calls  {stats.fn_seconds[key]:8.3f} s total  {mean_ms:8.2f} ms/frame")

    if not args.no_report:
        from .report import write_report

        try:
            written = write_report(stats, pipeline_dir / "report")
        except OSError as exc:
            print(f"i/o error writing report: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"report written to {written[0].parent}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    pipeline_dir = Path(args.dir)
    if not (pipeline_dir / CONFIG_NAME).exists():
        print(f"error: no {CONFIG_NAME} in {pipeline_dir}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        engine = PipelineEngine(pipeline_dir)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    static = Path(args.static) if args.static else _default_static_dir()
    app = create_app(engine, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _default_static_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def cmd_scaffold(args: argparse.Namespace) -> int:
    try:
        paths = scaffold_custom_function(args.dir, args.category, args.name)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(f"created {p}")
    return EXIT_OK


def cmd_examples(args: argparse.Namespace) -> int:
    from .demo import make_detector_pipeline, make_roadside_pipeline

    root = Path(args.dir)
    try:
        make_roadside_pipeline(root / "roadside_labeling")
        make_detector_pipeline(root / "detector_inference")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"examples created under {root}:")
    print("  roadside_labeling/   crop + background filter + dbscan + boxes + export")
    print("  detector_inference/  KITTI-format fixture + stub detector + label conversion")
    print(f"run one with: lidarpipe run {root / 'roadside_labeling'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidarpipe",
        description="Config-driven lidar processing pipelines",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_new = sub.add_parser("new", help="initialize an empty pipeline directory")
    p_new.add_argument("dir")
    p_new.set_defaults(fn=cmd_new)

    p_run = sub.add_parser("run", help="process all frames and write exports")
    p_run.add_argument("dir")
    p_run.add_argument("--headless", action="store_true", help="suppress per-frame output")
    p_run.add_argument("--no-report", action="store_true", help="skip the report directory")
    p_run.set_defaults(fn=cmd_run)

    p_serve = sub.add_parser("serve", help="serve a live session over WebSocket")
    p_serve.add_argument("dir")
    p_serve.add_argument("--port", type=int, default=8620)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static", default=None, help="UI bundle directory to serve at /")
    p_serve.set_defaults(fn=cmd_serve)

    p_scaffold = sub.add_parser("scaffold", help="create a custom function stub")
    p_scaffold.add_argument("dir")
    p_scaffold.add_argument("category")
    p_scaffold.add_argument("name")
    p_scaffold.set_defaults(fn=cmd_scaffold)

    p_examples = sub.add_parser("examples", help="materialize the bundled example pipelines")
    p_examples.add_argument("dir")
    p_examples.set_defaults(fn=cmd_examples)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
