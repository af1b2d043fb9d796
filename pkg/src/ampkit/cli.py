"""Command line entry point: ``ampkit run | validate | list``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .exceptions import ConfigError
from .experiments import ENV_OUT_DIR, check_config, list_experiments, load_config, run_experiment

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ampkit",
        description="Run seeded message-passing recovery experiments from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config (path or bundled name)")
    run.add_argument("config")
    run.add_argument("--out-dir", default=None, help=f"output directory (default: ${ENV_OUT_DIR} or ./ampkit_out)")
    run.add_argument("--trials-override", type=int, default=None, metavar="N")
    run.add_argument("--seed-override", type=int, default=None, metavar="SEED")
    run.add_argument("--linear-average", action="store_true", help="average NMSE linearly instead of in dB")

    val = sub.add_parser("validate", help="report every violation in a config without running it")
    val.add_argument("config")

    sub.add_parser("list", help="list bundled experiment configs")
    return parser


def _read(path: str) -> str:
    p = Path(path)
    if p.is_file():
        return p.read_text()
    from .experiments import bundled_config_path

    return bundled_config_path(path).read_text()


def _validate(path: str) -> int:
    try:
        text = _read(path)
    except FileNotFoundError:
        print(f"error: config file not found: {path}", file=sys.stderr)
        return EXIT_FAILED
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_FAILED
    _, errors = check_config(raw)
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED
    print("OK")
    return EXIT_OK


def _run(args) -> int:
    if args.trials_override is not None and args.trials_override < 1:
        print("error: --trials-override must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    result = run_experiment(
        cfg,
        out_dir=args.out_dir,
        linear_average=args.linear_average,
        trials=args.trials_override,
        master_seed=args.seed_override,
    )
    for line in result.summary_lines():
        print(line)
    for f in result.files:
        print(f"wrote {f}")
    return EXIT_OK


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name}\t{desc}")
        return EXIT_OK
    if args.command == "validate":
        return _validate(args.config)
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
