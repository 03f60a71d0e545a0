"""Command-line entry point.

::

    gane run --config PATH [--override key=value ...] [--workers N]
    gane resume --checkpoint PATH [--generations N] [--workers N]
    gane export --checkpoint PATH --out DIR
    gane eval --checkpoint PATH [--seeds N]

Exit codes: 0 success, 1 usage error, 2 runtime or contract error.
Relative output directories are placed under ``$GANE_OUTPUT_ROOT`` when set.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .checkpoint import CheckpointError
from .config import ConfigError, load_config
from .runner import RunError, evaluate_checkpoint, export_figures_data, resume, run

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gane", description="Generative adversarial neuroevolution runs.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="start a run from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("resume", help="continue a run from its checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--generations", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("export", help="write scores.csv and trajectories.csv")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a checkpoint's population on holdout seeds")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--seeds", type=int, default=10)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(asctime)s %(message)s")
    try:
        if args.command == "run":
            config = load_config(args.config).with_overrides(args.override)
            out = run(config, workers=args.workers)
            print(out)
        elif args.command == "resume":
            print(resume(args.checkpoint, workers=args.workers, generations=args.generations))
        elif args.command == "export":
            for path in export_figures_data(args.checkpoint, args.out):
                print(path)
        elif args.command == "eval":
            if args.seeds < 1:
                raise _UsageError("--seeds must be >= 1")
            print(json.dumps(evaluate_checkpoint(args.checkpoint, args.seeds), indent=2))
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"gane: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RunError, CheckpointError, ValueError, OSError) as exc:
        print(f"gane: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
