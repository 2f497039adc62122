"""Command line interface.

Two subcommands share one option surface: every PipelineConfig field is
exposed as a --flag (hyphen or underscore spelling), and flags override
values from an optional TOML config file.

Exit codes: 0 success, 1 usage or config error, 2 input/output error,
3 provider failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import NoReturn

from .config import ConfigError, build_config, load_config_file, _FIELDS
from .providers import ProviderError
from .runner import run_forge, run_metrics

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PROVIDER = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this interface reserves 2 for I/O."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _parse_k_clamp(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LOW,HIGH")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LOW,HIGH as integers") from None


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline options (override config file)")
    for name, fld in _FIELDS.items():
        names = [f"--{name.replace('_', '-')}"]
        if "_" in name:
            names.append(f"--{name}")
        if name == "k_clamp":
            kind, metavar = _parse_k_clamp, "LOW,HIGH"
        elif isinstance(fld.default, bool):
            kind, metavar = _parse_bool, "BOOL"
        elif isinstance(fld.default, int):
            kind, metavar = int, "N"
        elif isinstance(fld.default, float):
            kind, metavar = float, "X"
        else:
            kind, metavar = str, "S"
        group.add_argument(
            *names,
            dest=name,
            type=kind,
            default=argparse.SUPPRESS,
            metavar=metavar,
            help=f"default: {fld.default!r}",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    forge = sub.add_parser(
        "forge",
        help="convert document clusters into pre-training pairs",
        description="Read cluster JSONL, write example JSONL plus a sibling .skips.jsonl.",
    )
    forge.add_argument("--input", required=True, metavar="F", help="cluster JSONL file")
    forge.add_argument("--output", required=True, metavar="F", help="output JSONL file")
    forge.add_argument("--config", dest="config_file", metavar="F", help="TOML config file")
    _add_config_flags(forge)

    metrics = sub.add_parser(
        "metrics",
        help="score prediction rows for faithfulness and novelty",
        description="Read {documents, summary} JSONL and print one report line per row.",
    )
    metrics.add_argument("--predictions", required=True, metavar="F", help="predictions JSONL file")
    metrics.add_argument("--config", dest="config_file", metavar="F", help="TOML config file")
    _add_config_flags(metrics)

    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}, ensure_ascii=False), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flag_overrides = {
        name: value for name, value in vars(args).items() if name in _FIELDS
    }
    try:
        file_overrides = load_config_file(args.config_file) if args.config_file else None
        config = build_config(file_overrides, flag_overrides)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)

    try:
        if args.command == "forge":
            stats = run_forge(config, args.input, args.output, progress_stream=sys.stderr)
            print(stats.to_json())
            return EXIT_OK
        return run_metrics(config, args.predictions)
    except ProviderError as exc:
        return _fail("provider", str(exc), EXIT_PROVIDER)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
