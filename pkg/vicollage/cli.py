# vicollage/cli.py
from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any, TextIO

from . import commands as _commands, state
from .config import PROJECT_NAME
from .errors import (
    ConfigError,
    DegreeOverflowError,
    DomainError,
    FactorizationError,
    SolverError,
    VicollageError,
)
from .runconfig import RunConfig, load_config, render_config, resolve_threads

logger = logging.getLogger(PROJECT_NAME)

_HELP: dict[str, dict[str, Any]] = _commands.HELP  # rich metadata
_HANDLER: logging.Handler | None = None


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, DomainError)):
        return 2
    if isinstance(exc, (FactorizationError, SolverError, DegreeOverflowError)):
        return 3
    if isinstance(exc, OSError):
        return 4
    return 1


def configure_logging(verbosity: int) -> None:
    """Send package logs to the current stderr as ``[vicollage] LEVEL message``."""
    global _HANDLER
    if _HANDLER is not None:
        logger.removeHandler(_HANDLER)
    _HANDLER = logging.StreamHandler(sys.stderr)
    _HANDLER.setFormatter(logging.Formatter(f"[{PROJECT_NAME}] %(levelname)s %(message)s"))
    logger.addHandler(_HANDLER)
    logger.setLevel({-1: logging.WARNING, 0: logging.INFO}.get(verbosity, logging.DEBUG))


# ---- help ----
def _print_topic(name: str, out: TextIO) -> int:
    meta = _HELP.get(name)
    if not meta:
        logger.error("Unknown command: %s", name)
        return 2
    print(f"\n{name}", file=out)
    print("-" * len(name), file=out)
    print(f"Description: {meta['desc']}", file=out)
    print(f"Usage:       {PROJECT_NAME} {meta['usage']}", file=out)
    if meta.get("long"):
        print("\nDetails:", file=out)
        for line in str(meta["long"]).splitlines():
            print(f"  {line}", file=out)
    if meta.get("examples"):
        print("\nExamples:", file=out)
        for ex in meta["examples"]:
            print(f"  {PROJECT_NAME} {ex}", file=out)
    print("", file=out)
    return 0


def _print_index(out: TextIO) -> int:
    print("\nCommands:", file=out)
    # group by category
    groups: dict[str, list[dict[str, Any]]] = {}
    for meta in _HELP.values():
        groups.setdefault(str(meta.get("group", "General")), []).append(meta)
    for group, metas in sorted(groups.items()):
        print(f"\n{group}:", file=out)
        for meta in sorted(metas, key=lambda m: str(m["name"])):
            print(f"  {meta['name']:<18} {meta['desc']}", file=out)
    print(f"\nTip: type '{PROJECT_NAME} help <command>' for details.\n", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog=PROJECT_NAME,
        description="Galerkin solver and collage-based parameter recovery for -u'' + j u = f.",
    )
    noise = ap.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    noise.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = ap.add_subparsers(dest="command", required=True)

    def _outputs(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="CSV destination ('-' for stdout); overrides output_path")
        p.add_argument("--manifest", help="write a JSON run manifest to this path")

    for name in _commands.COMMANDS:
        p = sub.add_parser(name, help=str(_HELP[name]["desc"]))
        p.add_argument("--config", help="key = value run configuration (defaults if omitted)")
        _outputs(p)

    p = sub.add_parser("repro", help=str(_HELP["repro"]["desc"]))
    p.add_argument("preset", choices=sorted(_commands.REPRO))
    p.add_argument("--norm", choices=["flat", "l2"], help="Haar normalization override")
    _outputs(p)

    p = sub.add_parser("help", help=str(_HELP["help"]["desc"]))
    p.add_argument("topic", nargs="?")
    return ap


def write_table(table: _commands.Table, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(table.header)
    writer.writerows(table.rows)


def _emit(table: _commands.Table, path: str) -> None:
    if path == "-":
        write_table(table, sys.stdout)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_table(table, fh)
    logger.info("wrote %d rows to %s", len(table.rows), path)


def _run(args: argparse.Namespace) -> int:
    if args.command == "help":
        return _print_topic(args.topic, sys.stdout) if args.topic else _print_index(sys.stdout)
    threads = resolve_threads()
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix=PROJECT_NAME) as pool:
        if args.command == "repro":
            config, table = _commands.repro(args.preset, args.norm, pool)
        else:
            config = load_config(args.config) if args.config else RunConfig()
            table = _commands.COMMANDS[args.command](config, pool)
    _emit(table, args.out or config.output_path)
    if args.manifest:
        state.write_manifest(args.manifest, args.command, render_config(config), len(table.rows))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(-1 if args.quiet else 1 if args.verbose else 0)
    try:
        return _run(args)
    except (VicollageError, OSError) as exc:
        logger.error("%s", exc)
        return exit_code_for(exc)
