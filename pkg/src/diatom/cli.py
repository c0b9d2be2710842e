"""Command line front-end.

    diatom <task> --config scenario.json [--out PREFIX] [--threads N] [--validate-only]
    diatom validate --config scenario.json

Exit codes: 0 success, 2 validation error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigError, NumericalError
from .output import config_hash, ensure_parent, save_checkpoint, write_csv, write_json
from .scenario import TASKS, Scenario, validate_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _parser():
    p = argparse.ArgumentParser(prog="diatom", description=__doc__.split("\n\n")[0])
    p.add_argument("task", choices=list(TASKS) + ["validate"])
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--out", help="output path prefix (default: scenario 'output' or the config file stem)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for sweeps (env DIATOM_THREADS)")
    p.add_argument("--validate-only", action="store_true", help="check the scenario and exit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _err(msg):
    print(f"diatom: {msg}", file=sys.stderr)


def load_scenario(path):
    """Parse a scenario file; raises OSError or ValueError (with position) on failure."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from None


def _threads(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("DIATOM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            _err(f"ignoring non-integer DIATOM_THREADS={env!r}")
    return 1


def validate(path, task=None) -> int:
    try:
        data = load_scenario(path)
    except OSError as exc:
        _err(f"cannot read {path}: {exc}")
        return EXIT_IO
    except ValueError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    problems = validate_scenario(data, task, Path(path).resolve().parent)
    for msg in problems:
        print(f"violation: {msg}")
    if problems:
        return EXIT_VALIDATION
    print(f"{path}: ok")
    return EXIT_OK


def run(path, task, out=None, threads=1) -> int:
    try:
        data = load_scenario(path)
    except OSError as exc:
        _err(f"cannot read {path}: {exc}")
        return EXIT_IO
    except ValueError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    base = Path(path).resolve().parent
    problems = validate_scenario(data, task, base)
    if problems:
        for msg in problems:
            _err(f"violation: {msg}")
        return EXIT_VALIDATION

    prefix = out or data.get("output") or Path(path).with_suffix("").name
    manifest = {
        "tool": "diatom",
        "tool_version": __version__,
        "task": task,
        "config_file": str(path),
        "config_hash": config_hash(data),
        "threads": threads,
    }
    start = time.perf_counter()
    status, code, result = "ok", EXIT_OK, None
    try:
        scen = Scenario(data, task, base)
        result = scen.run(threads)
    except NumericalError as exc:
        status, code = f"numerical error: {exc}", EXIT_NUMERICAL
        _err(str(exc))
    except ConfigError as exc:
        status, code = f"configuration error: {exc}", EXIT_VALIDATION
        _err(str(exc))

    try:
        p = ensure_parent(prefix)
        outputs = []
        if result is not None:
            csv_path = f"{p}.csv"
            write_csv(csv_path, result.header, result.rows)
            outputs.append(csv_path)
            if result.extra_json is not None:
                write_json(f"{p}.json", result.extra_json)
                outputs.append(f"{p}.json")
            if result.checkpoint is not None:
                save_checkpoint(f"{p}.checkpoint", result.checkpoint)
                outputs.append(f"{p}.checkpoint")
        manifest.update(
            status=status,
            wall_time_s=time.perf_counter() - start,
            outputs=outputs,
            diagnostics=result.diagnostics if result else {},
            warnings=result.warnings if result else [],
        )
        write_json(f"{p}.manifest.json", manifest)
    except OSError as exc:
        _err(f"cannot write outputs with prefix {prefix}: {exc}")
        return EXIT_IO
    if result is not None:
        for w in result.warnings:
            _err(f"warning: {w}")
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.task == "validate":
        return validate(args.config)
    if args.validate_only:
        return validate(args.config, args.task)
    return run(args.config, args.task, args.out, _threads(args.threads))


if __name__ == "__main__":
    sys.exit(main())
