"""``pso-bench`` command line.

Subcommands::

    pso-bench run --variant psoc --objective griewank --d 5 --runs 100 --seed 42
    pso-bench compare out/psoc_*.json out/psof_*.json out/psob_*.json

``run`` is assumed when the first argument is a flag. Exit status is 0 on
success, 1 on a usage error and 2 when a run fails at runtime.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import CellConfig, CompareError, compare, compare_csv, compare_text, load_summary, run_cell, write_cell
from .core import ConfigurationError

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

# config-file key -> (flag, type); file keys mirror the long flags
OPTIONS = {
    "variant": ("--variant", str),
    "objective": ("--objective", str),
    "d": ("--d", int),
    "D": ("--D", int),
    "kmax": ("--kmax", int),
    "runs": ("--runs", int),
    "seed": ("--seed", int),
    "efficiency_threshold": ("--efficiency-threshold", float),
    "fuzzy_config": ("--fuzzy-config", str),
    "bayes_config": ("--bayes-config", str),
    "out": ("--out", str),
    "jobs": ("--jobs", int),
    "format": ("--format", str),
}
DEFAULTS = {
    "variant": ["psoc"],
    "objective": "griewank",
    "d": 5,
    "D": 35,
    "kmax": 150,
    "runs": 100,
    "seed": 0,
    "efficiency_threshold": None,
    "fuzzy_config": None,
    "bayes_config": None,
    "out": "results",
    "jobs": 1,
    "format": "both",
}
VARIANTS = ("psoc", "psof", "psob")
FORMATS = ("csv", "json", "both")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pso-bench", description=__doc__.split("\n")[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a batch of seeded experiments", allow_abbrev=False)
    r.add_argument("--config", help="JSON file with flat keys mirroring the flags")
    r.add_argument("--variant", action="append",
                   help="psoc, psof or psob; repeat or comma-separate for several cells")
    r.add_argument("--objective")
    r.add_argument("--d", type=int, help="search dimensions")
    r.add_argument("--D", type=int, help="swarm size")
    r.add_argument("--kmax", type=int, help="step budget")
    r.add_argument("--runs", type=int)
    r.add_argument("--seed", type=int, help="seed of run 0; run i uses seed + i")
    r.add_argument("--efficiency-threshold", type=float, dest="efficiency_threshold")
    r.add_argument("--fuzzy-config", dest="fuzzy_config")
    r.add_argument("--bayes-config", dest="bayes_config")
    r.add_argument("--out")
    r.add_argument("--jobs", type=int)
    r.add_argument("--format", choices=FORMATS)
    r.add_argument("-v", "--verbose", action="store_true")

    c = sub.add_parser("compare", help="tabulate two or more cell summaries", allow_abbrev=False)
    c.add_argument("summaries", nargs="+")
    c.add_argument("--csv", dest="csv_out", help="also write the table as CSV here")
    return parser


def _read_config_file(path) -> dict:
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    out = {}
    for key, value in data.items():
        if key not in OPTIONS:
            raise UsageError(f"unknown config key {key!r} in {path}")
        kind = OPTIONS[key][1]
        if key == "variant":
            out[key] = [value] if isinstance(value, str) else list(value)
            continue
        if value is None:
            out[key] = None
            continue
        try:
            if kind is int and (isinstance(value, bool) or int(value) != value):
                raise ValueError
            out[key] = kind(value)
        except (TypeError, ValueError):
            raise UsageError(f"config key {key!r} expects {kind.__name__}, got {value!r}") from None
    return out


def effective_options(args) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(_read_config_file(args.config))
    for key in OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    variants = []
    for item in opts["variant"]:
        variants.extend(v.strip().lower() for v in str(item).split(",") if v.strip())
    bad = [v for v in variants if v not in VARIANTS]
    if bad or not variants:
        raise UsageError(f"invalid --variant {bad or variants}; choose from {', '.join(VARIANTS)}")
    opts["variant"] = list(dict.fromkeys(variants))
    if opts["format"] not in FORMATS:
        raise UsageError(f"invalid format {opts['format']!r}; choose from {', '.join(FORMATS)}")
    for key in ("d", "D", "runs", "jobs"):
        if opts[key] < 1:
            raise UsageError(f"{OPTIONS[key][0]} must be >= 1, got {opts[key]}")
    if opts["kmax"] < 0:
        raise UsageError(f"--kmax must be >= 0, got {opts['kmax']}")
    return opts


def cmd_run(args) -> int:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    opts = effective_options(args)
    cells = []
    for variant in opts["variant"]:
        try:
            cells.append(CellConfig(
                variant=variant, objective=opts["objective"], d=opts["d"], D=opts["D"],
                k_max=opts["kmax"], runs=opts["runs"], seed=opts["seed"],
                efficiency_threshold=opts["efficiency_threshold"],
                fuzzy_config=opts["fuzzy_config"], bayes_config=opts["bayes_config"],
            ))
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc).strip('"')) from None

    status = EXIT_OK
    for cell in cells:
        try:
            result = run_cell(cell, jobs=opts["jobs"])
        except ConfigurationError as exc:
            raise UsageError(str(exc)) from None
        paths = write_cell(result, opts["out"], opts["format"])
        summary = result.summary()
        acc = summary.get("accuracy") or {}
        print(f"{cell.name}: runs={summary['runs']} failed={summary['failed']} "
              f"A_mean={acc.get('mean')} -> {', '.join(str(p) for p in paths)}")
        if summary["failed"]:
            status = EXIT_RUNTIME
    return status


def cmd_compare(args) -> int:
    try:
        summaries = [load_summary(p) for p in args.summaries]
        table = compare(summaries)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read summaries: {exc}") from None
    except CompareError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(compare_text(table))
    if args.csv_out:
        Path(args.csv_out).write_text(compare_csv(table))
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("--help",):
        argv.insert(0, "run")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return cmd_run(args)
        return cmd_compare(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failure
        print(f"pso-bench: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
