"""Command-line entry point.

Subcommands wrap the scenario runner: ``run`` executes one scenario
document, ``batch`` a directory or list of documents, and ``sweep``,
``bode``, ``fit``, ``search`` are shortcuts that run those scenario kinds
with defaults merged over an optional document.  ``print-config`` emits
the fully explicit default document for a kind.

Exit codes: 0 success, 1 validation error, 2 simulation failure.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys

from .scenarios import (
    KINDS,
    ScenarioValidationError,
    batch,
    default_document,
    run,
    validate_config,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SIMULATION = 2


def _load_document(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioValidationError(f"cannot read scenario {path}: {exc}") from None


def _emit(summary, fmt, quiet):
    if quiet:
        return
    if fmt == "csv":
        print("metric,value")
        for key, value in sorted(summary.metrics.items()):
            if isinstance(value, dict):
                for sub, sub_value in sorted(value.items()):
                    if isinstance(sub_value, (int, float)):
                        print(f"{key}.{sub},{sub_value}")
            elif isinstance(value, (int, float)):
                print(f"{key},{value}")
    else:
        print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))


def _run_single(document, args) -> int:
    if args.seed is not None:
        document["seed"] = args.seed
    scenario = validate_config(document)
    summary = run(scenario, args.out)
    _emit(summary, args.format, args.quiet)
    return EXIT_OK if summary.status == "ok" else EXIT_SIMULATION


def _cmd_run(args) -> int:
    if not args.config:
        raise ScenarioValidationError("run requires --config PATH")
    return _run_single(_load_document(args.config), args)


def _cmd_kind_shortcut(kind):
    def cmd(args) -> int:
        document = _load_document(args.config) if args.config else {}
        document["kind"] = kind
        return _run_single(document, args)
    return cmd


def _cmd_batch(args) -> int:
    if not args.config:
        raise ScenarioValidationError("batch requires --config PATH (file or directory)")
    if os.path.isdir(args.config):
        paths = sorted(glob.glob(os.path.join(args.config, "*.json")))
        documents = [_load_document(p) for p in paths]
    else:
        payload = _load_document(args.config)
        documents = payload["scenarios"] if isinstance(payload, dict) else payload
    if args.seed is not None:
        for doc in documents:
            doc["seed"] = args.seed
    summaries = batch(documents, args.out)
    if not args.quiet:
        for summary in summaries:
            print(f"{summary.label}: {summary.status}")
        print(os.path.join(args.out, "batch_summary.json"))
    failed = sum(1 for s in summaries if s.status != "ok")
    return EXIT_SIMULATION if failed else EXIT_OK


def _cmd_print_config(args) -> int:
    print(json.dumps(default_document(args.kind), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsea",
                                     description="Series elastic actuator toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="scenario document (JSON)")
        p.add_argument("--out", default="rsea_out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the document seed")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--quiet", action="store_true")
        p.set_defaults(func=func)
        return p

    add("run", _cmd_run, "run one scenario document")
    add("batch", _cmd_batch, "run a directory or list of scenario documents")
    add("sweep", _cmd_kind_shortcut("sweep_map"),
        "configuration sweep maps with working-space masks")
    add("bode", _cmd_kind_shortcut("bode_open"), "frequency response estimation")
    add("fit", _cmd_kind_shortcut("quasi_static"), "quasi-static model fit on synthetic data")
    add("search", _cmd_kind_shortcut("design_search"), "search configurations for a torque profile")

    p = sub.add_parser("print-config", help="print the full default scenario document")
    p.add_argument("--kind", choices=KINDS, default="track_sine")
    p.set_defaults(func=_cmd_print_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
