"""Command-line entry point: ``cavity-delay sweep`` and ``cavity-delay selftest``."""
from __future__ import annotations

import argparse
import json
import sys

from .config import parse_config, settings_to_text
from .errors import CavityDelayError, ConfigError
from .selftest import run_selftest
from .sweep import emit, run

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3


def _load_config_text(path):
    if path is None:
        return ""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    # a JSON result file re-runs from its metadata echo
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            return settings_to_text(doc["metadata"]["config"])
        except (ValueError, KeyError, TypeError):
            raise ConfigError(f"{path}: JSON file without metadata.config") from None
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavity-delay", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run a detuning or pump-power sweep")
    sp.add_argument("--config", help="key = value config file, or a previous JSON result")
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key; may be repeated")

    sub.add_parser("selftest", help="run the analytic and time-domain consistency checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return EXIT_OK if run_selftest(sys.stdout) else EXIT_SELFTEST

    try:
        config = parse_config(_load_config_text(args.config), args.overrides)
    except (ConfigError, OSError, UnicodeDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for warning in config.sweep.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    try:
        result = run(config)
        emit(result, args.format, args.out)
    except (CavityDelayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
