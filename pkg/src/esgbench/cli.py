"""Command line entry point.

One subcommand per workflow step, plus "run" for the whole thing.  Every
subcommand reads the same INI config; the step commands reuse the shared
computation and write only their own report files, so `esgbench agree`
and `esgbench run` produce byte-identical agreement tables.

Diagnostics go to stderr.  Exit codes: 0 on success, 1 for configuration
problems, 2 for data problems, 3 for transport failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import EsgbenchError
from .pipeline import load_config, run_pipeline

_CORE = ("clean", "scores", "stats", "thresholds", "cards", "diffs", "agreement")

# subcommand -> (forced optional stages, artifact groups to write)
_COMMANDS: dict[str, tuple[set[str], set[str]]] = {
    "ingest": (set(), {"clean"}),
    "score": (set(), {"clean", "scores"}),
    "baseline": (set(), {"clean", "scores", "stats", "thresholds"}),
    "classify": (set(), set(_CORE[:6])),
    "agree": (set(), set(_CORE)),
    "validate": ({"validate"}, {"rrssv"}),
    "ml-baseline": ({"ml"}, {"ml"}),
    "recommend": ({"recommend"}, {"recommendations"}),
}

_HELP = {
    "ingest": "clean the raw sheets and write the tidy per-question tables",
    "score": "compute indicator and raw pillar scores for every country",
    "baseline": "describe the baseline group and derive quartile tier thresholds",
    "classify": "score and tier every country; write scorecards and tier overlays",
    "agree": "quantify workflow vs reference agreement on the held-out countries",
    "validate": "repeat the split across seeds and report metric stability",
    "ml-baseline": "train and evaluate the minimal tier predictor",
    "recommend": "generate recommendations for flagged countries",
    "run": "execute every configured stage and write all reports",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esgbench",
        description="Deterministic human-AI ESG benchmarking workflow.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", required=True, metavar="INI", help="run configuration file"
    )
    common.add_argument(
        "--out", metavar="DIR", help="override the configured output directory"
    )
    common.add_argument(
        "--threads",
        type=int,
        metavar="N",
        help="worker threads for repeated-split stages (results are identical)",
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log progress to stderr (-vv for debug)",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in (*_COMMANDS, "run"):
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        config = load_config(args.config)
        if args.out:
            config.output_dir = Path(args.out).resolve()
        if args.command == "run":
            stages, artifacts = None, None
        else:
            stages, artifacts = _COMMANDS[args.command]
        result = run_pipeline(
            config,
            threads=args.threads,
            optional_stages=stages,
            artifacts=artifacts,
        )
    except EsgbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"wrote {len(result.written)} files to {config.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
