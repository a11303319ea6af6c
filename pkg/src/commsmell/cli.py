"""Command-line entry point: ``commsmell <stage> --config run.json``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .ingest import IngestError
from .pipeline import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_MISSING,
    EXIT_OK,
    STAGES,
    ConfigError,
    MissingArtifact,
    Pipeline,
    RunConfig,
)
from .synthetic import SyntheticSpec, generate_synthetic_corpus


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commsmell", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGES, "all"):
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every stage")
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--out", type=Path, default=None, help="override the output directory")
    s = sub.add_parser("synth", help="write a synthetic corpus with planted smells")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--projects", type=int, default=3)
    s.add_argument("--developers", type=int, default=80)
    s.add_argument("--windows", type=int, default=4)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    warnings.showwarning = _show_warning
    if args.command == "synth":
        try:
            spec = SyntheticSpec(projects=args.projects, developers=args.developers, windows=args.windows)
            generate_synthetic_corpus(spec, args.seed, args.out)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(args.out / "config.json")
        return EXIT_OK
    try:
        overrides = {"seed": args.seed}
        if args.out is not None:
            overrides["output_dir"] = str(args.out.resolve())
        config = RunConfig.load(args.config, overrides)
    except ConfigError as exc:
        print("error: invalid configuration", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_CONFIG
    stages = STAGES if args.command == "all" else (args.command,)
    try:
        manifest = Pipeline(config).run(stages)
    except MissingArtifact as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (IngestError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: data problem in stage {args.command!r}: {exc}", file=sys.stderr)
        return EXIT_DATA
    for stage in stages:
        for name in manifest["stages"][stage]["outputs"]:
            print(config.output_dir / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
