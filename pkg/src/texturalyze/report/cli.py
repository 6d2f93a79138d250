"""``texturalyze`` command-line entry point.

Exit codes: 0 success, 1 analysis error, 2 input error, 3 config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .. import __version__
from ..errors import ConfigError, TexturalyzeError
from ..ingest import StudyConfig, load_config
from . import commands
from .manifest import build_manifest, write_manifest

log = logging.getLogger("texturalyze")


def _common(p, *, config=True):
    if config:
        p.add_argument("--config", type=Path, help="study config file (key = value lines)")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on usage errors, matching the input-error code
    parser = argparse.ArgumentParser(prog="texturalyze", description="Texture profile and sensory survey analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tpa", help="TPA parameters and ensemble curves from force-time CSVs")
    p.add_argument("--curves", type=Path, required=True, help="directory laid out as <burger>/<sample>.csv")
    _common(p)

    p = sub.add_parser("ca", help="correspondence analysis of CATA counts with TPA supplementary vectors")
    p.add_argument("--survey", type=Path, required=True)
    p.add_argument("--tpa", type=Path, required=True, help="tpa_parameters.csv written by 'tpa'")
    _common(p)

    p = sub.add_parser("correlate", help="TPA parameter x sensory attribute correlation grid")
    p.add_argument("--survey", type=Path, required=True)
    p.add_argument("--tpa", type=Path, required=True)
    p.add_argument("--alpha", type=float, help="significance level (default from config, else 0.05)")
    _common(p)

    p = sub.add_parser("lmm", help="random-intercept mixed model on z-scored ratings")
    p.add_argument("--survey", type=Path, required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--predictors", required=True, help="comma-separated question names")
    p.add_argument("--method", choices=("reml", "ml"), default="reml")
    _common(p)

    p = sub.add_parser("report", help="run every stage and write manifest.json")
    p.add_argument("--curves", type=Path, required=True)
    p.add_argument("--survey", type=Path, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--method", choices=("reml", "ml"), default="reml")
    _common(p)

    p = sub.add_parser("synth", help="write synthetic fixtures with their ground truth")
    p.add_argument("kind", choices=("curve", "survey"))
    p.add_argument("--spec", type=Path, required=True, help="key = value fixture spec")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    _common(p)
    return parser


def _config(path) -> StudyConfig:
    return StudyConfig() if path is None else load_config(path)


def run(args) -> list[Path]:
    config = _config(args.config)
    cmd = args.command
    inputs, options = {}, {}
    if cmd == "tpa":
        written = commands.cmd_tpa(args.curves, config, args.out)
        inputs = {"curves": args.curves}
    elif cmd == "ca":
        written = commands.cmd_ca(args.survey, args.tpa, config, args.out)
        inputs = {"survey": args.survey, "tpa": args.tpa}
    elif cmd == "correlate":
        written = commands.cmd_correlate(args.survey, args.tpa, config, args.out, args.alpha)
        inputs = {"survey": args.survey, "tpa": args.tpa}
        options = {"alpha": config.significance_alpha if args.alpha is None else args.alpha}
    elif cmd == "lmm":
        predictors = [p.strip() for p in args.predictors.split(",")]
        written = commands.cmd_lmm(args.survey, config, args.out, args.response, predictors, args.method)
        inputs = {"survey": args.survey}
        options = {"method": args.method, "response": args.response, "predictors": ",".join(predictors)}
    elif cmd == "report":
        written = commands.cmd_report(args.curves, args.survey, config, args.out, args.method, args.alpha)
        inputs = {"curves": args.curves, "survey": args.survey}
        options = {"alpha": config.significance_alpha if args.alpha is None else args.alpha, "method": args.method}
    elif cmd == "synth":
        if args.kind == "curve":
            written = commands.cmd_synth_curve(args.spec, args.out, args.seed)
        else:
            written = commands.cmd_synth_survey(args.spec, args.out, config, args.seed)
        inputs = {"spec": args.spec}
        options = {"seed": args.seed}
        cmd = f"synth {args.kind}"
    else:  # pragma: no cover - argparse guards this
        raise ConfigError(f"unknown command {cmd!r}")
    manifest = build_manifest(
        subcommand=cmd,
        tool_version=__version__,
        out=args.out,
        outputs=written,
        inputs=inputs,
        config_path=args.config,
        options=options,
    )
    return written + [write_manifest(manifest, args.out)]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        written = run(args)
    except TexturalyzeError as exc:
        print(f"texturalyze: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    log.info("wrote %d files under %s", len(written), args.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
