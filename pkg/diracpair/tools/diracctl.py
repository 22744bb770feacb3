"""diracctl: check Dirac structures, pushforwards and dual pairs.

Exit codes are 0 on success, 1 when a verdict fails and 2 on bad input.
"""
import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from .. import __version__
from ..common.errors import DiracError
from ..common.io import dump_json, dumps_json, load_config, load_json
from ..common.logger import logger
from ..common.quiet import mute
from .commands import (
    EXIT_INPUT,
    EXPECT_LABELS,
    CommandReport,
    Settings,
    check_dirac,
    pushforward,
    realize,
    verify_pair,
)
from .corpus import run_corpus
from .manifest import parse_manifest

SETTING_FLAGS = ("grid", "tol", "samples", "seed", "radius", "quad", "steps")


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse the arguments."""
    parser = argparse.ArgumentParser(
        prog="diracctl",
        description="Verify Dirac structures and dual pairs on charts.",
    )
    parser.add_argument(
        "--version", action="version", version=f"diracctl {__version__}"
    )
    parser.add_argument(
        "--quiet", "-q", action="store_true", help="only log errors"
    )
    parser.add_argument(
        "--config",
        "-c",
        default=None,
        help="Path to a yaml, json or toml settings file overriding the "
        "numeric defaults (grid, tol, samples, seed, radius, quad, steps).",
    )
    parser.add_argument(
        "--report",
        default="",
        help="Output file for the JSON report. Printed when not given.",
    )
    parser.add_argument(
        "--nproc",
        "-p",
        type=int,
        default=None,
        help="number of processes for sampling",
    )
    parser.add_argument(
        "--deterministic",
        action="store_true",
        help="leave the wall clock out of the report",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    check = subparsers.add_parser(
        "check-dirac", help="Courant and Lagrangian residuals on a grid"
    )
    check.add_argument("manifest", help="path to the manifest")
    check.add_argument("--grid", type=int, help="grid nodes per axis")
    check.add_argument("--tol", type=float, help="residual tolerance")

    push = subparsers.add_parser(
        "pushforward", help="the family L^s and s_!(L) along a submersion"
    )
    push.add_argument("manifest", help="path to the manifest")
    push.add_argument(
        "--map",
        default=None,
        help='submersion as "expr;expr;...", the manifest map s otherwise',
    )
    push.add_argument("--grid", type=int, help="grid nodes per axis")

    real = subparsers.add_parser(
        "realize", help="build the realization pair of a manifest"
    )
    real.add_argument("manifest", help="path to the manifest")
    real.add_argument("--radius", type=float, help="initial fibre radius")
    real.add_argument("--quad", type=int, help="even number of nodes")
    real.add_argument("--steps", type=int, help="flow steps per unit time")
    real.add_argument(
        "--out", default="pair.json", help="output file for the pair"
    )

    verify = subparsers.add_parser(
        "verify-pair", help="classify a pair file"
    )
    verify.add_argument("pair", help="path to the pair file")
    verify.add_argument("--samples", type=int, help="number of samples")
    verify.add_argument("--seed", type=int, help="sampling seed")
    verify.add_argument("--tol", type=float, help="residual tolerance")
    verify.add_argument(
        "--expect",
        choices=sorted(EXPECT_LABELS),
        default=None,
        help="fail unless the pair has this classification",
    )

    corpus = subparsers.add_parser(
        "corpus", help="run the bundled examples"
    )
    corpus.add_argument("--only", default=None, help="run one entry by id")
    return parser.parse_args(argv)


def load_settings(args: argparse.Namespace) -> Settings:
    """Defaults, then the settings file, then the flags."""
    settings = (
        Settings()
        if args.config is None
        else Settings.parse_obj(load_config(args.config))
    )
    update = {
        key: getattr(args, key)
        for key in SETTING_FLAGS + ("nproc",)
        if getattr(args, key, None) is not None
    }
    return Settings.parse_obj({**settings.dict(), **update})


def run_command(
    args: argparse.Namespace, settings: Settings
) -> CommandReport:
    """Dispatch to the command named in args."""
    if args.command == "corpus":
        return run_corpus(settings, args.only)
    if args.command == "verify-pair":
        return verify_pair(load_json(args.pair), settings, args.expect)
    manifest = parse_manifest(load_json(args.manifest))
    if args.command == "check-dirac":
        return check_dirac(manifest, settings)
    if args.command == "pushforward":
        return pushforward(manifest, args.map, settings)
    report, record = realize(manifest, settings)
    if record is not None:
        dump_json(args.out, record.dict(by_alias=True))
        logger.info("pair written to %s", args.out)
    return report


def main(argv: Optional[List[str]] = None) -> int:
    """Run diracctl and return its exit code."""
    args = parse_arguments(argv)
    mute(args.quiet)
    try:
        settings = load_settings(args)
        report = run_command(args, settings)
    except (
        DiracError,
        ValidationError,
        OSError,
        ValueError,
    ) as err:
        logger.error("%s: %s", type(err).__name__, err)
        return EXIT_INPUT
    logger.info(report.table())
    content = report.content(args.deterministic)
    if args.report:
        dump_json(args.report, content)
    else:
        sys.stdout.write(dumps_json(content))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
