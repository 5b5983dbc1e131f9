"""
Command-line front end.

Usage:
  hypcircle ode-check --nu 0.5 --theta pi --tmax 6
  hypcircle count --group triangle:2,3,7 --rmax 10
  hypcircle run-preset count_237
  hypcircle list-presets
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import yaml

from . import __version__
from .config import Experiment, load_config
from .errors import ConfigError, HypCircleError
from .parallel import configure_progress
from .registry import ExperimentRegistry
from .runner import RUNNERS, run_experiment

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DEFAULT_EXPERIMENTS_DIR = "experiments"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", help="Group preset: triangle:p,q,r or file:PATH (default triangle:2,3,7)")
    common.add_argument("--observable",
                        help="e.g. eigen:nu=0.5, bump:width=0.2, const:c=1, mollifier:delta=0.3, tangent:delta=0.5,c=1")
    common.add_argument("--theta", help="Arc length: a number, pi, 4pi, pi/2, ...")
    common.add_argument("--t-grid", dest="t_grid", help="Times as a:b:step or a comma list")
    common.add_argument("--r-grid", dest="r_grid", help="Radii as a:b:step or a comma list")
    common.add_argument("--tol", type=float, help="Quadrature tolerance")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--workers", type=int, help="Parallel workers; results do not depend on it")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--out", help="Output directory (default results)")
    common.add_argument("--name", help="Run name used for output file names")
    common.add_argument("--nu", help="Shorthand for --observable eigen:nu=NU")
    common.add_argument("--tmax", type=float, help="Shorthand for --t-grid 1:TMAX:1")
    common.add_argument("--rmax", type=float, help="Shorthand for --r-grid 1:RMAX:1")
    common.add_argument("--option", action="append", default=[], metavar="KEY=VALUE",
                        help="Subcommand option; VALUE is parsed as YAML (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="No progress bars")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="hypcircle",
                                     description="Circle averages, equidistribution and lattice counting "
                                                 "on hyperbolic surfaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    helps = {
        "ode-check": "Residual of the second-order equation for arc averages",
        "expand": "Expansion coefficients and remainder decay",
        "equidist": "Equidistribution rate and shrinking arcs",
        "dlt": "Rescaled deviation laws and Levy-Prokhorov distances",
        "translate": "Translated-circle identity through the Cartan decomposition",
        "count": "Orbit counts in hyperbolic balls",
        "avg-count": "Averaged counting by Monte Carlo and by unfolding",
    }
    for name in RUNNERS:
        sub.add_parser(name, parents=[common], help=helps[name])
    preset = sub.add_parser("run-preset", parents=[common], help="Run a stored experiment preset")
    preset.add_argument("preset", help="Preset name")
    preset.add_argument("--experiments-dir", default=DEFAULT_EXPERIMENTS_DIR)
    listing = sub.add_parser("list-presets", help="List stored experiment presets")
    listing.add_argument("--experiments-dir", default=DEFAULT_EXPERIMENTS_DIR)
    listing.add_argument("-v", "--verbose", action="store_true")
    return parser


def _parse_options(items: List[str]) -> Dict[str, Any]:
    options = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--option expects KEY=VALUE, got '{item}'")
        options[key.strip()] = yaml.safe_load(value)
    return options


def config_from_args(args: argparse.Namespace, base: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Merge command-line flags over `base` (a preset), flags winning."""
    data: Dict[str, Any] = dict(base or {})
    if args.command in RUNNERS:
        data["subcommand"] = args.command
    for key in ("group", "observable", "theta", "t_grid", "r_grid", "tol", "seed", "workers", "samples", "out",
                "name"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.nu is not None:
        data["observable"] = f"eigen:nu={args.nu}"
    if args.tmax is not None:
        data["t_grid"] = f"1:{args.tmax}:1"
    if args.rmax is not None:
        data["r_grid"] = f"1:{args.rmax}:1"
    options = _parse_options(args.option)
    if options:
        data["options"] = {**data.get("options", {}), **options}
    return data


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT,
                        stream=sys.stderr, force=True)


def _list_presets(args: argparse.Namespace) -> int:
    registry = ExperimentRegistry(args.experiments_dir)
    print("=" * 80)
    print("✅ AVAILABLE EXPERIMENT PRESETS")
    print("=" * 80)
    for config in registry:
        description = config.description.strip().split("\n")[0] if config.description else ""
        print(f"  - {config.name} [{config.subcommand}]: {description}")
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    _configure_logging(getattr(args, "verbose", False))
    configure_progress(not getattr(args, "quiet", False))

    try:
        if args.command == "list-presets":
            return _list_presets(args)
        base = None
        if args.command == "run-preset":
            preset = ExperimentRegistry(args.experiments_dir).get(args.preset)
            if preset is None:
                raise ConfigError(f"Unknown preset '{args.preset}' in {args.experiments_dir}")
            base = preset.model_dump(mode="json")
        experiment = Experiment.from_schema(load_config(config_from_args(args, base)))
    except (ConfigError, FileNotFoundError) as e:
        print(f"❌ {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except HypCircleError as e:
        print(f"❌ Could not set up the experiment: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        manifest = run_experiment(experiment)
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if manifest.passed else EXIT_FAILED


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
