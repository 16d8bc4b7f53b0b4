"""Command line entry point: ``nsp-lab <subcommand>`` or ``nsp-lab --check``."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from nsp_lab import __version__
from nsp_lab.acceptance import format_table, run_acceptance
from nsp_lab.exceptions import ConfigError, LawError, NotApplicableError, NspLabError
from nsp_lab.jobs import (
    CriticalMassJob,
    DomainSweepJob,
    EosReportJob,
    EpsilonSweepJob,
    KernelJob,
    SimulateJob,
    SpecialEntropyJob,
)
from nsp_lab.models import load_config

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4

COMMANDS = {
    "eos-report": EosReportJob,
    "critical-mass": CriticalMassJob,
    "entropy special": SpecialEntropyJob,
    "entropy kernel": KernelJob,
    "simulate": SimulateJob,
    "sweep-epsilon": EpsilonSweepJob,
    "sweep-domain": DomainSweepJob,
}


def _configure_logging(level):
    """Configure root logging once and route warnings through it."""
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)-8s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def _shared_arguments(parser, suppress):
    """Flags accepted both before and after the subcommand."""
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="YAML (or JSON) run configuration")
    parser.add_argument(
        "--set",
        action="append",
        dest="late_set" if suppress else "set",
        default=argparse.SUPPRESS if suppress else [],
        metavar="PATH=VALUE",
        help="Dotted-path configuration override, e.g. --set solver.N=2048 (repeatable)",
    )
    parser.add_argument("--out", default=default, help="Output directory (overrides output.directory)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False, help="DEBUG logs"
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False, help="WARNING logs"
    )


def build_parser():
    """Argument parser with one subparser per job."""
    parser = argparse.ArgumentParser(
        prog="nsp-lab", description="Numerical lab for spherically symmetric Navier-Stokes-Poisson flows."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--check", action="store_true", help="Run the acceptance suite and print a pass/fail table")
    parser.add_argument("--quick", action="store_true", help="Run --check at the small smoke resolutions")
    _shared_arguments(parser, suppress=False)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")

    eos = commands.add_parser("eos-report", help=EosReportJob.Meta.description)
    eos.add_argument("--dump", action="store_true", help="Write the full-density table")
    critical = commands.add_parser("critical-mass", help=CriticalMassJob.Meta.description)
    entropy = commands.add_parser("entropy", help="Entropy pairs")
    entropy_commands = entropy.add_subparsers(dest="entropy_command", metavar="PAIR", required=True)
    special = entropy_commands.add_parser("special", help=SpecialEntropyJob.Meta.description)
    kernel = entropy_commands.add_parser("kernel", help=KernelJob.Meta.description)
    for sub in (special, kernel):
        sub.add_argument("--rho-max", type=float, help="Largest tabulated density")
        sub.add_argument("--dump", action="store_true", help="Write the tabulated field")
    simulate = commands.add_parser("simulate", help=SimulateJob.Meta.description)
    epsilons = commands.add_parser("sweep-epsilon", help=EpsilonSweepJob.Meta.description)
    domains = commands.add_parser("sweep-domain", help=DomainSweepJob.Meta.description)
    for sub in (eos, critical, special, kernel, simulate, epsilons, domains):
        _shared_arguments(sub, suppress=True)
    return parser


def _command_name(args):
    if args.command == "entropy":
        return f"entropy {args.entropy_command}"
    return args.command


def _level(args):
    if args.verbose:
        return logging.DEBUG
    if args.quiet:
        return logging.WARNING
    return logging.INFO


def _job_options(args):
    options = {"debug": bool(args.verbose)}
    if getattr(args, "dump", False):
        options["dump"] = True
    if getattr(args, "rho_max", None) is not None:
        options["rho_max"] = args.rho_max
    return options


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the selected job and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(_level(args))
    if not args.check and args.command is None:
        parser.print_usage(sys.stderr)
        LOGGER.error("a subcommand or --check is required")
        return EXIT_CONFIG
    try:
        config = load_config(args.config, args.set + getattr(args, "late_set", []))
        if args.check:
            if args.quick:
                config = config.model_copy(update={"check": config.check.quick()})
            report = run_acceptance(config, output=args.out)
            print(format_table(report))
            return EXIT_OK if report.passed else EXIT_CHECK
        command = _command_name(args)
        config.require_solver_law(command)
        job = COMMANDS[command](config, output=args.out, **_job_options(args))
        job.run()
    except ConfigError as err:
        LOGGER.error("%s", err)
        for message in err.errors:
            LOGGER.error("  %s", message)
        return EXIT_CONFIG
    except (LawError, NotApplicableError) as err:
        LOGGER.error("%s", err)
        return EXIT_CONFIG
    except NspLabError as err:
        LOGGER.error("%s: %s", type(err).__name__, err)
        return EXIT_NUMERICAL
    return EXIT_NUMERICAL if job.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
