#!/usr/bin/env python3
"""Command-line interface for levyma.

Subcommands simulate fields, check the standing assumptions, estimate
functionals on one sample and run the Monte-Carlo experiments that produce
``records.csv``, ``summary.json``, ``timing.csv`` and ``verdicts.txt``.
"""

import argparse
import json
import logging
import os
import signal
import sys
import traceback

from .commands import (
    handle_check_conditions,
    handle_estimate,
    handle_inequalities,
    handle_mc_clt,
    handle_mc_clt_multi,
    handle_mc_consistency,
    handle_replay,
    handle_simulate,
)
from .errors import ConfigError, LevymaError

JSON_ERRORS_ENV = "LEVYMA_JSON_ERRORS"

EXPERIMENT_HELP = """Run a Monte-Carlo experiment and evaluate its verdicts.

The verdict table goes to stderr and a JSON headline (experiment, passed,
per-verdict status and the main statistics) to stdout. With --out DIR the
full artifacts are written there.

Examples:
  levyma mc-clt --config clt.toml --out runs/clt
  levyma mc-clt --drift --reps 200 --threads 8
  LEVYMA_SEED=7 levyma mc-consistency --out runs/consistency"""


def json_error(error_type, message, details=None, exit_code=1):
    """Report an error on stderr and exit.

    JSON when stderr is not a terminal or ``LEVYMA_JSON_ERRORS`` is set,
    a one-line ``levyma: error:`` message otherwise.
    """
    error_obj = {"error": {"type": error_type, "message": message}}
    if details:
        error_obj["error"]["details"] = details

    if not sys.stderr.isatty() or os.environ.get(JSON_ERRORS_ENV):
        print(json.dumps(error_obj), file=sys.stderr)
    else:
        print(f"levyma: error: {message}", file=sys.stderr)
        if details:
            for key, value in details.items():
                if value is not None and key != "traceback":
                    print(f"  {key}: {value}", file=sys.stderr)

    sys.exit(exit_code)


def _common(parser, sample_size=False):
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--seed", type=int, help="Base seed (overrides config and LEVYMA_SEED)")
    parser.add_argument("--debug", action="store_true", help="Debug logging and tracebacks")
    if sample_size:
        parser.add_argument("--n", type=int, help="Window side length")


def _experiment(parser):
    _common(parser)
    parser.add_argument("--out", help="Directory for records, summary, timing and verdicts")
    parser.add_argument("--reps", type=int, help="Replicates per sample size")
    parser.add_argument("--threads", type=int, help="Worker processes")
    parser.add_argument("--strict", action="store_true", help="Exit 1 when a verdict fails")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="levyma",
        description="Estimate linear functionals of the Levy density of a moving-average random field.",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="cmd")

    sp_sim = subparsers.add_parser("simulate", help="Simulate one field and write it as CSV")
    _common(sp_sim, sample_size=True)
    sp_sim.add_argument("-o", "--output", help="Output file (defaults to stdout)")
    sp_sim.add_argument("--diagnostic", action="store_true",
                        help="Print lagwise dependence diagnostics to stderr")

    sp_check = subparsers.add_parser("check-conditions",
                                     help="Report assumptions, schedule conditions and admissibility")
    _common(sp_check)

    sp_est = subparsers.add_parser("estimate", help="Estimate every configured functional on one sample")
    _common(sp_est, sample_size=True)
    sp_est.add_argument("--sample", help="Sample CSV written by 'simulate' (simulates when omitted)")
    sp_est.add_argument("--ci", action="store_true", help="Add plug-in variance and confidence interval")
    sp_est.add_argument("--dump-uv1", dest="dump_uv1", help="Write the estimate of x v1 as grid CSV")
    sp_est.add_argument("--dump-uv0", dest="dump_uv0", help="Write the estimate of x v0 as log-grid CSV")

    for name, text in (
        ("mc-consistency", "Error decay across window sizes"),
        ("mc-clt", "Normality of the rescaled error"),
        ("mc-clt-multi", "Joint normality and covariance"),
        ("inequalities", "Tail and moment inequalities"),
    ):
        sp = subparsers.add_parser(name, help=text, description=EXPERIMENT_HELP,
                                   formatter_class=argparse.RawTextHelpFormatter)
        _experiment(sp)
        if name == "mc-clt":
            sp.add_argument("--drift", action="store_true",
                            help="Also rerun with nonzero drift and compare distributions")

    sp_replay = subparsers.add_parser("replay", help="Recompute one replicate from its seed")
    _common(sp_replay, sample_size=True)
    sp_replay.add_argument("--records", help="records.csv to compare against")
    return parser


def _configure_logging(debug):
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)


def main(argv=None):
    try:
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    except AttributeError:
        # SIGPIPE doesn't exist on Windows
        pass

    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.cmd is None:
            parser.print_help()
            sys.exit(0)
        if args.cmd == "replay" and args.seed is None:
            parser.error("replay requires --seed")
        _configure_logging(getattr(args, "debug", False))

        command_handlers = {
            "simulate": handle_simulate,
            "check-conditions": handle_check_conditions,
            "estimate": handle_estimate,
            "mc-consistency": handle_mc_consistency,
            "mc-clt": handle_mc_clt,
            "mc-clt-multi": handle_mc_clt_multi,
            "inequalities": handle_inequalities,
            "replay": handle_replay,
        }
        handler = command_handlers.get(args.cmd)
        if handler is None:
            json_error("CommandError", f"Unknown command: {args.cmd}",
                       {"command": args.cmd, "available_commands": list(command_handlers)})
        sys.exit(handler(args))

    except BrokenPipeError:
        sys.exit(0)
    except KeyboardInterrupt:
        sys.exit(130)
    except ConfigError as e:
        json_error("ConfigError", str(e), e.details(), exit_code=2)
    except LevymaError as e:
        details = e.details() if hasattr(e, "details") else None
        json_error(type(e).__name__, str(e), details)
    except FileNotFoundError as e:
        json_error("FileNotFoundError", str(e),
                   {"filename": str(e.filename) if hasattr(e, "filename") else None})
    except PermissionError as e:
        json_error("PermissionError", str(e),
                   {"filename": str(e.filename) if hasattr(e, "filename") else None})
    except Exception as e:
        error_details = {
            "exception_type": type(e).__name__,
            "traceback": traceback.format_exc().split("\n") if "--debug" in argv else None,
        }
        json_error("UnexpectedError", str(e), error_details)


if __name__ == "__main__":
    main()
