"""Command-line front end.

Usage::

    sbt-ilc factor   --config plant.toml
    sbt-ilc analyze  --config plant.toml --out report.csv
    sbt-ilc sweep    --config plant.toml --out sweep.csv --threads 0
    sbt-ilc simulate --config plant.toml --out trace.csv --vectors vectors.csv

Records go to stdout as TOML, CSV goes to ``--out`` (``sweep`` falls back to
stdout), diagnostics go to stderr.
"""

import argparse
import csv
import dataclasses
import logging
import sys

import numpy as np
import toml

from sbt_ilc.analysis import StabilityReport, SweepRow, analyze, zero_padding_sweep
from sbt_ilc.config import Config
from sbt_ilc.errors import ConfigError, FactorizationError, IlcError, UnstablePlantError
from sbt_ilc.factorization import factor_plant
from sbt_ilc.simulator import Scenario, mismatch_study, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FACTORIZATION = 2
EXIT_NOT_CERTIFIED = 3
EXIT_DIVERGED = 4


class _Parser(argparse.ArgumentParser):
    """argparse reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "{}: error: {}\n".format(self.prog, message))


def _int_at_least(minimum):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError("invalid integer: {!r}".format(text))
        if value < minimum:
            raise argparse.ArgumentTypeError("must be >= {}, got {}".format(minimum, value))
        return value
    return parse


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="TOML scenario file")
    common.add_argument("--out", metavar="PATH", help="CSV output file")
    common.add_argument("--grid", type=_int_at_least(2), metavar="SIZE",
                        help="frequency grid size for the symbol sup")
    common.add_argument("--threads", type=_int_at_least(0), metavar="N",
                        help="worker threads for sweeps (0 = one per CPU)")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for debug output")

    parser = _Parser(prog="sbt-ilc", description="Synthesize, certify and simulate "
                     "zero-padded repetitive learning controllers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("factor", parents=[common], help="split the plant into G+ and G-")
    sub.add_parser("analyze", parents=[common], help="stability report of the transition matrix")
    sub.add_parser("sweep", parents=[common], help="spectral radius with and without zero-padding")
    simulate = sub.add_parser("simulate", parents=[common], help="run the learning iteration")
    simulate.add_argument("--vectors", metavar="PATH", help="write every trial vector as CSV")
    return parser


def _configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _write_csv(path, header, rows):
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("wrote %s", path)


def _print_record(record):
    sys.stdout.write(toml.dumps(record))


def _factored(config, law):
    if law.needs_factorization or getattr(law, "normalize", False):
        return factor_plant(config.plant(), config.circle_tol, config.factor_grid)
    return None


def cmd_factor(config, args):
    fp = factor_plant(config.plant(), config.circle_tol, config.factor_grid)
    record = {
        "nu": fp.nu,
        "d": fp.d,
        "gminus": fp.gminus.tolist(),
        "b": fp.b,
        "gplus_num": fp.gplus.num.tolist(),
        "gplus_den": fp.gplus.den.tolist(),
    }
    _print_record(record)
    if config.out:
        with open(config.out, "w") as f:
            toml.dump(record, f)
    return EXIT_OK


def cmd_analyze(config, args):
    law = config.law_object()
    transition = law.transition(config.plant(), config.n, _factored(config, law))
    report = analyze(transition, config.grid_size)
    sys.stdout.write(report.to_toml())
    if config.out:
        _write_csv(config.out, StabilityReport.CSV_FIELDS, [report.csv_row()])
    return EXIT_OK if report.true_stable else EXIT_NOT_CERTIFIED


def cmd_sweep(config, args):
    if not config.sweep:
        raise ConfigError("sweep list is empty", None, args.config)
    if config.law not in ("prototype", "modified"):
        raise ConfigError("sweep needs the prototype or modified law, got {!r}".format(config.law),
                          None, args.config)
    fp = factor_plant(config.plant(), config.circle_tol, config.factor_grid)
    q_u, q_e = config.filters()
    if config.law == "prototype":
        q_u = q_e = type(q_u).identity()
    rows = zero_padding_sweep(fp, config.alpha, q_u, q_e, config.sweep, config.grid_size,
                              config.threads, normalize=config.normalize)
    _write_csv(config.out, SweepRow.CSV_FIELDS, [row.csv_row() for row in rows])
    return EXIT_OK


def cmd_simulate(config, args):
    law = config.law_object()
    truth = config.truth_plant()
    options = dict(tolerance=config.tolerance, extension=config.extension,
                   circle_tol=config.circle_tol)
    reference = config.reference_signal()
    record = {}
    if truth is not None:
        report = mismatch_study(config.plant(), truth, law, reference, config.iterations, **options)
        trace = report.trace
        record.update(zpetc_peak=report.zpetc_peak, zpetc_peak_nominal=report.zpetc_peak_nominal,
                      true_radius=report.true_radius)
        if report.first_better is not None:
            record["first_better"] = report.first_better
    else:
        trace = run(Scenario(config.plant(), law, reference, config.iterations, **options))

    record.update(iterations=len(trace), converged=trace.converged, diverged=trace.diverged)
    if trace.converged_at is not None:
        record["converged_at"] = trace.converged_at
    if len(trace):
        record["final_norm_2"] = float(np.linalg.norm(trace.filtered_errors[-1]))
        record["final_peak_error"] = trace.peak_errors[-1]
    _print_record(record)

    if config.out:
        trace.to_csv(config.out)
    if config.vectors_out:
        trace.save_vectors(config.vectors_out)
    return EXIT_DIVERGED if trace.diverged else EXIT_OK


COMMANDS = {
    "factor": cmd_factor,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = Config.load(args.config)
        overrides = {}
        if args.out is not None:
            overrides["out"] = args.out
        if args.grid is not None:
            overrides["grid_size"] = args.grid
        if args.threads is not None:
            overrides["threads"] = args.threads
        if getattr(args, "vectors", None) is not None:
            overrides["vectors_out"] = args.vectors
        config = dataclasses.replace(config, **overrides)
        return COMMANDS[args.command](config, args)
    except (UnstablePlantError, FactorizationError) as e:
        print("sbt-ilc: factorization failed: {}".format(e), file=sys.stderr)
        return EXIT_FACTORIZATION
    except (IlcError, ValueError) as e:
        print("sbt-ilc: error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
