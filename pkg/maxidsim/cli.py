"""
Command line front end

    maxidsim simulate  --family mo-stable --d 10 --n 1000 --seed 42 --out x.csv
    maxidsim validate  --family mo-stable --dims 10,100 --n 1000
    maxidsim bench     --family mo-stable --dims 10,50,100 --n 100 --out b.csv
    maxidsim plot-data --family mo-stable --dims 10 --n 1000 --out ecdf.csv

Every output is a pure function of the configuration and the seed, except
the opt-in wall-clock columns (--timings) and the benchmark.
"""
from __future__ import annotations

import argparse
import logging
import sys
from enum import IntEnum, unique
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from .config import Family, RunConfig, COMMANDS, FAMILY_TAGS, FORMATS
from .errors import (DomainError, EnvelopeViolationError, NumericError,
                     TerminationCapError, UsageError)
from .exponent_measure import ScaleMixtureMeasure
from .filehandling import save_frame, sidecar_path
from .introspection import get_logger, level_from_flags
from .library import parallelize_replicates
from .samplers import RngStream
from .validation import (ValidationReport, bench_scaling,
                         bivariate_survival_check, compare_frequencies,
                         ecdf_frame, finite_measure_oracle, ks_test,
                         scaled_min_exp_check, scaled_minima)

LOG = logging.getLogger(__name__)


@unique
class ExitCode(IntEnum):
    """ Process exit codes of the command line tool """
    OK = 0
    VALIDATION_FAILURE = 1
    USAGE = 2
    RUNTIME = 3

    def __str__(self):
        return {0: 'OK', 1: 'Validation failure', 2: 'Usage error',
                3: 'Runtime error'}[self.value]


def _dims(text: str) -> List[int]:
    try:
        dims = [int(d) for d in text.split(",") if d.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be comma separated "
                                         f"integers, got '{text}'")
    return dims


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", help="Family tag, one of "
                        + ", ".join(FAMILY_TAGS))
    common.add_argument("--params", help="JSON run configuration; flags "
                        "override its values")
    common.add_argument("--d", type=int, help="Dimension")
    common.add_argument("--n", type=int, help="Number of replicates")
    common.add_argument("--seed", type=int, help="64-bit seed")
    common.add_argument("--dims", type=_dims,
                        help="Comma separated dimensions, e.g. 10,100")
    common.add_argument("--out", help="Output file (.csv or .json)")
    common.add_argument("--format", choices=FORMATS,
                        help="Output format, default from the suffix")
    common.add_argument("--threads", type=int,
                        help="Worker processes, default all cores")
    common.add_argument("--alpha", type=float, help="Significance level")
    common.add_argument("--timings", action="store_true", default=None,
                        help="Add wall-clock columns to the diagnostics")
    common.add_argument("--check-monotone", dest="check_monotone",
                        action="store_true", default=None,
                        help="bench: fail unless seconds increase with d")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--quiet", action="store_true",
                        help="No progress bars, warnings only")

    parser = argparse.ArgumentParser(
        prog="maxidsim",
        description="Exact simulation of max-id processes and vectors")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub.add_parser(command, parents=[common])
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.params) if args.params else RunConfig()
    flags = {key: getattr(args, key) for key in
             ("command", "family", "d", "n", "seed", "dims", "out", "format",
              "threads", "alpha", "timings", "check_monotone")}
    return config.merge_flags(flags)


def _simulate_worker(task):
    family, d, stream = task
    return family.draw(d, stream)


def cmd_simulate(config: RunConfig, family: Family,
                 progress: bool = False) -> ExitCode:
    """ n replicates of d values plus the diagnostics sidecar """
    tasks = [(family, config.d, RngStream(config.seed, r))
             for r in range(config.n)]
    draws = parallelize_replicates(_simulate_worker, tasks, config.threads,
                                   progress)
    values = pd.DataFrame(np.vstack([draw.values for draw in draws]),
                          columns=[f"x{i}" for i in range(1, config.d + 1)])
    diagnostics = pd.DataFrame({
        "replicate": np.arange(config.n),
        "atoms_simulated": [draw.atoms_simulated for draw in draws],
        "atoms_kept": [draw.atoms_kept for draw in draws],
        "steps": [draw.steps for draw in draws]})
    if config.timings:
        diagnostics["wall_seconds"] = [draw.wall_seconds for draw in draws]
    path = save_frame(values, config.out, config.filetype)
    save_frame(diagnostics, sidecar_path(path), "csv")
    LOG.info("Wrote %d replicates to %s", config.n, path)
    return ExitCode.OK


def _panel_seeds(config: RunConfig) -> List[int]:
    return [config.seed + k for k in range(config.panel)]


def _panel_passed(report: ValidationReport, test: str, d: int,
                  required: int) -> bool:
    passes = sum(row["pass"] for row in report.rows
                 if row["test"] == test and row["d"] == d)
    return passes >= required


def _validate_sequence(config: RunConfig, family: Family,
                       report: ValidationReport) -> bool:
    passed = True
    spec = family.spec
    for d in config.dimensions():
        for seed in _panel_seeds(config):
            result = scaled_min_exp_check(d, config.n, spec, RngStream(seed),
                                          config.alpha,
                                          n_cores=config.threads)
            report.add("scaled_min", d, config.n, result, seed)
        passed &= _panel_passed(report, "scaled_min", d,
                                config.required_passes)
    for seed in _panel_seeds(config):
        result = scaled_min_exp_check(1, config.n, spec, RngStream(seed),
                                      config.alpha, n_cores=config.threads)
        report.add("marginal", 1, config.n, result, seed)
    passed &= _panel_passed(report, "marginal", 1, config.required_passes)
    # a seed passes the survival check when every grid point does
    survival_passes = 0
    for seed in _panel_seeds(config):
        checks = bivariate_survival_check(config.n, spec, RngStream(seed),
                                          n_cores=config.threads)
        for (s, t), check in checks:
            report.add_frequency(f"bivariate_survival_{s:g}_{t:g}", 2,
                                 config.n, check, seed)
        survival_passes += all(check.passed for _, check in checks)
    return passed and survival_passes >= config.required_passes


def _validate_vector(config: RunConfig, family: Family,
                     report: ValidationReport, progress: bool) -> bool:
    measure: ScaleMixtureMeasure = family.measure
    passed = True
    for seed in _panel_seeds(config):
        tasks = [(family, config.d, RngStream(seed, r))
                 for r in range(config.n)]
        draws = parallelize_replicates(_simulate_worker, tasks,
                                       config.threads, progress)
        first = np.array([draw.values[0] for draw in draws])
        if measure.radial.is_finite:
            mass = measure.radial.total_mass \
                * measure.angular.positive_probability(1)
            check = compare_frequencies(first == 0, float(np.exp(-mass)))
            report.add_frequency("zero_probability", config.d, config.n,
                                 check, seed)
        else:
            def cdf(x):
                return np.exp(-np.array([measure.mass_above(1, v) if v > 0
                                         else np.inf for v in np.atleast_1d(x)]))
            report.add("marginal", config.d, config.n,
                       ks_test(first, cdf, config.alpha), seed)
    for test in ("marginal", "zero_probability"):
        rows = [r for r in report.rows if r["test"] == test]
        if rows:
            passed &= _panel_passed(report, test, config.d,
                                    config.required_passes)
    return passed


def _validate_discrete(config: RunConfig, family: Family,
                       report: ValidationReport, progress: bool) -> bool:
    measure = family.measure
    locations = tuple(range(1, config.d + 1))
    seed = config.seed
    tasks = [(family, config.d, RngStream(seed, r)) for r in range(config.n)]
    draws = parallelize_replicates(_simulate_worker, tasks, config.threads,
                                   progress)
    simulated = np.vstack([draw.values for draw in draws])
    oracle_stream = RngStream(seed, config.n)
    oracle = np.vstack([finite_measure_oracle(measure, locations,
                                              oracle_stream)
                        for _ in range(config.n)])
    passed = True
    for j, t in enumerate(locations):
        positive = measure.mass_above(t, np.nextafter(0, 1))
        check = compare_frequencies(simulated[:, j] == 0,
                                    float(np.exp(-positive)))
        report.add_frequency(f"zero_probability_x{t}", config.d, config.n,
                             check, seed)
        passed &= check.passed
        levels = sorted({table.get(t, 0.0) for table in measure.tables} - {0})
        for level in levels:
            check = compare_frequencies(simulated[:, j] >= level,
                                        oracle[:, j] >= level)
            report.add_frequency(f"oracle_x{t}>={level:g}", config.d,
                                 config.n, check, seed)
            passed &= check.passed
    return passed


def cmd_validate(config: RunConfig, family: Family,
                 progress: bool = False) -> ExitCode:
    """ Acceptance checks of the configured family, exit 1 on failure """
    report = ValidationReport()
    if family.kind == "sequence":
        passed = _validate_sequence(config, family, report)
    elif family.kind == "vector":
        passed = _validate_vector(config, family, report, progress)
    else:
        passed = _validate_discrete(config, family, report, progress)
    frame = report.to_frame()
    if config.out is not None:
        path = save_frame(frame, config.out, config.filetype)
        LOG.info("Wrote validation report to %s", path)
    for row in report.rows:
        LOG.info("%s d=%d: statistic %.4g, pass %s", row["test"], row["d"],
                 row["statistic"], row["pass"])
    return ExitCode.OK if passed else ExitCode.VALIDATION_FAILURE


def cmd_bench(config: RunConfig, family: Family,
              progress: bool = False) -> ExitCode:
    """ Runtime per dimension """
    rows = bench_scaling(config.dimensions(), config.n, family.spec,
                         RngStream(config.seed), config.threads, progress)
    frame = pd.DataFrame([vars(row) for row in rows],
                         columns=["d", "n", "seconds", "atoms_simulated"])
    if config.out is not None:
        save_frame(frame, config.out, config.filetype)
    seconds = frame["seconds"].to_numpy()
    if config.check_monotone and np.any(np.diff(seconds) <= 0):
        LOG.error("Benchmark seconds not increasing in d: %s", seconds)
        return ExitCode.VALIDATION_FAILURE
    return ExitCode.OK


def cmd_plot_data(config: RunConfig, family: Family,
                  progress: bool = False) -> ExitCode:
    """ ECDF of the scaled minima next to the Exp(1) CDF, per dimension """
    blocks = []
    for d in config.dimensions():
        minima = scaled_minima(d, config.n, family.spec,
                               RngStream(config.seed), n_cores=config.threads,
                               progress=progress)
        block = ecdf_frame(minima)
        block.insert(0, "d", d)
        blocks.append(block)
    frame = pd.concat(blocks, ignore_index=True)
    if config.out is not None:
        save_frame(frame, config.out, config.filetype)
    return ExitCode.OK


COMMAND_TABLE = {"simulate": cmd_simulate, "validate": cmd_validate,
                 "bench": cmd_bench, "plot-data": cmd_plot_data}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    get_logger("maxidsim", level_from_flags(args.verbose, args.quiet))
    try:
        config = load_config(args)
        family = config.validate()
        code = COMMAND_TABLE[config.command](config, family,
                                            progress=not args.quiet)
    except UsageError as e:
        LOG.error("%s: %s", ExitCode.USAGE, e)
        return int(ExitCode.USAGE)
    except (EnvelopeViolationError, TerminationCapError, NumericError,
            DomainError, OSError) as e:
        LOG.error("%s: %s: %s", ExitCode.RUNTIME, type(e).__name__, e)
        return int(ExitCode.RUNTIME)
    return int(code)


if __name__ == "__main__":
    sys.exit(main())
