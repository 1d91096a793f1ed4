"""
Statistical checks of the simulators

Goodness-of-fit tests with asymptotic Kolmogorov p-values, a brute-force
oracle for finite exponent measures, Monte Carlo frequency comparisons with
standard errors and a runtime benchmark over dimensions.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import (Any, Callable, Dict, List, Optional, Sequence, Tuple,
                    Union)

import numpy as np
import pandas as pd
from scipy import special, stats
from uncertainties import ufloat

from .errors import UsageError
from .exchangeable import LevySpec, bivariate_survival, simulate_mo_sequence
from .exponent_measure import DiscreteFiniteMeasure, Location
from .library import ecdf, parallelize_replicates, pointwise_max
from .process import Alg1Options
from .samplers import RngStream, poisson_variate

LOG = logging.getLogger(__name__)

REPORT_COLUMNS = ["test", "d", "n", "statistic", "p_value", "pass", "seed"]

#: (s, t) points of the bivariate survival check, s <= t
SURVIVAL_GRID = ((0.25, 0.5), (0.5, 1.0), (1.0, 1.0))


@dataclass(frozen=True)
class KsResult:
    """ Outcome of a Kolmogorov-Smirnov test

    Attributes:
        statistic: Sup-distance between the distribution functions.
        n: Sample size (effective size for two samples).
        p_value: Asymptotic Kolmogorov p-value.
        passed: p_value >= alpha.
        alpha: Significance level.
    """
    statistic: float
    n: int
    p_value: float
    passed: bool
    alpha: float

    @property
    def threshold(self) -> float:
        return ks_critical_value(self.n, self.alpha)


def ks_critical_value(n: float, alpha: float = 0.01) -> float:
    """ Asymptotic critical value K⁻¹(α)/√n, ≈ 1.628/√n at α = 0.01 """
    return float(special.kolmogi(alpha) / np.sqrt(n))


def _validated(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise UsageError("KS test needs a non-empty sample")
    if not np.all(np.isfinite(x)):
        raise UsageError("KS test needs finite sample values")
    return x


def ks_test(sample: Sequence[float], reference_cdf: Callable,
            alpha: float = 0.01) -> KsResult:
    """ One-sample KS test against a continuous reference CDF

    Raises:
        UsageError: On an empty or non-finite sample.
    """
    x = _validated(sample)
    statistic = float(stats.kstest(x, reference_cdf).statistic)
    p_value = float(special.kolmogorov(np.sqrt(x.size) * statistic))
    return KsResult(statistic, int(x.size), p_value, p_value >= alpha, alpha)


def ks_2sample(a: Sequence[float], b: Sequence[float],
               alpha: float = 0.01) -> KsResult:
    """ Two-sample KS test with the asymptotic p-value """
    x, y = _validated(a), _validated(b)
    statistic = float(stats.ks_2samp(x, y).statistic)
    n_eff = x.size * y.size / (x.size + y.size)
    p_value = float(special.kolmogorov(np.sqrt(n_eff) * statistic))
    return KsResult(statistic, int(round(n_eff)), p_value, p_value >= alpha,
                    alpha)


def exp_cdf(x):
    """ Standard exponential CDF """
    return -np.expm1(-np.maximum(np.asarray(x, dtype=float), 0.0))


def _min_worker(task) -> float:
    spec, d, stream, options = task
    return float(simulate_mo_sequence(spec, d, stream, options)
                 .hitting_times.min())


def scaled_minima(d: int, n: int, spec: LevySpec, stream: RngStream,
                  scale: Optional[float] = None,
                  options: Optional[Alg1Options] = None,
                  n_cores: Optional[int] = 1,
                  progress: bool = False) -> np.ndarray:
    """ ψ(d)·min_{i<=d} T_i over n replicates, replicate r on substream r

    `scale` replaces ψ(d) when given.
    """
    scale = spec.psi(d) if scale is None else scale
    tasks = [(spec, d, stream.substream(r), options) for r in range(n)]
    minima = parallelize_replicates(_min_worker, tasks, n_cores, progress)
    return scale * np.asarray(minima, dtype=float)


def scaled_min_exp_check(d: int, n: int, spec: LevySpec, stream: RngStream,
                         alpha: float = 0.01, scale: Optional[float] = None,
                         n_cores: Optional[int] = 1) -> KsResult:
    """ KS test of ψ(d)·min_i T_i against Exp(1)

    For the stable specs ψ(d) = d**α; a wrong `scale` makes the test fail.
    """
    sample = scaled_minima(d, n, spec, stream, scale, n_cores=n_cores)
    result = ks_test(sample, exp_cdf, alpha)
    LOG.info("Scaled minimum d=%d n=%d: D=%.4f p=%.4f", d, n,
             result.statistic, result.p_value)
    return result


def _pair_worker(task) -> np.ndarray:
    spec, stream, options = task
    return simulate_mo_sequence(spec, 2, stream, options).hitting_times


def bivariate_survival_check(n: int, spec: LevySpec, stream: RngStream,
                             grid: Sequence[Tuple[float, float]]
                             = SURVIVAL_GRID,
                             sigmas: float = 3.0,
                             options: Optional[Alg1Options] = None,
                             n_cores: Optional[int] = 1,
                             progress: bool = False
                             ) -> List[Tuple[Tuple[float, float],
                                             FrequencyCheck]]:
    """ Frequencies of {T₁ > s, T₂ > t} against the closed-form survival

    One check per grid point, all on the same n pairs.
    """
    tasks = [(spec, stream.substream(r), options) for r in range(n)]
    pairs = np.vstack(parallelize_replicates(_pair_worker, tasks, n_cores,
                                             progress))
    checks = []
    for s, t in grid:
        events = (pairs[:, 0] > s) & (pairs[:, 1] > t)
        check = compare_frequencies(events, bivariate_survival(spec, s, t),
                                    sigmas)
        LOG.info("Bivariate survival at (%g, %g): %s vs %.4f", s, t,
                 check.observed, check.expected)
        checks.append(((s, t), check))
    return checks


def ecdf_frame(sample: Sequence[float]) -> pd.DataFrame:
    """ Sorted sample, its ECDF i/n and the Exp(1) CDF on the same grid

    The KS statistic against Exp(1) is
    max(max(ecdf - exp_cdf), max(exp_cdf - (ecdf - 1/n))).
    """
    x, F = ecdf(sample)
    return pd.DataFrame({"x": x, "ecdf": F, "exp_cdf": exp_cdf(x)})


def ks_statistic_from_frame(frame: pd.DataFrame) -> float:
    n = len(frame)
    upper = (frame["ecdf"] - frame["exp_cdf"]).max()
    lower = (frame["exp_cdf"] - (frame["ecdf"] - 1.0 / n)).max()
    return float(max(upper, lower))


def finite_measure_oracle(measure: DiscreteFiniteMeasure,
                          locations: Sequence[Location],
                          stream: RngStream) -> np.ndarray:
    """ Brute-force draw: the whole finite PRM, then pointwise maxima

    Poisson(total mass) atoms are drawn i.i.d. proportionally to the
    weights.
    """
    locations = tuple(locations)
    count = poisson_variate(stream, measure.total_mass)
    if count == 0:
        return np.zeros(len(locations))
    which = stream.generator.choice(len(measure.tables), size=count,
                                    p=measure.weights / measure.total_mass)
    rows = [np.array([measure.tables[k].get(t, 0.0) for t in locations])
            for k in which]
    return pointwise_max(rows, len(locations))


@dataclass(frozen=True)
class FrequencyCheck:
    """ A Monte Carlo frequency compared within `sigmas` standard errors """
    observed: Any
    expected: Any
    passed: bool

    @property
    def deviation(self) -> float:
        return float(abs(self.observed.n - getattr(self.expected, "n",
                                                   self.expected)))


def frequency(events: Sequence[bool]):
    """ Event frequency with its binomial standard error """
    e = np.asarray(events, dtype=bool)
    if e.size == 0:
        raise UsageError("Frequency of an empty sample")
    p = e.mean()
    return ufloat(p, np.sqrt(p * (1 - p) / e.size))


def compare_frequencies(events: Sequence[bool],
                        reference: Union[float, Sequence[bool]],
                        sigmas: float = 3.0) -> FrequencyCheck:
    """ Compare an event frequency with a probability or another sample

    Against a probability p the band is sigmas·√(p(1-p)/n); against a second
    sample the standard errors of both frequencies are combined.
    """
    e = np.asarray(events, dtype=bool)
    if np.isscalar(reference):
        p = float(reference)
        observed = ufloat(e.mean(), np.sqrt(p * (1 - p) / e.size))
        deviation = abs(observed.n - p)
        return FrequencyCheck(observed, p,
                              bool(deviation <= sigmas * observed.s))
    observed = frequency(e)
    expected = frequency(reference)
    difference = observed - expected
    return FrequencyCheck(observed, expected,
                          bool(abs(difference.n) <= sigmas * difference.s))


@dataclass
class PanelResult:
    results: List[KsResult]
    required: int

    @property
    def passes(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def passed(self) -> bool:
        return self.passes >= self.required


def seed_panel(check: Callable[[int], KsResult], seeds: Sequence[int],
               required: int = 4) -> PanelResult:
    """ Run `check` once per seed, pass if at least `required` runs pass """
    if required > len(seeds):
        raise UsageError(f"Cannot require {required} passes from "
                         f"{len(seeds)} seeds")
    return PanelResult([check(seed) for seed in seeds], required)


@dataclass(frozen=True)
class BenchRow:
    d: int
    n: int
    seconds: float
    atoms_simulated: int


def _bench_worker(task):
    spec, d, stream = task
    return simulate_mo_sequence(spec, d, stream).diagnostics.atoms_simulated


def bench_scaling(dims: Sequence[int], n: int, spec: LevySpec,
                  stream: RngStream, n_cores: Optional[int] = 1,
                  progress: bool = False) -> List[BenchRow]:
    """ Wall time and simulated atoms of n replicates per dimension

    Raises:
        UsageError: If `dims` is empty or not ascending.
    """
    dims = [int(d) for d in dims]
    if not dims:
        raise UsageError("Benchmark needs at least one dimension")
    if any(b <= a for a, b in zip(dims[:-1], dims[1:])) or dims[0] < 1:
        raise UsageError(f"Benchmark dimensions must be ascending, got {dims}")
    if n == 0:
        return []
    rows = []
    for d in dims:
        if d >= 10000:
            LOG.warning("Dimension %d is long-running", d)
        tasks = [(spec, d, stream.substream(r)) for r in range(n)]
        start = time.perf_counter()
        atoms = parallelize_replicates(_bench_worker, tasks, n_cores,
                                       progress)
        seconds = time.perf_counter() - start
        rows.append(BenchRow(d, n, seconds, int(sum(atoms))))
        LOG.info("d=%d n=%d: %.3f s, %d atoms", d, n, seconds, sum(atoms))
    return rows


@dataclass
class ValidationReport:
    """ Collected test outcomes, flat in the report columns """
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, test: str, d: int, n: int, result: KsResult, seed: int):
        self.rows.append({"test": test, "d": d, "n": n,
                          "statistic": result.statistic,
                          "p_value": result.p_value,
                          "pass": bool(result.passed), "seed": seed})

    def add_frequency(self, test: str, d: int, n: int, check: FrequencyCheck,
                      seed: int):
        self.rows.append({"test": test, "d": d, "n": n,
                          "statistic": check.deviation,
                          "p_value": np.nan,
                          "pass": bool(check.passed), "seed": seed})

    @property
    def passed(self) -> bool:
        return all(row["pass"] for row in self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS)
