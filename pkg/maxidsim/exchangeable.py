"""
Exchangeable Marshall-Olkin sequences driven by subordinators

An exchangeable min-id sequence T with exponential margins is the sequence of
hitting times T_i = inf{t : H_t >= E_i} of a subordinator H across i.i.d.
unit exponential thresholds E_i. Its reciprocal X = 1/T is max-id, with an
exponent measure mixing reciprocal i.i.d. two-point sequences over the Lévy
measure of H. Atoms of {f_n >= c} are drawn in closed form: a Poisson number
of shocks Y uniform on (0, 1/c) with jumps U from the size-biased Lévy law.

The additive variant lets the shock intensity depend on the shock time
(exogenous shock models).
"""
from __future__ import annotations

import logging
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NumericError, UsageError
from .exponent_measure import SequenceMixtureMeasure, ShockAtom
from .library import reciprocal
from .process import Alg1Options, ExtremalSample, simulate_process
from .samplers import (PowerLawEnvelope, PowerLawPiece, RngStream,
                       exp_from_uniform, poisson_variate,
                       rejection_sample_many)

LOG = logging.getLogger(__name__)
logging.captureWarnings(True)

QUAD_EPSREL = 1e-9


def integrate_quad(func: Callable[[float], float], lower: float,
                   upper: float) -> float:
    """ Adaptive quadrature with non-convergence raised as NumericError """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(func, lower, upper,
                                      epsrel=QUAD_EPSREL, limit=200)
        except integrate.IntegrationWarning as e:
            raise NumericError(f"Quadrature on ({lower}, {upper}) did not "
                               f"converge: {e}") from e
    if not np.isfinite(value):
        raise NumericError(f"Quadrature on ({lower}, {upper}) gave {value}")
    return float(value)


def _split_integral(func: Callable[[float], float]) -> float:
    """ ∫ over (0, inf), split at 1 for the singularity at 0 """
    return integrate_quad(func, 0.0, 1.0) + integrate_quad(func, 1.0, np.inf)


class StableDensity:
    """ Lévy density K·u**(-α-1) of an α-stable subordinator """

    def __init__(self, alpha: float, K: float):
        self.alpha = alpha
        self.K = K

    def __call__(self, u):
        return self.K * np.power(u, -self.alpha - 1.0)


class StableLaplace:
    """ ψ(x) = x**α, valid under the C₁ = 1 normalization """

    def __init__(self, alpha: float):
        self.alpha = alpha

    def __call__(self, x):
        return np.power(x, self.alpha)


class GammaDensity:
    """ Lévy density a·exp(-b·u)/u of a Gamma subordinator """

    def __init__(self, shape: float, rate: float):
        self.shape = shape
        self.rate = rate

    def __call__(self, u):
        return self.shape * np.exp(-self.rate * u) / u


class GammaLaplace:
    def __init__(self, shape: float, rate: float):
        self.shape = shape
        self.rate = rate

    def __call__(self, x):
        return self.shape * np.log1p(np.asarray(x, dtype=float) / self.rate)


@dataclass
class LevySpec:
    """ A subordinator given by its Lévy density

    Attributes:
        name: Label used in logs and reports.
        density: The Lévy density g_υ on (0, inf), vectorized.
        envelope: Dominates the size-biased density (1 - exp(-u))·g_υ(u).
        C1: ∫(1 - exp(-u))·g_υ(u) du, integrated if not given.
        laplace: Closed-form Laplace exponent ψ without drift, optional.
        drift: Linear drift b >= 0 of the subordinator.
    """
    name: str
    density: Callable[[np.ndarray], np.ndarray]
    envelope: PowerLawEnvelope
    C1: Optional[float] = None
    laplace: Optional[Callable[[float], float]] = None
    drift: float = 0.0

    def __post_init__(self):
        if self.C1 is None:
            self.C1 = _split_integral(lambda u: float(self.size_biased(u)))
        if not 0 < self.C1 < np.inf:
            raise DomainError(f"C1 must be positive and finite, got {self.C1}")
        if self.drift < 0:
            raise DomainError(f"Drift must be non-negative, got {self.drift}")

    def size_biased(self, u):
        """ (1 - exp(-u))·g_υ(u), the unnormalized size-biased jump density """
        u = np.asarray(u, dtype=float)
        return -np.expm1(-u) * self.density(u)

    def psi(self, x: float) -> float:
        """ Laplace exponent ψ(x) = b·x + ∫(1 - exp(-x·u))·g_υ(u) du """
        if x < 0:
            raise DomainError(f"Laplace exponent needs x >= 0, got {x}")
        if x == 0:
            return 0.0
        if self.laplace is not None:
            jumps = float(self.laplace(x))
        else:
            jumps = _split_integral(lambda u: float(-np.expm1(-x * u)
                                                    * self.density(u)))
        return self.drift * x + jumps

    def band_mass(self, c: float) -> float:
        """ C_c = C₁/c """
        if not c > 0:
            raise DomainError(f"Threshold must be positive, got {c}")
        return self.C1 / c

    def band_mass_vanishing(self, c: float, k: int) -> float:
        """ μ({f : f_n >= c, f = 0 at k other indices})

        A jump u misses each other index with probability exp(-u), so the
        mass is (ψ(k+1) - ψ(k))/c with the drift-free exponent.
        """
        if k == 0:
            return self.band_mass(c)
        if not c > 0:
            raise DomainError(f"Threshold must be positive, got {c}")
        return (self._jump_psi(k + 1) - self._jump_psi(k)) / c

    def _jump_psi(self, x: float) -> float:
        return self.psi(x) - self.drift * x

    def positive_mass(self) -> float:
        return np.inf

    def characteristic_scale(self) -> float:
        return self.C1

    def sample_prm_above(self, anchor: int, c: float, indices: Sequence[int],
                         stream: RngStream) -> List[ShockAtom]:
        return mo_sample_prm_above(self, anchor, c, indices, stream)

    def scaled_envelope(self, factor: float) -> LevySpec:
        """ Copy with the envelope coefficients multiplied by `factor` """
        return LevySpec(self.name, self.density, self.envelope.scaled(factor),
                        self.C1, self.laplace, self.drift)


def stable_spec(alpha: float = 0.5, envelope_scale: float = 1.0,
                drift: float = 0.0) -> LevySpec:
    """ α-stable subordinator normalized to C₁ = 1

    K = α/Γ(1-α) makes ψ(x) = x**α. The envelope K·u**(-α) on (0, 1] and
    K·u**(-α-1) on (1, inf) dominates the size-biased density since
    1 - exp(-u) <= min(u, 1).
    """
    if not 0 < alpha < 1:
        raise DomainError(f"Stability index must lie in (0, 1), got {alpha}")
    K = alpha / special.gamma(1.0 - alpha)
    envelope = PowerLawEnvelope([PowerLawPiece(0.0, 1.0, K, -alpha),
                                 PowerLawPiece(1.0, np.inf, K, -alpha - 1.0)])
    if envelope_scale != 1.0:
        envelope = envelope.scaled(envelope_scale)
    return LevySpec(f"stable({alpha:g})", StableDensity(alpha, K), envelope,
                    C1=1.0, laplace=StableLaplace(alpha), drift=drift)


def half_stable_spec() -> LevySpec:
    """ The 1/2-stable subordinator, K = 1/(2·Γ(1/2)) """
    return stable_spec(0.5)


def gamma_spec(shape: float = 1.0, rate: float = 1.0,
               envelope_scale: float = 1.0, drift: float = 0.0) -> LevySpec:
    """ Gamma subordinator with g_υ(u) = a·exp(-b·u)/u

    C₁ = a·log(1 + 1/b) and ψ(x) = a·log(1 + x/b). The envelope is a on
    (0, 1] and a·k_b·u**-3 on (1, inf), k_b = sup_{u>=1} u²·exp(-b·u).
    """
    if not shape > 0 or not rate > 0:
        raise DomainError(f"Gamma subordinator needs shape, rate > 0, got "
                          f"{shape}, {rate}")
    u_star = max(1.0, 2.0 / rate)
    k_b = u_star**2 * math.exp(-rate * u_star)
    envelope = PowerLawEnvelope([PowerLawPiece(0.0, 1.0, shape, 0.0),
                                 PowerLawPiece(1.0, np.inf, shape * k_b, -3.0)])
    if envelope_scale != 1.0:
        envelope = envelope.scaled(envelope_scale)
    return LevySpec(f"gamma({shape:g}, {rate:g})", GammaDensity(shape, rate),
                    envelope, C1=shape * math.log1p(1.0 / rate),
                    laplace=GammaLaplace(shape, rate), drift=drift)


def psi(spec: LevySpec, x: float) -> float:
    """ Laplace exponent of the subordinator of `spec` """
    return spec.psi(x)


def min_survival(spec: LevySpec, d: int, t: float) -> float:
    """ ℙ(min_{i<=d} T_i > t) = exp(-t·ψ(d)) """
    return math.exp(-t * spec.psi(d))


def bivariate_survival(spec: LevySpec, s: float, t: float) -> float:
    """ ℙ(T₁ > s, T₂ > t) = exp(-ψ(2)·min(s, t) - ψ(1)·|t - s|) """
    return math.exp(-spec.psi(2) * min(s, t) - spec.psi(1) * abs(t - s))


def mo_sample_prm_above(spec: LevySpec, anchor: int, c: float,
                        indices: Sequence[int],
                        stream: RngStream) -> List[ShockAtom]:
    """ Exact PRM with intensity 1{f_anchor >= c} dμ

    Draws M ~ Poisson(C₁/c) shocks with Y ~ Uniform(0, 1/c) and jumps from
    the size-biased law (1 - exp(-u))·g_υ(u)/C₁. Each atom is hit at the
    anchor and at any other index with probability 1 - exp(-U).

    Raises:
        DomainError: If c <= 0.
        EnvelopeViolationError: If the envelope does not dominate.
    """
    count = poisson_variate(stream, spec.band_mass(c))
    if count == 0:
        return []
    shocks = stream.uniform(count) / c
    jumps, attempts = rejection_sample_many(spec.size_biased, spec.envelope,
                                            stream, count)
    LOG.debug("%d shocks above %.4g at index %d, %d proposals", count, c,
              anchor, attempts)
    return [ShockAtom(y, u, anchor, stream, indices)
            for y, u in zip(shocks, jumps)]


class AdditiveSpec:
    """ Shocks whose intensity depends on the shock time

    The exponent measure mixes the same two-point sequences as `LevySpec`,
    with g(s, u) ds du in place of ds·g_υ(u) du. Shock times live on
    (0, s_max); a finite s_max gives every index finite positive mass.

    Attributes:
        density: g(s, u), vectorized in u.
        envelope_for: s -> envelope dominating (1 - exp(-u))·g(s, u).
        time_intensity: G(s) = ∫(1 - exp(-u))·g(s, u) du, integrated if
            not given.
        time_intensity_bound: Upper bound of G on (0, s_max). Enables
            rejection sampling of shock times, otherwise they are drawn by
            inverting the integrated intensity.
        s_max: End of the shock-time support.
    """

    def __init__(self, density: Callable[[float, np.ndarray], np.ndarray],
                 envelope_for: Callable[[float], PowerLawEnvelope],
                 time_intensity: Optional[Callable[[float], float]] = None,
                 time_intensity_bound: Optional[float] = None,
                 s_max: float = np.inf, name: str = "additive"):
        if not s_max > 0:
            raise DomainError(f"s_max must be positive, got {s_max}")
        self.name = name
        self.density = density
        self.envelope_for = envelope_for
        self._time_intensity = time_intensity
        self.time_intensity_bound = time_intensity_bound
        self.s_max = float(s_max)
        self._cache: Dict[float, float] = {}
        self._lock = threading.Lock()

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def size_biased(self, s: float, u):
        u = np.asarray(u, dtype=float)
        return -np.expm1(-u) * self.density(s, u)

    def time_intensity(self, s: float) -> float:
        if self._time_intensity is not None:
            return float(self._time_intensity(s))
        return _split_integral(lambda u: float(self.size_biased(s, u)))

    def cumulative_intensity(self, upper: float) -> float:
        """ ∫_0^upper G(s) ds, memoized """
        upper = min(float(upper), self.s_max)
        with self._lock:
            cached = self._cache.get(upper)
        if cached is not None:
            return cached
        if np.isinf(upper):
            value = np.inf
        else:
            value = integrate_quad(self.time_intensity, 0.0, upper)
        with self._lock:
            self._cache[upper] = value
        return value

    def band_mass(self, c: float) -> float:
        """ C_c = ∫_0^{1/c} G(s) ds """
        if not c > 0:
            raise DomainError(f"Threshold must be positive, got {c}")
        return self.cumulative_intensity(1.0 / c)

    def band_mass_vanishing(self, c: float, k: int) -> float:
        """ ∫_0^{1/c} ∫(1 - exp(-u))·exp(-k·u)·g(s, u) du ds """
        if k == 0:
            return self.band_mass(c)
        if not c > 0:
            raise DomainError(f"Threshold must be positive, got {c}")

        def missing(s):
            return _split_integral(lambda u: float(np.exp(-k * u)
                                                   * self.size_biased(s, u)))
        return integrate_quad(missing, 0.0, min(1.0 / c, self.s_max))

    def positive_mass(self) -> float:
        return self.cumulative_intensity(self.s_max)

    def characteristic_scale(self) -> Optional[float]:
        return None

    def sample_shock_times(self, upper: float, count: int,
                           stream: RngStream) -> np.ndarray:
        """ i.i.d. shock times on (0, upper) with density ∝ G """
        upper = min(upper, self.s_max)
        if self.time_intensity_bound is not None:
            bound = self.time_intensity_bound
            out: List[float] = []
            while len(out) < count:
                s = upper * stream.uniform()
                g = self.time_intensity(s)
                if g > bound * (1 + 1e-12):
                    raise DomainError(f"G({s:.6g}) = {g:.6g} exceeds the "
                                      f"declared bound {bound:.6g}")
                if stream.generator.random() * bound < g:
                    out.append(s)
            return np.array(out)
        total = self.cumulative_intensity(upper)
        times = []
        for level in stream.uniform(count) * total:
            try:
                s = optimize.brentq(
                    lambda x: integrate_quad(self.time_intensity, 0.0, x)
                    - level, 0.0, upper, xtol=1e-12)
            except ValueError as e:
                raise NumericError(f"Could not invert the shock-time "
                                   f"intensity at {level:.6g}") from e
            times.append(s)
        return np.array(times)

    def sample_jump(self, s: float, stream: RngStream) -> float:
        values, _ = rejection_sample_many(lambda u: self.size_biased(s, u),
                                          self.envelope_for(s), stream, 1)
        return float(values[0])

    def sample_prm_above(self, anchor: int, c: float, indices: Sequence[int],
                         stream: RngStream) -> List[ShockAtom]:
        return additive_sample_prm_above(self, anchor, c, indices, stream)

    def sample_hitting(self, indices: Sequence[int],
                       stream: RngStream) -> List[ShockAtom]:
        """ All shocks hitting at least one of `indices` (finite s_max)

        Proposals from d times the size-biased intensity are thinned with
        probability (1 - exp(-d·u))/(d·(1 - exp(-u))). The hit pattern of an
        accepted shock is drawn conditionally on at least one hit.
        """
        total = self.positive_mass()
        if not np.isfinite(total):
            raise UsageError("Shocks hitting an index are infinitely many "
                             "without a finite s_max")
        indices = tuple(int(i) for i in indices)
        d = len(indices)
        count = poisson_variate(stream, d * total)
        atoms = []
        for s in self.sample_shock_times(self.s_max, count, stream):
            u = self.sample_jump(s, stream)
            accept = -math.expm1(-d * u) / (-d * math.expm1(-u))
            if stream.generator.random() >= accept:
                continue
            p_hit = -math.expm1(-u)
            while True:
                hits = stream.generator.random(d) < p_hit
                if hits.any():
                    break
            anchor = indices[int(np.argmax(hits))]
            pattern = dict(zip(indices, (bool(h) for h in hits)))
            atoms.append(ShockAtom(s, u, anchor, stream, pattern=pattern))
        return atoms


def additive_sample_prm_above(spec: AdditiveSpec, anchor: int, c: float,
                              indices: Sequence[int],
                              stream: RngStream) -> List[ShockAtom]:
    """ Exact PRM with intensity 1{f_anchor >= c} dμ for an additive spec

    M ~ Poisson(C_c) shocks; Y on (0, 1/c) with density ∝ G(s), which is
    uniform when G is constant; U | Y from (1 - exp(-u))·g(Y, u).

    Raises:
        DomainError: If c <= 0.
        NumericError: If an intensity integral does not converge.
    """
    count = poisson_variate(stream, spec.band_mass(c))
    if count == 0:
        return []
    shocks = spec.sample_shock_times(1.0 / c, count, stream)
    return [ShockAtom(y, spec.sample_jump(y, stream), anchor, stream, indices)
            for y in shocks]


@dataclass
class MoSequenceSample:
    """ One draw of (T_1..T_d) and its reciprocal X = 1/T

    Attributes:
        hitting_times: T_i > 0.
        values: X_i = 1/T_i.
        extremal: The underlying run of the process simulator.
    """
    hitting_times: np.ndarray
    values: np.ndarray
    extremal: ExtremalSample = field(repr=False)

    @property
    def diagnostics(self):
        return self.extremal.diagnostics


def mo_measure(spec) -> SequenceMixtureMeasure:
    return SequenceMixtureMeasure(spec)


def simulate_mo_sequence(spec, d: int, stream: RngStream,
                         options: Optional[Alg1Options] = None,
                         drift: Optional[float] = None) -> MoSequenceSample:
    """ Exact draw of the first d hitting times of an exchangeable sequence

    Args:
        spec: A `LevySpec` or `AdditiveSpec`.
        d: Number of indices, at least 1.
        stream: Source of randomness.
        options: Band-descent tuning, c defaults to C₁.
        drift: Overrides the spec's drift b. A drift adds an independent
            i.i.d. Exp(b) layer, T_i = min(T_i, E_i/b).
    """
    if d < 1:
        raise UsageError(f"Need at least one index, got d = {d}")
    drift = getattr(spec, "drift", 0.0) if drift is None else drift
    if drift < 0:
        raise DomainError(f"Drift must be non-negative, got {drift}")
    extremal = simulate_process(mo_measure(spec), range(1, d + 1), options,
                                stream)
    times = reciprocal(extremal.values)
    if drift > 0:
        times = np.minimum(times, exp_from_uniform(stream.uniform(d), drift))
    return MoSequenceSample(times, reciprocal(times), extremal)
