"""
Exponent measures and the atoms of their Poisson random measures

An exponent measure μ lives on non-negative functions f on an index set T
(real coordinates for processes, positive integers for vectors and
sequences). The simulators only need two things from it:

    - mass_above(t, c) = μ({f : f(t) >= c}), finite for c > 0
    - sample_band(t, c_lo, c_hi): an exact finite Poisson random measure with
      intensity 1{c_hi > f(t) >= c_lo} dμ

plus a declaration of which locations carry finite mass on {f(t) > 0}
(the locations where the process is zero with positive probability).

Three families ship: scale mixtures of a radial measure and an angular
law on a norm sphere, mixtures of i.i.d. two-point sequences (the
exchangeable sequence family, parametrised by a subordinator spec from
`maxidsim.exchangeable`) and finite discrete measures. `SumMeasure`
superposes independent families.
"""
from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import (Any, Callable, Dict, Iterator, List, Mapping, Optional,
                    Sequence, Tuple, Union)

import numpy as np
from scipy import special, stats

from .errors import DomainError, NumericError, UsageError
from .samplers import RngStream, exp_variate, poisson_variate

LOG = logging.getLogger(__name__)
logging.captureWarnings(True)

#: A real coordinate (process case) or a positive sequence index
Location = Union[int, float]


class Atom:
    """ One spectral function f of a Poisson random measure

    Atoms are non-negative and not identically zero. `at` evaluates the
    atom on a tuple of locations and caches the result per tuple.
    """

    def __init__(self):
        self._at_cache: Dict[Tuple, np.ndarray] = {}

    def __call__(self, t: Location) -> float:
        raise NotImplementedError()

    def at(self, locations: Sequence[Location]) -> np.ndarray:
        key = tuple(locations)
        values = self._at_cache.get(key)
        if values is None:
            values = self._evaluate(key)
            self._at_cache[key] = values
        return values

    def _evaluate(self, locations: Tuple) -> np.ndarray:
        return np.array([self(t) for t in locations], dtype=float)


class RadialAtom(Atom):
    """ The atom r·m of a scale mixture, evaluated at indices 1..d

    Attributes:
        radius: r > 0
        angle: Point m on the non-negative unit sphere, m[i-1] is the
            coordinate at index i.
    """

    def __init__(self, radius: float, angle: np.ndarray):
        super().__init__()
        self.radius = float(radius)
        self.angle = np.asarray(angle, dtype=float)

    def __call__(self, t: Location) -> float:
        i = int(t)
        if i != t or not 1 <= i <= self.angle.size:
            raise IndexError(f"Location {t} outside indices 1..{self.angle.size}")
        return self.radius * self.angle[i - 1]

    def _evaluate(self, locations: Tuple) -> np.ndarray:
        idx = np.asarray(locations, dtype=int) - 1
        return self.radius * self.angle[idx]

    def __repr__(self):
        return f"RadialAtom(radius={self.radius:.6g}, angle={self.angle})"


class ShockAtom(Atom):
    """ Reciprocal of an i.i.d. two-point sequence h with h_anchor = shock

    At every index other than the anchor, h_i equals `shock` with probability
    1 - exp(-jump) and is infinite otherwise, so the atom evaluates to
    1/shock when index i was hit and to 0 when it was not. The hit pattern
    of the queried `indices` is drawn eagerly, any other index lazily, and
    every draw is cached: evaluating twice at the same index returns the
    same value. A known `pattern` fixes the hits of its indices instead.

    Attributes:
        shock: The shock time s > 0.
        jump: The jump size u > 0.
        anchor: The index conditioned to be hit.
    """

    def __init__(self, shock: float, jump: float, anchor: int,
                 stream: RngStream, indices: Sequence[int] = (),
                 pattern: Optional[Mapping[int, bool]] = None):
        super().__init__()
        self.shock = float(shock)
        self.jump = float(jump)
        self.anchor = int(anchor)
        self.hit_probability = -math.expm1(-self.jump)
        self._stream = stream
        self._hits: Dict[int, bool] = {self.anchor: True}
        if pattern is not None:
            self._hits.update({int(i): bool(h) for i, h in pattern.items()})
        indices = tuple(int(i) for i in indices)
        if indices:
            draws = stream.generator.random(len(indices)) < self.hit_probability
            for i, hit in zip(indices, draws):
                self._hits.setdefault(i, bool(hit))

    def hit(self, i: int) -> bool:
        """ Whether index i was hit, drawn once on first request """
        i = int(i)
        if i < 1:
            raise IndexError(f"Sequence indices are positive, got {i}")
        hit = self._hits.get(i)
        if hit is None:
            hit = bool(self._stream.generator.random() < self.hit_probability)
            self._hits[i] = hit
        return hit

    def __call__(self, t: Location) -> float:
        return 1.0 / self.shock if self.hit(int(t)) else 0.0

    def __repr__(self):
        return (f"ShockAtom(shock={self.shock:.6g}, jump={self.jump:.6g}, "
                f"anchor={self.anchor})")


class DiscreteAtom(Atom):
    """ Atom given by a finite table Location -> value, zero elsewhere """

    def __init__(self, table: Mapping[Location, float]):
        super().__init__()
        self.table = table

    def __call__(self, t: Location) -> float:
        return float(self.table.get(t, 0.0))

    def __repr__(self):
        return f"DiscreteAtom({dict(self.table)})"


def _positive_somewhere(atom: Atom, locations: Sequence[Location]) -> bool:
    return bool(locations) and bool(np.any(atom.at(locations) > 0))


class ExponentMeasure(ABC):
    """ The contract every exponent-measure family fulfils

    Subclasses implement `_mass_above`, `_sample_band`,
    `has_finite_positive_mass` and, when some location carries finite
    mass, `sample_positive_part`.
    """

    def mass_above(self, t: Location, c: float,
                   zero_locations: Sequence[Location] = ()) -> float:
        """ μ({f : f(t) >= c, f(z) = 0 for z in zero_locations})

        Raises:
            DomainError: If c <= 0 (the mass may be infinite).
        """
        if not c > 0:
            raise DomainError(f"Threshold must be positive, got {c}")
        return self._mass_above(t, c, tuple(zero_locations))

    def sample_band(self, t: Location, c_lo: float, c_hi: float = np.inf,
                    earlier_zero_indices: Sequence[Location] = (),
                    stream: Optional[RngStream] = None,
                    locations: Sequence[Location] = ()) -> List[Atom]:
        """ Exact PRM with intensity 1{c_hi > f(t) >= c_lo} dμ̃

        μ̃ is μ restricted to {f(z) = 0 for z in earlier_zero_indices}.

        Args:
            t: The location the band refers to.
            c_lo: Lower threshold, positive.
            c_hi: Upper threshold, may be inf.
            earlier_zero_indices: Locations the atoms must vanish at.
            stream: Source of randomness.
            locations: All locations the caller will evaluate atoms at.
                Families use it to materialize atoms eagerly.
        Raises:
            DomainError: If c_lo <= 0 or c_lo >= c_hi.
        """
        if stream is None:
            raise UsageError("sample_band needs a stream")
        if not c_lo > 0 or not c_lo < c_hi:
            raise DomainError(f"Band needs 0 < c_lo < c_hi, got [{c_lo}, {c_hi})")
        atoms = self._sample_band(t, c_lo, c_hi, stream, tuple(locations))
        zeros = tuple(earlier_zero_indices)
        if zeros:
            atoms = [f for f in atoms if not _positive_somewhere(f, zeros)]
        return atoms

    @abstractmethod
    def _mass_above(self, t: Location, c: float,
                    zero_locations: Tuple) -> float:
        ...

    @abstractmethod
    def _sample_band(self, t: Location, c_lo: float, c_hi: float,
                     stream: RngStream, locations: Tuple) -> List[Atom]:
        ...

    @abstractmethod
    def has_finite_positive_mass(self, t: Location) -> bool:
        """ Whether μ({f : f(t) > 0}) is finite """

    def sample_positive_part(self, locations: Sequence[Location],
                             zero_locations: Sequence[Location],
                             stream: RngStream) -> List[Atom]:
        """ Exact PRM with intensity μ restricted to
        {f : f(z) > 0 for some z in zero_locations}

        Only called with locations of finite positive mass.
        """
        if not zero_locations:
            return []
        raise NotImplementedError(f"{type(self).__name__} has no location "
                                  "of finite positive mass")

    def characteristic_scale(self, t: Location) -> Optional[float]:
        """ A threshold c with mass_above(t, c) close to 1, if known """
        return None


# --------------------------------------------------------------------------
# Scale mixtures
# --------------------------------------------------------------------------

class RadialMeasure(ABC):
    """ A measure μ₁ on (0, inf) given by its tail r -> μ₁([r, inf)) """

    #: μ₁((0, inf)); finite measures are exhausted after finitely many atoms
    total_mass: float = np.inf

    @abstractmethod
    def tail(self, r: float) -> float:
        ...

    @abstractmethod
    def inverse_tail(self, t: float) -> float:
        """ sup{s > 0 : tail(s) >= t}, and 0 if the set is empty """

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.total_mass))

    def sample_radii(self, stream: RngStream, size: int) -> np.ndarray:
        """ i.i.d. radii from the normalized finite measure μ₁/μ₁((0,inf)) """
        if not self.is_finite:
            raise DomainError("Cannot normalize an infinite radial measure")
        u = stream.uniform(size)
        return np.array([self.inverse_tail(x) for x in u * self.total_mass])


class FrechetRadial(RadialMeasure):
    """ Tail θ·r**(-κ); κ = 1 and the 1-norm give unit Fréchet margins
    when θ·E[m_t] = 1 """

    def __init__(self, scale: float = 1.0, tail_index: float = 1.0):
        if not scale > 0 or not tail_index > 0:
            raise DomainError(f"Need scale > 0 and tail_index > 0, got "
                              f"{scale}, {tail_index}")
        self.scale = float(scale)
        self.tail_index = float(tail_index)

    def tail(self, r: float) -> float:
        if r <= 0:
            return np.inf
        return self.scale * r**(-self.tail_index)

    def inverse_tail(self, t: float) -> float:
        if t <= 0:
            return np.inf
        return (self.scale / t)**(1.0 / self.tail_index)


class TruncatedRadial(RadialMeasure):
    """ A radial measure restricted to [lower, inf); finite """

    def __init__(self, base: RadialMeasure, lower: float):
        if not lower > 0:
            raise DomainError(f"Truncation point must be positive, got {lower}")
        self.base = base
        self.lower = float(lower)
        self.total_mass = float(base.tail(self.lower))
        if not np.isfinite(self.total_mass):
            raise DomainError("Truncated radial measure must be finite")

    def tail(self, r: float) -> float:
        return self.base.tail(max(r, self.lower))

    def inverse_tail(self, t: float) -> float:
        if t > self.total_mass:
            return 0.0
        return max(self.base.inverse_tail(t), self.lower)


class PointMassRadial(RadialMeasure):
    """ Finite mass λ at the single radius r₀ """

    def __init__(self, radius: float, mass: float):
        if not radius > 0 or not 0 <= mass < np.inf:
            raise DomainError(f"Need radius > 0 and finite mass >= 0, got "
                              f"{radius}, {mass}")
        self.radius = float(radius)
        self.total_mass = float(mass)

    def tail(self, r: float) -> float:
        return self.total_mass if r <= self.radius else 0.0

    def inverse_tail(self, t: float) -> float:
        return self.radius if t <= self.total_mass else 0.0


class CallableRadial(RadialMeasure):
    """ Radial measure from a non-increasing tail function

    The generalized inverse is found by monotone bisection to absolute
    tolerance `xtol` on the radius.
    """

    def __init__(self, tail: Callable[[float], float],
                 total_mass: float = np.inf, xtol: float = 1e-12):
        self._tail = tail
        self.total_mass = float(total_mass)
        self.xtol = xtol

    def tail(self, r: float) -> float:
        return float(self._tail(r))

    def inverse_tail(self, t: float) -> float:
        if t > self.total_mass:
            return 0.0
        lo, hi = 0.0, 1.0
        while self.tail(hi) >= t:
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise NumericError(f"Radial tail stays above {t} at {hi}")
        # invariant: tail(hi) < t, and tail(lo) >= t or lo == 0
        for _ in range(2000):
            if hi - lo <= self.xtol:
                break
            mid = 0.5 * (lo + hi)
            if self.tail(mid) >= t:
                lo = mid
            else:
                hi = mid
        return lo


class AngularLaw(ABC):
    """ A probability law on the non-negative part of a p-norm unit sphere """

    dimension: int
    p: float

    @abstractmethod
    def sample(self, stream: RngStream, size: int) -> np.ndarray:
        """ `size` × `dimension` array of unit vectors """

    @abstractmethod
    def positive_probability(self, t: int) -> float:
        """ ℙ(m_t > 0) """

    @abstractmethod
    def expect(self, t: int, func: Callable[[float], float],
               zero_locations: Tuple = ()) -> float:
        """ E[func(m_t); m_t > 0, m_z = 0 for z in zero_locations] """

    def moment(self, t: int, power: float, zero_locations: Tuple = ()) -> float:
        return self.expect(t, lambda x: x**power, zero_locations)


class DirichletAngular(AngularLaw):
    """ Dirichlet law on the 1-norm simplex; all-ones is the uniform law """

    p = 1.0

    def __init__(self, concentration: Sequence[float]):
        self.concentration = np.asarray(concentration, dtype=float)
        if self.concentration.ndim != 1 or self.concentration.size < 1:
            raise DomainError("Concentration must be a non-empty vector")
        if np.any(self.concentration <= 0):
            raise DomainError("Concentration parameters must be positive")
        self.dimension = self.concentration.size

    @classmethod
    def uniform(cls, d: int) -> DirichletAngular:
        return cls(np.ones(d))

    def sample(self, stream: RngStream, size: int) -> np.ndarray:
        if self.dimension == 1:
            return np.ones((size, 1))
        return stream.generator.dirichlet(self.concentration, size)

    def positive_probability(self, t: int) -> float:
        return 1.0

    def _marginal(self, t: int):
        a = self.concentration[t - 1]
        return stats.beta(a, self.concentration.sum() - a)

    def expect(self, t, func, zero_locations=()):
        if zero_locations:
            return 0.0
        if self.dimension == 1:
            return float(func(1.0))
        return float(self._marginal(t).expect(func, epsrel=1e-10))

    def moment(self, t, power, zero_locations=()):
        if zero_locations:
            return 0.0
        if self.dimension == 1:
            return 1.0
        a = self.concentration[t - 1]
        b = self.concentration.sum() - a
        return float(np.exp(special.betaln(a + power, b) - special.betaln(a, b)))


class DiscreteAngular(AngularLaw):
    """ Finite law on a p-norm unit sphere, exact expectations """

    def __init__(self, vectors: Sequence[Sequence[float]],
                 probabilities: Sequence[float], p: float = 1.0):
        self.vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        self.probabilities = np.asarray(probabilities, dtype=float)
        self.p = float(p)
        if self.p < 1:
            raise DomainError(f"Need a norm, p >= 1, got {p}")
        if self.vectors.shape[0] != self.probabilities.size:
            raise DomainError("One probability per vector is required")
        if np.any(self.probabilities < 0) or \
                not np.isclose(self.probabilities.sum(), 1.0):
            raise DomainError("Probabilities must be non-negative and sum to 1")
        if np.any(self.vectors < 0):
            raise DomainError("Angular vectors must be non-negative")
        norms = np.linalg.norm(self.vectors, ord=self.p, axis=1)
        if not np.allclose(norms, 1.0):
            raise DomainError(f"Angular vectors must have unit {self.p}-norm, "
                              f"got norms {norms}")
        self.dimension = self.vectors.shape[1]

    def sample(self, stream: RngStream, size: int) -> np.ndarray:
        which = stream.generator.choice(self.probabilities.size, size=size,
                                        p=self.probabilities)
        return self.vectors[which]

    def _mask(self, t, zero_locations):
        mask = self.vectors[:, t - 1] > 0
        for z in zero_locations:
            mask &= self.vectors[:, int(z) - 1] == 0
        return mask

    def positive_probability(self, t: int) -> float:
        return float(self.probabilities[self.vectors[:, t - 1] > 0].sum())

    def expect(self, t, func, zero_locations=()):
        mask = self._mask(t, zero_locations)
        return float(sum(p * func(v) for p, v in
                         zip(self.probabilities[mask],
                             self.vectors[mask, t - 1])))


@dataclass
class RadialArrivals:
    """ Running state of the unit Poisson arrivals Γ₁ < Γ₂ < ...

    Arrivals are carried across shells so the union of all shell outputs is
    one Poisson random measure. An arrival beyond the current shell is
    buffered in `pending`, never discarded.

    Attributes:
        gamma: Sum of the unit exponentials consumed so far.
        pending: Radius of the buffered arrival, if any.
        last_shell: Last shell index served, 0 before the first call.
        exhausted: True once the radial measure has no mass left.
        increments: Optional scripted arrival increments, used instead of
            exponential draws while it yields values.
    """
    gamma: float = 0.0
    pending: Optional[float] = None
    last_shell: int = 0
    exhausted: bool = False
    consumed: int = 0
    increments: Optional[Iterator[float]] = field(default=None, repr=False)

    def next_increment(self, stream: RngStream) -> float:
        if self.increments is not None:
            try:
                return float(next(self.increments))
            except StopIteration:
                self.increments = None
        return exp_variate(stream, 1.0)


def shell_bounds(n: int) -> Tuple[float, float]:
    """ Radial shell [1/n, 1/(n-1)); 1/(n-1) = inf for n = 1 """
    if n < 1:
        raise UsageError(f"Shell indices start at 1, got {n}")
    return 1.0 / n, (np.inf if n == 1 else 1.0 / (n - 1))


class ScaleMixtureMeasure(ExponentMeasure):
    """ The product μ₁⊗μ₂ pushed forward by (r, m) -> r·m

    Locations are the indices 1..d of the sphere coordinates.

    Attributes:
        radial: The radial measure μ₁.
        angular: The angular probability law μ₂.
    """

    def __init__(self, radial: RadialMeasure, angular: AngularLaw):
        self.radial = radial
        self.angular = angular
        self.dimension = angular.dimension
        self.norm_p = angular.p

    # Query helpers -------------------------------------------------------

    def radial_tail(self, r: float) -> float:
        return self.radial.tail(r)

    def inverse_tail(self, t: float) -> float:
        return self.radial.inverse_tail(t)

    def _check_location(self, t):
        if int(t) != t or not 1 <= int(t) <= self.dimension:
            raise IndexError(f"Location {t} outside indices 1..{self.dimension}")
        return int(t)

    def _mass_above(self, t, c, zero_locations):
        t = self._check_location(t)
        kappa = getattr(self.radial, "tail_index", None)
        if isinstance(self.radial, FrechetRadial) and kappa is not None:
            return (self.radial.scale * c**(-kappa)
                    * self.angular.moment(t, kappa, zero_locations))
        return self.angular.expect(t, lambda x: self.radial.tail(c / x),
                                   zero_locations)

    def characteristic_scale(self, t):
        if isinstance(self.radial, FrechetRadial):
            return self.mass_above(t, 1.0)**(1.0 / self.radial.tail_index)
        return None

    def has_finite_positive_mass(self, t) -> bool:
        t = self._check_location(t)
        if self.radial.is_finite:
            return True
        return self.angular.positive_probability(t) == 0

    # Sampling -----------------------------------------------------------

    def _draw_atoms(self, radii: List[float], stream: RngStream) -> List[Atom]:
        if not radii:
            return []
        angles = self.angular.sample(stream, len(radii))
        return [RadialAtom(r, m) for r, m in zip(radii, angles)]

    def _sample_band(self, t, c_lo, c_hi, stream, locations):
        t = self._check_location(t)
        # coordinates of a p-norm unit vector are <= 1, so r·m_t >= c_lo
        # needs r >= c_lo
        radii = []
        gamma = 0.0
        while True:
            gamma += exp_variate(stream, 1.0)
            r = self.radial.inverse_tail(gamma)
            if r < c_lo or r <= 0:
                break
            radii.append(r)
        atoms = self._draw_atoms(radii, stream)
        return [f for f in atoms if c_lo <= f(t) < c_hi]

    def sample_radial_shell(self, n: int, arrivals: RadialArrivals,
                            stream: RngStream
                            ) -> Tuple[List[Atom], RadialArrivals]:
        """ Atoms with radius in the shell [1/n, 1/(n-1))

        Successive calls with increasing n form one PRM with intensity
        μ₁⊗μ₂. Atoms of skipped shells are dropped.

        Raises:
            UsageError: If n does not exceed the last served shell.
        """
        if n <= arrivals.last_shell:
            raise UsageError(f"Shell {n} requested after shell "
                             f"{arrivals.last_shell}; shells must increase")
        lower, upper = shell_bounds(n)
        radii = []
        while True:
            if arrivals.pending is None:
                if arrivals.exhausted:
                    break
                arrivals.gamma += arrivals.next_increment(stream)
                arrivals.consumed += 1
                r = self.radial.inverse_tail(arrivals.gamma)
                if r <= 0:
                    arrivals.exhausted = True
                    break
                arrivals.pending = r
            r = arrivals.pending
            if r < lower:
                break
            arrivals.pending = None
            if r < upper:
                radii.append(r)
        arrivals.last_shell = n
        return self._draw_atoms(radii, stream), arrivals

    def sample_positive_part(self, locations, zero_locations, stream):
        zero_locations = tuple(zero_locations)
        if not zero_locations or not self.radial.is_finite:
            # an infinite radial part only puts finite mass at locations
            # where the angular law vanishes almost surely
            return []
        arrivals = RadialArrivals()
        atoms: List[Atom] = []
        n = 1
        while not arrivals.exhausted:
            shell, arrivals = self.sample_radial_shell(n, arrivals, stream)
            atoms.extend(shell)
            n += 1
        return [f for f in atoms if _positive_somewhere(f, zero_locations)]


# --------------------------------------------------------------------------
# Exchangeable sequence mixtures
# --------------------------------------------------------------------------

class SequenceMixtureMeasure(ExponentMeasure):
    """ Exponent measure of an exchangeable max-id sequence

    Mixes the laws of reciprocal i.i.d. two-point sequences over the Lévy
    measure of a subordinator (stationary `LevySpec`) or an additive
    process (`AdditiveSpec`); both live in `maxidsim.exchangeable`. The
    spec provides

        band_mass(c)                  μ({f : f_n >= c}), any index n
        band_mass_vanishing(c, k)     the same, vanishing at k other indices
        positive_mass()               μ({f : f_n > 0}), possibly inf
        sample_prm_above(n, c, indices, stream)
        sample_hitting(indices, stream)   (finite positive_mass only)
        characteristic_scale()
    """

    def __init__(self, spec: Any):
        self.spec = spec

    @staticmethod
    def _check_index(t):
        if int(t) != t or t < 1:
            raise IndexError(f"Sequence indices are positive integers, got {t}")
        return int(t)

    def _mass_above(self, t, c, zero_locations):
        t = self._check_index(t)
        zeros = {self._check_index(s) for s in zero_locations}
        if t in zeros:
            return 0.0
        return self.spec.band_mass_vanishing(c, len(zeros))

    def _sample_band(self, t, c_lo, c_hi, stream, locations):
        t = self._check_index(t)
        atoms = self.spec.sample_prm_above(t, c_lo, locations, stream)
        return [f for f in atoms if f(t) < c_hi]

    def has_finite_positive_mass(self, t) -> bool:
        self._check_index(t)
        return bool(np.isfinite(self.spec.positive_mass()))

    def sample_positive_part(self, locations, zero_locations, stream):
        zero_locations = tuple(zero_locations)
        if not zero_locations:
            return []
        atoms = self.spec.sample_hitting(tuple(locations), stream)
        return [f for f in atoms if _positive_somewhere(f, zero_locations)]

    def characteristic_scale(self, t):
        return self.spec.characteristic_scale()


# --------------------------------------------------------------------------
# Finite discrete measures
# --------------------------------------------------------------------------

class DiscreteFiniteMeasure(ExponentMeasure):
    """ Σ_k w_k δ_{f_k} for finitely many tables f_k

    Every location carries finite mass.

    Attributes:
        weights: w_k > 0.
        tables: f_k as maps Location -> value >= 0, not identically zero.
    """

    def __init__(self, atoms: Sequence[Tuple[float, Mapping[Location, float]]]):
        if not atoms:
            raise DomainError("A discrete measure needs at least one atom")
        self.weights = np.array([float(w) for w, _ in atoms])
        self.tables = [dict(table) for _, table in atoms]
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise DomainError(f"Weights must be positive and finite, got "
                              f"{self.weights}")
        for table in self.tables:
            values = np.array(list(table.values()), dtype=float)
            if np.any(values < 0) or not np.any(values > 0):
                raise DomainError(f"Atom {table} must be non-negative and not "
                                  "identically zero")

    @classmethod
    def from_vectors(cls, weights: Sequence[float],
                     vectors: Sequence[Sequence[float]]) -> DiscreteFiniteMeasure:
        """ Atoms given as vectors over the indices 1..d """
        return cls([(w, {i + 1: float(v) for i, v in enumerate(vector)})
                    for w, vector in zip(weights, vectors)])

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def _value(self, k, t):
        return self.tables[k].get(t, 0.0)

    def _mass_above(self, t, c, zero_locations):
        mass = 0.0
        for k, w in enumerate(self.weights):
            if self._value(k, t) >= c and \
                    all(self._value(k, z) == 0 for z in zero_locations):
                mass += w
        return mass

    def _copies(self, k, stream) -> List[Atom]:
        return [DiscreteAtom(self.tables[k])
                for _ in range(poisson_variate(stream, self.weights[k]))]

    def _sample_band(self, t, c_lo, c_hi, stream, locations):
        atoms = []
        for k in range(len(self.tables)):
            if c_lo <= self._value(k, t) < c_hi:
                atoms.extend(self._copies(k, stream))
        return atoms

    def has_finite_positive_mass(self, t) -> bool:
        return True

    def sample_positive_part(self, locations, zero_locations, stream):
        atoms = []
        for k in range(len(self.tables)):
            if any(self._value(k, z) > 0 for z in zero_locations):
                atoms.extend(self._copies(k, stream))
        return atoms


# --------------------------------------------------------------------------
# Superposition
# --------------------------------------------------------------------------

class SumMeasure(ExponentMeasure):
    """ Sum of exponent measures, i.e. the maximum of independent processes """

    def __init__(self, children: Sequence[ExponentMeasure]):
        if not children:
            raise DomainError("SumMeasure needs at least one child measure")
        self.children = list(children)

    def _mass_above(self, t, c, zero_locations):
        return sum(m.mass_above(t, c, zero_locations) for m in self.children)

    def _sample_band(self, t, c_lo, c_hi, stream, locations):
        atoms = []
        for m in self.children:
            atoms.extend(m._sample_band(t, c_lo, c_hi, stream, locations))
        return atoms

    def has_finite_positive_mass(self, t) -> bool:
        return all(m.has_finite_positive_mass(t) for m in self.children)

    def sample_positive_part(self, locations, zero_locations, stream):
        atoms = []
        for m in self.children:
            atoms.extend(m.sample_positive_part(locations, zero_locations,
                                                stream))
        return atoms


# --------------------------------------------------------------------------
# Zero-mass split
# --------------------------------------------------------------------------

class ZeroComponent:
    """ μ_j: μ restricted to {f(t_j) > 0, f(t_k) = 0 for earlier k in J₀} """

    def __init__(self, measure: ExponentMeasure, locations: Tuple,
                 position: int, zero_positions: Sequence[int]):
        self.measure = measure
        self.locations = locations
        self.position = position
        self.earlier = tuple(locations[k] for k in zero_positions
                             if k < position)
        self._zero_locations = tuple(locations[k] for k in zero_positions)

    def contains(self, atom: Atom) -> bool:
        if atom(self.locations[self.position]) <= 0:
            return False
        return not _positive_somewhere(atom, self.earlier)

    def sample(self, stream: RngStream) -> List[Atom]:
        atoms = self.measure.sample_positive_part(self.locations,
                                                  self._zero_locations, stream)
        return [f for f in atoms if self.contains(f)]


class ResidualMeasure:
    """ μ̃: μ restricted to {f(t_j) = 0 for all j in J₀} """

    def __init__(self, measure: ExponentMeasure,
                 zero_locations: Tuple):
        self.measure = measure
        self.zero_locations = zero_locations

    def mass_above(self, t: Location, c: float) -> float:
        return self.measure.mass_above(t, c, self.zero_locations)

    def sample_band(self, t, c_lo, c_hi=np.inf, stream=None,
                    locations=()) -> List[Atom]:
        return self.measure.sample_band(t, c_lo, c_hi, self.zero_locations,
                                        stream, locations)

    def characteristic_scale(self, t) -> Optional[float]:
        return self.measure.characteristic_scale(t)


@dataclass
class ZeroMassSplit:
    """ The split μ = Σ_{j∈J₀} μ_j + μ̃ for a tuple of locations

    Attributes:
        locations: The requested locations.
        zero_positions: J₀ as 0-based positions into `locations`.
        components: μ_j keyed by position j in J₀.
        residual: μ̃.
    """
    locations: Tuple
    zero_positions: List[int]
    components: Dict[int, ZeroComponent]
    residual: ResidualMeasure

    def sample_components(self, stream: RngStream) -> Dict[int, List[Atom]]:
        """ Draw all μ_j at once

        One PRM on the union of the disjoint supports is partitioned, which
        yields independent PRMs with intensities μ_j.
        """
        out: Dict[int, List[Atom]] = {j: [] for j in self.zero_positions}
        if not self.zero_positions:
            return out
        measure = self.residual.measure
        zero_locations = tuple(self.locations[j] for j in self.zero_positions)
        for f in measure.sample_positive_part(self.locations, zero_locations,
                                              stream):
            for j in self.zero_positions:
                if f(self.locations[j]) > 0:
                    out[j].append(f)
                    break
        return out


def zero_mass_split(measure: ExponentMeasure,
                    locations: Sequence[Location]) -> ZeroMassSplit:
    """ Split μ at the locations of finite positive mass

    J₀ collects the locations t_j with μ({f(t_j) > 0}) < inf, equivalently
    ℙ(X_{t_j} = 0) = exp(-μ({f(t_j) > 0})) > 0. Finiteness is declared by
    the family, not estimated.
    """
    locations = tuple(locations)
    zero_positions = [j for j, t in enumerate(locations)
                      if measure.has_finite_positive_mass(t)]
    components = {j: ZeroComponent(measure, locations, j, zero_positions)
                  for j in zero_positions}
    residual = ResidualMeasure(measure, tuple(locations[j]
                                              for j in zero_positions))
    LOG.debug("J0 = %s of %d locations", zero_positions, len(locations))
    return ZeroMassSplit(locations, zero_positions, components, residual)


def frechet_scale_mixture(d: int, angular: Optional[AngularLaw] = None,
                          ) -> ScaleMixtureMeasure:
    """ Max-stable scale mixture s**-2 ds ⊗ μ₂ with unit Fréchet margins

    The radial scale is chosen as 1/E[m_1] so that mass_above(t, c) = 1/c,
    which requires the angular coordinates to share their mean.
    """
    if angular is None:
        angular = DirichletAngular.uniform(d)
    mean = angular.moment(1, 1.0)
    return ScaleMixtureMeasure(FrechetRadial(scale=1.0 / mean), angular)
