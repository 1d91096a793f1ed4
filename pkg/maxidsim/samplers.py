"""
Base random-variate generation

All randomness of the package is drawn through the functions of this
module from an `RngStream`, a value object naming one counter-based Philox
stream by a 64-bit seed and a 64-bit stream id. Replicates own their stream,
so independent replicates never need to coordinate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, EnvelopeViolationError

LOG = logging.getLogger(__name__)

MASK64 = 2**64 - 1

#: A density is evaluated on numpy arrays of positive reals
Density = Callable[[np.ndarray], np.ndarray]


@dataclass
class RngStream:
    """ One reproducible stream of random numbers

    Two streams with equal `(seed, stream_id, path)` produce identical
    variates. Streams differing in `stream_id` or `path` are statistically
    independent as Philox streams keyed by distinct `SeedSequence` spawn keys.

    Attributes:
        seed: 64-bit seed, negative values are taken modulo 2**64
        stream_id: 64-bit stream identifier, e.g. the replicate index
        path: Further spawn-key components for nested substreams
    """
    seed: int
    stream_id: int = 0
    path: Tuple[int, ...] = ()
    _generator: Optional[np.random.Generator] = field(default=None,
                                                      init=False,
                                                      repr=False,
                                                      compare=False)

    def __post_init__(self):
        self.seed = int(self.seed) & MASK64
        self.stream_id = int(self.stream_id) & MASK64
        self.path = tuple(int(p) & MASK64 for p in self.path)

    @property
    def generator(self) -> np.random.Generator:
        """ The underlying numpy generator, created on first use """
        if self._generator is None:
            sequence = np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream_id,) + self.path)
            self._generator = np.random.Generator(np.random.Philox(sequence))
        return self._generator

    def substream(self, index: int) -> RngStream:
        """ An independent child stream, e.g. one per replicate """
        return RngStream(self.seed, self.stream_id, self.path + (index,))

    def uniform(self, size=None):
        """ Uniform variates on (0, 1] """
        return 1.0 - self.generator.random(size)


def exp_from_uniform(u, rate: float = 1.0):
    """ Inverse-CDF transform of uniforms on (0, 1] to Exp(rate) """
    if not rate > 0:
        raise DomainError(f"Exponential rate must be positive, got {rate}")
    return -np.log(u) / rate


def exp_variate(stream: RngStream, rate: float = 1.0) -> float:
    """ Draw an exponential variate with the given rate

    Raises:
        DomainError: If `rate` is not positive.
    """
    return float(exp_from_uniform(stream.uniform(), rate))


def poisson_variate(stream: RngStream, mean: float) -> int:
    """ Draw a Poisson variate

    Raises:
        DomainError: If `mean` is negative, infinite or nan.
    """
    if not np.isfinite(mean) or mean < 0:
        raise DomainError(f"Poisson mean must be finite and >= 0, got {mean}")
    if mean == 0:
        return 0
    return int(stream.generator.poisson(mean))


@dataclass(frozen=True)
class PowerLawPiece:
    """ The density c·u**α restricted to [lower, upper)

    `upper` may be ``np.inf``. A piece touching 0 needs α > -1 and an
    unbounded piece needs α < -1 to have finite mass.
    """
    lower: float
    upper: float
    coefficient: float
    exponent: float

    @property
    def _beta(self) -> float:
        return self.exponent + 1.0

    def is_finite(self) -> bool:
        if not (0 <= self.lower < self.upper) or self.coefficient <= 0:
            return False
        if self.lower == 0 and self._beta <= 0:
            return False
        if np.isinf(self.upper) and self._beta >= 0:
            return False
        return True

    @property
    def mass(self) -> float:
        """ Integral of the piece over its interval """
        if not self.is_finite():
            return np.inf
        a, b, beta = self.lower, self.upper, self._beta
        if beta == 0:
            return self.coefficient * np.log(b / a)
        return self.coefficient * (b**beta - a**beta) / beta

    def density(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u >= self.lower) & (u < self.upper) & (u > 0)
        with np.errstate(divide='ignore', invalid='ignore'):
            values = self.coefficient * np.power(u, self.exponent)
        return np.where(inside, values, 0.0)

    def inverse_cdf(self, u):
        """ Quantile function of the normalized piece """
        if not self.is_finite():
            raise DomainError(f"Power-law piece {self} has infinite mass")
        u = np.asarray(u, dtype=float)
        a, b, beta = self.lower, self.upper, self._beta
        if beta == 0:
            return a * np.power(b / a, u)
        with np.errstate(divide='ignore'):
            lo, hi = a**beta, b**beta
            return np.power(lo + u * (hi - lo), 1.0 / beta)


class PowerLawEnvelope:
    """ Piecewise power-law dominating function for rejection sampling

    Attributes:
        pieces: Disjoint pieces sorted by their lower end.
        masses: Mass of each piece.
        total_mass: Sum of `masses`.
    """

    def __init__(self, pieces: Sequence[PowerLawPiece]):
        self.pieces: List[PowerLawPiece] = sorted(pieces,
                                                  key=lambda p: p.lower)
        self.verify_integrity()
        self.masses = np.array([p.mass for p in self.pieces])
        self.total_mass = float(self.masses.sum())
        if not self.total_mass > 0:
            raise DomainError("Envelope has zero total mass")

    @classmethod
    def from_list(cls, pieces: Sequence[Sequence[float]]) -> PowerLawEnvelope:
        """ Build from ``[[lower, upper, coefficient, exponent], ...]`` """
        return cls([PowerLawPiece(float(a), float(b), float(c), float(e))
                    for a, b, c, e in pieces])

    def verify_integrity(self):
        """ Raises DomainError on overlapping or infinite-mass pieces """
        if not self.pieces:
            raise DomainError("Envelope has zero total mass")
        for piece in self.pieces:
            if not piece.is_finite():
                raise DomainError(f"Power-law piece {piece} has infinite "
                                  "mass")
        for left, right in zip(self.pieces[:-1], self.pieces[1:]):
            if right.lower < left.upper:
                raise DomainError(f"Envelope pieces {left} and {right} "
                                  "overlap")

    def scaled(self, factor: float) -> PowerLawEnvelope:
        """ Copy with every coefficient multiplied by `factor` """
        return PowerLawEnvelope([PowerLawPiece(p.lower, p.upper,
                                               factor * p.coefficient,
                                               p.exponent)
                                 for p in self.pieces])

    def density(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for piece in self.pieces:
            out = out + piece.density(u)
        return out

    def to_list(self) -> List[List[float]]:
        return [[p.lower, p.upper, p.coefficient, p.exponent]
                for p in self.pieces]


def sample_power_law_piece(piece: PowerLawPiece, stream: RngStream) -> float:
    """ Exact inverse-CDF sample from a normalized power-law piece

    Raises:
        DomainError: If the piece has infinite mass.
    """
    return float(piece.inverse_cdf(stream.uniform()))


@dataclass(frozen=True)
class RejectionDraw:
    """ Accepted value and the number of proposals it took """
    value: float
    attempts: int


def rejection_sample_many(target: Density, envelope: PowerLawEnvelope,
                          stream: RngStream, size: int
                          ) -> Tuple[np.ndarray, int]:
    """ Draw `size` variates with density proportional to `target`

    Proposals choose a piece proportionally to its mass and invert within
    the piece (composition method). Batches of proposals are drawn until
    `size` of them are accepted.

    Args:
        target: Unnormalized, vectorized density on (0, inf).
        envelope: Dominating piecewise power law.
        stream: Source of randomness.
        size: Number of accepted values.
    Returns:
        The accepted values and the total number of proposals.
    Raises:
        EnvelopeViolationError: If target > envelope at any proposal.
    """
    x = np.zeros(size)
    simulated = 0
    attempts = 0
    probabilities = envelope.masses / envelope.total_mass
    gen = stream.generator
    while simulated < size:
        k = size - simulated
        which = gen.choice(len(envelope.pieces), size=k, p=probabilities)
        proposals = np.empty(k)
        u = stream.uniform(k)
        for i, piece in enumerate(envelope.pieces):
            mask = which == i
            if mask.any():
                proposals[mask] = piece.inverse_cdf(u[mask])
        ratio = (np.asarray(target(proposals), dtype=float)
                 / envelope.density(proposals))
        if np.any(ratio > 1.0 + 1e-12):
            bad = proposals[np.argmax(ratio)]
            raise EnvelopeViolationError(
                f"Acceptance ratio {ratio.max():.6g} > 1 at u={bad:.6g}: "
                "the envelope does not dominate the target")
        accept = gen.random(k) < ratio
        num_accept = int(np.sum(accept))
        attempts += k
        if num_accept > 0:
            x[simulated:(simulated + num_accept)] = proposals[accept]
            simulated += num_accept
    return x, attempts


def rejection_sample(target: Density, envelope: PowerLawEnvelope,
                     stream: RngStream) -> RejectionDraw:
    """ Draw one variate with density proportional to `target`

    See `rejection_sample_many`.
    """
    values, attempts = rejection_sample_many(target, envelope, stream, 1)
    return RejectionDraw(float(values[0]), attempts)
