"""
Exact simulation of max-id random vectors from sliced exponent measures

The support [0, inf)^d \\ {0} is cut into disjoint slices S_1, S_2, ... of
finite mass that eventually shrink towards the origin. Slices are simulated
in order until no unsimulated atom can raise a coordinate of the running
maximum. Scale mixtures are sliced into radial shells [1/n, 1/(n-1)).
"""
from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import TerminationCapError, UsageError
from .exponent_measure import (Atom, AngularLaw, CallableRadial,
                               DirichletAngular, ExponentMeasure,
                               RadialArrivals, RadialMeasure,
                               ScaleMixtureMeasure, frechet_scale_mixture,
                               zero_mass_split)
from .library import pointwise_max
from .samplers import RngStream

LOG = logging.getLogger(__name__)


class SliceSampler(ABC):
    """ Per-run state of a slice sequence """

    @abstractmethod
    def sample(self, n: int, stream: RngStream) -> List[Atom]:
        """ Exact PRM with intensity μ restricted to S_n """

    def remaining_bound(self) -> float:
        """ Bound on every coordinate of atoms in slices not yet sampled """
        return np.inf


class SliceSequence(ABC):
    """ A partition of the support into slices of finite mass """

    @abstractmethod
    def containment_radius(self, n: int) -> float:
        """ Smallest r with S_n ∪ S_{n+1} ∪ ... inside the open sup-norm
        ball of radius r """

    @abstractmethod
    def sampler(self, d: int) -> SliceSampler:
        ...


class _ShellSampler(SliceSampler):
    def __init__(self, measure: ScaleMixtureMeasure,
                 increments: Optional[Iterable[float]]):
        self.measure = measure
        self.arrivals = RadialArrivals(
            increments=iter(increments) if increments is not None else None)

    def sample(self, n, stream):
        atoms, self.arrivals = self.measure.sample_radial_shell(n,
                                                                self.arrivals,
                                                                stream)
        return atoms

    def remaining_bound(self):
        if self.arrivals.exhausted:
            return 0.0
        if self.arrivals.pending is not None:
            return self.arrivals.pending
        return np.inf


class RadialShells(SliceSequence):
    """ Shells S_n = [1/n, 1/(n-1)) × sphere of a scale mixture

    Coordinates of a p-norm unit vector are at most 1, so everything from
    shell n on lies in the sup-norm ball of radius 1/(n-1).

    Attributes:
        measure: The scale mixture being sliced.
        increments: Optional scripted arrival increments for tests.
    """

    def __init__(self, measure: ScaleMixtureMeasure,
                 increments: Optional[Sequence[float]] = None):
        self.measure = measure
        self.increments = increments

    def containment_radius(self, n: int) -> float:
        if n < 1:
            raise UsageError(f"Slice indices start at 1, got {n}")
        return np.inf if n == 1 else 1.0 / (n - 1)

    def sampler(self, d: int) -> SliceSampler:
        if self.measure.dimension != d:
            raise UsageError(f"Measure has dimension {self.measure.dimension}, "
                             f"requested {d}")
        return _ShellSampler(self.measure, self.increments)


@dataclass
class VectorDiagnostics:
    slices_consumed: int = 0
    atoms_simulated: int = 0
    atoms_kept: int = 0
    wall_seconds: float = 0.0

    @property
    def steps(self) -> int:
        return self.slices_consumed


@dataclass
class VectorSample:
    """ A simulated max-id vector

    Attributes:
        values: Coordinatewise maximum of all simulated atoms.
        kept_atoms: Atoms attaining `values` at one or more coordinates.
        diagnostics: Work counters of the run.
        extended_values: Maximum after the extra slices of the post-hoc
            check, None unless requested.
    """
    values: np.ndarray
    kept_atoms: List[Atom] = field(default_factory=list)
    diagnostics: VectorDiagnostics = field(default_factory=VectorDiagnostics)
    extended_values: Optional[np.ndarray] = None


def simulate_vector(measure: ExponentMeasure, slices: SliceSequence, d: int,
                    stream: RngStream, slice_cap: Optional[int] = None,
                    extra_slices: int = 0) -> VectorSample:
    """ Exact simulation of a max-id vector with exponent measure μ

    Coordinates of finite positive mass (J₀) are drawn from the finite
    parts of μ. The residual is simulated slice by slice; before slice n the
    loop stops once min over the other coordinates of the residual maxima
    reaches containment_radius(n), or the sampler's tighter bound.

    Args:
        measure: Exponent measure on the coordinates 1..d.
        slices: The slice sequence of `measure`.
        d: Dimension.
        stream: Source of randomness.
        slice_cap: Maximal number of slices, None for no cap.
        extra_slices: Number of further slices to simulate after stopping,
            recorded in `extended_values` only.
    Raises:
        TerminationCapError: If `slice_cap` slices do not suffice.
    """
    if d < 1:
        raise UsageError(f"Dimension must be at least 1, got {d}")
    start = time.perf_counter()
    locations = tuple(range(1, d + 1))
    diagnostics = VectorDiagnostics()

    split = zero_mass_split(measure, locations)
    finite_atoms: List[Atom] = []
    for atoms in split.sample_components(stream).values():
        finite_atoms.extend(atoms)
    diagnostics.atoms_simulated += len(finite_atoms)

    zero_locations = tuple(locations[j] for j in split.zero_positions)
    free = [j for j in range(d) if j not in set(split.zero_positions)]

    def residual_atoms(n, sampler):
        atoms = sampler.sample(n, stream)
        diagnostics.atoms_simulated += len(atoms)
        if zero_locations:
            atoms = [f for f in atoms
                     if not np.any(f.at(zero_locations) > 0)]
        return atoms

    residual = np.zeros(d)
    residual_kept: List[Atom] = []
    n = 1
    sampler = slices.sampler(d) if free else None
    while free:
        bound = min(slices.containment_radius(n), sampler.remaining_bound())
        if residual[free].min() >= bound:
            break
        if slice_cap is not None and n > slice_cap:
            raise TerminationCapError(
                f"Stopping rule did not fire within {slice_cap} slices")
        atoms = residual_atoms(n, sampler)
        residual = pointwise_max([residual]
                                 + [f.at(locations) for f in atoms], d)
        # the running maxima only grow; dominated atoms stay dominated
        residual_kept = [f for f in residual_kept + atoms
                         if np.any((f.at(locations) == residual)
                                   & (residual > 0))]
        LOG.debug("Slice %d: %d atoms, min free coordinate %.4g", n,
                  len(atoms), residual[free].min())
        n += 1
    diagnostics.slices_consumed = n - 1

    values = pointwise_max([residual]
                           + [f.at(locations) for f in finite_atoms], d)
    kept = [f for f in finite_atoms + residual_kept
            if np.any((f.at(locations) == values) & (values > 0))]
    diagnostics.atoms_kept = len(kept)
    extended = None
    if extra_slices > 0 and sampler is not None:
        extended = residual.copy()
        for m in range(n, n + extra_slices):
            extended = pointwise_max([extended] + [f.at(locations) for f in
                                                   residual_atoms(m, sampler)],
                                     d)
        extended = np.maximum(extended, values)
    diagnostics.wall_seconds = time.perf_counter() - start
    return VectorSample(values, kept, diagnostics, extended)


def reciprocal_archimedean_vector(radial_tail: Union[RadialMeasure,
                                                     Callable[[float], float]],
                                  d: int, stream: RngStream,
                                  slice_cap: Optional[int] = None
                                  ) -> VectorSample:
    """ Vector with reciprocal Archimedean copula

    The angular law is uniform on the 1-norm simplex and the margins are
    exp(-μ₁([x, inf))).

    Args:
        radial_tail: μ₁ or its tail function r -> μ₁([r, inf)).
    """
    radial = radial_tail if isinstance(radial_tail, RadialMeasure) \
        else CallableRadial(radial_tail)
    measure = ScaleMixtureMeasure(radial, DirichletAngular.uniform(d))
    return simulate_vector(measure, RadialShells(measure), d, stream,
                           slice_cap=slice_cap)


def max_stable_vector(d: int, stream: RngStream,
                      angular: Optional[AngularLaw] = None) -> VectorSample:
    """ Max-stable vector with unit Fréchet margins """
    measure = frechet_scale_mixture(d, angular)
    return simulate_vector(measure, RadialShells(measure), d, stream)
