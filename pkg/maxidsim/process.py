"""
Exact simulation of a continuous max-id process at finitely many locations

The process X with exponent measure μ is the pointwise maximum of a Poisson
random measure N. Only the extremal functions at the requested locations
(atoms attaining the maximum somewhere) matter, and they are found by
simulating finite bands {c_hi > f(t) >= c_lo} of μ one location at a time.
Locations where X vanishes with positive probability carry finite mass and
are simulated directly from the split in `zero_mass_split`.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, TerminationCapError, UsageError
from .exponent_measure import (Atom, ExponentMeasure, Location,
                               ResidualMeasure, zero_mass_split)
from .library import pointwise_max
from .samplers import RngStream

LOG = logging.getLogger(__name__)


@dataclass
class Alg1Options:
    """ Tuning of the band descent

    Attributes:
        initial_cut: First lower threshold c of the descent. If None, the
            measure's characteristic scale is used where available, else 1.
        halving_factor: Lower thresholds shrink by this factor per band.
        band_cap: Maximal number of bands per location, None for no cap.
    """
    initial_cut: Optional[float] = None
    halving_factor: float = 0.5
    band_cap: Optional[int] = None

    def __post_init__(self):
        if self.initial_cut is not None and not self.initial_cut > 0:
            raise DomainError(f"initial_cut must be positive, got "
                              f"{self.initial_cut}")
        if not 0 < self.halving_factor < 1:
            raise DomainError(f"halving_factor must lie in (0, 1), got "
                              f"{self.halving_factor}")
        if self.band_cap is not None and self.band_cap < 1:
            raise DomainError(f"band_cap must be at least 1, got "
                              f"{self.band_cap}")

    def cut_for(self, residual: ResidualMeasure, t: Location) -> float:
        if self.initial_cut is not None:
            return self.initial_cut
        scale = residual.characteristic_scale(t)
        if scale is None or not np.isfinite(scale) or scale <= 0:
            return 1.0
        return float(scale)


@dataclass
class ProcessDiagnostics:
    atoms_simulated: int = 0
    atoms_kept: int = 0
    bands_scanned: List[int] = field(default_factory=list)
    wall_seconds: float = 0.0

    @property
    def steps(self) -> int:
        return int(sum(self.bands_scanned))


@dataclass
class ExtremalSample:
    """ Exact values at the locations and the extremal atoms behind them

    Attributes:
        locations: The requested locations t_1..t_d.
        values: X_{t_i}, the maximum of the kept atoms at t_i.
        kept_atoms: Atoms attaining `values` at one or more locations.
        diagnostics: Work counters of the run.
    """
    locations: tuple
    values: np.ndarray
    kept_atoms: List[Atom]
    diagnostics: ProcessDiagnostics

    def path(self, t: Location) -> float:
        """ The path approximation X̂_t = max over kept atoms of f(t) """
        return max((f(t) for f in self.kept_atoms), default=0.0)


@dataclass
class BandScan:
    atoms: List[Atom]
    bands: int
    simulated: int


def extremal_filter(candidates: Sequence[Atom], values: np.ndarray,
                    earlier: Sequence[int],
                    locations: Sequence[Location]) -> List[Atom]:
    """ Keep the atoms strictly below the running maxima at earlier positions

    An atom with f(t_k) >= values[k] for some earlier position k belongs to
    a region already simulated and is discarded.

    Args:
        candidates: Atoms of the current band.
        values: Running maxima, indexed by position.
        earlier: Positions k already processed.
        locations: All locations, used to evaluate the atoms.
    """
    earlier = list(earlier)
    if not earlier:
        return list(candidates)
    bound = values[earlier]
    return [f for f in candidates
            if np.all(f.at(locations)[earlier] < bound)]


def band_maximizers(atoms: Sequence[Atom], position: int,
                    locations: Sequence[Location]) -> List[Atom]:
    """ The atoms attaining the maximum at `position`, ties included """
    if not atoms:
        return []
    at_t = np.array([f.at(locations)[position] for f in atoms])
    top = at_t.max()
    return [f for f, v in zip(atoms, at_t) if v == top]


def descend_bands(residual: ResidualMeasure, position: int,
                  values: np.ndarray, earlier: Sequence[int],
                  locations: Sequence[Location], options: Alg1Options,
                  stream: RngStream) -> BandScan:
    """ Scan bands [c_l, c_u) downwards until an atom survives the filter

    Starts with c_u = inf, c_l = c and moves to [c_l·factor, c_l) after an
    empty band.

    Raises:
        TerminationCapError: If `options.band_cap` bands stay empty.
    """
    t = locations[position]
    c_upper = np.inf
    c_lower = options.cut_for(residual, t)
    bands = 0
    simulated = 0
    while True:
        if options.band_cap is not None and bands >= options.band_cap:
            raise TerminationCapError(
                f"No atom reached location {t} within {bands} bands, "
                f"down to threshold {c_upper:.3g}")
        bands += 1
        candidates = residual.sample_band(t, c_lower, c_upper, stream,
                                          locations)
        simulated += len(candidates)
        survivors = extremal_filter(candidates, values, earlier, locations)
        LOG.debug("Location %s band [%.4g, %.4g): %d atoms, %d survive",
                  t, c_lower, c_upper, len(candidates), len(survivors))
        if survivors:
            return BandScan(survivors, bands, simulated)
        c_upper, c_lower = c_lower, c_lower * options.halving_factor


def simulate_process(measure: ExponentMeasure,
                     locations: Sequence[Location],
                     options: Optional[Alg1Options] = None,
                     stream: Optional[RngStream] = None) -> ExtremalSample:
    """ Exact simulation of (X_{t_1}, ..., X_{t_d})

    Locations of finite positive mass (J₀) are simulated from their finite
    parts first. The residual measure is then processed location by
    location in the given order: a location the residual maxima have not
    reached is found by descending bands, otherwise the band above the
    running maximum is simulated. After filtering, the atoms attaining the
    band maximum are the new extremal functions.

    Args:
        measure: The exponent measure.
        locations: Distinct locations t_1..t_d.
        options: Band-descent tuning, defaults to `Alg1Options()`.
        stream: Source of randomness.
    Returns:
        The exact values with their extremal atoms.
    Raises:
        UsageError: On repeated locations or a missing stream.
    """
    if stream is None:
        raise UsageError("simulate_process needs a stream")
    locations = tuple(locations)
    if len(set(locations)) != len(locations):
        raise UsageError(f"Locations must be distinct, got {locations}")
    options = options if options is not None else Alg1Options()
    start = time.perf_counter()
    d = len(locations)
    diagnostics = ProcessDiagnostics(bands_scanned=[0] * d)

    split = zero_mass_split(measure, locations)
    finite_atoms: List[Atom] = []
    for atoms in split.sample_components(stream).values():
        finite_atoms.extend(atoms)
    diagnostics.atoms_simulated += len(finite_atoms)

    zero_positions = set(split.zero_positions)
    residual_values = np.zeros(d)
    residual_atoms: List[Atom] = []
    earlier: List[int] = []
    for i in range(d):
        if i in zero_positions:
            continue
        t = locations[i]
        if residual_values[i] == 0:
            scan = descend_bands(split.residual, i, residual_values, earlier,
                                 locations, options, stream)
        else:
            candidates = split.residual.sample_band(t, residual_values[i],
                                                    np.inf, stream, locations)
            survivors = extremal_filter(candidates, residual_values, earlier,
                                        locations)
            scan = BandScan(survivors, 1, len(candidates))
        diagnostics.bands_scanned[i] = scan.bands
        diagnostics.atoms_simulated += scan.simulated
        new = band_maximizers(scan.atoms, i, locations)
        if new:
            residual_values = pointwise_max([residual_values]
                                            + [f.at(locations) for f in new],
                                            d)
            residual_atoms.extend(new)
        earlier.append(i)

    candidates = finite_atoms + residual_atoms
    values = pointwise_max([f.at(locations) for f in candidates], d)
    kept = [f for f in candidates
            if np.any((f.at(locations) == values) & (values > 0))]
    diagnostics.atoms_kept = len(kept)
    diagnostics.wall_seconds = time.perf_counter() - start
    LOG.debug("Simulated %d locations: %d atoms, %d kept, %d bands",
              d, diagnostics.atoms_simulated, diagnostics.atoms_kept,
              diagnostics.steps)
    return ExtremalSample(locations, values, kept, diagnostics)
