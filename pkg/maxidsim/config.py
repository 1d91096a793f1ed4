"""
Run configuration and declarative construction of model families

A run is described by a JSON file (schema version 1) whose values are
overridden by command-line flags. The family entry is a dict with a `tag`
and family parameters, e.g.

    {"schema_version": 1, "command": "simulate", "d": 10, "n": 1000,
     "seed": 42, "family": {"tag": "mo-stable", "alpha": 0.5}}
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .errors import DomainError, UsageError
from .exchangeable import LevySpec, gamma_spec, simulate_mo_sequence, \
    stable_spec
from .exponent_measure import (AngularLaw, DirichletAngular, DiscreteAngular,
                               DiscreteFiniteMeasure, ExponentMeasure,
                               FrechetRadial, PointMassRadial, RadialMeasure,
                               ScaleMixtureMeasure, TruncatedRadial)
from .process import Alg1Options, simulate_process
from .samplers import RngStream
from .vector import RadialShells, simulate_vector

LOG = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COMMANDS = ("simulate", "validate", "bench", "plot-data")
FORMATS = ("csv", "json")
FAMILY_TAGS = ("mo-stable", "mo-gamma", "scale-mixture",
               "reciprocal-archimedean", "discrete")


@dataclass
class Draw:
    """ One replicate of any family, flattened for the output tables """
    values: np.ndarray
    atoms_simulated: int
    atoms_kept: int
    steps: int
    wall_seconds: float


@dataclass
class Family:
    """ A configured model ready to simulate

    Attributes:
        tag: The family tag of the configuration.
        kind: 'sequence' (exchangeable, process simulator over 1..d),
            'vector' (scale mixture, slice simulator) or 'process'
            (discrete measure, process simulator).
        spec: The LevySpec of a sequence family.
        measure: The exponent measure of a vector or process family.
        params: The validated parameters.
    """
    tag: str
    kind: str
    params: Dict[str, Any]
    spec: Optional[LevySpec] = None
    measure: Optional[ExponentMeasure] = None

    def draw(self, d: int, stream: RngStream,
             options: Optional[Alg1Options] = None) -> Draw:
        if self.kind == 'sequence':
            sample = simulate_mo_sequence(self.spec, d, stream, options)
            diag = sample.diagnostics
            return Draw(sample.values, diag.atoms_simulated,
                        diag.atoms_kept, diag.steps, diag.wall_seconds)
        if self.kind == 'vector':
            sample = simulate_vector(self.measure, RadialShells(self.measure),
                                     d, stream)
            diag = sample.diagnostics
            return Draw(sample.values, diag.atoms_simulated,
                        diag.atoms_kept, diag.steps, diag.wall_seconds)
        sample = simulate_process(self.measure, range(1, d + 1), options,
                                  stream)
        diag = sample.diagnostics
        return Draw(sample.values, diag.atoms_simulated, diag.atoms_kept,
                    diag.steps, diag.wall_seconds)


def _number(params: Dict[str, Any], key: str, default=None,
            positive: bool = False, minimum: Optional[float] = None) -> float:
    value = params.get(key, default)
    if value is None:
        raise UsageError(f"Missing family parameter '{key}'")
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"Family parameter '{key}' must be a number, "
                         f"got {value!r}")
    if positive and not value > 0:
        raise UsageError(f"Family parameter '{key}' must be positive, "
                         f"got {value}")
    if minimum is not None and value < minimum:
        raise UsageError(f"Family parameter '{key}' must be >= {minimum}, "
                         f"got {value}")
    return value


def build_angular(params: Dict[str, Any], d: int) -> AngularLaw:
    kind = params.get("angular", "uniform")
    if kind == "uniform":
        return DirichletAngular.uniform(d)
    if kind == "dirichlet":
        concentration = params.get("concentration")
        if concentration is None or len(concentration) != d:
            raise UsageError(f"Dirichlet angular law needs {d} concentration "
                             "parameters")
        return DirichletAngular(concentration)
    if kind == "discrete":
        vectors = np.asarray(params.get("vectors", []), dtype=float)
        if vectors.ndim != 2 or vectors.shape[1] != d:
            raise UsageError(f"Discrete angular vectors must have length {d}")
        return DiscreteAngular(vectors, params.get("probabilities", []),
                               params.get("p", 1.0))
    raise UsageError(f"Unknown angular law '{kind}'")


def build_radial(params: Dict[str, Any], angular: AngularLaw) -> RadialMeasure:
    """ Radial measure; a Fréchet scale defaults to 1/E[m_1] """
    kind = params.get("radial", "frechet")
    if kind in ("frechet", "truncated-frechet"):
        default_scale = 1.0 / angular.moment(1, 1.0)
        radial = FrechetRadial(_number(params, "scale", default_scale,
                                       positive=True),
                               _number(params, "tail_index", 1.0,
                                       positive=True))
        if kind == "truncated-frechet":
            radial = TruncatedRadial(radial, _number(params, "lower",
                                                     positive=True))
        return radial
    if kind == "point-mass":
        return PointMassRadial(_number(params, "radius", positive=True),
                               _number(params, "mass", minimum=0.0))
    raise UsageError(f"Unknown radial measure '{kind}'")


def build_family(family: Dict[str, Any], d: int) -> Family:
    """ Construct the model of a family entry for dimension d

    Raises:
        UsageError: On unknown tags or invalid parameters.
    """
    if not isinstance(family, dict) or "tag" not in family:
        raise UsageError(f"Family must be a dict with a 'tag', got {family!r}")
    params = {k: v for k, v in family.items() if k != "tag"}
    tag = family["tag"]
    try:
        if tag == "mo-stable":
            spec = stable_spec(_number(params, "alpha", 0.5),
                               _number(params, "envelope_scale", 1.0,
                                       positive=True),
                               _number(params, "drift", 0.0, minimum=0.0))
            return Family(tag, "sequence", params, spec=spec)
        if tag == "mo-gamma":
            spec = gamma_spec(_number(params, "shape", 1.0),
                              _number(params, "rate", 1.0),
                              _number(params, "envelope_scale", 1.0,
                                      positive=True),
                              _number(params, "drift", 0.0, minimum=0.0))
            return Family(tag, "sequence", params, spec=spec)
        if tag == "scale-mixture":
            angular = build_angular(params, d)
            measure = ScaleMixtureMeasure(build_radial(params, angular),
                                          angular)
            return Family(tag, "vector", params, measure=measure)
        if tag == "reciprocal-archimedean":
            if params.get("angular", "uniform") != "uniform":
                raise UsageError("Reciprocal Archimedean families use the "
                                 "uniform angular law")
            angular = DirichletAngular.uniform(d)
            measure = ScaleMixtureMeasure(build_radial(params, angular),
                                          angular)
            return Family(tag, "vector", params, measure=measure)
        if tag == "discrete":
            atoms = params.get("atoms")
            if not atoms:
                raise UsageError("Discrete family needs a non-empty 'atoms' "
                                 "list")
            if any(len(a.get("values", [])) != d for a in atoms):
                raise UsageError(f"Every discrete atom needs {d} values")
            measure = DiscreteFiniteMeasure.from_vectors(
                [a.get("weight") for a in atoms],
                [a["values"] for a in atoms])
            return Family(tag, "process", params, measure=measure)
    except (DomainError, TypeError) as e:
        raise UsageError(f"Invalid parameters for family '{tag}': {e}") from e
    raise UsageError(f"Unknown family tag '{tag}', expected one of "
                     f"{', '.join(FAMILY_TAGS)}")


@dataclass
class RunConfig:
    """ Everything a command needs; validated before any computation """
    command: str = "simulate"
    family: Dict[str, Any] = field(default_factory=lambda: {"tag":
                                                            "mo-stable"})
    d: int = 10
    n: int = 1000
    seed: int = 0
    dims: Optional[List[int]] = None
    out: Optional[str] = None
    format: Optional[str] = None
    threads: Optional[int] = None
    alpha: float = 0.01
    panel: int = 5
    required_passes: int = 4
    check_monotone: bool = False
    timings: bool = False
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> RunConfig:
        """ Read a JSON configuration

        Raises:
            UsageError: On unreadable files, unknown keys or schema versions.
        """
        try:
            with open(path, 'r') as infile:
                raw = json.load(infile)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"Cannot read configuration {path}: {e}") from e
        if not isinstance(raw, dict):
            raise UsageError(f"Configuration {path} must be a JSON object")
        if raw.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise UsageError(f"Unsupported schema_version "
                             f"{raw['schema_version']}, expected "
                             f"{SCHEMA_VERSION}")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"Unknown configuration keys {sorted(unknown)}")
        return cls(**raw)

    def merge_flags(self, flags: Dict[str, Any]) -> RunConfig:
        """ Override values by the flags that were given (not None)

        A `family` flag is a bare tag; it keeps the file's parameters only if
        the tag is unchanged.
        """
        for key, value in flags.items():
            if value is None or not hasattr(self, key):
                continue
            if key == "family":
                if self.family.get("tag") != value:
                    self.family = {"tag": value}
            else:
                setattr(self, key, value)
        return self

    def validate(self) -> Family:
        """ Check every field and build the family

        Raises:
            UsageError: On any invalid value.
        """
        if self.command not in COMMANDS:
            raise UsageError(f"Unknown command '{self.command}'")
        for key in ("d", "n", "panel", "required_passes"):
            value = getattr(self, key)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise UsageError(f"'{key}' must be a positive integer, got "
                                 f"{value!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise UsageError(f"'seed' must be an integer, got {self.seed!r}")
        if self.required_passes > self.panel:
            raise UsageError("required_passes cannot exceed panel")
        if not 0 < self.alpha < 1:
            raise UsageError(f"'alpha' must lie in (0, 1), got {self.alpha}")
        if self.threads is not None and self.threads < 1:
            raise UsageError(f"'threads' must be positive, got {self.threads}")
        if self.format is not None and self.format not in FORMATS:
            raise UsageError(f"Unknown format '{self.format}'")
        if self.command == "bench":
            if not self.dims:
                raise UsageError("bench needs a non-empty dims list")
            if any(int(d) < 1 for d in self.dims):
                raise UsageError(f"Benchmark dimensions must be positive, "
                                 f"got {self.dims}")
        if self.command == "simulate" and self.out is None:
            raise UsageError("simulate needs an output path (--out)")
        family = build_family(self.family, self.d)
        if self.command in ("bench", "plot-data") and \
                family.kind != "sequence":
            raise UsageError(f"{self.command} needs an mo-stable or mo-gamma "
                             f"family, got '{family.tag}'")
        if self.command == "bench":
            for d in self.dims:
                build_family(self.family, int(d))
        return family

    @property
    def filetype(self) -> str:
        if self.format is not None:
            return self.format
        if self.out is not None and Path(self.out).suffix.lower() == ".json":
            return "json"
        return "csv"

    def dimensions(self) -> List[int]:
        return [int(d) for d in self.dims] if self.dims else [self.d]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
