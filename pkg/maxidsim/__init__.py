# Version control taken from numpy
# We first need to detect if we're being called as part of the maxidsim setup
# procedure itself in a reliable manner.
try:
    __MAXIDSIM_SETUP__
except NameError:
    __MAXIDSIM_SETUP__ = False

if __MAXIDSIM_SETUP__:
    import sys
    sys.stderr.write('Running from maxidsim source directory.\n')
else:
    from .version import git_revision as __git_revision__
    from .version import version as __version__
    from .version import full_version as __full_version__


# Simply import all functions and classes from all files to make them available
# at the package level
from .errors import (DomainError, UsageError, EnvelopeViolationError,
                     TerminationCapError, NumericError)
from .library import reciprocal, pointwise_max, ecdf, parallelize_replicates
from .samplers import (RngStream, exp_variate, poisson_variate, PowerLawPiece,
                       PowerLawEnvelope, sample_power_law_piece,
                       rejection_sample, rejection_sample_many)
from .exponent_measure import (Atom, RadialAtom, ShockAtom, DiscreteAtom,
                               ExponentMeasure, FrechetRadial, TruncatedRadial,
                               PointMassRadial, CallableRadial,
                               DirichletAngular, DiscreteAngular,
                               RadialArrivals, ScaleMixtureMeasure,
                               SequenceMixtureMeasure, DiscreteFiniteMeasure,
                               SumMeasure, ZeroMassSplit, zero_mass_split,
                               frechet_scale_mixture)
from .process import (Alg1Options, ExtremalSample, simulate_process,
                      extremal_filter, descend_bands)
from .vector import (SliceSequence, SliceSampler, RadialShells, VectorSample,
                     simulate_vector, reciprocal_archimedean_vector,
                     max_stable_vector)
from .exchangeable import (LevySpec, AdditiveSpec, MoSequenceSample,
                           stable_spec, half_stable_spec, gamma_spec, psi,
                           mo_sample_prm_above, additive_sample_prm_above,
                           simulate_mo_sequence)
from .validation import (KsResult, BenchRow, ValidationReport, ks_test,
                         ks_2sample, scaled_min_exp_check,
                         finite_measure_oracle, bench_scaling, seed_panel,
                         compare_frequencies, bivariate_survival_check)
from .config import RunConfig, build_family
from .introspection import logging
