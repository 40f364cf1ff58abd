"""Convex minorants of one-dimensional random walks.

Exact hull geometry, permutation representations of the minorant length,
moment formulas and samplers for its limit laws.
"""

from .geometry import (
    FaceDecomposition,
    PolyLine,
    WalkPath,
    concave_majorant,
    convex_minorant,
    face_decomposition,
    majorant_length,
    minorant_length,
    path_extremes,
    perimeter,
    polyline_length,
    walk_summaries,
)
from .increments import (
    CauchyStandard,
    Gaussian,
    IncrementLaw,
    LogSquaredTail,
    ParetoSymmetricCentered,
    Rademacher,
    Regime,
    RegimeError,
    StableExact,
    Uniform,
    Zero,
    classify_regime,
    law_from_dict,
    normalization,
    sample_increment,
    sample_walk,
    truncated_variance,
)
from .moments import eta_moments, eta_table, mean_length, variance_length
from .permutations import (
    CycleCounts,
    PDWeights,
    RankedCycles,
    sample_cycle_counts,
    sample_feller_coupled,
    sample_pd1,
)
from .representations import eta, sample_excess, surrogate_rep1, surrogate_rep2
from .rng import RngStream, stream

__version__ = "0.1.0"
