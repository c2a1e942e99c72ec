"""Estimate a multi-graphon ``f(x, y; z)`` from a collection of networks on shared nodes.

The pipeline is: :func:`distance_matrix` (path-counting node distances),
:func:`embed_1d` (ordinal embedding to 1-D positions) and
:func:`fit_multigraphon` (kernel regression over node and network positions).
"""

from .baselines import nbs, usvt
from .bench import MseRecord, Scenario, emit_report, mse, run_scenario
from .distance import DistanceMatrix, distance_matrix
from .embedding import Embedding, OrdinalConstraintSet, build_constraints, embed_1d, spearman
from .exceptions import (
    InvalidInputError,
    InvalidSpecError,
    MultigraphonError,
    ProbabilityOverflowError,
    UndefinedStatisticError,
)
from .model import (
    GraphCollection,
    LatentDraw,
    MultiGraphonSpec,
    estimate_density,
    evaluate,
    flatten,
    sample,
    true_distance,
)
from .netstats import SimpleGraph, avg_path_length, density, resample_stats, transitivity, triangles
from .smoother import (
    FitResult,
    SmootherConfig,
    bootstrap_ci,
    fit_multigraphon,
    fit_per_edge,
    fit_per_network,
    fit_replicated,
    oracle_positions,
    predict,
    select_regime,
)

__version__ = "0.1.0"
