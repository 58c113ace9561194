"""Distribution-free tests of spherical symmetry.

Each observation is paired with a spherically symmetric variant of itself,
a short covering path is drawn through the pooled points, and sign, runs
and linear rank statistics are read off along the path.
"""

from .augment import RngStream, augment, spatial_median, split_differences
from .calibrate import (
    bonferroni_decide,
    binom_tail,
    lr_asymptotic_pvalue,
    lr_exact_law,
    null_table,
    runs_asymptotic_pvalue,
    runs_pvalue,
    sign_asymptotic_pvalue,
    sign_pvalue,
)
from .cost import cost_matrix
from .errors import (
    DataError,
    DegenerateInputError,
    EnumerationCapError,
    InvalidDimensionError,
    InvariantViolationError,
    ResolutionError,
    SampleTooSmallError,
    ScoreSymmetryError,
    SpherePathError,
)
from .generators import EXAMPLES, generate
from .harness import ExperimentConfig, estimate_power, ingest_csv, oracle_compare, run_test, subsample_power
from .model import (
    AugmentedSet,
    CostKind,
    CostMatrix,
    CoveringPath,
    GeneratorSpec,
    ObservationMatrix,
    PowerEstimate,
    ScoreFunction,
    SignRankProfile,
    TestConfig,
    TestReport,
)
from .path import exact_path, extract_profile, heuristic_path
from .stats import linear_rank_statistic, runs_statistic, sign_statistic

__version__ = "0.1.0"
