"""Exact minimum information partitions of multivariate systems.

The minimum of a symmetric submodular loss over all bipartitions is found
with the pendent-pair contraction search in ``O(n^3)`` evaluations; Gaussian
mutual information is the built-in loss.
"""

__version__ = "0.1.0"

from .errors import DivergenceError, DomainError, InputError, MipError, NumericalError
from .sets import (
    GroundSet,
    LossOracle,
    MergeState,
    PropertyReport,
    Subset,
    cardinality_oracle,
    check_submodular,
    check_symmetric,
    complement,
    merge,
)
from .loss import (
    DiscreteSystem,
    GaussianMIOracle,
    GaussianSystem,
    covariance_from_samples,
    discrete_mi,
    entropy_oracle,
    gaussian_entropy,
    gaussian_mi,
    mi_oracle,
)
from .queyranne import BipartitionResult, PendentPair, minimize_bipartition, pendent_pair
from .kpartition import (
    HierNode,
    KPartition,
    hierarchical_bipartition,
    minimize_kpartition,
    total_correlation_loss,
)
from .exhaustive import exhaustive_bipartition, exhaustive_kpartition
from .datagen import (
    CmlParams,
    gen_block_correlated,
    gen_random_gaussian,
    simulate_cml,
)

__all__ = [name for name in dir() if not name.startswith("_")]
