"""Equilibrium pricing when consumers can verifiably disclose their types."""

__version__ = "0.1.0"

from .dist import (  # noqa: E402
    Beta,
    Discrete,
    Distribution,
    DistributionError,
    PiecewiseLinear,
    Power,
    Uniform,
    check_log_concave_symmetric,
    from_dict,
)
from .duopoly import (  # noqa: E402
    DuopolyConfig,
    benchmark_price,
    duopoly_welfare,
    fully_revealing_prices,
    rich_evidence_duopoly,
    simple_evidence_duopoly,
)
from .estimators import DuopolySegmenter, GreedySegmenter, PartitionSegmenter  # noqa: E402
from .monopoly import (  # noqa: E402
    MonopolySegmentation,
    greedy_segmentation,
    optimal_posted_price,
    segmentation_welfare,
    simple_evidence_equilibria,
)
from .partition import (  # noqa: E402
    DiscreteInstance,
    exhaustive_partition_search,
    greedy_discrete,
    optimal_partition_dp,
    power_law_optimality_check,
)
from .verify import verify_duopoly, verify_monopoly_segmentation, verify_pareto_vs_benchmark  # noqa: E402
