"""Active ranking of experts from noisy expert-task queries under monotonicity."""
from .baseline import borda_best_expert, borda_duel
from .duel import (
    CI_CONSTANTS,
    PAPER_CONSTANTS,
    DuelConfig,
    DuelConstants,
    DuelOutcome,
    DuelTrace,
    compare,
    try_compare,
)
from .env import NoiseModel, SamplingOracle, gen_chain_instance, gen_sparse_instance, read_matrix, write_matrix
from .errors import (
    AllZero,
    BadIndex,
    BadParams,
    BudgetExceeded,
    ConfigError,
    ExpertRankError,
    NotIdentifiable,
    NotMonotone,
    OutOfRange,
)
from .model import (
    ComplexityReport,
    EffectiveSparsity,
    GapProfile,
    MonotoneInstance,
    PerformanceMatrix,
    complexity_report,
    effective_sparsity,
    gap_profile,
    validate_instance,
)
from .rank import BestExpertResult, RankingResult, active_ranking, best_expert, binary_search, max_search

__version__ = "0.1.0"
