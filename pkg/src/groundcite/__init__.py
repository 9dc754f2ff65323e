"""groundcite: rewards, evaluation and dataset curation for decomposition-based
post-hoc citation attribution."""

__version__ = "0.1.0"

from .matching import matching_value, max_weight_matching
from .metrics import PrfScore, aggregate_report, exact_match_prf, f1
from .rewards import (
    RewardBreakdown,
    RewardConfig,
    accuracy_reward,
    accuracy_reward_exact,
    compute_rewards,
    compute_rewards_batch,
    validity_reward,
    validity_reward_exact,
)
from .tagfmt import (
    Decomposition,
    ParseOutcome,
    format_reward,
    format_reward_binary,
    parse,
    serialize,
)
from .textkit import (
    Bm25Params,
    SentenceSpan,
    bm25_rank,
    levenshtein,
    normalize,
    reduce_context,
    similarity,
    split_sentences,
)
from .window import best_window_similarity

__all__ = [
    "__version__",
    "Bm25Params",
    "Decomposition",
    "ParseOutcome",
    "PrfScore",
    "RewardBreakdown",
    "RewardConfig",
    "SentenceSpan",
    "accuracy_reward",
    "accuracy_reward_exact",
    "aggregate_report",
    "best_window_similarity",
    "bm25_rank",
    "compute_rewards",
    "compute_rewards_batch",
    "exact_match_prf",
    "f1",
    "format_reward",
    "format_reward_binary",
    "levenshtein",
    "matching_value",
    "max_weight_matching",
    "normalize",
    "parse",
    "reduce_context",
    "serialize",
    "similarity",
    "split_sentences",
    "validity_reward",
    "validity_reward_exact",
]
