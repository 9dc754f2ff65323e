"""In-process client for the groundcite reward service.

Wraps the /v1/score wire protocol so a GRPO trainer can score rollout
batches with one call.  Protocol-only by design: no reward math lives here,
so the client and the service can never disagree except through the wire.
"""

from .client import (
    ClientHandle,
    ScoreError,
    TransportFailure,
    reward_fn_adapter,
    score_batch,
)

__version__ = "0.1.0"

__all__ = [
    "ClientHandle",
    "ScoreError",
    "TransportFailure",
    "reward_fn_adapter",
    "score_batch",
    "__version__",
]
