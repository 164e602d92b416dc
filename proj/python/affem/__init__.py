"""Parameter learning for discrete Bayesian networks observed through noisy sensors."""

from ._affem import (
    AffemError,
    Model,
    bench,
    discretize,
    k2,
    learn_discrete,
    learn_em,
    observed_loglik,
    query,
    rms_error,
    synthesize,
)

__all__ = [
    "AffemError",
    "Model",
    "bench",
    "discretize",
    "k2",
    "learn_discrete",
    "learn_em",
    "observed_loglik",
    "query",
    "rms_error",
    "synthesize",
]
