"""Result records shared by the binomial closed forms and the generic engine."""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from transduct import numerics
from transduct.errors import DomainError

PRIOR_PREDICTIVE = "prior-predictive"
POSTERIOR_PREDICTIVE = "posterior-predictive"
ABDUCTIVE = "abductive"
KINDS = (PRIOR_PREDICTIVE, POSTERIOR_PREDICTIVE, ABDUCTIVE)


@dataclass(frozen=True)
class MomentPair:
    """Predictive mean and variance with the variance split into its two sources.

    ``within_model_variance`` is the posterior expectation of each model's own
    variance; ``between_model_variance`` is the posterior variance of the
    models' means.
    """

    mean: float
    variance: float
    within_model_variance: float
    between_model_variance: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True, eq=False)
class PredictiveDistribution:
    outcomes: tuple
    log_probs: np.ndarray
    kind: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown predictive kind {self.kind!r}")
        lp = np.asarray(self.log_probs, dtype=np.float64)
        if lp.shape != (len(self.outcomes),):
            raise DomainError("one log probability per outcome is required")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise DomainError("outcome space lists an outcome twice")
        lp.setflags(write=False)
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "log_probs", lp)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def total(self) -> float:
        return numerics.sum_exp(self.log_probs)

    def prob(self, outcome: Any) -> float:
        return float(math.exp(self.log_probs[self.outcomes.index(outcome)]))

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs.tolist()))

    def total_variation(self, other: "PredictiveDistribution") -> float:
        if self.outcomes != other.outcomes:
            raise DomainError("total variation needs identical outcome spaces")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())
