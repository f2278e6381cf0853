"""Prediction over a finite, explicit space of models.

Induction reweights the models by how well they explain the observed data.
Transduction predicts new data by averaging every model's prediction under
those weights.  Abduction picks the single most probable model and predicts
with it alone.  Continuous parameters enter only through grids.
"""

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from transduct import kernels, numerics
from transduct.binomial import PriorSample, beta_posterior_log_density
from transduct.distributions import (
    ABDUCTIVE,
    POSTERIOR_PREDICTIVE,
    PRIOR_PREDICTIVE,
    MomentPair,
    PredictiveDistribution,
)
from transduct.errors import DomainError, ImpossibleDataError
from transduct.families import (
    BinomialFamily,
    Family,
    NormalFamily,
    OutlierMixtureFamily,
    TabulatedFamily,
)

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Model:
    model_id: Any
    params: Any
    log_prior: float


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """An ordered, normalized set of models sharing one likelihood family.

    The listed models are taken to be mutually exclusive and exhaustive.
    Order is fixed at construction and decides ties when a single best model
    is picked.  ``exchangeable`` records the caller's assertion that data are
    conditionally independent given the model; prediction from observed data
    refuses spaces without it.
    """

    family: Family
    params: np.ndarray
    log_prior: np.ndarray
    ids: tuple = ()
    exchangeable: bool = True

    def __post_init__(self):
        params = np.array(self.params, dtype=np.float64)
        if params.ndim == 1:
            params = params[:, None]
        log_prior = np.array(self.log_prior, dtype=np.float64)
        if log_prior.shape != (params.shape[0],) or params.shape[0] == 0:
            raise DomainError("need one log prior per model and at least one model")
        if np.isnan(log_prior).any() or (log_prior == np.inf).any():
            raise DomainError("log priors must be finite or -inf")
        self.family.check_params(params)
        total = numerics.log_sum_exp(log_prior)
        if not abs(total) <= NORMALIZATION_TOL:
            raise DomainError(f"log priors must normalize; log of total mass is {total!r}")
        ids = tuple(self.ids) if self.ids else tuple(range(params.shape[0]))
        if len(ids) != params.shape[0] or len(set(ids)) != len(ids):
            raise DomainError("model ids must be unique, one per model")
        params.setflags(write=False)
        log_prior.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "log_prior", log_prior)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_weights(cls, family, params, weights=None, ids=(), exchangeable=True):
        """Build from unnormalized linear (or uniform, if omitted) prior weights."""
        params = np.asarray(params, dtype=np.float64)
        m = params.shape[0]
        if weights is None:
            log_w = np.zeros(m)
        else:
            w = np.asarray(weights, dtype=np.float64)
            if np.any(w < 0.0) or not np.all(np.isfinite(w)):
                raise DomainError("prior weights must be finite and nonnegative")
            with np.errstate(divide="ignore"):
                log_w = np.log(w)
        return cls(family, params, numerics.normalize_log(log_w), ids, exchangeable)

    @classmethod
    def from_log_weights(cls, family, params, log_weights, ids=(), exchangeable=True):
        return cls(family, params, numerics.normalize_log(log_weights), ids, exchangeable)

    def __len__(self):
        return self.params.shape[0]

    @property
    def models(self) -> tuple:
        return tuple(
            Model(mid, self.family.record(row), float(lp))
            for mid, row, lp in zip(self.ids, self.params, self.log_prior)
        )

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_prior)

    def with_log_prior(self, log_prior) -> "ModelSpace":
        return ModelSpace(self.family, self.params, log_prior, self.ids, self.exchangeable)


def batch_log_likelihood(space: ModelSpace, observed: Sequence) -> np.ndarray:
    """Per-model log-likelihood of a whole batch (product over data)."""
    return space.family.batch_log_likelihood(space.params, list(observed))


def _log_posterior(space, observed):
    observed = list(observed)
    if not observed:
        return space.log_prior, np.zeros(len(space))
    ll = batch_log_likelihood(space, observed)
    with np.errstate(invalid="ignore"):
        joint = np.where(space.log_prior == -np.inf, -np.inf, space.log_prior + ll)
    evidence = numerics.log_sum_exp(joint)
    if evidence == -math.inf:
        raise ImpossibleDataError("observed data have zero probability under every model")
    return joint - evidence, ll


def posterior(space: ModelSpace, observed: Sequence) -> ModelSpace:
    """Reweight the models by Bayes' rule given an observed batch."""
    log_post, _ = _log_posterior(space, observed)
    if log_post is space.log_prior:
        return space
    return space.with_log_prior(log_post)


def log_evidence(space: ModelSpace, observed: Sequence) -> float:
    """Log prior-predictive probability (or density) of the observed batch."""
    ll = batch_log_likelihood(space, observed)
    return numerics.log_sum_exp(space.log_prior + ll)


def _mixture(space, log_w, outcomes):
    ll = space.family.outcome_log_likelihood(space.params, list(outcomes))
    return kernels.weighted_logsumexp(ll, log_w)


def prior_predictive(space: ModelSpace, outcomes: Sequence) -> PredictiveDistribution:
    outcomes = tuple(outcomes)
    return PredictiveDistribution(outcomes, _mixture(space, space.log_prior, outcomes), PRIOR_PREDICTIVE)


def posterior_predictive(space: ModelSpace, observed: Sequence, outcomes: Sequence,
                         method: str = "posterior") -> PredictiveDistribution:
    """Average every model's prediction under its posterior weight.

    ``method="posterior"`` forms the posterior first and then mixes.
    ``method="joint"`` divides the joint probability of old and new data by
    the probability of the old data, never materializing the posterior.  The
    two agree to rounding.
    """
    if not space.exchangeable:
        raise DomainError("posterior prediction requires an exchangeable model space")
    outcomes = tuple(outcomes)
    observed = list(observed)
    if method == "posterior":
        log_post, _ = _log_posterior(space, observed)
        log_probs = _mixture(space, log_post, outcomes)
    elif method == "joint":
        ll_old = batch_log_likelihood(space, observed)
        with np.errstate(invalid="ignore"):
            log_w = np.where(space.log_prior == -np.inf, -np.inf, space.log_prior + ll_old)
        denom = numerics.log_sum_exp(log_w)
        if denom == -math.inf:
            raise ImpossibleDataError("observed data have zero probability under every model")
        log_probs = _mixture(space, log_w, outcomes) - denom
    else:
        raise DomainError(f"unknown method {method!r}")
    return PredictiveDistribution(outcomes, log_probs, POSTERIOR_PREDICTIVE, {"method": method})


def map_model(space: ModelSpace, observed: Sequence = ()) -> dict:
    """Index and id of the most probable model; ties go to the earliest listed."""
    log_post, _ = _log_posterior(space, observed)
    best = int(np.argmax(log_post))
    tied = np.flatnonzero(log_post == log_post[best])
    return {
        "index": best,
        "model_id": space.ids[best],
        "posterior": float(math.exp(log_post[best])),
        "tie": bool(tied.size > 1),
        "tied_ids": [space.ids[i] for i in tied],
    }


def abductive_predictive(space: ModelSpace, observed: Sequence, outcomes: Sequence) -> PredictiveDistribution:
    """Predict with the single most probable model, discarding the rest."""
    if not space.exchangeable:
        raise DomainError("posterior prediction requires an exchangeable model space")
    outcomes = tuple(outcomes)
    best = map_model(space, observed)
    row = space.params[best["index"]: best["index"] + 1]
    log_probs = space.family.outcome_log_likelihood(row, list(outcomes))[0]
    return PredictiveDistribution(outcomes, log_probs, ABDUCTIVE, best)


def predictive_moments(space: ModelSpace, observed: Sequence = ()) -> MomentPair:
    """Predictive mean and variance from per-model moments.

    The variance is the posterior mean of the models' variances plus the
    posterior variance of their means.
    """
    log_post, _ = _log_posterior(space, observed)
    w = np.exp(log_post)
    means = space.family.means(space.params)
    variances = space.family.variances(space.params)
    mean = float(w @ means)
    within = float(w @ variances)
    between = float(w @ (means - mean) ** 2)
    return MomentPair(mean=mean, variance=within + between,
                      within_model_variance=within, between_model_variance=between)


def predictive_raw_moments(space: ModelSpace, observed: Sequence = ()) -> np.ndarray:
    """E[x^k] for k = 1..4 under the predictive mixture."""
    log_post, _ = _log_posterior(space, observed)
    return np.exp(log_post) @ space.family.raw_moments(space.params)


def predictive_excess_kurtosis(space: ModelSpace, observed: Sequence = ()) -> float:
    m1, m2, m3, m4 = predictive_raw_moments(space, observed)
    var = m2 - m1 ** 2
    if not var > 0.0:
        raise DomainError("predictive variance is zero; kurtosis undefined")
    central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 ** 2 * m2 - 3.0 * m1 ** 4
    return float(central4 / var ** 2 - 3.0)


# --- space builders ------------------------------------------------------------


def _axis(name, bounds, size):
    lo, hi = float(bounds[0]), float(bounds[1])
    size = int(size)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"{name} range must be finite")
    if size == 1 and lo == hi:
        return np.array([lo])
    if size < 2 or not lo < hi:
        raise DomainError(f"{name} needs lo < hi and at least 2 grid points, or a single point with lo == hi")
    return np.linspace(lo, hi, size)


_NORMAL_PRIORS = {
    "uniform": lambda m, v: np.zeros_like(m),
    # scale-invariant in the variance
    "inverse-variance": lambda m, v: -np.log(v),
}


def _prior_log_weights(rule, m, v):
    if callable(rule):
        return np.asarray(rule(m, v), dtype=np.float64)
    try:
        return _NORMAL_PRIORS[rule](m, v)
    except KeyError:
        raise DomainError(f"unknown prior rule {rule!r}; expected one of {sorted(_NORMAL_PRIORS)}") from None


def normal_grid_space(mean_range, variance_range, grid_sizes, prior="uniform") -> ModelSpace:
    """Product grid over ``(mean, variance)`` of a normal process.

    ``prior`` is ``"uniform"``, ``"inverse-variance"`` or a callable mapping
    the flattened mean and variance arrays to log weights.
    """
    means = _axis("mean", mean_range, grid_sizes[0])
    variances = _axis("variance", variance_range, grid_sizes[1])
    if variances[0] <= 0.0:
        raise DomainError("variance range must be strictly positive")
    mm, vv = (a.ravel() for a in np.meshgrid(means, variances, indexing="ij"))
    params = np.column_stack([mm, vv])
    return ModelSpace.from_log_weights(NormalFamily(), params, _prior_log_weights(prior, mm, vv))


def outlier_mixture_grid_space(mean_range, variance_range, grid_sizes, outlier_probs,
                               support, prior="uniform") -> ModelSpace:
    """Grid over ``(mean, variance, outlier_prob)`` for the normal-plus-flat model.

    ``outlier_probs`` is a list of candidate outlier probabilities, weighted
    uniformly among themselves.
    """
    means = _axis("mean", mean_range, grid_sizes[0])
    variances = _axis("variance", variance_range, grid_sizes[1])
    if variances[0] <= 0.0:
        raise DomainError("variance range must be strictly positive")
    qs = np.asarray(list(outlier_probs), dtype=np.float64)
    if qs.size == 0:
        raise DomainError("need at least one outlier probability")
    mm, vv, qq = (a.ravel() for a in np.meshgrid(means, variances, qs, indexing="ij"))
    params = np.column_stack([mm, vv, qq])
    return ModelSpace.from_log_weights(OutlierMixtureFamily(support), params, _prior_log_weights(prior, mm, vv))


def binomial_grid_space(size: int = 10_000, prior: PriorSample | str = "uniform", trials: int = 1) -> ModelSpace:
    """Midpoint grid of defect rates on (0, 1).

    ``prior`` may be ``"uniform"``, ``"haldane"`` (weights ``1/(p(1-p))``) or
    a :class:`PriorSample`, in which case the weights follow its beta
    posterior density and no further conditioning is needed.
    """
    size = int(size)
    if size < 1:
        raise DomainError("grid size must be >= 1")
    p = (np.arange(size, dtype=np.float64) + 0.5) / size
    if isinstance(prior, PriorSample):
        log_w = beta_posterior_log_density(p, prior)
    elif prior == "uniform":
        log_w = np.zeros(size)
    elif prior == "haldane":
        log_w = -(np.log(p) + np.log1p(-p))
    else:
        raise DomainError(f"unknown binomial grid prior {prior!r}")
    return ModelSpace.from_log_weights(BinomialFamily(trials), p[:, None], np.atleast_1d(log_w))


def tabulated_space(outcomes, table, priors=None, values=None) -> ModelSpace:
    """Space of explicit pmfs.

    ``table`` maps model id to a sequence of probabilities aligned with
    ``outcomes``; ``priors`` maps model id to an unnormalized weight.
    """
    ids = tuple(table)
    params = np.array([list(table[i]) for i in ids], dtype=np.float64)
    weights = None if priors is None else [priors[i] for i in ids]
    return ModelSpace.from_weights(TabulatedFamily(outcomes, values), params, weights, ids)
