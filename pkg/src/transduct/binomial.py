"""Closed forms for a binomial process whose defect rate is known only from a prior sample.

A prior sample of ``r0`` defects in ``n0`` items, combined with the
non-informative prior ``p^-1 (1-p)^-1``, gives a Beta(r0, n0 - r0) posterior
for the defect rate.  Averaging the binomial likelihood over that posterior
gives the beta-binomial predictive; plugging in ``p = r0 / n0`` instead gives
the ordinary binomial.
"""

import math
from dataclasses import dataclass

import numpy as np

from transduct import kernels, numerics
from transduct.distributions import POSTERIOR_PREDICTIVE, ABDUCTIVE, MomentPair, PredictiveDistribution
from transduct.errors import BoundaryPriorError, DomainError, UndefinedOverconfidenceError


def _as_count(name, v, minimum=0):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) and not (isinstance(v, float) and v.is_integer()):
        raise DomainError(f"{name} must be an integer count, got {v!r}")
    v = int(v)
    if v < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {v}")
    return v


@dataclass(frozen=True)
class PriorSample:
    """Previous evidence: ``r0`` defects observed among ``n0`` items.

    With ``pseudo_count = 0`` (the default) the boundary cases ``r0 == 0`` and
    ``r0 == n0`` are rejected because the resulting posterior is improper.
    A positive ``pseudo_count`` adds that many phantom defects and phantom
    good items, which makes the boundaries usable.
    """

    r0: int
    n0: int
    pseudo_count: float = 0.0

    def __post_init__(self):
        r0 = _as_count("r0", self.r0)
        n0 = _as_count("n0", self.n0, minimum=1)
        pc = float(self.pseudo_count)
        if not (pc >= 0.0 and math.isfinite(pc)):
            raise DomainError(f"pseudo_count must be finite and >= 0, got {self.pseudo_count!r}")
        if r0 > n0:
            raise DomainError(f"r0 = {r0} exceeds n0 = {n0}")
        if pc == 0.0 and (r0 == 0 or r0 == n0):
            raise BoundaryPriorError(
                f"r0 = {r0}, n0 = {n0} gives an improper posterior; "
                "use 0 < r0 < n0 or set a positive pseudo_count")
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "pseudo_count", pc)

    @property
    def alpha(self) -> float:
        return self.r0 + self.pseudo_count

    @property
    def beta(self) -> float:
        return self.n0 - self.r0 + self.pseudo_count

    @property
    def ratio(self) -> float:
        """Posterior mean of the defect rate; ``r0 / n0`` without pseudo-counts."""
        if self.pseudo_count == 0.0:
            return self.r0 / self.n0
        return self.alpha / (self.alpha + self.beta)

    def updated(self, defects: int, trials: int) -> "PriorSample":
        return PriorSample(self.r0 + defects, self.n0 + trials, self.pseudo_count)


@dataclass(frozen=True)
class BinomialParams:
    n: int
    p: float

    def __post_init__(self):
        n = _as_count("n", self.n, minimum=1)
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class TailComparison:
    transductive_tail: float
    abductive_tail: float

    @property
    def additional_rejected_pct(self) -> float:
        """Percent by which the plug-in understates the averaged tail."""
        if self.abductive_tail == 0.0:
            raise UndefinedOverconfidenceError(
                "plug-in tail probability is zero; relative excess is undefined")
        return 100.0 * (self.transductive_tail - self.abductive_tail) / self.abductive_tail


def _check_outcome(r, n):
    r = _as_count("r", r)
    if r > n:
        raise DomainError(f"r = {r} outside [0, {n}]")
    return r


# --- known defect rate ---------------------------------------------------------


def binomial_log_pmf(r: int, params: BinomialParams) -> float:
    r = _check_outcome(r, params.n)
    n, p = params.n, params.p
    return numerics.ln_choose(n, r) + r * math.log(p) + (n - r) * math.log1p(-p)


def binomial_log_pmf_row(params: BinomialParams) -> np.ndarray:
    """Log pmf for every ``r`` in ``0..n``."""
    n = params.n
    r = np.arange(n + 1, dtype=np.float64)
    return kernels.binomial_loglik(np.array([params.p]), n, r, numerics.ln_choose_row(n))[0]


def binomial_moments(params: BinomialParams) -> MomentPair:
    """Mean and variance of the observed proportion ``r / n``."""
    p = params.p
    var = p * (1.0 - p) / params.n
    return MomentPair(mean=p, variance=var, within_model_variance=var, between_model_variance=0.0)


# --- defect rate learned from a prior sample -----------------------------------


def beta_posterior_log_density(p, prior: PriorSample):
    """Log density of Beta(alpha, beta) at ``p``; ``p`` may be an array."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("beta density requires 0 < p < 1")
    a, b = prior.alpha, prior.beta
    log_norm = numerics.ln_gamma(a + b) - (numerics.ln_gamma(a) + numerics.ln_gamma(b))
    out = log_norm + (a - 1.0) * np.log(arr) + (b - 1.0) * np.log1p(-arr)
    return float(out) if out.ndim == 0 else out


def beta_binomial_log_pmf(r: int, n: int, prior: PriorSample) -> float:
    n = _as_count("n", n)
    r = _check_outcome(r, n)
    a, b = prior.alpha, prior.beta
    return (numerics.ln_choose(n, r)
            + numerics.ln_gamma_ratio(a, r)
            + numerics.ln_gamma_ratio(b, n - r)
            - numerics.ln_gamma_ratio(a + b, n))


def beta_binomial_log_pmf_row(n: int, prior: PriorSample) -> np.ndarray:
    n = _as_count("n", n)
    return kernels.beta_binomial_logpmf(n, prior.alpha, prior.beta, numerics.ln_choose_row(n))


def beta_binomial_predictive(n: int, prior: PriorSample) -> PredictiveDistribution:
    return PredictiveDistribution(
        outcomes=tuple(range(n + 1)),
        log_probs=beta_binomial_log_pmf_row(n, prior),
        kind=POSTERIOR_PREDICTIVE,
        info={"method": "closed-form"},
    )


def plug_in_predictive(n: int, prior: PriorSample) -> PredictiveDistribution:
    """Binomial prediction with the defect rate fixed at the prior sample's ratio."""
    params = BinomialParams(n, prior.ratio)
    return PredictiveDistribution(
        outcomes=tuple(range(params.n + 1)),
        log_probs=binomial_log_pmf_row(params),
        kind=ABDUCTIVE,
        info={"p": prior.ratio},
    )


def beta_binomial_moments(n: int, prior: PriorSample) -> MomentPair:
    """Mean and variance of the proportion ``r / n`` under the beta-binomial.

    The total is the closed form ``(1/n + 1/N) (N/(N+1)) m (1-m)`` with
    ``N = alpha + beta`` and ``m`` the posterior mean.  It splits into the
    posterior mean of ``p(1-p)/n`` and the posterior variance of ``p``.
    """
    n = _as_count("n", n, minimum=1)
    a, b = prior.alpha, prior.beta
    big_n = a + b
    m = a / big_n
    spread = m * (1.0 - m)
    total = (1.0 / n + 1.0 / big_n) * (big_n / (big_n + 1.0)) * spread
    between = spread / (big_n + 1.0)
    within = spread * big_n / (big_n + 1.0) / n
    return MomentPair(mean=m, variance=total, within_model_variance=within, between_model_variance=between)


def posterior_variance_of_rate(prior: PriorSample) -> float:
    """Variance of ``p`` under the posterior; the floor the predictive variance approaches."""
    a, b = prior.alpha, prior.beta
    m = a / (a + b)
    return m * (1.0 - m) / (a + b + 1.0)


def sequential_predict(n: int, prior: PriorSample) -> PredictiveDistribution:
    """Build the ``n``-sample predictive by chaining one-step predictions.

    Each step predicts one item with the binomial at the current ratio and then
    folds that item into the prior sample.
    """
    n = _as_count("n", n, minimum=1)
    return PredictiveDistribution(
        outcomes=tuple(range(n + 1)),
        log_probs=kernels.sequential_logpmf(n, prior.alpha, prior.beta),
        kind=POSTERIOR_PREDICTIVE,
        info={"method": "sequential"},
    )


def tail_and_overconfidence(n: int, threshold: int, prior: PriorSample) -> TailComparison:
    """``P(r > threshold)`` under the averaged and the plug-in predictions."""
    n = _as_count("n", n, minimum=1)
    threshold = _as_count("threshold", threshold)
    if threshold >= n:
        raise DomainError(f"threshold must be < n, got threshold={threshold}, n={n}")
    averaged = beta_binomial_log_pmf_row(n, prior)
    plug_in = binomial_log_pmf_row(BinomialParams(n, prior.ratio))
    return TailComparison(
        transductive_tail=numerics.stable_tail_sum(lambda r: averaged[r], threshold + 1, n),
        abductive_tail=numerics.stable_tail_sum(lambda r: plug_in[r], threshold + 1, n),
    )
