"""Likelihood families for finite model spaces.

A family turns a parameter matrix (one row per model) and a datum into a
vector of log-likelihoods, one per model.  Families also expose each model's
mean and variance for the moment decomposition, and raw moments up to the
fourth where they have closed forms.

All families here are exchangeable: data are conditionally independent given
the model, so a batch likelihood is the product of per-datum likelihoods.
"""

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

from transduct import kernels, numerics
from transduct.errors import DomainError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NormalParams:
    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.variance > 0.0 and math.isfinite(self.variance)):
            raise DomainError(f"normal needs finite mean and variance > 0, got {self}")


@dataclass(frozen=True)
class MixtureParams:
    """A normal component plus a flat outlier density on ``outlier_support``."""

    normal: NormalParams
    outlier_prob: float
    outlier_support: tuple

    def __post_init__(self):
        lo, hi = self.outlier_support
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise DomainError(f"outlier support must satisfy lo < hi, got {self.outlier_support}")
        if not 0.0 <= self.outlier_prob < 1.0:
            raise DomainError(f"outlier_prob must lie in [0, 1), got {self.outlier_prob}")
        object.__setattr__(self, "outlier_support", (float(lo), float(hi)))


@dataclass(frozen=True)
class BinomialRate:
    p: float


@dataclass(frozen=True)
class TabulatedPmf:
    probs: tuple


class Family:
    name = "abstract"
    exchangeable = True
    n_params = 1

    def log_likelihood(self, params, datum):
        raise NotImplementedError

    def outcome_log_likelihood(self, params, outcomes):
        """``(models, outcomes)`` matrix of single-datum log-likelihoods."""
        return np.column_stack([self.log_likelihood(params, o) for o in outcomes])

    def batch_log_likelihood(self, params, data):
        total = np.zeros(params.shape[0])
        for datum in data:
            total = total + self.log_likelihood(params, datum)
        return total

    def means(self, params):
        raise DomainError(f"family {self.name!r} has no per-model mean")

    def variances(self, params):
        raise DomainError(f"family {self.name!r} has no per-model variance")

    def raw_moments(self, params):
        """``(models, 4)`` array of E[x^k | model] for k = 1..4."""
        raise DomainError(f"family {self.name!r} has no closed-form raw moments")

    def record(self, row):
        return tuple(row)

    def check_params(self, params):
        if params.ndim != 2 or params.shape[1] != self.n_params:
            raise DomainError(f"{self.name} expects a (models, {self.n_params}) parameter array")


class BinomialFamily(Family):
    """Defect rate ``p`` per model.

    A datum is either ``(r, n)`` or a bare count ``r`` meaning ``r`` out of
    ``trials``.  Moments describe the proportion ``r / trials``.
    """

    name = "binomial-p-grid"

    def __init__(self, trials=1):
        self.trials = int(trials)
        if self.trials < 1:
            raise DomainError("trials must be >= 1")

    def _split(self, datum):
        if isinstance(datum, (tuple, list)):
            r, n = datum
        else:
            r, n = datum, self.trials
        return int(r), int(n)

    def log_likelihood(self, params, datum):
        r, n = self._split(datum)
        if not 0 <= r <= n:
            raise DomainError(f"binomial datum r={r} outside [0, {n}]")
        coef = np.array([numerics.ln_choose(n, r)])
        return kernels.binomial_loglik(params[:, 0], n, np.array([float(r)]), coef)[:, 0]

    def outcome_log_likelihood(self, params, outcomes):
        split = [self._split(o) for o in outcomes]
        sizes = {n for _, n in split}
        if len(sizes) != 1:
            return super().outcome_log_likelihood(params, outcomes)
        (n,) = sizes
        r = np.array([r for r, _ in split], dtype=np.float64)
        if np.any((r < 0) | (r > n)):
            raise DomainError("binomial outcome outside [0, n]")
        coef = numerics.ln_choose_row(n)[r.astype(np.int64)]
        return kernels.binomial_loglik(params[:, 0], n, r, coef)

    def means(self, params):
        return params[:, 0].copy()

    def variances(self, params):
        p = params[:, 0]
        return p * (1.0 - p) / self.trials

    def record(self, row):
        return BinomialRate(float(row[0]))

    def check_params(self, params):
        super().check_params(params)
        if np.any(~((params[:, 0] > 0.0) & (params[:, 0] < 1.0))):
            raise DomainError("binomial rates must lie in (0, 1)")


class NormalFamily(Family):
    """Columns ``(mean, variance)``."""

    name = "normal-grid"
    n_params = 2

    def log_likelihood(self, params, datum):
        m, v = params[:, 0], params[:, 1]
        return -LOG_SQRT_2PI - 0.5 * np.log(v) - 0.5 * (float(datum) - m) ** 2 / v

    def means(self, params):
        return params[:, 0].copy()

    def variances(self, params):
        return params[:, 1].copy()

    def raw_moments(self, params):
        m, v = params[:, 0], params[:, 1]
        return np.column_stack([m, m * m + v, m ** 3 + 3.0 * m * v, m ** 4 + 6.0 * m * m * v + 3.0 * v * v])

    def record(self, row):
        return NormalParams(float(row[0]), float(row[1]))

    def check_params(self, params):
        super().check_params(params)
        if np.any(~(params[:, 1] > 0.0)):
            raise DomainError("normal variances must be > 0")


def mixture_outlier_log_likelihood(datum: float, params: MixtureParams) -> float:
    """Log density of ``(1-q) N(mean, var) + q Flat(lo, hi)`` at ``datum``."""
    row = np.array([[params.normal.mean, params.normal.variance, params.outlier_prob]])
    return float(OutlierMixtureFamily(params.outlier_support).log_likelihood(row, datum)[0])


class OutlierMixtureFamily(Family):
    """Columns ``(mean, variance, outlier_prob)``; the flat support is shared."""

    name = "normal-outlier-mixture-grid"
    n_params = 3

    def __init__(self, support):
        lo, hi = float(support[0]), float(support[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise DomainError(f"outlier support must satisfy lo < hi, got {support}")
        self.support = (lo, hi)

    def log_likelihood(self, params, datum):
        x = float(datum)
        lo, hi = self.support
        m, v, q = params[:, 0], params[:, 1], params[:, 2]
        log_normal = -LOG_SQRT_2PI - 0.5 * np.log(v) - 0.5 * (x - m) ** 2 / v
        with np.errstate(divide="ignore"):
            log_keep = np.log1p(-q)
            log_q = np.log(q)
        if not lo <= x <= hi:
            return log_keep + log_normal
        log_flat = log_q - math.log(hi - lo)
        return np.logaddexp(log_keep + log_normal, log_flat)

    def means(self, params):
        return self.raw_moments(params)[:, 0]

    def variances(self, params):
        m, v, q = params[:, 0], params[:, 1], params[:, 2]
        lo, hi = self.support
        centre = 0.5 * (lo + hi)
        mean = (1.0 - q) * m + q * centre
        return (1.0 - q) * (v + (m - mean) ** 2) + q * ((hi - lo) ** 2 / 12.0 + (centre - mean) ** 2)

    def raw_moments(self, params):
        q = params[:, 2]
        lo, hi = self.support
        flat = np.array([(hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo)) for k in range(1, 5)])
        normal = NormalFamily().raw_moments(params[:, :2])
        return (1.0 - q)[:, None] * normal + q[:, None] * flat[None, :]

    def record(self, row):
        return MixtureParams(NormalParams(float(row[0]), float(row[1])), float(row[2]), self.support)

    def check_params(self, params):
        super().check_params(params)
        if np.any(~(params[:, 1] > 0.0)):
            raise DomainError("mixture variances must be > 0")
        if np.any(~((params[:, 2] >= 0.0) & (params[:, 2] < 1.0))):
            raise DomainError("outlier probabilities must lie in [0, 1)")


class TabulatedFamily(Family):
    """Each model is an explicit pmf over a fixed, finite outcome list.

    ``values`` attaches a number to each outcome for moment computations; it
    defaults to the outcomes themselves when they are all real numbers.
    """

    name = "tabulated-discrete"

    def __init__(self, outcomes, values=None):
        self.outcomes = tuple(outcomes)
        if len(set(self.outcomes)) != len(self.outcomes):
            raise DomainError("tabulated outcomes must be distinct")
        self.n_params = len(self.outcomes)
        self._index = {o: i for i, o in enumerate(self.outcomes)}
        if values is None and all(isinstance(o, Real) and not isinstance(o, bool) for o in self.outcomes):
            values = self.outcomes
        self.values = None if values is None else np.asarray(values, dtype=np.float64)

    def index(self, datum):
        try:
            return self._index[datum]
        except KeyError:
            raise DomainError(f"{datum!r} is not in the tabulated outcome space") from None

    def log_likelihood(self, params, datum):
        with np.errstate(divide="ignore"):
            return np.log(params[:, self.index(datum)])

    def outcome_log_likelihood(self, params, outcomes):
        idx = [self.index(o) for o in outcomes]
        with np.errstate(divide="ignore"):
            return np.log(params[:, idx])

    def _require_values(self):
        if self.values is None:
            raise DomainError("outcomes carry no numeric values; moments are undefined")
        return self.values

    def raw_moments(self, params):
        vals = self._require_values()
        return np.column_stack([params @ vals ** k for k in range(1, 5)])

    def means(self, params):
        return params @ self._require_values()

    def variances(self, params):
        vals = self._require_values()
        mean = params @ vals
        # centred form; E[x^2] - E[x]^2 cancels badly for offset values
        return (params * (vals[None, :] - mean[:, None]) ** 2).sum(axis=1)

    def record(self, row):
        return TabulatedPmf(tuple(float(v) for v in row))

    def check_params(self, params):
        super().check_params(params)
        if np.any(params < 0.0):
            raise DomainError("tabulated probabilities must be nonnegative")
        if np.any(np.abs(params.sum(axis=1) - 1.0) > 1e-9):
            raise DomainError("each tabulated pmf must sum to 1")
