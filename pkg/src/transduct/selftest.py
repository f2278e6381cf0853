"""Numeric self-checks run by ``transduct selftest``.

Each check compares the library against an independent oracle built from
exact rational arithmetic, brute-force enumeration or the published table,
and yields a one-line verdict.  Random inputs come from fixed seeds so the
output is reproducible.
"""

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from transduct import binomial as bm
from transduct import engine
from transduct.numerics import ln_gamma
from transduct.report import run_cotter_pin

# Published table: (n0, sd %, rejected %, additional %); the last row is the
# known-rate baseline.  Values are compared at +-1 unit in the last digit.
PUBLISHED = (
    (100, "3.342", "9.922", "163.8"),
    (1000, "2.490", "4.525", "20.32"),
    (10000, "2.387", "3.838", "2.061"),
    (100000, "2.376", "3.768", ".2063"),
    (math.inf, "2.375", "3.760", "0"),
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def within_last_digit(value: float, printed: str) -> bool:
    digits = printed.split(".")[1] if "." in printed else ""
    unit = 10.0 ** -len(digits)
    return abs(value - float(printed)) <= unit * (1 + 1e-9)


def exact_beta_binomial(r, n, a, b) -> Fraction:
    """Beta-binomial pmf with integer shape parameters as an exact fraction."""
    num = math.comb(n, r)
    for j in range(r):
        num *= a + j
    for j in range(n - r):
        num *= b + j
    den = 1
    for j in range(n):
        den *= a + b + j
    return Fraction(num, den)


def log_factorial_exact(k: int) -> float:
    """ln(k!) from the exact integer, via its leading bits."""
    f = math.factorial(k)
    shift = max(f.bit_length() - 60, 0)
    return math.log(f >> shift) + shift * math.log(2.0)


def _random_priors(rng, count, max_n0):
    out = []
    for _ in range(count):
        n0 = int(rng.integers(2, max_n0 + 1))
        r0 = int(rng.integers(1, n0))
        out.append(bm.PriorSample(r0, n0))
    return out


def check_published_table():
    start = time.perf_counter()
    rows = run_cotter_pin([100, 1000, 10000, 100000], 0.06, 100, 10)
    elapsed = time.perf_counter() - start
    bad = []
    for row, (n0, sd, rej, add) in zip(rows, PUBLISHED):
        for label, got, want in (("sd", 100 * row.sd, sd), ("rejected", 100 * row.rejected, rej),
                                 ("additional", 100 * row.additional_rejected, add)):
            if not within_last_digit(got, want):
                bad.append(f"n0={n0} {label} {got:.6g} vs {want}")
    if elapsed >= 1.0:
        bad.append("took over 1 s")
    # timings stay out of the report so repeated runs print identical bytes
    return Check("published rejected-box table", not bad,
                 "; ".join(bad) if bad else "all 15 cells within one printed unit, under 1 s")


def check_one_step_identity():
    rng = np.random.default_rng(15)
    worst = 0.0
    for prior in _random_priors(rng, 100, 100_000):
        pmf = bm.beta_binomial_predictive(1, prior).probs
        worst = max(worst, abs(pmf[1] - prior.r0 / prior.n0), abs(pmf[0] - (1 - prior.r0 / prior.n0)))
    return Check("one-step prediction equals plug-in", worst <= 1e-12, f"max abs error {worst:.2e}")


def check_sequential():
    rng = np.random.default_rng(16)
    worst = 0.0
    for prior in _random_priors(rng, 50, 1000):
        n = int(rng.integers(1, 21))
        seq = bm.sequential_predict(n, prior).probs
        closed = bm.beta_binomial_predictive(n, prior).probs
        worst = max(worst, float(np.abs(seq - closed).max()))
    two = bm.sequential_predict(2, bm.PriorSample(6, 100)).prob(1)
    err2 = abs(two - 1128 / 10100)
    return Check("sequential chaining equals closed form", worst <= 1e-10 and err2 <= 1e-12,
                 f"max abs error {worst:.2e}; P(1 of 2) error {err2:.2e}")


def check_moments():
    rng = np.random.default_rng(18)
    worst_mean = worst_var = worst_split = 0.0
    for prior, n in zip(_random_priors(rng, 30, 2000), [1, 2, 7, 100, 500] * 6):
        pmf = [exact_beta_binomial(r, n, prior.r0, prior.n0 - prior.r0) for r in range(n + 1)]
        mean = sum(Fraction(r, n) * p for r, p in enumerate(pmf))
        var = sum((Fraction(r, n) - mean) ** 2 * p for r, p in enumerate(pmf))
        got = bm.beta_binomial_moments(n, prior)
        worst_mean = max(worst_mean, abs(got.mean - float(mean)) / float(mean))
        worst_var = max(worst_var, abs(got.variance - float(var)) / float(var))
        split = got.within_model_variance + got.between_model_variance
        worst_split = max(worst_split, abs(split - got.variance) / got.variance)
    ok = worst_mean <= 1e-10 and worst_var <= 1e-10 and worst_split <= 1e-12
    return Check("closed-form moments vs direct summation", ok,
                 f"mean {worst_mean:.1e}, variance {worst_var:.1e}, split {worst_split:.1e} (relative)")


def check_total_variance():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 8))
        k = int(rng.integers(2, 10))
        values = rng.normal(0.0, 5.0, k)
        table = rng.dirichlet(np.ones(k), m)
        weights = rng.dirichlet(np.ones(m))
        space = engine.tabulated_space(range(k), {i: table[i] for i in range(m)},
                                       {i: weights[i] for i in range(m)}, values)
        mix = [Fraction(float(w)) for w in space.weights]
        pmf = [sum(mix[i] * Fraction(float(table[i, j])) for i in range(m)) for j in range(k)]
        vals = [Fraction(float(v)) for v in values]
        mean = sum(p * v for p, v in zip(pmf, vals)) / sum(pmf)
        var = float(sum(p * (v - mean) ** 2 for p, v in zip(pmf, vals)) / sum(pmf))
        got = engine.predictive_moments(space).variance
        worst = max(worst, abs(got - var) / var)
    return Check("variance decomposition vs brute-force mixture", worst <= 1e-10, f"max relative error {worst:.1e}")


def check_grid():
    prior = bm.PriorSample(6, 100)
    space = engine.binomial_grid_space(10_000, prior, trials=100)
    grid = engine.posterior_predictive(space, [], range(101)).probs
    closed = [float(exact_beta_binomial(r, 100, 6, 94)) for r in range(101)]
    worst = float(np.abs(grid - closed).max())
    tail_err = abs(float(grid[11:].sum()) - 0.09922)
    ok = worst <= 1e-4 and tail_err <= 1e-4
    return Check("p-grid averaging vs closed form", ok, f"max pmf error {worst:.1e}, tail error {tail_err:.1e}")


def check_variance_floor():
    prior = bm.PriorSample(6, 100)
    var = bm.beta_binomial_moments(10 ** 6, prior).variance
    floor = float(Fraction(6 * 94, 100 * 100) / 101)
    ok = floor < var <= 1.01 * floor
    return Check("large-sample variance floor", ok, f"variance / floor = {var / floor:.6f}")


def check_ln_gamma():
    worst = 0.0
    for k in (5, 20, 170, 1000, 100_000):
        ref = log_factorial_exact(k)
        worst = max(worst, abs(ln_gamma(k + 1) - ref) / ref)
    return Check("ln_gamma vs exact factorials", worst <= 1e-12, f"max relative error {worst:.1e}")


def check_normal_family():
    rng = np.random.default_rng(10)
    data = rng.normal(1.0, 1.5, 6).tolist()
    space = engine.normal_grid_space((-3.0, 5.0), (0.2, 9.0), (81, 60))
    post = engine.posterior(space, data)
    w = post.weights
    m, v = post.params[:, 0], post.params[:, 1]
    mom = engine.predictive_moments(space, data)
    e_mean = float(w @ m)
    second = float(w @ (m * m + v))
    err_mean = abs(mom.mean - e_mean)
    err_var = abs(mom.variance - (second - e_mean ** 2)) / mom.variance
    err_split = abs(mom.variance - (float(w @ v) + float(w @ (m - e_mean) ** 2))) / mom.variance
    kurt = engine.predictive_excess_kurtosis(space, data)
    ok = max(err_mean, err_var, err_split) <= 1e-10 and kurt > 0.0
    return Check("normal grid moment identities", ok,
                 f"mean {err_mean:.1e}, variance {err_var:.1e}, split {err_split:.1e}, excess kurtosis {kurt:.4f}")


CHECKS = (
    check_published_table,
    check_one_step_identity,
    check_sequential,
    check_moments,
    check_total_variance,
    check_grid,
    check_variance_floor,
    check_ln_gamma,
    check_normal_family,
)


def run_all():
    return [check() for check in CHECKS]
