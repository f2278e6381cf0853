import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transduct.errors import DomainError
from transduct.numerics import (
    ln_choose,
    ln_choose_row,
    ln_gamma,
    ln_gamma_ratio,
    log_sum_exp,
    stable_tail_sum,
    sum_exp,
)


def log_factorial(k):
    f = math.factorial(k)
    shift = max(f.bit_length() - 60, 0)
    return math.log(f >> shift) + shift * math.log(2.0)


def test_ln_gamma_known_values(backend):
    assert ln_gamma(1) == 0.0
    assert ln_gamma(2) == 0.0
    assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
    assert ln_gamma(0.5) == pytest.approx(0.5723649429, abs=1e-10)


def test_ln_gamma_171_is_log_170_factorial():
    assert abs(ln_gamma(171) - log_factorial(170)) <= 1e-12 * log_factorial(170)


def test_ln_gamma_matches_factorials_up_to_170(backend):
    ks = np.arange(2, 171)
    got = ln_gamma(ks + 1.0)
    want = np.array([log_factorial(int(k)) for k in ks])
    assert np.all(np.abs(got - want) <= 1e-12 * np.abs(want))
    assert ln_gamma(2.0) == 0.0  # k = 1: ln(1!) = 0 exactly


@pytest.mark.parametrize("k", [1000, 12345, 100_000, 200_000])
def test_ln_gamma_large_factorials(k):
    assert abs(ln_gamma(k + 1) - log_factorial(k)) <= 1e-12 * log_factorial(k)


def test_ln_gamma_against_mpmath_across_range(backend):
    rng = np.random.default_rng(7)
    x = np.concatenate([
        rng.uniform(1e-6, 3.0, 400),
        1.0 + rng.normal(0, 1e-4, 50),
        2.0 + rng.normal(0, 1e-4, 50),
        np.exp(rng.uniform(np.log(3.0), np.log(1e7), 400)),
        [1e7],
    ])
    got = ln_gamma(x)
    mpmath.mp.dps = 40
    want = np.array([float(mpmath.loggamma(mpmath.mpf(float(v)))) for v in x])
    rel = np.abs(got - want) / np.abs(want)
    assert rel.max() <= 1e-12


def test_ln_gamma_recurrence_random(backend):
    rng = np.random.default_rng(99)
    x = rng.uniform(0.0, 1e6, 1000)
    x = x[x > 0]
    lhs = ln_gamma(x + 1.0)
    rhs = np.log(x) + ln_gamma(x)
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * np.abs(lhs))


def test_ln_gamma_scalar_and_array_paths_agree():
    xs = [0.3, 1.5, 7.25, 19.0, 1234.5]
    np.testing.assert_allclose(ln_gamma(np.array(xs)), [ln_gamma(v) for v in xs], rtol=1e-14)


@pytest.mark.parametrize("bad", [0, -1.0, -0.5, float("nan")])
def test_ln_gamma_domain(bad):
    with pytest.raises(DomainError):
        ln_gamma(bad)
    with pytest.raises(DomainError):
        ln_gamma(np.array([1.0, bad]))


def test_ln_gamma_ratio_against_mpmath():
    mpmath.mp.dps = 40
    for x in [0.5, 3.0, 9.99, 10.0, 94.0, 6000.0, 94000.0, 1e6]:
        for h in [0, 1, 2, 11, 100]:
            want = float(mpmath.loggamma(x + h) - mpmath.loggamma(x))
            assert ln_gamma_ratio(x, h) == pytest.approx(want, rel=1e-14, abs=1e-15)


def test_ln_gamma_ratio_domain():
    with pytest.raises(DomainError):
        ln_gamma_ratio(0.0, 1.0)
    with pytest.raises(DomainError):
        ln_gamma_ratio(1.0, -1.0)


# --- ln_choose -------------------------------------------------------------------


def test_ln_choose_zero():
    for n in [0, 1, 7, 100, 10 ** 6]:
        assert ln_choose(n, 0) == 0.0


def test_ln_choose_100_6():
    exact = 100 * 99 * 98 * 97 * 96 * 95 // 720
    assert exact == 1_192_052_400
    assert ln_choose(100, 6) == pytest.approx(math.log(exact), rel=1e-14)
    assert ln_choose(100, 6) == pytest.approx(20.899, abs=5e-4)


def test_ln_choose_5_2_by_enumeration():
    count = sum(1 for _ in itertools.combinations(range(5), 2))
    assert ln_choose(5, 2) == pytest.approx(math.log(count), rel=1e-15)


@given(st.integers(0, 5000).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_ln_choose_exactly_symmetric(nk):
    n, k = nk
    assert ln_choose(n, k) == ln_choose(n, n - k)


def test_pascal_identity_linear_space():
    for n in range(1, 61):
        for k in range(1, n):
            lhs = math.exp(ln_choose(n, k))
            rhs = math.exp(ln_choose(n - 1, k - 1)) + math.exp(ln_choose(n - 1, k))
            assert abs(lhs - rhs) <= 1e-11 * lhs


def test_ln_choose_row_matches_scalar(backend):
    row = ln_choose_row(300)
    np.testing.assert_allclose(row, [ln_choose(300, k) for k in range(301)], rtol=1e-14, atol=1e-13)


@pytest.mark.parametrize("n, k", [(3, 4), (-1, 0), (5, -1), (2.5, 1)])
def test_ln_choose_domain(n, k):
    with pytest.raises(DomainError):
        ln_choose(n, k)


# --- log_sum_exp -------------------------------------------------------------------


def test_log_sum_exp_examples(backend):
    assert log_sum_exp([math.log(0.3)]) == pytest.approx(math.log(0.3), rel=1e-15)
    assert log_sum_exp([math.log(0.5), math.log(0.5)]) == pytest.approx(0.0, abs=1e-16)
    assert log_sum_exp([-1000.0] * 3) == pytest.approx(-1000.0 + math.log(3.0), rel=1e-15)


def test_log_sum_exp_neg_inf_is_identity(backend):
    terms = [-3.0, -1.5, 2.25]
    assert log_sum_exp(terms + [-math.inf]) == log_sum_exp(terms)
    assert log_sum_exp([-math.inf, -math.inf]) == -math.inf


def test_log_sum_exp_errors():
    with pytest.raises(DomainError):
        log_sum_exp([])
    with pytest.raises(DomainError):
        log_sum_exp([0.0, float("nan")])


@settings(max_examples=200)
@given(st.lists(st.floats(-700, 700), min_size=1, max_size=40), st.randoms(use_true_random=False))
def test_log_sum_exp_permutation_stable(terms, rnd):
    shuffled = list(terms)
    rnd.shuffle(shuffled)
    a, b = log_sum_exp(terms), log_sum_exp(shuffled)
    assert abs(a - b) <= 1e-13 * max(1.0, abs(a))
    assert a >= max(terms)


# --- tail sums ---------------------------------------------------------------------


def _binomial_log_pmf(n, p):
    return lambda r: ln_choose(n, r) + r * math.log(p) + (n - r) * math.log1p(-p)


def test_tail_over_full_support_is_one(backend):
    assert stable_tail_sum(_binomial_log_pmf(100, 0.06), 0, 100) == pytest.approx(1.0, abs=1e-10)
    assert stable_tail_sum(_binomial_log_pmf(7, 0.5), 0, 7) == pytest.approx(1.0, abs=1e-10)


def test_tail_binomial_box_rejection():
    tail = stable_tail_sum(_binomial_log_pmf(100, 0.06), 11, 100)
    p = Fraction(3, 50)
    exact = sum(math.comb(100, r) * p ** r * (1 - p) ** (100 - r) for r in range(11, 101))
    assert tail == pytest.approx(float(exact), rel=1e-13)
    # printed as 3.760 %
    assert abs(100 * tail - 3.760) <= 0.001


def test_tail_empty_range_rejected():
    with pytest.raises(DomainError):
        stable_tail_sum(lambda r: 0.0, 5, 4)


def test_sum_exp_clamps_only_near_one():
    assert sum_exp(np.log([0.5, 0.5 + 5e-13])) == 1.0
    assert sum_exp(np.log([0.5, 0.5 + 1e-9])) > 1.0
