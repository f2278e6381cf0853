"""The compiled loops and the numpy fallback must agree."""

import math

import numpy as np
import pytest

from transduct import _backend, kernels, numerics


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(1234)


def test_ln_gamma_backends_agree(rng):
    x = np.concatenate([rng.uniform(1e-3, 3.0, 2000), np.exp(rng.uniform(0, 16, 2000)), [1.0, 2.0, 0.8, 2.2]])
    fast = kernels.numba_impl("ln_gamma")(x)
    slow = kernels.numpy_impl("ln_gamma")(x)
    np.testing.assert_allclose(fast, slow, rtol=1e-13, atol=1e-15)


def test_sum_exp_backends_bit_identical(rng):
    logs = np.log(rng.uniform(size=5000)) - 10.0
    assert kernels.numba_impl("sum_exp")(logs) == kernels.numpy_impl("sum_exp")(logs)


def test_sum_exp_is_compensated():
    # 1 followed by a million terms each below half an ulp of 1
    logs = np.concatenate([[0.0], np.full(10 ** 6, math.log(1e-17))])
    assert kernels.numba_impl("sum_exp")(logs) == pytest.approx(1.0 + 1e-11, rel=1e-15)


def test_weighted_logsumexp_backends_agree(rng):
    ll = np.log(rng.uniform(size=(500, 37)))
    ll[3, :] = -np.inf
    ll[:, 5] = -np.inf
    w = np.log(rng.dirichlet(np.ones(500)))
    w[7] = -np.inf
    fast = kernels.numba_impl("weighted_logsumexp")(ll, w)
    slow = kernels.numpy_impl("weighted_logsumexp")(ll, w)
    assert fast[5] == slow[5] == -np.inf
    np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-13)


def test_binomial_loglik_backends_agree(rng):
    p = rng.uniform(0.001, 0.999, 300)
    r = np.arange(51, dtype=np.float64)
    coef = numerics.ln_choose_row(50)
    np.testing.assert_allclose(kernels.numba_impl("binomial_loglik")(p, 50.0, r, coef),
                               kernels.numpy_impl("binomial_loglik")(p, 50.0, r, coef), rtol=1e-13)


@pytest.mark.parametrize("a, b", [(6.0, 94.0), (0.5, 0.5), (6000.0, 94000.0), (3.2, 41.0)])
def test_beta_binomial_backends_agree(a, b):
    coef = numerics.ln_choose_row(200)
    np.testing.assert_allclose(kernels.numba_impl("beta_binomial_logpmf")(200, a, b, coef),
                               kernels.numpy_impl("beta_binomial_logpmf")(200, a, b, coef), rtol=1e-13)


def test_sequential_backends_agree():
    np.testing.assert_allclose(kernels.numba_impl("sequential_logpmf")(40, 6.0, 94.0),
                               kernels.numpy_impl("sequential_logpmf")(40, 6.0, 94.0), rtol=1e-13)


def test_small_work_stays_on_numpy(monkeypatch):
    calls = []
    monkeypatch.setattr(kernels, "compile_kernels", lambda: calls.append(1))
    _backend.set_backend("numba")
    try:
        kernels.beta_binomial_logpmf(100, 6.0, 94.0, numerics.ln_choose_row(100))
    finally:
        _backend.set_backend(None)
    assert calls == []


def test_env_var_selects_backend(monkeypatch):
    monkeypatch.setenv(_backend.ENV_VAR, "numpy")
    assert _backend.active_backend() == "numpy"
    monkeypatch.setenv(_backend.ENV_VAR, "fortran")
    with pytest.raises(ValueError):
        _backend.active_backend()


def test_override_beats_env(monkeypatch):
    monkeypatch.setenv(_backend.ENV_VAR, "numpy")
    _backend.set_backend("numba")
    try:
        assert _backend.active_backend() == "numba"
    finally:
        _backend.set_backend(None)
