"""Hot numeric kernels.

Every kernel has two implementations: a scalar-loop version meant for numba
(``_nb_*``) and a vectorized numpy version (``_np_*``).  The ``_nb_*``
functions are plain Python until :func:`compile_kernels` swaps them for
compiled dispatchers on first use.  The public wrappers at the bottom send a
call to numba only when the numba backend is active and the call does at
least ``NUMBA_MIN_WORK`` element operations; below that, dispatch overhead
outweighs the loop speed-up.  Inputs are validated by the callers; kernels
assume clean float64 arrays.
"""

import math

import numpy as np

from transduct import _backend

NUMBA_MIN_WORK = 4096

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_2k / (2k (2k - 1)) for k = 1..9, highest order first for Horner.
_STIRLING = (
    43867.0 / 244188.0,
    -3617.0 / 122400.0,
    1.0 / 156.0,
    -691.0 / 360360.0,
    1.0 / 1188.0,
    -1.0 / 1680.0,
    1.0 / 1260.0,
    -1.0 / 360.0,
    1.0 / 12.0,
)

# (-1)^k zeta(k) / k for k = 26..2, the Taylor series of ln Gamma(1 + z)
# about z = 0 with the linear term -euler_gamma * z handled separately.
_ROOT_SERIES = (
    0.03846153903467518,
    -0.04000000119214014,
    0.04166666915034121,
    -0.04347826605304026,
    0.04545455629320467,
    -0.047619070330142226,
    0.05000004769810169,
    -0.05263167937961666,
    0.055555767627403614,
    -0.058823978658684585,
    0.06250095514121304,
    -0.06666870588242046,
    0.07143294629536133,
    -0.0769325164113522,
    0.083353840546109,
    -0.09095401714582904,
    0.1000994575127818,
    -0.11133426586956469,
    0.12550966952474304,
    -0.1440498967688461,
    0.1695571769974082,
    -0.20738555102867398,
    0.27058080842778454,
    -0.40068563438653143,
    0.8224670334241132,
)
_EULER_GAMMA = 0.5772156649015329
# Within this distance of the roots at 1 and 2 the series replaces shifting,
# which would cancel catastrophically there.
_ROOT_RADIUS = 0.2

# Below this the argument is shifted upward before the asymptotic series.
_SHIFT_TO = 10.0


# ---------------------------------------------------------------------------
# scalar primitives (compiled and uncompiled)


def _stirling_series(x):
    z = 1.0 / (x * x)
    acc = 0.0
    for c in _STIRLING:
        acc = acc * z + c
    return acc / x


def _near_root_series(z):
    acc = 0.0
    for c in _ROOT_SERIES:
        acc = acc * z + c
    return z * (acc * z - _EULER_GAMMA)


def _ln_gamma_scalar(x):
    if not x > 0.0:
        raise ValueError("ln_gamma requires x > 0")
    if x == 1.0 or x == 2.0:
        return 0.0
    if x == math.inf:
        return math.inf
    if abs(x - 1.0) < _ROOT_RADIUS:
        return _near_root_series(x - 1.0)
    if abs(x - 2.0) < _ROOT_RADIUS:
        return math.log1p(x - 2.0) + _near_root_series(x - 2.0)
    shift = 0.0
    if x < _SHIFT_TO:
        prod = 1.0
        while x < _SHIFT_TO:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    return (x - 0.5) * math.log(x) - x + HALF_LOG_2PI + _stirling_series(x) - shift


def _ln_gamma_ratio_scalar(x, h):
    # ln Gamma(x + h) - ln Gamma(x); the log1p form avoids cancelling two
    # large log-gammas when x is large and h small.
    if h == 0.0:
        return 0.0
    if x < _SHIFT_TO:
        return _ln_gamma_scalar(x + h) - _ln_gamma_scalar(x)
    y = x + h
    return ((x - 0.5) * math.log1p(h / x) + h * math.log(y) - h
            + (_stirling_series(y) - _stirling_series(x)))


_nb_stirling_series = _stirling_series
_nb_near_root_series = _near_root_series


def _nb_ln_gamma_scalar(x):
    if not x > 0.0:
        raise ValueError("ln_gamma requires x > 0")
    if x == 1.0 or x == 2.0:
        return 0.0
    if x == math.inf:
        return math.inf
    if abs(x - 1.0) < _ROOT_RADIUS:
        return _nb_near_root_series(x - 1.0)
    if abs(x - 2.0) < _ROOT_RADIUS:
        return math.log1p(x - 2.0) + _nb_near_root_series(x - 2.0)
    shift = 0.0
    if x < _SHIFT_TO:
        prod = 1.0
        while x < _SHIFT_TO:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    return (x - 0.5) * math.log(x) - x + HALF_LOG_2PI + _nb_stirling_series(x) - shift


def _nb_ln_gamma_ratio_scalar(x, h):
    if h == 0.0:
        return 0.0
    if x < _SHIFT_TO:
        return _nb_ln_gamma_scalar(x + h) - _nb_ln_gamma_scalar(x)
    y = x + h
    return ((x - 0.5) * math.log1p(h / x) + h * math.log(y) - h
            + (_nb_stirling_series(y) - _nb_stirling_series(x)))


# ---------------------------------------------------------------------------
# ln_gamma over arrays


def _nb_ln_gamma(x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _nb_ln_gamma_scalar(x[i])
    return out


def _np_stirling_series(x):
    z = 1.0 / (x * x)
    acc = np.zeros_like(x)
    for c in _STIRLING:
        acc = acc * z + c
    return acc / x


def _np_near_root_series(z):
    acc = np.zeros_like(z)
    for c in _ROOT_SERIES:
        acc = acc * z + c
    return z * (acc * z - _EULER_GAMMA)


def _np_ln_gamma(x):
    y = x.copy()
    prod = np.ones_like(x)
    for _ in range(int(_SHIFT_TO)):
        small = y < _SHIFT_TO
        if not small.any():
            break
        prod[small] *= y[small]
        y[small] += 1.0
    with np.errstate(invalid="ignore"):
        out = (y - 0.5) * np.log(y) - y + HALF_LOG_2PI + _np_stirling_series(y) - np.log(prod)
    near1 = np.abs(x - 1.0) < _ROOT_RADIUS
    near2 = np.abs(x - 2.0) < _ROOT_RADIUS
    out[near1] = _np_near_root_series(x[near1] - 1.0)
    out[near2] = np.log1p(x[near2] - 2.0) + _np_near_root_series(x[near2] - 2.0)
    out[(x == 1.0) | (x == 2.0)] = 0.0
    out[np.isinf(x)] = np.inf
    return out


# ---------------------------------------------------------------------------
# compensated sum of exp(log_values), ascending index order


def _py_sum_exp(log_values):
    s = 0.0
    c = 0.0
    for v in log_values:
        t = math.exp(v)
        u = s + t
        if abs(s) >= abs(t):
            c += (s - u) + t
        else:
            c += (t - u) + s
        s = u
    return s + c


def _nb_sum_exp(log_values):
    s = 0.0
    c = 0.0
    for i in range(log_values.shape[0]):
        t = math.exp(log_values[i])
        u = s + t
        if abs(s) >= abs(t):
            c += (s - u) + t
        else:
            c += (t - u) + s
        s = u
    return s + c


# ---------------------------------------------------------------------------
# column-wise log-sum-exp of a weighted log-likelihood matrix


def _nb_weighted_logsumexp(log_lik, log_w):
    # row-major sweeps with one running max / sum / compensation per column
    m, k = log_lik.shape
    top = np.full(k, -math.inf)
    for i in range(m):
        for j in range(k):
            v = log_lik[i, j] + log_w[i]
            if v > top[j]:
                top[j] = v
    s = np.zeros(k)
    c = np.zeros(k)
    for i in range(m):
        if log_w[i] == -math.inf:
            continue
        for j in range(k):
            if top[j] == -math.inf:
                continue
            t = math.exp(log_lik[i, j] + log_w[i] - top[j])
            u = s[j] + t
            if abs(s[j]) >= abs(t):
                c[j] += (s[j] - u) + t
            else:
                c[j] += (t - u) + s[j]
            s[j] = u
    out = np.empty(k)
    for j in range(k):
        out[j] = -math.inf if top[j] == -math.inf else top[j] + math.log(s[j] + c[j])
    return out


def _np_weighted_logsumexp(log_lik, log_w):
    terms = log_lik + log_w[:, None]
    top = terms.max(axis=0)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        out = safe + np.log(np.exp(terms - safe).sum(axis=0))
    out[top == -np.inf] = -np.inf
    return out


# ---------------------------------------------------------------------------
# binomial log-likelihood on a p-grid


def _nb_binomial_loglik(p, n, r, log_coef):
    m = p.shape[0]
    k = r.shape[0]
    out = np.empty((m, k))
    for i in range(m):
        lp = math.log(p[i])
        lq = math.log1p(-p[i])
        for j in range(k):
            out[i, j] = log_coef[j] + r[j] * lp + (n - r[j]) * lq
    return out


def _np_binomial_loglik(p, n, r, log_coef):
    return log_coef[None, :] + r[None, :] * np.log(p)[:, None] + (n - r)[None, :] * np.log1p(-p)[:, None]


# ---------------------------------------------------------------------------
# beta-binomial log pmf over r = 0..n


def _nb_beta_binomial_logpmf(n, a, b, log_coef):
    out = np.empty(n + 1)
    norm = _nb_ln_gamma_ratio_scalar(a + b, float(n))
    for r in range(n + 1):
        out[r] = (log_coef[r] + _nb_ln_gamma_ratio_scalar(a, float(r))
                  + _nb_ln_gamma_ratio_scalar(b, float(n - r)) - norm)
    return out


def _np_beta_binomial_logpmf(n, a, b, log_coef):
    r = np.arange(n + 1, dtype=np.float64)
    norm = _ln_gamma_ratio_scalar(a + b, float(n))
    return log_coef + _np_ln_gamma_ratio(a, r) + _np_ln_gamma_ratio(b, n - r) - norm


def _np_ln_gamma_ratio(x, h):
    # x scalar, h array of nonnegative increments
    h = np.asarray(h, dtype=np.float64)
    if x < _SHIFT_TO:
        out = _np_ln_gamma(x + h) - _ln_gamma_scalar(x)
    else:
        y = x + h
        out = ((x - 0.5) * np.log1p(h / x) + h * np.log(y) - h
               + (_np_stirling_series(y) - _stirling_series(x)))
    out[h == 0.0] = 0.0
    return out


# ---------------------------------------------------------------------------
# sequential one-step chaining of the beta-binomial predictive


def _nb_sequential_logpmf(n, a, b):
    cur = np.full(n + 1, -math.inf)
    cur[0] = 0.0
    nxt = np.empty(n + 1)
    for k in range(n):
        lden = math.log(a + b + k)
        for r in range(k + 2):
            stay = -math.inf
            move = -math.inf
            if r <= k:
                stay = cur[r] + math.log(b + k - r) - lden
            if r >= 1:
                move = cur[r - 1] + math.log(a + r - 1) - lden
            if stay == -math.inf:
                nxt[r] = move
            elif move == -math.inf:
                nxt[r] = stay
            else:
                hi = max(stay, move)
                nxt[r] = hi + math.log1p(math.exp(min(stay, move) - hi))
        for r in range(k + 2):
            cur[r] = nxt[r]
    return cur


def _np_sequential_logpmf(n, a, b):
    cur = np.full(n + 1, -np.inf)
    cur[0] = 0.0
    for k in range(n):
        lden = math.log(a + b + k)
        r = np.arange(k + 2, dtype=np.float64)
        stay = np.full(k + 2, -np.inf)
        move = np.full(k + 2, -np.inf)
        stay[:-1] = cur[: k + 1] + np.log(b + k - r[:-1]) - lden
        move[1:] = cur[: k + 1] + np.log(a + r[1:] - 1.0) - lden
        cur[: k + 2] = np.logaddexp(stay, move)
    return cur


# ---------------------------------------------------------------------------
# dispatch

# dependency order: callees before callers
_NB_KERNELS = (
    "_nb_stirling_series",
    "_nb_near_root_series",
    "_nb_ln_gamma_scalar",
    "_nb_ln_gamma_ratio_scalar",
    "_nb_ln_gamma",
    "_nb_sum_exp",
    "_nb_weighted_logsumexp",
    "_nb_binomial_loglik",
    "_nb_beta_binomial_logpmf",
    "_nb_sequential_logpmf",
)
_compiled = False


def compile_kernels():
    """Replace the ``_nb_*`` functions with numba dispatchers (idempotent)."""
    global _compiled
    if _compiled:
        return
    g = globals()
    for name in _NB_KERNELS:
        g[name] = _backend.njit(g[name])
    _compiled = True


def _want_numba(work):
    if work >= NUMBA_MIN_WORK and _backend.use_numba():
        compile_kernels()
        return True
    return False


def ln_gamma_array(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if np.any(~(x > 0.0)):
        raise ValueError("ln_gamma requires x > 0")
    return _nb_ln_gamma(x) if _want_numba(x.size) else _np_ln_gamma(x)


def ln_gamma_scalar(x):
    return _ln_gamma_scalar(x)


def ln_gamma_ratio_scalar(x, h):
    return _ln_gamma_ratio_scalar(x, h)


def sum_exp(log_values):
    log_values = np.ascontiguousarray(log_values, dtype=np.float64)
    if _want_numba(log_values.size):
        return _nb_sum_exp(log_values)
    return _py_sum_exp(log_values.tolist())


def weighted_logsumexp(log_lik, log_w):
    log_lik = np.ascontiguousarray(log_lik, dtype=np.float64)
    log_w = np.ascontiguousarray(log_w, dtype=np.float64)
    if _want_numba(log_lik.size):
        return _nb_weighted_logsumexp(log_lik, log_w)
    return _np_weighted_logsumexp(log_lik, log_w)


def binomial_loglik(p, n, r, log_coef):
    p = np.ascontiguousarray(p, dtype=np.float64)
    r = np.ascontiguousarray(r, dtype=np.float64)
    log_coef = np.ascontiguousarray(log_coef, dtype=np.float64)
    if _want_numba(p.size * r.size):
        return _nb_binomial_loglik(p, float(n), r, log_coef)
    return _np_binomial_loglik(p, float(n), r, log_coef)


def beta_binomial_logpmf(n, a, b, log_coef):
    log_coef = np.ascontiguousarray(log_coef, dtype=np.float64)
    if _want_numba(n + 1):
        return _nb_beta_binomial_logpmf(int(n), float(a), float(b), log_coef)
    return _np_beta_binomial_logpmf(int(n), float(a), float(b), log_coef)


def sequential_logpmf(n, a, b):
    if _want_numba(n * (n + 1) // 2):
        return _nb_sequential_logpmf(int(n), float(a), float(b))
    return _np_sequential_logpmf(int(n), float(a), float(b))


# Uncompiled references for tests and benchmarks that pin one implementation.
def numba_impl(name):
    """Compiled ``_nb_<name>`` kernel, forcing compilation if needed."""
    compile_kernels()
    return globals()[f"_nb_{name}"]


def numpy_impl(name):
    if name == "sum_exp":
        return lambda v: _py_sum_exp(np.asarray(v, dtype=np.float64).tolist())
    return globals()[f"_np_{name}"]
