"""Selection between numba-compiled kernels and the pure-numpy fallback.

The active backend is read from ``TRANSDUCT_BACKEND`` (``numba`` or
``numpy``) unless overridden with :func:`set_backend`.  When numba is not
installed the numpy path is used regardless.  numba itself is imported only
when a kernel first needs it, which keeps small runs free of its import and
cache-loading cost.
"""

import importlib.util
import os

HAVE_NUMBA = importlib.util.find_spec("numba") is not None

BACKENDS = ("numba", "numpy")
ENV_VAR = "TRANSDUCT_BACKEND"

_override = None


def _default():
    name = os.environ.get(ENV_VAR, "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {name!r}")
    return name


def active_backend():
    name = _override if _override is not None else _default()
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def set_backend(name):
    """Force a backend for the rest of the process; ``None`` restores the env default."""
    global _override
    if name is not None and name not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {name!r}")
    _override = name


def use_numba():
    return active_backend() == "numba"


def njit(func):
    """Compile ``func`` in nopython mode with on-disk caching."""
    import numba

    return numba.njit(cache=True)(func)
