"""Backend selection for the hot kernels.

Set ``SYSSHOCK_DISABLE_NUMBA=1`` to force the pure-numpy path.  The flag is
read once at import time.
"""
import os

_DISABLED = os.environ.get("SYSSHOCK_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit
    from numba.extending import register_jitable as _register_jitable

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = _register_jitable = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def jitable(f):
    """Plain Python function that numba kernels may also call."""
    return _register_jitable(f) if HAVE_NUMBA else f


BACKEND = "numba" if HAVE_NUMBA else "numpy"
