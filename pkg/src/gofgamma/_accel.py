"""Optional numba acceleration.

Setting ``GOFGAMMA_NUMBA=0`` (or running without numba installed) makes every
decorated kernel a plain Python function and routes the array kernels to
their vectorised numpy counterparts.
"""
import os

_FLAG = os.environ.get("GOFGAMMA_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA: bool = _numba is not None and _FLAG not in ("0", "false", "no", "off")

if USE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # workqueue ships with numba; avoids noisy TBB version probing
    _numba.config.THREADING_LAYER = "workqueue"


def jit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    opts = {"cache": True, **kwargs}

    def wrap(f):
        if USE_NUMBA:
            return _numba.njit(**opts)(f)
        return f

    if func is None:
        return wrap
    return wrap(func)


if USE_NUMBA:
    prange = _numba.prange
else:
    prange = range


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
