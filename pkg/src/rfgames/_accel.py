"""JIT switch for the hot kernels.

Set ``RFGAMES_NUMBA=0`` to run every kernel on its pure-numpy path. The
flag is read once, at import time.
"""
import os
import warnings

_FLAG = os.environ.get("RFGAMES_NUMBA", "1").strip().lower()
_REQUESTED = _FLAG not in ("0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = _REQUESTED and numba is not None

if _REQUESTED and numba is None:  # pragma: no cover
    warnings.warn("numba not importable; falling back to numpy kernels", RuntimeWarning)


def njit(func):
    """Compile ``func`` in nopython mode with caching, or return it untouched."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)
