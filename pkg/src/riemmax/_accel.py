"""Optional numba acceleration.

Set ``RIEMMAX_DISABLE_NUMBA=1`` to force the pure-numpy code path. The flag is
read once, at import time.
"""
import os

_FLAG = os.environ.get("RIEMMAX_DISABLE_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = NUMBA_REQUESTED and HAVE_NUMBA


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it as is."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn
