"""Numba dispatch: hot kernels run jitted unless disabled by environment.

Set MHD_HALFSPACE_NUMBA=0 to force the pure-numpy fallback path (used by the
benchmark and by CI boxes without a working numba).
"""
import os

_flag = os.environ.get("MHD_HALFSPACE_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "no", "off")

try:
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _want_numba


def njit(*args, **kwargs):
    """@njit when numba is active, identity decorator otherwise."""
    if USE_NUMBA:
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def wrap(fn):
        return fn

    return wrap
