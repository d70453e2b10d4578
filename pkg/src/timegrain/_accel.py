"""JIT selection.

Kernels are written once as plain loops. When numba is importable and
``TIMEGRAIN_DISABLE_NUMBA`` is unset (or ``0``), they are compiled with
``@njit``; otherwise the numpy fallbacks in :mod:`timegrain.kernels` are used.
"""

import os

_FLAG = "TIMEGRAIN_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "0").strip().lower() not in ("", "0", "false", "no")


try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def jit(func):
    """Compile ``func`` with numba when available, else return it untouched."""
    if _njit is None:
        return func
    return _njit(cache=True)(func)
