"""Backend selection for the hot streaming kernels.

The package ships every inner loop twice: a plain Python/numpy version and a
numba-compiled one.  The compiled path is the default whenever numba imports;
setting the environment variable ``AGGFC_DISABLE_NUMBA`` to ``1``/``true``/
``yes`` forces the plain path (useful for debugging and for the backend
benchmark in :mod:`aggfc.bench`).  The flag is read once at import time.
"""

import os

__all__ = ["NUMBA_ENABLED", "accelerate", "backend_name"]


def _numba_wanted() -> bool:
    flag = os.environ.get("AGGFC_DISABLE_NUMBA", "").strip().lower()
    return flag not in {"1", "true", "yes"}


NUMBA_ENABLED = False
_njit = None
if _numba_wanted():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _njit = None


def accelerate(func):
    """Return a jitted copy of ``func`` when numba is active, else ``func``."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "python"
