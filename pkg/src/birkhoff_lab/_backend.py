"""Selects between numba-compiled kernels and the plain numpy path.

Set ``BIRKHOFF_LAB_DISABLE_NUMBA=1`` before import to run every kernel as
ordinary Python/numpy code. The kernels in :mod:`birkhoff_lab._kernels` are
written so both paths execute the same source.
"""
import os

_flag = os.environ.get("BIRKHOFF_LAB_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLED_BY_ENV
BACKEND = "numba" if USE_NUMBA else "numpy"


def jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
