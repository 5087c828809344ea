"""Numba acceleration switch for the hot numeric kernels.

Every jitted kernel keeps its pure-Python/numpy twin reachable through
``.py_func`` so tests and benchmarks can run both paths side by side.
Set the environment variable ``COGMAC_NO_NUMBA=1`` to force the fallback
path for the whole package (useful where numba is unavailable or when
debugging a kernel).
"""

import os

_DISABLED = os.environ.get("COGMAC_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

if not _DISABLED:
    try:
        from numba import njit as _njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA


def jit_kernel(func):
    """Compile ``func`` with numba when enabled, else return it unchanged.

    The fallback keeps the same call signature; kernels are written against
    plain numpy arrays and scalars so both paths compute identical results.
    """
    if USING_NUMBA:
        return _njit(cache=True)(func)
    func.py_func = func
    return func
