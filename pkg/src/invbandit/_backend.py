"""Selects the compute backend for the hot simulation kernels.

Kernels are compiled with numba when it is importable, unless the
environment variable ``INVBANDIT_NUMBA`` is set to ``0`` (or ``false``/``off``),
in which case the same functions run as plain Python over numpy scalars.
Both paths produce bit-identical trajectories.
"""
import os

_FLAG = os.environ.get("INVBANDIT_NUMBA", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("0", "false", "off", "no")
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    jit = numba.njit(nogil=True, cache=True)
else:
    def jit(func):
        return func
