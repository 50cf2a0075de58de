"""Backend selection for the hot kernels.

Numba is used when it imports cleanly, unless ``KIMURA_DISABLE_NUMBA`` is set
to a truthy value, in which case every kernel runs its pure-numpy twin.
"""

import os

DISABLE_ENV = "KIMURA_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None


def _disabled_by_env():
    return os.environ.get(DISABLE_ENV, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(func):
    """Compile ``func`` with numba if available, otherwise return it unchanged.

    The uncompiled function is still callable (slowly), which keeps the numba
    kernels importable for the benchmark even when numba is missing.
    """
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
