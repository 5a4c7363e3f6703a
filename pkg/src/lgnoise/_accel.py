"""Optional numba acceleration.

Kernels are always written so they run as plain Python/numpy. When numba is
importable they are also jitted, and ``NUMBA_ENABLED`` decides which path the
public dispatchers use. Set ``LGNOISE_DISABLE_NUMBA=1`` to force the numpy path.
"""

import os

ENV_FLAG = "LGNOISE_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAVE_NUMBA = numba is not None


def _flag_set(value):
    return value.strip().lower() in ("1", "true", "yes", "on")


NUMBA_ENABLED = HAVE_NUMBA and not _flag_set(os.environ.get(ENV_FLAG, ""))


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrapper(f):
        return f

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrapper
