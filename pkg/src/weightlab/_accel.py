"""Optional numba acceleration.

The hot kernels in :mod:`weightlab._kernels` exist twice: a numba ``@njit``
version and a vectorised numpy version.  Numba is used when it is importable
unless the environment variable ``WEIGHTLAB_NUMBA`` is set to ``0``
(or ``false``/``off``/``no``).
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def numba_requested():
    flag = os.environ.get("WEIGHTLAB_NUMBA", "1").strip().lower()
    return flag not in {"0", "false", "off", "no"}


USE_NUMBA = HAVE_NUMBA and numba_requested()


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator


if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    njit = _noop_jit
