"""Backend dispatch for the hot kernels.

The numba backend is used when numba imports and ``WEIGHTLAB_NUMBA`` is not
set to a false value; otherwise the numpy implementations run.
"""

from __future__ import annotations

import numpy as np

from . import _accel, _kernels_numpy

_NAMES = (
    "interval_integrals",
    "maximal_values",
    "step_bruteforce",
    "pair_integrals",
)

if _accel.HAVE_NUMBA:
    from . import _kernels_numba
else:  # pragma: no cover
    _kernels_numba = None

_state = {"backend": "numba" if _accel.USE_NUMBA else "numpy"}


def backend() -> str:
    return _state["backend"]


def set_backend(name: str) -> str:
    """Switch backend; returns the previous one."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and _kernels_numba is None:
        raise RuntimeError("numba is not installed")
    prev = _state["backend"]
    _state["backend"] = name
    return prev


def _impl():
    return _kernels_numba if _state["backend"] == "numba" else _kernels_numpy


def _f(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def interval_integrals(bp, c, a, lo, hi) -> np.ndarray:
    lo, hi = np.broadcast_arrays(_f(lo), _f(hi))
    shape = lo.shape
    out = _impl().interval_integrals(_f(bp), _f(c), _f(a), _f(lo.ravel()), _f(hi.ravel()))
    return out.reshape(shape)


def maximal_values(bp, c, a, xs) -> np.ndarray:
    xs = _f(xs)
    shape = xs.shape
    return _impl().maximal_values(_f(bp), _f(c), _f(a), _f(xs.ravel())).reshape(shape)


def step_bruteforce(edges, values, xs) -> np.ndarray:
    xs = _f(np.ravel(xs))
    if np.size(edges) < 2:
        return np.zeros(xs.size)
    return _impl().step_bruteforce(_f(edges), _f(values), xs)


def pair_integrals(bp, c, a, z) -> np.ndarray:
    return _impl().pair_integrals(_f(bp), _f(c), _f(a), _f(z))
