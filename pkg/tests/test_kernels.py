import os
import subprocess
import sys

import numpy as np
import pytest

from weightlab import _accel, _kernels, _kernels_numpy
from weightlab.funcspace import PiecewisePower, StepFunction

P = PiecewisePower


def _inputs(rng):
    yield StepFunction.random(rng, 40)
    yield P.from_pieces([(-2, 0, 1, -0.5), (0, 1, 2, -0.9), (1, 3, 1, 0.5)])
    yield P.monomial(-0.3)
    yield P.from_pieces([(-5, -1, 1, -2.0), (-1, 1, 0.5, 0), (1, 5, 1, 1.5)])


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree(rng):
    xs = rng.uniform(-8, 8, 400)
    lo = rng.uniform(-6, 2, 400)
    z = np.sort(rng.uniform(-4, 4, 60))
    for f in _inputs(rng):
        out = {}
        for name in ("numba", "numpy"):
            prev = _kernels.set_backend(name)
            try:
                out[name] = (
                    _kernels.maximal_values(*f.arrays, xs),
                    _kernels.interval_integrals(*f.arrays, lo, lo + 2.5),
                    _kernels.pair_integrals(*f.arrays, z),
                )
            finally:
                _kernels.set_backend(prev)
        for a, b in zip(out["numba"], out["numpy"]):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-300)


def test_bruteforce_backends_agree(rng, each_backend):
    f = StepFunction.random(rng, 30)
    xs = rng.uniform(-12, 12, 50)
    got = _kernels.step_bruteforce(f.edges, f.values, xs)
    ref = _kernels_numpy.step_bruteforce(f.edges, f.values, xs)
    np.testing.assert_allclose(got, ref, rtol=1e-12)


def test_set_backend_round_trip():
    prev = _kernels.set_backend("numpy")
    assert _kernels.backend() == "numpy"
    _kernels.set_backend(prev)
    assert _kernels.backend() == prev
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("false", "numpy"), ("1", None)])
def test_env_flag(flag, expected):
    env = dict(os.environ, WEIGHTLAB_NUMBA=flag)
    code = "from weightlab import backend; print(backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    want = expected or ("numba" if _accel.HAVE_NUMBA else "numpy")
    assert out.stdout.strip() == want


def test_preserves_shape():
    f = P.indicator(0, 1)
    xs = np.linspace(-2, 3, 12).reshape(3, 4)
    assert _kernels.maximal_values(*f.arrays, xs).shape == (3, 4)
