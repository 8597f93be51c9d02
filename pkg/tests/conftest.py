import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from weightlab import _kernels
from weightlab.funcspace import PiecewisePower, StepFunction

settings.register_profile(
    "weightlab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("weightlab")


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    try:
        prev = _kernels.set_backend(request.param)
    except RuntimeError:
        pytest.skip("numba unavailable")
    yield request.param
    _kernels.set_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def step_weight_02():
    """1 on [0,1], 4 on (1,2]."""
    return PiecewisePower.from_pieces([(0, 1, 1, 0), (1, 2, 4, 0)])


def weight_corpus():
    P = PiecewisePower
    return [
        ("const", P.constant(1.0)),
        ("pow_pos", P.monomial(0.5)),
        ("pow_neg", P.monomial(-0.5)),
        ("pow_third", P.monomial(1.0 / 3.0)),
        ("step", P.from_pieces([(-1e9, 1, 1, 0), (1, 1e9, 4, 0)])),
        ("mixed", P.from_pieces([(-float("inf"), 0, 2.0, 0.25), (0, float("inf"), 1.0, -0.25)])),
    ]


def function_corpus(rng, k=100):
    """Compactly supported piecewise-power test functions."""
    out = []
    for i in range(k):
        kind = i % 4
        if kind == 0:
            out.append(StepFunction.random(rng, int(rng.integers(1, 12))))
        elif kind == 1:
            a = rng.uniform(-0.9, 1.5)
            out.append(PiecewisePower.monomial(a, rng.uniform(0.2, 3), 0.0, rng.uniform(0.5, 4)))
        elif kind == 2:
            a = rng.uniform(-0.9, 0.9)
            lo = -rng.uniform(0.2, 3)
            out.append(
                PiecewisePower.from_pieces(
                    [(lo, 0.0, rng.uniform(0.1, 2), a), (0.0, rng.uniform(0.2, 3), rng.uniform(0.1, 2), -a / 2)]
                )
            )
        else:
            lo = rng.uniform(0.5, 2)
            out.append(PiecewisePower.monomial(rng.uniform(-2, 2), rng.uniform(0.5, 2), lo, lo + rng.uniform(0.1, 5)))
    return out


# acceptance summary: one line per criterion, printed after the run

_ACCEPTANCE = pytest.StashKey[dict]()
N_CRITERIA = 9


@pytest.fixture
def criterion(request):
    sink = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(n: int, ok: bool, detail: str) -> bool:
        sink.setdefault(n, []).append((bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    sink = config.stash.get(_ACCEPTANCE, None)
    if sink is None:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        parts = sink.get(n)
        if not parts:
            terminalreporter.write_line(f"criterion {n}: FAIL  (not evaluated)")
            continue
        ok = all(p[0] for p in parts)
        detail = "; ".join(p[1] for p in parts)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
