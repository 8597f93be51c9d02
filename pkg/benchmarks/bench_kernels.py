"""Time the numba and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from weightlab import _kernels
from weightlab.funcspace import PiecewisePower, StepFunction


def _cases(rng):
    step = StepFunction.random(rng, 64)
    power = PiecewisePower.from_pieces([(-2.0, 0.0, 1.0, -0.5), (0.0, 1.0, 2.0, -0.9), (1.0, 3.0, 1.0, 0.5)])
    xs = rng.uniform(-12.0, 12.0, 20000)
    z = np.sort(rng.uniform(-3.0, 3.0, 600))
    lo = rng.uniform(-3.0, 0.0, 20000)
    return [
        ("maximal_values step64", lambda: _kernels.maximal_values(*step.arrays, xs)),
        ("maximal_values power", lambda: _kernels.maximal_values(*power.arrays, xs)),
        ("interval_integrals", lambda: _kernels.interval_integrals(*power.arrays, lo, lo + 1.5)),
        ("pair_integrals 600", lambda: _kernels.pair_integrals(*power.arrays, z)),
        ("step_bruteforce", lambda: _kernels.step_bruteforce(step.edges, step.values, xs[:500])),
    ]


def _best(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = _cases(np.random.default_rng(1))
    results = {}
    for name in ("numba", "numpy"):
        try:
            prev = _kernels.set_backend(name)
        except RuntimeError:
            print(f"{name}: unavailable")
            continue
        results[name] = {label: _best(fn, args.repeat) for label, fn in cases}
        _kernels.set_backend(prev)
    print(f"{'kernel':26s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}")
    for label, _ in cases:
        nb = results.get("numba", {}).get(label)
        npy = results.get("numpy", {}).get(label)
        speed = f"{npy / nb:9.1f}" if nb and npy else ""
        fmt = lambda t: f"{1e3 * t:12.2f}" if t is not None else f"{'-':>12s}"
        print(f"{label:26s} {fmt(nb)} {fmt(npy)} {speed}")


if __name__ == "__main__":
    main()
