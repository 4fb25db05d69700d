"""Compare the compiled and numpy kernels on the two hot loops.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from steerlab import _pykernels
from steerlab.criterion import fibonacci_sphere
from steerlab.lhs import sample_sphere

try:
    from steerlab import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--grid-n", type=int, default=200_000)
    parser.add_argument("--samples", type=int, default=1 << 20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    dirs = fibonacci_sphere(args.grid_n)
    a, T = 0.3 * rng.normal(size=3), 0.3 * rng.normal(size=(3, 3))
    lams = sample_sphere(rng, args.samples)
    s = np.array([0.0, 0.6, 0.8])

    cases = [
        (f"criterion_values (n={args.grid_n})", lambda m: m.criterion_values(dirs, a, T)),
        (f"cap_accumulate (n={args.samples})", lambda m: m.cap_accumulate(lams, s, 0.1)),
    ]
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':<34}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, call in cases:
        times = [_time(lambda m=m: call(m), args.repeat) for _, m in backends]
        row = f"{label:<34}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.2f}x"
        print(row)
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
