"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats 3]

Prints one line per kernel and backend, then the speedup of the compiled
version.  Without a built extension only the fallback is timed.
"""
import argparse
import statistics
import time

import numpy as np

from pdeapprox import _backend
from pdeapprox.coeffs import build_matrix
from pdeapprox.models import ModelSpec
from pdeapprox.pde_dynamic import assemble_dynamic, dynamic_operator


def timed(fn, repeats):
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases():
    voter = ModelSpec("voter", 0.5, 0.5)
    ab = np.ascontiguousarray(build_matrix(voter.field(1000)).banded())
    y0 = np.zeros(1001)
    y0[199] = 1.0
    yield "dopri54 ODE N=1000 t=100", lambda k: k.dopri54_band(ab, 1, 1, y0, 100.0, 1e-10, 1e-14, 10**8)

    ab5 = dynamic_operator(assemble_dynamic(voter.field(100)), 800)
    z = np.arange(801) / 800
    u0 = np.sin(np.pi * z) ** 2
    yield "dopri54 MOL N=100 M=800 t=1", lambda k: k.dopri54_band(ab5, 2, 2, u0, 1.0, 1e-10, 1e-13, 10**8)

    up = np.r_[np.ones(20), 0.0]
    down = np.r_[0.0, np.ones(20)]
    yield "gillespie N=20 t=2 20000 paths", lambda k: k.gillespie_birth_death(up, down, 5, 2.0, 20000, 1)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    names = _backend.available()
    print(f"backends: {', '.join(names)}")
    for label, run in cases():
        times = {}
        for name in names:
            k = _backend.get(name)
            times[name] = timed(lambda: run(k), args.repeats)
            print(f"{label:34s} {name:7s} {times[name] * 1e3:10.2f} ms")
        if "cython" in times:
            print(f"{label:34s} speedup {times['python'] / times['cython']:9.1f}x")


if __name__ == "__main__":
    main()
