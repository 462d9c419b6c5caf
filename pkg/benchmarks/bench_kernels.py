"""Time the compiled kernels against the numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from polytv import _fallback
from polytv.gausslaw import _Panels
from polytv.quadpoly import CanonicalForm

try:
    from polytv import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    m8 = rng.standard_normal((8, 8))
    m8 = m8 + m8.T
    m40 = rng.standard_normal((40, 40))
    m40 = m40 + m40.T
    panels = _Panels(CanonicalForm(((1.0, 0.3), (-0.6, 1.0), (0.2, 0.0))), "cdf")
    xs = np.linspace(-10.0, 15.0, 2000)
    filon_args = (xs, panels.shifts, panels.centers, panels.halfwidths, panels.d_re, panels.d_im)
    return [
        ("jacobi_eigh n=8", lambda k: k.jacobi_eigh(m8.copy(), 1e-14, 100)),
        ("jacobi_eigh n=40", lambda k: k.jacobi_eigh(m40.copy(), 1e-14, 100)),
        ("standard_normals 1e6", lambda k: k.standard_normals(7, 1_000_000)),
        (f"filon_legendre_sum 2000 x {panels.centers.size} panels",
         lambda k: k.filon_legendre_sum(*filon_args)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<42}{'compiled [ms]':>15}{'fallback [ms]':>15}{'speedup':>10}")
    for name, call in cases():
        slow = best_of(lambda: call(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:<42}{'-':>15}{slow * 1e3:>15.2f}{'-':>10}")
            continue
        fast = best_of(lambda: call(_kernels), args.repeat)
        print(f"{name:<42}{fast * 1e3:>15.2f}{slow * 1e3:>15.2f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
