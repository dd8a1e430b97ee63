"""Time the numba and numpy variants of each hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both variants are imported directly from ``phasegeom._accel``, so the
``PHASEGEOM_DISABLE_NUMBA`` flag does not matter here.  Each numba kernel is
called once before timing to exclude compilation.
"""

import argparse
import math
import timeit

import numpy as np

from phasegeom import _accel


def cases(rng):
    pts = rng.uniform(-1, 1, size=(1 << 18, 3))
    normals = rng.standard_normal((24, 3))
    normals = np.vstack([normals, -normals])
    offsets = np.ones(len(normals))
    yield "count_inside 262144x3, 48 facets", _accel.count_inside_numba, _accel.count_inside_numpy, (pts, normals, offsets, 0.0)

    N = 1024
    x = (np.arange(N) - N // 2) * math.sqrt(math.pi / N)
    psi = np.exp(-0.5 * x**2 + 0.3j * x).astype(np.complex128)
    rows = np.arange(N)
    yield f"autocorrelation {N}x{N}", _accel.autocorrelation_numba, _accel.autocorrelation_numpy, (psi, rows)

    x2 = (np.arange(2048) - 1024) * 0.02
    psi2 = np.exp(-0.5 * x2**2).astype(np.complex128)
    yield "scaled_dft 2048 -> 2048", _accel.scaled_dft_numba, _accel.scaled_dft_numpy, (psi2, x2, x2, 1.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>8s}  agree")
    for name, fast, slow, kargs in cases(rng):
        a = fast(*kargs)  # compile
        b = slow(*kargs)
        agree = np.allclose(a, b, rtol=1e-10, atol=1e-12)
        t_fast = min(timeit.repeat(lambda: fast(*kargs), number=1, repeat=args.repeat)) * 1e3
        t_slow = min(timeit.repeat(lambda: slow(*kargs), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {t_fast:12.2f} {t_slow:12.2f} {t_slow / t_fast:8.2f}  {agree}")


if __name__ == "__main__":
    main()
