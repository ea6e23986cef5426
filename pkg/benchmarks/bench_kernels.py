"""Compiled kernels vs numpy fallback.

    python3 benchmarks/bench_kernels.py [--points 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from corrgen import _fallback
from corrgen.scenes import SceneSpec, generate_scene

try:
    from corrgen import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1e3 * min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    spec = SceneSpec("mixed", seed=0, count=40, density=max(1, args.points // 40))
    path = spec.default_path()
    cloud = generate_scene(spec, path)[: args.points]
    proj_args = (cloud, path.xi, path.positions, path.velocities, 30)
    s = np.linspace(-1, 1, 100_000)

    cases = [("project_points", f"{len(cloud)} pts x {len(path)} stations", proj_args),
             ("chebyshev_basis", "degree 25 x 1e5 samples", (25, s))]
    print(f"{'kernel':<17} {'size':<30} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, size, a in cases:
        py = best_of(lambda: getattr(_fallback, name)(*a), args.repeat)
        if _kernels is None:
            print(f"{name:<17} {size:<30} {py:10.1f} {'n/a':>10} {'-':>8}")
            continue
        cy = best_of(lambda: getattr(_kernels, name)(*a), args.repeat)
        same = np.allclose(getattr(_fallback, name)(*a), getattr(_kernels, name)(*a), atol=1e-12)
        print(f"{name:<17} {size:<30} {py:10.1f} {cy:10.1f} {py / cy:7.1f}x{'' if same else '  MISMATCH'}")


if __name__ == "__main__":
    main()
