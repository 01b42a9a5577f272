"""Benchmark the compiled kernels against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]

Times the three geometry kernels on synthetic workloads sized like the
acceptance suite (100k rays / 10k sight tests over a ~30-segment soup), plus
one end-to-end coverage_map call per backend.
"""

import argparse
import math
import time

import numpy as np

from mirrorcov._kernels import _pykernels

try:
    from mirrorcov._kernels import _ckernels
except ImportError:
    _ckernels = None


def make_workload(seed=0, n_rays=100_000, n_segs=30):
    rng = np.random.default_rng(seed)
    segs = rng.uniform(0, 20, size=(n_segs, 4))
    ang = rng.uniform(0, 2 * math.pi, size=n_rays)
    ox = rng.uniform(5, 15, size=n_rays)
    oy = rng.uniform(5, 15, size=n_rays)
    qx = ox + 30 * np.cos(ang)
    qy = oy + 30 * np.sin(ang)
    poly_ang = np.sort(rng.uniform(0, 2 * math.pi, 12))
    poly_x = 10 + 8 * np.cos(poly_ang)
    poly_y = 10 + 8 * np.sin(poly_ang)
    return {
        "segment_blocked": (ox, oy, qx, qy, segs, 1e-9, 1 - 1e-9),
        "first_hit": (ox, oy, np.cos(ang), np.sin(ang), segs, 1e-12),
        "point_in_polygon": (ox, oy, poly_x, poly_y),
    }


def time_call(fn, args, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeats):
    work = make_workload()
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("c", _ckernels))
    print(f"{'kernel':<20} " + "".join(f"{name:>12} " for name, _ in backends)
          + ("speedup" if _ckernels else ""))
    for kernel, args in work.items():
        times = [time_call(getattr(mod, kernel), args, repeats)
                 for _, mod in backends]
        row = f"{kernel:<20} " + "".join(f"{t * 1e3:>10.2f}ms " for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>6.1f}x"
        print(row)

    # correctness spot check between backends
    if _ckernels is not None:
        for kernel, args in work.items():
            a = getattr(_pykernels, kernel)(*args)
            b = getattr(_ckernels, kernel)(*args)
            if isinstance(a, tuple):
                ok = all(np.array_equal(x, y) for x, y in zip(a, b))
            else:
                ok = np.array_equal(a, b)
            assert ok, f"backend mismatch in {kernel}"
        print("backends agree bit-for-bit on the benchmark workload")


def bench_coverage(repeats):
    import os
    from mirrorcov.coverage import coverage_map
    from mirrorcov.synth import synth_scene

    scene = synth_scene(0)
    print(f"\ncoverage_map(synth_scene, cell=0.05) "
          f"[active backend: {os.environ.get('MIRRORCOV_KERNELS', 'auto')}]")
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        coverage_map(scene, 0.05)
        best = min(best, time.perf_counter() - t0)
    print(f"  {best * 1e3:.1f} ms")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    bench_kernels(args.repeats)
    bench_coverage(args.repeats)
