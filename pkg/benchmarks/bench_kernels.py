"""Compare the numba kernels with their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3] [--json]

Both implementations are called directly, so one process times both
regardless of GOFGAMMA_NUMBA.  Results are also checked for agreement.
"""
import argparse
import json
import time

import numpy as np

from gofgamma import _core, kernels
from gofgamma._accel import USE_NUMBA

TOL, CAP = 1e-14, 600


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile or cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    z = rng.exponential(30.0, size=400_000)
    x = rng.standard_gamma(2.3, size=(2000, 107))
    y = x / x.mean(axis=1, keepdims=True)
    return [
        ("kernel_j  nu=1.3, 4e5 args",
         lambda: _core.kernel_j_many(1.3, z, TOL, CAP)[0],
         lambda: kernels.kernel_j_np(1.3, z, TOL, CAP)[0]),
        ("kernel_m  alpha=2.3, 4e5 args",
         lambda: _core.kernel_m_log_many(2.3, z, TOL, CAP)[0],
         lambda: kernels.kernel_m_log_np(2.3, z, TOL, CAP)[0]),
        ("T^2 batch 2000 x 107, alpha=2.3",
         lambda: _core.vstat_batch(y, 2.3, TOL, CAP)[0],
         lambda: kernels.vstat_batch_np(y, 2.3, TOL, CAP)[0]),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    if not USE_NUMBA:
        raise SystemExit("numba is disabled (GOFGAMMA_NUMBA=0); nothing to compare")

    rows = []
    for name, fast, slow in cases(np.random.default_rng(0)):
        a, b = fast(), slow()
        err = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        tn, tp = best_of(fast, args.repeat), best_of(slow, args.repeat)
        rows.append({"case": name, "numba_s": tn, "numpy_s": tp, "speedup": tp / tn,
                     "max_rel_diff": err})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'case':34s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for r in rows:
        print(f"{r['case']:34s} {r['numba_s']:10.4f} {r['numpy_s']:10.4f} "
              f"{r['speedup']:8.1f} {r['max_rel_diff']:13.1e}")


if __name__ == "__main__":
    main()
