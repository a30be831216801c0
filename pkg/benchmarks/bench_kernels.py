"""Compare the numba kernels with the pure-numpy fallback.

Kernel timings call both implementations directly in one process.  The
end-to-end x_min scan is run in a subprocess per path, with
CITEDIST_DISABLE_NUMBA toggled, since the flag is read at import time.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 20000]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from citedist import _kernels as K

SCAN_SNIPPET = """
import json, time
from citedist import _kernels
from citedist.distributions import ModelSpec, sample
from citedist.fitting import select_best
x = sample(ModelSpec("LN", 1.0, mu=1.0, sigma=1.0), {n}, seed=5)
select_best(x[:500], x_min="scan")  # warm-up (jit compile / caches)
t0 = time.perf_counter()
sel = select_best(x, x_min="scan")
print(json.dumps({{"numba": _kernels.USE_NUMBA, "seconds": time.perf_counter() - t0,
                  "x_min": sel.x_min, "best": sel.best.value}}))
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(n, repeat):
    rng = np.random.default_rng(0)
    z = np.ascontiguousarray(rng.uniform(1e-3, 50.0, n))
    cdf = np.sort(rng.random(n))
    rows = []
    for s in (-1.3, 0.5, 2.5):
        K.log_uigamma_array_nb(s, z[:10])  # compile
        a = K.log_uigamma_array_nb(s, z)
        b = K._log_uigamma_numpy(s, z)
        rows.append((f"log_uigamma_array s={s}", best_of(lambda: K.log_uigamma_array_nb(s, z), repeat),
                     best_of(lambda: K._log_uigamma_numpy(s, z), repeat), float(np.max(np.abs(a - b)))))
    K.ks_sorted_nb(cdf[:10])
    rows.append(("ks_sorted", best_of(lambda: K.ks_sorted_nb(cdf), repeat),
                 best_of(lambda: K._ks_sorted_numpy(cdf), repeat),
                 abs(K.ks_sorted_nb(cdf) - K._ks_sorted_numpy(cdf))))
    return rows


def bench_scan(n, disable):
    env = dict(os.environ, CITEDIST_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", SCAN_SNIPPET.format(n=n)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="array length / sample size")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-scan", action="store_true")
    args = ap.parse_args(argv)
    if K.log_uigamma_array_nb is None:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'kernel':<28}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}{'max |diff|':>12}")
    for name, tn, tp, diff in bench_kernels(args.n, args.repeat):
        print(f"{name:<28}{tn * 1e3:>10.3f}{tp * 1e3:>10.3f}{tp / tn:>9.1f}{diff:>12.1e}")

    if not args.skip_scan:
        fast, slow = bench_scan(args.n, False), bench_scan(args.n, True)
        print(f"\nselect_best(x_min='scan') on {args.n} LN draws")
        for r in (fast, slow):
            print(f"  numba={r['numba']!s:<5} {r['seconds']:.2f}s  x_min={r['x_min']:.4g}  best={r['best']}")
        print(f"  speedup {slow['seconds'] / fast['seconds']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
