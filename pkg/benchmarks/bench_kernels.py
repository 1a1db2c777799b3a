#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Times the four batched primitives on both backends and, via subprocesses,
the end-to-end classification throughput with each backend selected at
import time.  Usage:

    python benchmarks/bench_kernels.py [--n 200000] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from slocc3 import _pykernels

try:
    from slocc3 import _ckernels
except ImportError:
    _ckernels = None


def bench(fn, *args, repeat=5):
    times = timeit.repeat(lambda: fn(*args), number=1, repeat=repeat)
    return min(times)


def kernel_table(n, repeat):
    rng = np.random.default_rng(0)
    mats = rng.standard_normal((n, 3, 3)) + 1j * rng.standard_normal((n, 3, 3))
    cubics = rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
    cases = [
        ("batch_det3", (mats,)),
        ("batch_singvals3", (mats,)),
        ("batch_eigvals3", (mats,)),
        ("batch_cubic_roots", (cubics,)),
    ]
    print(f"\nkernel timings, batch size {n} (best of {repeat}):", flush=True)
    header = f"{'kernel':<20}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, args in cases:
        t_py = bench(getattr(_pykernels, name), *args, repeat=repeat)
        if _ckernels is not None:
            t_c = bench(getattr(_ckernels, name), *args, repeat=repeat)
            print(f"{name:<20}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
                  f"{t_py / t_c:>9.2f}x", flush=True)
        else:
            print(f"{name:<20}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}",
                  flush=True)


def small_batch_table(repeat):
    """The classifier's inner loop issues many small batches, where the
    per-call dispatch overhead dominates; time that regime too."""
    rng = np.random.default_rng(1)
    mats = rng.standard_normal((64, 3, 3)) + 1j * rng.standard_normal((64, 3, 3))
    cubics = rng.standard_normal((64, 4)) + 1j * rng.standard_normal((64, 4))
    calls = 2000
    cases = [
        ("batch_det3", mats),
        ("batch_singvals3", mats),
        ("batch_eigvals3", mats),
        ("batch_cubic_roots", cubics),
    ]
    print(f"\nsmall-batch timings, {calls} calls of batch size 64 "
          f"(best of {repeat}):", flush=True)
    header = f"{'kernel':<20}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, arg in cases:
        def loop(fn=getattr(_pykernels, name)):
            for _ in range(calls):
                fn(arg)
        t_py = min(timeit.repeat(loop, number=1, repeat=repeat))
        if _ckernels is not None:
            def loop_c(fn=getattr(_ckernels, name)):
                for _ in range(calls):
                    fn(arg)
            t_c = min(timeit.repeat(loop_c, number=1, repeat=repeat))
            print(f"{name:<20}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
                  f"{t_py / t_c:>9.2f}x", flush=True)
        else:
            print(f"{name:<20}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}",
                  flush=True)


_E2E_SNIPPET = """
import time
import slocc3
from slocc3.classifier import classify_tripartite, decision_table
from slocc3.harness import apply_ilo_tripartite, random_ilo
from slocc3.states import canonical_state, catalog_ids

decision_table()
states = []
for cid in catalog_ids(parties=3)[::4]:
    base = canonical_state(cid)
    for seed in range(4):
        states.append(apply_ilo_tripartite(base, random_ilo(seed)).normalized())
t0 = time.perf_counter()
for s in states:
    classify_tripartite(s)
dt = time.perf_counter() - t0
print(f"{slocc3.kernel_backend()}: {len(states) / dt:.1f} classifications/s "
      f"({dt / len(states) * 1e3:.2f} ms each)")
"""


def end_to_end():
    print("\nend-to-end classification throughput:", flush=True)
    for pure in ("", "1"):
        env = dict(os.environ)
        if pure:
            env["SLOCC3_PURE"] = pure
        else:
            env.pop("SLOCC3_PURE", None)
        subprocess.run([sys.executable, "-c", _E2E_SNIPPET], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200_000,
                        help="kernel batch size")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-e2e", action="store_true")
    args = parser.parse_args()
    if _ckernels is None:
        print("note: compiled backend unavailable, timing the fallback only")
    kernel_table(args.n, args.repeat)
    small_batch_table(args.repeat)
    if not args.skip_e2e:
        end_to_end()


if __name__ == "__main__":
    main()
