"""Benchmark the compiled likelihood kernels against the NumPy reference.

Times the bivariate log-density kernels on simulated max-stable rows and
reports throughput for both backends plus their agreement.  The compiled
backend is optional; when it is not built only the reference numbers are
shown.

Usage: python3 bench.py [--rows N] [--repeats R] [--degree K]
"""

import argparse
import time

import numpy as np

from maxstable.angular import complete_vertex_masses, weights_to_pickands2
from maxstable.priors import weights_sample
from maxstable.simulate import SeededRng, sample_simple_maxstable
from maxstable._kernels import _ref


def _load_fast():
    try:
        from maxstable._kernels import _fast
    except ImportError:
        return None
    return _fast


def _workload(rows: int, degree: int):
    gen = SeededRng(2718).generator()
    phi = weights_sample(degree, 2, gen)
    model = complete_vertex_masses(phi, degree, 2)
    beta = np.asarray(weights_to_pickands2(model).beta, dtype=float)
    data = sample_simple_maxstable(model, SeededRng(31), n=rows)
    return beta, np.ascontiguousarray(data)


def _time(fn, repeats: int):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--degree", type=int, default=6)
    args = parser.parse_args()

    beta, rows = _workload(args.rows, args.degree)
    fast = _load_fast()
    backends = [("reference", _ref)] + ([("compiled", fast)] if fast else [])

    print(f"rows={args.rows}  degree={args.degree}  repeats={args.repeats}")
    results = {}
    for label, mod in backends:
        for kernel in ("simple_logpdf2", "simple_loglik2"):
            fn = getattr(mod, kernel)
            secs, out = _time(lambda: fn(beta, rows), args.repeats)
            results[(label, kernel)] = (secs, out)
            rate = args.rows / secs
            print(f"{label:9s} {kernel:15s} {secs * 1e3:8.2f} ms  {rate / 1e6:6.2f} Mrow/s")

    if fast is None:
        print("compiled backend not built; reference numbers only")
        return 0

    for kernel in ("simple_logpdf2", "simple_loglik2"):
        ref_secs, ref_out = results[("reference", kernel)]
        fast_secs, fast_out = results[("compiled", kernel)]
        if kernel == "simple_logpdf2":
            agree = float(np.max(np.abs(ref_out - fast_out)))
        else:
            agree = abs(ref_out[0] - fast_out[0])
        print(f"{kernel}: speedup x{ref_secs / fast_secs:.1f}, max |diff| {agree:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
