"""Timing comparison of the likelihood kernel backends.

Run as ``python -m maxstable.bench``.  Times the compiled and the NumPy
reference implementation of the bivariate log-density kernel on identical
inputs, asserts agreement to 1e-12, and prints a small table.  Exits 1 if
the compiled backend is not built (nothing to compare).
"""

import argparse
import sys
import time

import numpy as np

from ._kernels import _ref
from .angular import weights_to_pickands2
from .priors import weights_sample
from .simulate import SeededRng, sample_simple_maxstable


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run(rows: int, degree: int, repeat: int, seed: int) -> int:
    try:
        from ._kernels import _fast
    except ImportError:
        print("compiled backend not built; only the reference kernel is available")
        return 1

    from .angular import complete_vertex_masses

    rng = SeededRng(seed)
    phi = weights_sample(degree, 2, rng.generator())
    model = complete_vertex_masses(phi, degree, 2)
    beta = np.asarray(weights_to_pickands2(model).beta, dtype=float)
    data = sample_simple_maxstable(model, rng.split(1), n=rows)

    ref_vals = _ref.simple_logpdf2(beta, data)
    fast_vals = _fast.simple_logpdf2(beta, data)
    gap = float(np.max(np.abs(ref_vals - fast_vals)))
    assert gap < 1e-12, f"backend disagreement {gap:.3e}"

    t_ref = _time(lambda: _ref.simple_logpdf2(beta, data), repeat)
    t_fast = _time(lambda: _fast.simple_logpdf2(beta, data), repeat)

    print(f"rows={rows} degree={degree} repeat={repeat} (best of)")
    print(f"{'backend':<12}{'seconds':>12}{'rows/sec':>14}")
    for name, t in (("reference", t_ref), ("compiled", t_fast)):
        print(f"{name:<12}{t:>12.6f}{rows / t:>14.0f}")
    print(f"speedup x{t_ref / t_fast:.2f}, max |diff| {gap:.2e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=200000)
    parser.add_argument("--degree", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    return run(args.rows, args.degree, args.repeat, args.seed)


if __name__ == "__main__":
    sys.exit(main())
