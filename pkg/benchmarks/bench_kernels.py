"""Compiled versus pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Times the breakpoint sweep (n = m = 500, 250,000 pairs), support
enumeration of the quartile table and the Mann-Whitney recursion, checks
that both backends return identical arrays, and prints the speedups.
"""
import argparse
import math
import time

import numpy as np

from quartile_shift import _pykernels
from quartile_shift.hypergeom import _log_binomials, make_design
from quartile_shift.shift_table import TwoSample, _pair_order

try:
    from quartile_shift import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def _parts(out):
    return out if isinstance(out, tuple) else (out,)


def _agree(a, b):
    # integer results must match exactly; probabilities may differ in the last ulp
    if np.issubdtype(a.dtype, np.integer):
        return np.array_equal(a, b)
    return np.allclose(a, b, rtol=1e-13, atol=0)


def cases():
    rng = np.random.default_rng(0)
    data = TwoSample(rng.standard_normal(500), rng.standard_normal(500))
    _, offsets, treated = _pair_order(data)
    q = data.design.q
    yield "sweep n=m=500", lambda k: k.sweep_counts(treated, offsets, 500, 500, q)

    design = make_design(240, 120)
    logc = [_log_binomials(kj) for kj in design.k]
    total = math.log(math.comb(design.N, design.n))
    yield "enumerate N=240", lambda k: k.enumerate_tables(design.k, design.n, logc, total)

    yield "mann-whitney 400x400", lambda k: k.mw_frequencies(400, 400)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the pure-Python kernels are available")
    print(f"{'kernel':24s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, run in cases():
        tp, ref = best_of(lambda: run(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:24s} {tp:10.4f}")
            continue
        tc, out = best_of(lambda: run(_kernels), args.repeat)
        same = all(_agree(a, b) for a, b in zip(_parts(ref), _parts(out)))
        flag = "" if same else "  MISMATCH"
        print(f"{name:24s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}{flag}")


if __name__ == "__main__":
    main()
