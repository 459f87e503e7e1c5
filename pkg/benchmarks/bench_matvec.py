"""Compare the compiled and numpy matvec kernels on TANNNI rings.

Usage::

    python3 benchmarks/bench_matvec.py [--sizes 10 12 14 16 18] [--repeat 5]

Prints one row per chain length with the best-of-``repeat`` time per matvec
and the speedup. Both kernels are checked against each other first.
"""

import argparse
import timeit

import numpy as np

from magicqpt import kernels
from magicqpt.hamiltonian import TannniParams, build_tannni


def bench(n, repeat):
    H = build_tannni(TannniParams(n, j2=0.5, gamma=0.7))
    diag, xs, zs, cs = H._compiled
    cs = np.ascontiguousarray(cs.real)
    v = np.random.default_rng(n).standard_normal(H.dimension)
    out = np.empty_like(v)
    rows = {}
    ref = None
    for name, fn in (("numpy", kernels.python_matvec_real), ("cython", kernels.compiled_matvec_real)):
        if fn is None:
            continue
        fn(diag, xs, zs, cs, v, out)
        if ref is None:
            ref = out.copy()
        elif not np.allclose(out, ref, atol=1e-12):
            raise SystemExit(f"kernels disagree at N={n}")
        number = max(1, int(2**20 // H.dimension))
        t = min(timeit.repeat(lambda: fn(diag, xs, zs, cs, v, out), number=number, repeat=repeat))
        rows[name] = t / number
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 12, 14, 16, 18])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels.compiled_matvec_real is None:
        print("compiled kernel not built; timing the numpy kernel only")
    print(f"{'N':>3} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for n in args.sizes:
        r = bench(n, args.repeat)
        py = r["numpy"] * 1e3
        cy = r.get("cython", float("nan")) * 1e3
        print(f"{n:>3} {py:11.3f} {cy:12.3f} {py / cy:8.1f}")


if __name__ == "__main__":
    main()
