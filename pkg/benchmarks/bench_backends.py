"""Compiled kernels vs the pure-Python fallback on identical inputs.

    python benchmarks/bench_backends.py [--ns 8..12] [--out backends.csv]

Both backends must report the same answers and op counts; only time differs.
"""

import argparse
import csv
import sys
import time

from xor3._backend import HAVE_NATIVE
from xor3.core import generate_msb_instance
from xor3.randomized import solve_randomized
from xor3.xortrie import TraversalStats, solve_quadratic


def _time(fn, repeats):
    best, out = None, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def run(ns, w, W, repeats):
    rows = []
    for n in ns:
        x = generate_msb_instance(n, w, 0)
        per = {}
        for be in ("python", "native"):
            def trie():
                st = TraversalStats()
                return solve_quadratic(x, stats=st, backend=be), st.comparisons
            secs, (res, ops) = _time(trie, repeats)
            per[("trie", be)] = (secs, ops, res)
            secs, (res, st) = _time(
                lambda: solve_randomized(x, 0, "long", W=W, backend=be), repeats)
            per[("rand", be)] = (secs, st.ops, res)
        for algo in ("trie", "rand"):
            py, nat = per[(algo, "python")], per[(algo, "native")]
            if py[1:] != nat[1:]:
                raise SystemExit(f"backends disagree on {algo} n={n}: {py[1:]} vs {nat[1:]}")
            rows.append({"algo": algo, "n": n, "w": w, "W": W if algo == "rand" else "",
                         "python_s": f"{py[0]:.5f}", "native_s": f"{nat[0]:.5f}",
                         "speedup": f"{py[0] / nat[0]:.1f}", "ops": py[1]})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", default="8..12", help="exponent range lo..hi")
    ap.add_argument("--w", type=int, default=64)
    ap.add_argument("--simwidth", type=int, default=256)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    if not HAVE_NATIVE:
        print("xor3._ckernels is not built; nothing to compare", file=sys.stderr)
        return 1
    lo, hi = (int(v) for v in args.ns.split(".."))
    rows = run([1 << k for k in range(lo, hi + 1)], args.w, args.simwidth, args.repeats)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    fh.write("# schema=1\n")
    wr = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    wr.writeheader()
    wr.writerows(rows)
    if args.out:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
