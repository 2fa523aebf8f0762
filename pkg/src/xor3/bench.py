"""Doubling-n benchmark series with op-count proxies, written as CSV."""

from __future__ import annotations

import csv
import io
import time
from typing import Iterable, List, Optional

from .core import generate_msb_instance
from .randomized import solve_randomized
from .xortrie import TraversalStats, solve_quadratic

SCHEMA = 1
COLUMNS = ["algo", "n", "w", "W", "backend", "seconds", "ops", "node_visits",
           "colliding_triples", "retries", "regime", "found"]


def _timed(fn, repeats: int):
    best = None
    out = None
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def bench_trie(n: int, w: int = 64, seed: int = 0, repeats: int = 3,
               backend: Optional[str] = None) -> dict:
    """Trie solver on a solution-free instance; ops = key comparisons."""
    from ._backend import backend_name
    inst = generate_msb_instance(n, w, seed)

    def run():
        st = TraversalStats()
        res = solve_quadratic(inst, stats=st, backend=backend)
        return res, st

    secs, (res, st) = _timed(run, repeats)
    return {"algo": "trie", "n": n, "w": w, "W": "", "backend": backend_name(backend),
            "seconds": f"{secs:.6f}", "ops": st.comparisons, "node_visits": st.visits,
            "colliding_triples": "", "retries": "", "regime": "", "found": int(res is not None)}


def bench_rand(n: int, w: int = 64, W: int = 512, seed: int = 0, repeats: int = 1,
               regime: str = "auto", backend: Optional[str] = None) -> dict:
    """Randomized solver on the same instance family; ops = simulated-word operations."""
    inst = generate_msb_instance(n, w, seed)
    secs, (res, st) = _timed(
        lambda: solve_randomized(inst, seed=seed, plan_override=regime, W=W, backend=backend),
        repeats)
    return {"algo": "rand", "n": n, "w": w, "W": W, "backend": st.backend,
            "seconds": f"{secs:.6f}", "ops": st.ops, "node_visits": "",
            "colliding_triples": st.colliding_triples_seen, "retries": st.retries,
            "regime": st.regime, "found": int(res is not None)}


def run_series(algos: Iterable[str], ns: Iterable[int], w: int = 64, W: int = 512,
               seed: int = 0, repeats: int = 3, regime: str = "auto",
               backend: Optional[str] = None) -> List[dict]:
    rows = []
    for algo in algos:
        for n in ns:
            if algo == "trie":
                rows.append(bench_trie(n, w, seed, repeats, backend))
            elif algo == "rand":
                rows.append(bench_rand(n, w, W, seed, 1, regime, backend))
            else:
                raise ValueError(f"unknown algo {algo!r}")
    return rows


def to_csv(rows: List[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    wr = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    wr.writeheader()
    for row in rows:
        wr.writerow(row)
    return buf.getvalue()


def read_csv(text: str) -> List[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def time_ratios(rows: List[dict], algo: str = "trie") -> List[float]:
    """Consecutive wall-time ratios of one algorithm's doubling series."""
    series = sorted((int(r["n"]), float(r["seconds"])) for r in rows if r["algo"] == algo)
    return [b[1] / a[1] for a, b in zip(series, series[1:])]
