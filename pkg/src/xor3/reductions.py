"""3XOR to offline SetDisjointness / SetIntersection.

Both reductions bucket X with h1 into R buckets, settle every triple that
touches an overfull bucket directly, then encode each good bucket through
a pair of p-bit fingerprints (h21, h22) as "shifted" sets over the
universe {0,1}^{2p}.  A pair (x, y) of fingerprints is the integer
``(x << p) | y``.

For c in X and a bucket u, the query pairs the up-shifted bucket
X_u ^ (h21(c), 0) with the down-shifted bucket X_{u ^ h1(c)} ^ (0, h22(c));
any a in X_u with a ^ c in X puts (h21(a ^ c), h22(a)) in both.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import SolutionTriple, XorInstance, derive_seed, is_solution, make_rng
from .hashing import LinearHash, eval_batch, next_pow2, sample_linear_hash


@dataclass
class OfflineSetInstance:
    universe_size: int
    family_a: List[tuple]
    family_b: List[tuple]
    queries: List[tuple]  # (a_idx, b_idx, tag)

    def validate(self) -> None:
        for fam in (self.family_a, self.family_b):
            for s in fam:
                if any(x >= self.universe_size or x < 0 for x in s):
                    raise ValueError("set element outside the universe")
                if any(s[i] >= s[i + 1] for i in range(len(s) - 1)):
                    raise ValueError("sets must be sorted and duplicate-free")
        for ai, bi, _ in self.queries:
            if not (0 <= ai < len(self.family_a) and 0 <= bi < len(self.family_b)):
                raise ValueError("query index out of range")

    def to_json(self) -> str:
        return json.dumps({
            "universe_size": self.universe_size,
            "family_a": [list(s) for s in self.family_a],
            "family_b": [list(s) for s in self.family_b],
            "queries": [[a, b, list(t) if isinstance(t, tuple) else t] for a, b, t in self.queries],
        })

    @classmethod
    def from_json(cls, text: str) -> "OfflineSetInstance":
        d = json.loads(text)
        inst = cls(d["universe_size"], [tuple(s) for s in d["family_a"]],
                   [tuple(s) for s in d["family_b"]],
                   [(a, b, tuple(t) if isinstance(t, list) else t) for a, b, t in d["queries"]])
        inst.validate()
        return inst


# -- naive offline solvers ----------------------------------------------------

def naive_offline_disjointness(inst: OfflineSetInstance) -> set:
    """Indices of queries whose two sets intersect."""
    fa = [frozenset(s) for s in inst.family_a]
    out = set()
    for qi, (ai, bi, _) in enumerate(inst.queries):
        if not fa[ai].isdisjoint(inst.family_b[bi]):
            out.add(qi)
    return out


def naive_offline_intersection(inst: OfflineSetInstance) -> Dict[int, list]:
    """Query index -> sorted common elements (every query gets an entry)."""
    fa = [frozenset(s) for s in inst.family_a]
    out = {}
    for qi, (ai, bi, _) in enumerate(inst.queries):
        sa = fa[ai]
        out[qi] = [x for x in inst.family_b[bi] if x in sa]
    return out


# -- parameters ---------------------------------------------------------------

@dataclass(frozen=True)
class ReductionParams:
    target: str  # "disjointness" | "intersection"
    gamma: float
    delta: Optional[float] = None

    def check(self) -> None:
        if self.target == "disjointness":
            if not 0 < self.gamma < 1:
                raise ValueError("disjointness needs 0 < gamma < 1")
        elif self.target == "intersection":
            if not 0 <= self.gamma < 1:
                raise ValueError("intersection needs 0 <= gamma < 1")
            if self.delta is None or not 0 < self.delta < 1 + self.gamma:
                raise ValueError("intersection needs 0 < delta < 1 + gamma")
        else:
            raise ValueError(f"unknown target {self.target!r}")


def _ceil_log2(x) -> int:
    return next_pow2(x).bit_length() - 1


def bucket_bits(n: int, gamma: float, w: int) -> int:
    return min(_ceil_log2(math.ceil(n ** gamma)), w)


def repetitions(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def fingerprint_bits(params: ReductionParams, n: int, R: int, w: int) -> int:
    if params.target == "disjointness":
        p = math.ceil(math.log2(max(5 * n / R, 2)))
    else:
        target = math.ceil(n ** (1 + params.delta) / R)
        p = math.ceil(_ceil_log2(target) / 2)
    return min(max(p, 1), w)


# -- shared pipeline ------------------------------------------------------------

def _xor_scan(words: Sequence[int], b: int, members, distinct: bool) -> Optional[SolutionTriple]:
    """Merge sorted {a ^ b} against X."""
    shifted = sorted(a ^ b for a in words)
    j, n = 0, len(words)
    for y in shifted:
        while j < n and words[j] < y:
            j += 1
        if j == n:
            break
        if words[j] == y:
            a = y ^ b
            if is_solution(a, b, y, members, distinct):
                return SolutionTriple(a, b, y)
    return None


def _bucketize(instance: XorInstance, r: int, seed: int):
    w = instance.w
    h1 = LinearHash.from_matrix([], w) if r == 0 else sample_linear_hash(w, r, derive_seed(seed, "red-h1"))
    hv = eval_batch(h1, instance.words)
    R, n = 1 << r, instance.n
    buckets: Dict[int, list] = {}
    for i, u in enumerate(hv):
        buckets.setdefault(u, []).append(i)
    bad = sorted(i for ids in buckets.values() if len(ids) * R > 3 * n for i in ids)
    return h1, hv, buckets, bad


def _bad_pass(instance: XorInstance, bad: list, distinct: bool) -> Optional[SolutionTriple]:
    for i in bad:
        hit = _xor_scan(instance.words, instance.words[i], instance.members, distinct)
        if hit:
            return hit
    return None


@dataclass
class Encoding:
    """Everything needed to decode offline answers back to X."""
    params: ReductionParams
    instance: XorInstance
    R: int
    p: int
    K: int
    h1: LinearHash
    h1v: list
    good: Dict[int, list]  # bucket -> element indices (bad buckets emptied)
    f1: list = field(default_factory=list)  # per repetition: h21 of every element
    f2: list = field(default_factory=list)
    bad: list = field(default_factory=list)

    def set_index(self, rep: int, u: int, v: int) -> int:
        return ((rep * self.R) + u) * (1 << self.p) + v


def _shifted_sets(enc: Encoding, rep: int, up: bool) -> List[tuple]:
    """All R * 2^p shifted sets of one repetition, in set_index order."""
    p, P1 = enc.p, 1 << enc.p
    f1, f2 = np.asarray(enc.f1[rep], dtype=np.int64), np.asarray(enc.f2[rep], dtype=np.int64)
    v = np.arange(P1, dtype=np.int64)[:, None]
    out = []
    for u in range(enc.R):
        ids = enc.good.get(u)
        if not ids:
            out.extend([()] * P1)
            continue
        x, y = f1[ids][None, :], f2[ids][None, :]
        vals = ((x ^ v) << p) | y if up else (x << p) | (y ^ v)
        vals.sort(axis=1)
        for row in vals.tolist():
            out.append(tuple(dict.fromkeys(row)))
    return out


def encode(instance: XorInstance, params: ReductionParams, seed: int,
           distinct: bool = False, stop_on_hit: bool = False) -> Tuple[Optional[SolutionTriple], Optional[OfflineSetInstance], Encoding]:
    """Bucket, settle bad elements, build the offline instance.

    Returns (triple found by the bad pass or None, offline instance, encoding).
    """
    params.check()
    n, w = instance.n, instance.w
    r = bucket_bits(n, params.gamma, w)
    R = 1 << r
    h1, hv, buckets, bad = _bucketize(instance, r, seed)
    p = fingerprint_bits(params, n, R, w)
    K = repetitions(n) if params.target == "disjointness" else 1
    badset = set(bad)
    good = {u: ids for u, ids in buckets.items() if not (ids and ids[0] in badset)}
    enc = Encoding(params, instance, R, p, K, h1, hv, good, bad=bad)
    hit = _bad_pass(instance, bad, distinct)
    if hit and stop_on_hit:
        return hit, None, enc
    for rep in range(K):
        h21 = sample_linear_hash(w, p, derive_seed(seed, "red-h21", rep))
        h22 = sample_linear_hash(w, p, derive_seed(seed, "red-h22", rep))
        enc.f1.append(eval_batch(h21, instance.words))
        enc.f2.append(eval_batch(h22, instance.words))
    fam_a, fam_b = [], []
    for rep in range(K):
        fam_a.extend(_shifted_sets(enc, rep, up=True))
        fam_b.extend(_shifted_sets(enc, rep, up=False))
    queries = []
    for ci in range(n):
        hc = hv[ci]
        for u in range(R):
            for rep in range(K):
                qa = enc.set_index(rep, u, enc.f1[rep][ci])
                qb = enc.set_index(rep, u ^ hc, enc.f2[rep][ci])
                tag = (ci, u, rep) if params.target == "disjointness" else (ci, u)
                queries.append((qa, qb, tag))
    offline = OfflineSetInstance(1 << (2 * p), fam_a, fam_b, queries)
    return hit, offline, enc


def _check_bucket_pair(enc: Encoding, ci: int, u: int, distinct: bool) -> Optional[SolutionTriple]:
    words = enc.instance.words
    c = words[ci]
    src = enc.good.get(u)
    dst = enc.good.get(u ^ enc.h1v[ci])
    if not src or not dst:
        return None
    targets = [words[i] for i in dst]
    for b in sorted(words[i] ^ c for i in src):
        k = bisect_left(targets, b)
        if k < len(targets) and targets[k] == b:
            a = b ^ c
            if is_solution(a, b, c, enc.instance.members, distinct):
                return SolutionTriple(a, b, c)
    return None


OfflineSolver = Callable[[OfflineSetInstance], object]


def solve_via_disjointness(instance: XorInstance, gamma: float, seed: int = 0,
                           offline_solver: Optional[OfflineSolver] = None,
                           distinct: bool = False) -> Optional[SolutionTriple]:
    """A (c, u) is checked on the real keys only if all K repetitions intersect."""
    if instance.n == 0:
        return None
    solver = offline_solver or naive_offline_disjointness
    hit, offline, enc = encode(instance, ReductionParams("disjointness", gamma), seed, distinct, True)
    if hit:
        return hit
    answer = set(solver(offline))
    K = enc.K
    for ci in range(instance.n):
        for u in range(enc.R):
            base = (ci * enc.R + u) * K
            if all(base + rep in answer for rep in range(K)):
                found = _check_bucket_pair(enc, ci, u, distinct)
                if found:
                    return found
    return None


def guess_budget(n: int, delta: float) -> int:
    if n < 2:
        return 0
    return math.ceil(delta * n ** delta * math.log(n))


def solve_via_intersection(instance: XorInstance, gamma: float, delta: float, seed: int = 0,
                           offline_solver: Optional[OfflineSolver] = None,
                           distinct: bool = False) -> Optional[SolutionTriple]:
    """Guessing prelude, then decode every listed common element through its generators."""
    n = instance.n
    if n == 0:
        return None
    words, members = instance.words, instance.members
    rng = make_rng(derive_seed(seed, "guess"))
    for _ in range(guess_budget(n, delta)):
        a, b = words[rng.randrange(n)], words[rng.randrange(n)]
        if is_solution(a, b, a ^ b, members, distinct):
            return SolutionTriple(a, b, a ^ b)
    solver = offline_solver or naive_offline_intersection
    hit, offline, enc = encode(instance, ReductionParams("intersection", gamma, delta), seed, distinct, True)
    if hit:
        return hit
    answer = solver(offline)
    p = enc.p
    pmask = (1 << p) - 1
    f1, f2 = enc.f1[0], enc.f2[0]
    # back-pointers: bucket -> fingerprint pair -> generating elements
    gens: Dict[int, Dict[int, list]] = {}
    for u, ids in enc.good.items():
        d: Dict[int, list] = {}
        for i in ids:
            d.setdefault((f1[i] << p) | f2[i], []).append(i)
        gens[u] = d
    for qi, (_, _, (ci, u)) in enumerate(offline.queries):
        common = answer.get(qi, ())
        if not common:
            continue
        c = words[ci]
        partner = u ^ enc.h1v[ci]
        for y in common:
            y1, y2 = y >> p, y & pmask
            ups = gens.get(u, {}).get(((y1 ^ f1[ci]) << p) | y2, ())
            downs = gens.get(partner, {}).get((y1 << p) | (y2 ^ f2[ci]), ())
            for ia in ups:
                for ib in downs:
                    a, b = words[ia], words[ib]
                    if a ^ b == c and is_solution(a, b, c, members, distinct):
                        return SolutionTriple(a, b, c)
    return None


# -- shape report -------------------------------------------------------------

def instance_shape_report(instance: XorInstance, params: ReductionParams, seed: int = 0) -> dict:
    """Generated |C|, |A|, |B|, q, max|S| next to the closed-form values and Theta targets."""
    params.check()
    n = instance.n
    _, offline, enc = encode(instance, params, seed)
    R, p, K = enc.R, enc.p, enc.K
    sizes = [len(s) for s in offline.family_a + offline.family_b]
    rep = {
        "target": params.target, "n": n, "gamma": params.gamma, "delta": params.delta,
        "R": R, "R_nominal": math.ceil(n ** params.gamma),
        "p": p, "K": K,
        "universe_size": offline.universe_size,
        "A": len(offline.family_a), "B": len(offline.family_b),
        "q": len(offline.queries),
        "max_set_size": max(sizes) if sizes else 0,
        "formula_universe": 1 << (2 * p),
        "formula_A": R * (1 << p) * K,
        "formula_q": R * n * K,
        "formula_max_set": (3 * n) // R,
        "bad_elements": len(enc.bad),
        "rounding": "R = next_pow2(ceil(n^gamma)), P = 2^(2p) with p rounded up",
    }
    if params.target == "disjointness":
        rep["P_nominal"] = math.ceil((5 * n / R) ** 2)
        rep["theta_universe"] = n ** (2 - 2 * params.gamma)
        rep["theta_A"] = n * math.log2(max(n, 2))
        rep["theta_q"] = n ** (1 + params.gamma) * math.log2(max(n, 2))
    else:
        rep["P_nominal"] = math.ceil(n ** (1 + params.delta) / R)
        rep["theta_universe"] = n ** (1 + params.delta - params.gamma)
        rep["theta_A"] = math.sqrt(n ** (1 + params.delta + params.gamma))
        rep["theta_q"] = n ** (1 + params.gamma)
        rep["output_size"] = sum(len(v) for v in naive_offline_intersection(offline).values())
    rep["theta_max_set"] = n ** (1 - params.gamma)
    return rep
