"""Randomized subquadratic 3XOR: buckets, packed fingerprints, lookup tables.

Pipeline: draw h1 until fewer than 2R elements are bad, fingerprint every
key with h2, then

* check every pair of bad elements against a static dictionary of X;
* long words: for every a and every good bucket u whose partner
  u ^ h1(a) is good, list fingerprint matches between
  (array_u ^ h2(a)) and array_{u ^ h1(a)} with packed intersection;
* short words: one-bit lookup tables over triples (no bad element) and
  pairs (one bad element) of packed fingerprint arrays.

Every candidate is verified on the real keys; fingerprint matches that are
not real solutions are the colliding triples.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .core import SolutionTriple, XorInstance, count_all_solutions, derive_seed
from .fks import StaticDict
from .hashing import (BucketTable, LinearHash, eval_batch, next_pow2,
                      resample_until_few_bad, sample_linear_hash)
from .packed import (DEFAULT_W, Layout, OpCounter, PackedArray,
                     intersect_listing, pack, xor_broadcast)

DEFAULT_DELTA = 0.3
INDEX_CAP = 24
CENSUS_LIMIT = 512


class TableTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class FingerprintPlan:
    regime: str  # "long_word" | "short_word"
    r: int
    p: int
    W: int = DEFAULT_W

    @property
    def R(self) -> int:
        return 1 << self.r

    @property
    def P(self) -> int:
        return 1 << self.p

    def fieldcount(self, n: int) -> int:
        """Largest good bucket: floor(3n/R)."""
        return (3 * n) // self.R


def crossover(n: int) -> float:
    L = math.log2(max(n, 4))
    return L * L * math.log2(L)


def choose_plan(n: int, W: int = DEFAULT_W, w: Optional[int] = None,
                regime: str = "auto", R: Optional[int] = None,
                p: Optional[int] = None) -> FingerprintPlan:
    """Parameters for either regime; explicit R / p override the formulas.

    Degenerate inputs are clamped: n < 4 is treated as 4, r <= w, 1 <= p <= w.
    """
    ne = max(n, 4)
    L = math.log2(ne)
    LL = math.log2(L)
    if regime in ("auto", None):
        regime = "long_word" if W >= crossover(ne) else "short_word"
    regime = {"long": "long_word", "short": "short_word"}.get(regime, regime)
    if regime == "long_word":
        logW = math.log2(W)
        R_f = math.ceil(6 * ne * logW / W)
        p_f = math.floor(2 * logW)
    elif regime == "short_word":
        R_f = math.ceil(55 * ne * LL / L)
        p_f = math.floor(6 * LL)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    if R is not None:
        R_f = R
    if p is not None:
        p_f = p
    r = next_pow2(max(R_f, 1)).bit_length() - 1
    p_f = max(p_f, 1)
    if w is not None:
        r = min(r, w)
        p_f = min(p_f, w)
    return FingerprintPlan(regime, r, p_f, W)


@dataclass
class CollisionStats:
    regime: str = ""
    R: int = 0
    p: int = 0
    retries: int = 0
    colliding_triples_seen: int = 0
    bound: float = 0.0
    bad_elements: int = 0
    dict_probes: int = 0
    packed_ops: int = 0
    lookups: int = 0
    verifications: int = 0
    hash_ops: int = 0
    table_fallback: bool = False
    backend: str = "python"

    @property
    def ops(self) -> int:
        """Simulated-word operation proxy for the whole run."""
        return (self.hash_ops + self.dict_probes + self.packed_ops
                + self.lookups + self.verifications)

    def as_dict(self) -> dict:
        return {"regime": self.regime, "R": self.R, "p": self.p, "retries": self.retries,
                "colliding_triples_seen": self.colliding_triples_seen, "bound": self.bound}


@dataclass
class FingerprintTable:
    plan: FingerprintPlan
    h2: LinearHash
    fingerprints: tuple  # h2 of instance.words[i]
    arrays: Dict[int, PackedArray] = field(default_factory=dict)
    members: Dict[int, tuple] = field(default_factory=dict)  # u -> global indices, bucket order
    ell: int = 0

    def good_buckets(self) -> list:
        return sorted(self.arrays)


def build_fingerprint_table(bt: BucketTable, plan: FingerprintPlan, h2: LinearHash,
                            words: tuple, fingerprints: Optional[list] = None) -> FingerprintTable:
    """Pack the h2 fingerprints of every good nonempty bucket; bad buckets get nothing."""
    if fingerprints is None:
        fingerprints = eval_batch(h2, words)
    index = {x: i for i, x in enumerate(words)}
    ft = FingerprintTable(plan, h2, tuple(fingerprints), ell=plan.p + 1)
    fc = plan.fieldcount(bt.n)
    if fc == 0:
        return ft
    k = next_pow2(fc)
    Layout(k, plan.p + 1, plan.W).check()
    for u in sorted(bt.buckets):
        if not bt.is_good(u):
            continue
        ids = tuple(index[x] for x in bt.buckets[u])
        vals = [fingerprints[i] for i in ids]
        vals += [vals[-1]] * (k - len(vals))
        pa = pack(vals, W=plan.W, ell=plan.p + 1)
        ft.arrays[u] = PackedArray(pa.word | _pad_flags(pa, len(ids)), pa.layout, len(ids))
        ft.members[u] = ids
    return ft


def _pad_flags(pa: PackedArray, real: int) -> int:
    lay = pa.layout
    out = 0
    for i in range(real, lay.k):
        out |= 1 << (i * lay.f + lay.pad_bit)
    return out


# -- lookup tables ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LookupTable:
    fieldcount: int
    p: int
    arity: str
    bits: np.ndarray

    @property
    def index_bits(self) -> int:
        return (3 if self.arity == "triple" else 2) * self.fieldcount * self.p

    def index(self, *arrays) -> int:
        idx = 0
        shift = 0
        for arr in arrays:
            idx |= pack_index(arr, self.fieldcount, self.p) << shift
            shift += self.fieldcount * self.p
        return idx

    def __getitem__(self, idx: int) -> bool:
        return bool(self.bits[idx])


def pack_index(values, fieldcount: int, p: int) -> int:
    """fieldcount p-bit fields, padded with copies of the last value."""
    values = list(values)
    if not values:
        raise ValueError("cannot index an empty array")
    values += [values[-1]] * (fieldcount - len(values))
    out = 0
    for t, v in enumerate(values):
        out |= v << (t * p)
    return out


def build_lookup_table(fieldcount: int, p: int, arity: str,
                       cap: int = INDEX_CAP) -> LookupTable:
    """One bit per index: a common element (pair) or alpha_i ^ beta_j == gamma_k (triple)."""
    if arity not in ("pair", "triple"):
        raise ValueError("arity must be 'pair' or 'triple'")
    m = 2 if arity == "pair" else 3
    nbits = m * fieldcount * p
    if nbits > cap:
        raise TableTooLarge(f"{nbits} index bits exceed the cap of {cap}")
    size = 1 << nbits
    out = np.zeros(size, dtype=bool)
    pmask = (1 << p) - 1
    chunk = 1 << 18
    for start in range(0, size, chunk):
        idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
        f = [(idx >> (t * p)) & pmask for t in range(m * fieldcount)]
        alpha, beta = f[:fieldcount], f[fieldcount:2 * fieldcount]
        hit = np.zeros(idx.shape, dtype=bool)
        if arity == "pair":
            for a in alpha:
                for b in beta:
                    hit |= a == b
        else:
            gamma = f[2 * fieldcount:]
            for a in alpha:
                for b in beta:
                    ab = a ^ b
                    for g in gamma:
                        hit |= ab == g
        out[start:start + len(idx)] = hit
    return LookupTable(fieldcount, p, arity, out)


# -- census -------------------------------------------------------------------

def count_colliding_triples(instance: XorInstance, h1: LinearHash, h2: LinearHash) -> int:
    """|{(a,b,c) in X^3 : a^b != c, h1 and h2 both respect the XOR}| exactly.

    Linear hashes make (h1, h2) one linear map, so every ordered pair
    (a, b) is matched against a histogram of combined images; real
    triples are subtracted at the end.
    """
    n = instance.n
    if n > CENSUS_LIMIT:
        raise ValueError(f"census refused for n={n} > {CENSUS_LIMIT}")
    words = instance.words
    p = h2.mu
    combined = [(u << p) | v for u, v in zip(eval_batch(h1, words), eval_batch(h2, words))]
    hist = Counter(combined)
    total = 0
    for ka in combined:
        for kb in combined:
            total += hist.get(ka ^ kb, 0)
    return total - count_all_solutions(instance)


# -- solver -------------------------------------------------------------------

def _valid(a, b, c, distinct) -> bool:
    return not distinct or (a != b and a != c and b != c)


def _pair_pass_python(bad: list, words: tuple, sd: StaticDict, distinct: bool, stats):
    for i, a in enumerate(bad):
        for b in bad[i:]:
            c = a ^ b
            stats.dict_probes += 1
            if c in sd and _valid(a, b, c, distinct):
                return SolutionTriple(a, b, c)
    return None


def _long_pass_python(words, bt, ft, distinct, stats, a_indices=None):
    counter = OpCounter()
    h1v, fps = bt.hashes, ft.fingerprints
    goods = ft.good_buckets()
    arrays, members = ft.arrays, ft.members
    found = None
    for ai in (range(len(words)) if a_indices is None else a_indices):
        a, ha, fa = words[ai], h1v[ai], fps[ai]
        for u in goods:
            partner = arrays.get(u ^ ha)
            if partner is None:
                continue
            shifted = xor_broadcast(arrays[u], fa, counter)
            for i, j in intersect_listing(shifted, partner, counter):
                b = words[members[u][i]]
                c = words[members[u ^ ha][j]]
                stats.verifications += 1
                if a ^ b == c:
                    if _valid(a, b, c, distinct):
                        found = SolutionTriple(a, b, c)
                        break
                else:
                    stats.colliding_triples_seen += 1
            if found:
                break
        if found:
            break
    stats.packed_ops += counter.ops
    return found


def _long_pass(words, bt, ft, distinct, stats, backend, a_indices=None):
    from . import _backend
    if _backend.use_native(backend, bt.h1.ell) and _backend.longword_supported(ft):
        stats.backend = "native"
        return _backend.long_pass_native(words, bt, ft, distinct, stats, a_indices)
    return _long_pass_python(words, bt, ft, distinct, stats, a_indices)


def _short_pass(words, bt, ft, distinct, stats, fc, triple_t, pair_t):
    """Lookup-table passes: (i) good/good/good, (ii) one bad a with two good buckets."""
    p = ft.plan.p
    fps = ft.fingerprints
    goods = ft.good_buckets()
    goodset = set(goods)
    idx1 = {u: pack_index([fps[i] for i in ft.members[u]], fc, p) for u in goods}
    by_fp = {u: {} for u in goods}
    for u in goods:
        for i in ft.members[u]:
            by_fp[u].setdefault(fps[i], []).append(i)
    span = fc * p
    for u in goods:
        for v in goods:
            t = u ^ v
            if t not in goodset:
                continue
            stats.lookups += 1
            if not triple_t[idx1[u] | (idx1[v] << span) | (idx1[t] << (2 * span))]:
                continue
            for ia in ft.members[u]:
                a = words[ia]
                for ib in ft.members[v]:
                    b = words[ib]
                    for ic in by_fp[t].get(fps[ia] ^ fps[ib], ()):
                        c = words[ic]
                        stats.verifications += 1
                        if a ^ b == c:
                            if _valid(a, b, c, distinct):
                                return SolutionTriple(a, b, c)
                        else:
                            stats.colliding_triples_seen += 1
    ones = sum(1 << (t * p) for t in range(fc))
    index_of = {x: i for i, x in enumerate(words)}
    for a in bt.bad_elements:
        ai = index_of[a]
        ha, fa = bt.hashes[ai], fps[ai]
        for u in goods:
            partner = u ^ ha
            if partner not in goodset:
                continue
            stats.packed_ops += 2
            stats.lookups += 1
            if not pair_t[(idx1[u] ^ (fa * ones)) | (idx1[partner] << span)]:
                continue
            for ib in ft.members[u]:
                b = words[ib]
                for ic in by_fp[partner].get(fps[ib] ^ fa, ()):
                    c = words[ic]
                    stats.verifications += 1
                    if a ^ b == c:
                        if _valid(a, b, c, distinct):
                            return SolutionTriple(a, b, c)
                    else:
                        stats.colliding_triples_seen += 1
    return None


def table_feasible(plan: FingerprintPlan, n: int, delta: float = DEFAULT_DELTA,
                   cap: int = INDEX_CAP) -> bool:
    """Tables are used when a bucket's fingerprints fit delta*log2(n) bits and 3 arrays fit the cap."""
    fc = plan.fieldcount(n)
    if fc == 0:
        return False
    bits = fc * plan.p
    return bits <= delta * math.log2(max(n, 2)) and 3 * bits <= cap


def solve_randomized(instance: XorInstance, seed: int = 0,
                     plan_override: Union[None, str, FingerprintPlan] = None,
                     W: int = DEFAULT_W, distinct: bool = False,
                     delta: float = DEFAULT_DELTA, index_cap: int = INDEX_CAP,
                     backend: Optional[str] = None
                     ) -> Tuple[Optional[SolutionTriple], CollisionStats]:
    n, w = instance.n, instance.w
    if isinstance(plan_override, FingerprintPlan):
        plan = plan_override
    else:
        plan = choose_plan(n, W, w, regime=plan_override or "auto")
    stats = CollisionStats(regime=plan.regime, R=plan.R, p=plan.p)
    if n == 0:
        return None, stats
    stats.bound = 2 * n ** 3 / (plan.R * plan.P)
    words = instance.words

    bt = resample_until_few_bad(instance, plan.r, derive_seed(seed, "h1"))
    stats.retries = bt.retries
    stats.bad_elements = len(bt.bad_elements)
    h2 = sample_linear_hash(w, plan.p, derive_seed(seed, "h2"))
    fps = eval_batch(h2, words)
    stats.hash_ops = n * (plan.r + plan.p)
    for i in range(min(n - 1, 4)):
        assert fps[i] ^ fps[i + 1] == h2(words[i] ^ words[i + 1]), "fingerprints lost linearity"

    # two or three bad elements
    if bt.bad_elements:
        from . import _backend
        sd = StaticDict(words, w, derive_seed(seed, "dict"))
        if _backend.use_native(backend, w):
            stats.backend = "native"
            hit = _backend.pair_pass_native(list(bt.bad_elements), sd, distinct, stats)
        else:
            hit = _pair_pass_python(list(bt.bad_elements), words, sd, distinct, stats)
        if hit:
            return hit, stats

    ft = build_fingerprint_table(bt, plan, h2, words, fps)
    stats.packed_ops += n
    if not ft.arrays:
        return None, stats

    if plan.regime == "short_word":
        fc = plan.fieldcount(n)
        if table_feasible(plan, n, delta, index_cap):
            triple_t = build_lookup_table(fc, plan.p, "triple", index_cap)
            pair_t = build_lookup_table(fc, plan.p, "pair", index_cap)
            return _short_pass(words, bt, ft, distinct, stats, fc, triple_t, pair_t), stats
        stats.table_fallback = True
    return _long_pass(words, bt, ft, distinct, stats, backend), stats
