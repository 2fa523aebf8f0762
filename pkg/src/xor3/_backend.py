"""Select the compiled kernels when they are importable, else pure Python.

``XOR3_BACKEND=python`` forces the fallback; ``XOR3_BACKEND=native`` makes a
missing extension an error.
"""

from __future__ import annotations

import os
from typing import Optional

import numpy as np

from . import packed
from .core import SolutionTriple

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

HAVE_NATIVE = _ckernels is not None
MAX_SLOT_TABLE = 1 << 22


def backend_name(requested: Optional[str] = None) -> str:
    choice = (requested or os.environ.get("XOR3_BACKEND") or "auto").lower()
    if choice not in ("auto", "native", "python"):
        raise ValueError(f"unknown backend {choice!r}")
    if choice == "native" and not HAVE_NATIVE:
        raise RuntimeError("native backend requested but xor3._ckernels is not built")
    if choice == "auto":
        return "native" if HAVE_NATIVE else "python"
    return choice


def use_native(requested: Optional[str], w: int) -> bool:
    return backend_name(requested) == "native" and w <= 512


def to_limbs(values, w: int) -> np.ndarray:
    """(len, ceil(w/64)) uint64, most significant limb first."""
    L = max(1, (w + 63) // 64)
    values = list(values)
    if not values:
        return np.zeros((0, L), dtype=np.uint64)
    buf = b"".join(int(v).to_bytes(8 * L, "big") for v in values)
    return np.frombuffer(buf, dtype=">u8").astype(np.uint64).reshape(len(values), L)


def lsb_limbs(x: int, Lw: int) -> np.ndarray:
    """One packed word as Lw uint64 limbs, least significant first."""
    return np.frombuffer(int(x).to_bytes(8 * Lw, "little"), dtype="<u8").astype(np.uint64)


# -- trie -------------------------------------------------------------------

def solve_trie_native(tree, distinct: bool, stats):
    n, w = tree.n, tree.w
    L = max(1, (w + 63) // 64)
    keys = to_limbs(tree.keys, w)
    lab_limb = np.empty(max(n - 1, 0), dtype=np.int32)
    lab_bit = np.empty(max(n - 1, 0), dtype=np.uint64)
    for i, lab in enumerate(tree.labels):
        top = lab.bit_length() - 1
        lab_limb[i] = L - 1 - top // 64
        lab_bit[i] = 1 << (top % 64)
    left = np.asarray(tree.left, dtype=np.int64)
    right = np.asarray(tree.right, dtype=np.int64)
    ai, bi, cj, visits, comps = _ckernels.trie_solve(
        keys, left, right, lab_limb, lab_bit, tree.root, distinct)
    if stats is not None:
        stats.visits += visits
        stats.comparisons += comps
    if ai < 0:
        return None
    return SolutionTriple(tree.keys[ai], tree.keys[bi], tree.keys[cj])


# -- bad pairs ----------------------------------------------------------------

def _dict_arrays(sd):
    cached = getattr(sd, "_native", None)
    if cached is not None:
        return cached
    w = sd.w
    L = max(1, (w + 63) // 64)
    top_rows = to_limbs(sd.top.rows, w)
    M = len(sd.second)
    bits = np.full(M, -1, dtype=np.int32)
    row_off = np.zeros(M, dtype=np.int64)
    rows = []
    for u, h in enumerate(sd.second):
        if h is not None:
            bits[u] = h.mu
            row_off[u] = len(rows)
            rows.extend(h.rows)
    rows2 = to_limbs(rows, w) if rows else np.zeros((1, L), dtype=np.uint64)
    slot_off = np.asarray(sd.offsets, dtype=np.int64)
    slot_keys = to_limbs([x if x is not None else 0 for x in sd.slots], w)
    used = np.array([x is not None for x in sd.slots], dtype=np.uint8)
    if len(used) == 0:
        slot_keys = np.zeros((1, L), dtype=np.uint64)
        used = np.zeros(1, dtype=np.uint8)
    cached = (np.ascontiguousarray(top_rows), bits, row_off, slot_off,
              np.ascontiguousarray(rows2), np.ascontiguousarray(slot_keys), used)
    sd._native = cached
    return cached


def pair_pass_native(bad: list, sd, distinct: bool, stats):
    arrs = _dict_arrays(sd)
    limbs = np.ascontiguousarray(to_limbs(bad, sd.w))
    i, j, probes = _ckernels.pair_probe(limbs, *arrs, distinct)
    stats.dict_probes += probes
    if i < 0:
        return None
    a, b = bad[i], bad[j]
    return SolutionTriple(a, b, a ^ b)


# -- long-word pass -------------------------------------------------------------

def _layout_of(ft):
    any_u = next(iter(ft.arrays))
    return ft.arrays[any_u].layout


def longword_supported(ft) -> bool:
    if not ft.arrays:
        return True
    lay = _layout_of(ft)
    Lw = -(-2 * lay.k * lay.f // 64)
    return (lay.f <= 64 and 2 * lay.k <= 256 and Lw <= 80
            and ft.plan.R <= MAX_SLOT_TABLE)


def _network_limbs(n2: int, f: int, Lw: int):
    stages = packed.sort_network(n2, f)
    shifts = np.array([s[0] for s in stages], dtype=np.int32)
    M = np.array([lsb_limbs(s[1], Lw) for s in stages], dtype=np.uint64).reshape(len(stages), Lw)
    T = np.array([lsb_limbs(s[2], Lw) for s in stages], dtype=np.uint64).reshape(len(stages), Lw)
    D = np.array([lsb_limbs(s[3], Lw) for s in stages], dtype=np.uint64).reshape(len(stages), Lw)
    return shifts, M, T, D


def long_pass_native(words, bt, ft, distinct, stats, a_indices=None):
    lay = _layout_of(ft)
    k, f, tb, ib = lay.k, lay.f, lay.tag_bits, lay.idx_bits
    n2 = 2 * k
    Lw = -(-n2 * f // 64)
    goods = ft.good_buckets()
    G = len(goods)
    arrays = np.zeros((G, Lw), dtype=np.uint64)
    members = np.full((G, k), -1, dtype=np.int64)
    slot_of = np.full(ft.plan.R, -1, dtype=np.int64)
    for gi, u in enumerate(goods):
        arrays[gi] = lsb_limbs(ft.arrays[u].word, Lw)
        ids = ft.members[u]
        members[gi, :len(ids)] = ids
        slot_of[u] = gi
    shifts, M, T, D = _network_limbs(n2, f, Lw)
    markers_k, pm, pos_top = packed._listing_constants(k, f, tb, ib)
    ones = packed._replicate(1 << tb, k, f)
    keys = to_limbs(words, bt.h1.ell)
    order = np.arange(len(words), dtype=np.int64) if a_indices is None \
        else np.asarray(list(a_indices), dtype=np.int64)
    ai, bi, ci, pops, verifs, coll = _ckernels.long_pass(
        keys, np.asarray(bt.hashes, dtype=np.int64), np.asarray(ft.fingerprints, dtype=np.int64),
        order, np.asarray(goods, dtype=np.int64), slot_of, arrays, members,
        shifts, M, T, D, lsb_limbs(ones, Lw), lsb_limbs(markers_k, Lw),
        lsb_limbs(pm, Lw), lsb_limbs(pos_top, Lw),
        k, f, tb, ib, lay.nwords, distinct, "bitonic" in packed._FAULTS)
    stats.packed_ops += pops
    stats.verifications += verifs
    stats.colliding_triples_seen += coll
    if ai < 0:
        return None
    return SolutionTriple(words[ai], words[bi], words[ci])
