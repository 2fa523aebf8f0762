"""GF(2)-linear hashing: h_A(x) = A x over Z_2.

Bit conventions: ``rows[i]`` is an ``ell``-bit mask whose bit ``j`` is the
matrix entry A[i][j]; bit ``j`` of an input ``x`` is coordinate x_j; output
bit ``i`` is the parity of ``rows[i] & x``.  ``packed_columns`` holds column
``j`` (a ``mu``-bit value) in bits ``[j*mu, (j+1)*mu)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .core import MAX_WIDTH, XorInstance, derive_seed, generate_instance, make_rng

BAD_RETRY_BUDGET = 64


class WidthError(ValueError):
    pass


def next_pow2(x) -> int:
    """Smallest power of two >= x (1 for x <= 1)."""
    v = 1
    while v < x:
        v <<= 1
    return v


def _ceil_log2(x) -> int:
    return next_pow2(x).bit_length() - 1


@dataclass(frozen=True, eq=False)
class LinearHash:
    ell: int
    mu: int
    rows: tuple
    packed_columns: int = field(repr=False)

    @classmethod
    def from_matrix(cls, rows: Sequence[int], ell: int) -> "LinearHash":
        """Build from explicit row masks; ``rows=[]`` is the zero map to 0 bits."""
        rows = tuple(int(r) for r in rows)
        mu = len(rows)
        if ell < 1 or mu > ell:
            raise WidthError(f"need 0 <= mu <= ell, got mu={mu}, ell={ell}")
        limit = 1 << ell
        if any(not 0 <= r < limit for r in rows):
            raise WidthError(f"row wider than {ell} bits")
        cols = 0
        for j in range(ell):
            col = 0
            for i, r in enumerate(rows):
                if (r >> j) & 1:
                    col |= 1 << i
            cols |= col << (j * mu)
        return cls(ell, mu, rows, cols)

    def column(self, j: int) -> int:
        return (self.packed_columns >> (j * self.mu)) & ((1 << self.mu) - 1)

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def __call__(self, x: int) -> int:
        return eval_rowwise(self, x)

    def __eq__(self, other):
        return (isinstance(other, LinearHash) and self.ell == other.ell
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ell, self.rows))


def sample_linear_hash(ell: int, mu: int, seed: int) -> LinearHash:
    """Uniform member of H^lin_{ell,mu}: mu*ell independent fair bits."""
    if mu < 1 or mu > ell or ell > MAX_WIDTH:
        raise WidthError(f"need 1 <= mu <= ell <= {MAX_WIDTH}, got mu={mu}, ell={ell}")
    rng = make_rng(derive_seed(seed, "lin", ell, mu))
    return LinearHash.from_matrix([rng.getrandbits(ell) for _ in range(mu)], ell)


def convolution_hash(a: int, ell: int, mu: int) -> LinearHash:
    """Toeplitz matrix A[i][j] = a_{i+j} from an (ell+mu-1)-bit vector ``a``."""
    mask = (1 << ell) - 1
    return LinearHash.from_matrix([(a >> i) & mask for i in range(mu)], ell)


def sample_convolution_hash(ell: int, mu: int, seed: int) -> LinearHash:
    if mu < 1 or mu > ell or ell > MAX_WIDTH:
        raise WidthError(f"need 1 <= mu <= ell <= {MAX_WIDTH}, got mu={mu}, ell={ell}")
    rng = make_rng(derive_seed(seed, "conv", ell, mu))
    return convolution_hash(rng.getrandbits(ell + mu - 1), ell, mu)


def _check_width(h: LinearHash, x: int) -> None:
    if not 0 <= x < (1 << h.ell):
        raise WidthError(f"input {x:#x} is not an {h.ell}-bit value")


def eval_rowwise(h: LinearHash, x: int) -> int:
    _check_width(h, x)
    out = 0
    for i, row in enumerate(h.rows):
        out |= ((row & x).bit_count() & 1) << i
    return out


@lru_cache(maxsize=None)
def _spread_table(mu: int) -> tuple:
    field_ones = (1 << mu) - 1
    table = []
    for v in range(256):
        s = 0
        for t in range(8):
            if (v >> t) & 1:
                s |= field_ones << (t * mu)
        table.append(s)
    return tuple(table)


@lru_cache(maxsize=None)
def _fold_masks(fields: int, mu: int) -> tuple:
    masks = []
    while fields > 1:
        fields //= 2
        masks.append((fields * mu, (1 << (fields * mu)) - 1))
    return tuple(masks)


def eval_columnwise(h: LinearHash, x: int) -> int:
    """XOR the columns selected by the 1-bits of x, halving the vector count each round."""
    _check_width(h, x)
    mu = h.mu
    if mu == 0:
        return 0
    spread = _spread_table(mu)
    step = 8 * mu
    sel = 0
    for b, byte in enumerate(x.to_bytes((h.ell + 7) // 8, "little")):
        if byte:
            sel |= spread[byte] << (b * step)
    sel &= h.packed_columns
    for shift, low in _fold_masks(next_pow2(h.ell), mu):
        sel = (sel & low) ^ (sel >> shift)
    return sel


def _bits_of(values, nbits: int) -> np.ndarray:
    """(len(values), nbits) uint8 bit matrix, column j = bit j."""
    nbytes = max(1, (nbits + 7) // 8)
    buf = b"".join(v.to_bytes(nbytes, "little") for v in values)
    arr = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    return arr.reshape(len(values), nbytes * 8)[:, :nbits]


def _int_from_bits(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _values_from_bits(bits: np.ndarray) -> list:
    nbits = bits.shape[1]
    if nbits <= 62:
        weights = (np.int64(1) << np.arange(nbits, dtype=np.int64))
        return [int(v) for v in bits.astype(np.int64) @ weights]
    return [_int_from_bits(row) for row in bits]


def eval_batch(h: LinearHash, xs: Sequence[int]) -> list:
    """Evaluate h on many inputs at once.

    The selected columns of all inputs are laid out in one wide word
    (one block of ``next_pow2(ell)`` mu-bit fields per input) and folded
    word-parallel, so every round halves the live fields of every block.
    """
    xs = list(xs)
    if not xs:
        return []
    limit = 1 << h.ell
    for x in xs:
        if not 0 <= x < limit:
            raise WidthError(f"input {x:#x} is not an {h.ell}-bit value")
    mu = h.mu
    if mu == 0:
        return [0] * len(xs)
    n = len(xs)
    fields = next_pow2(h.ell)
    block = fields * mu
    xbits = np.zeros((n, fields), dtype=np.uint8)
    xbits[:, :h.ell] = _bits_of(xs, h.ell)
    colbits = _bits_of([h.packed_columns], block)[0]
    selected = np.repeat(xbits, mu, axis=1) & colbits
    word = _int_from_bits(selected.reshape(-1))
    for shift, _ in _fold_masks(fields, mu):
        pattern = np.zeros(block, dtype=np.uint8)
        pattern[:shift] = 1
        low = _int_from_bits(np.tile(pattern, n))
        word = (word & low) ^ ((word >> shift) & low)
    out_bits = _bits_of([word], n * block)[0].reshape(n, block)[:, :mu]
    return _values_from_bits(out_bits)


# -- buckets --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BucketTable:
    r: int
    h1: LinearHash
    buckets: dict  # u -> ascending tuple, nonempty buckets only
    hashes: tuple  # h1 value of instance.words[i]
    n: int
    bad_elements: tuple
    retries: int = 0

    @property
    def R(self) -> int:
        return 1 << self.r

    @property
    def good_threshold(self) -> float:
        return 3 * self.n / self.R

    def bucket(self, u: int) -> tuple:
        return self.buckets.get(u, ())

    def is_good(self, u: int) -> bool:
        return len(self.buckets.get(u, ())) * self.R <= 3 * self.n

    def bad_buckets(self) -> list:
        return sorted(u for u, b in self.buckets.items() if len(b) * self.R > 3 * self.n)


def _table_from_hash(instance: XorInstance, r: int, h1: LinearHash, retries: int = 0) -> BucketTable:
    hashes = eval_batch(h1, instance.words)
    groups: dict = {}
    for x, u in zip(instance.words, hashes):
        groups.setdefault(u, []).append(x)
    R, n = 1 << r, instance.n
    buckets = {u: tuple(v) for u, v in groups.items()}
    bad = sorted(x for v in buckets.values() if len(v) * R > 3 * n for x in v)
    return BucketTable(r, h1, buckets, tuple(hashes), n, tuple(bad), retries)


def split_buckets(instance: XorInstance, r: int, seed: int,
                  h1: Optional[LinearHash] = None) -> BucketTable:
    """Partition X by a fresh h1 from H^lin_{w,r} (or the given one)."""
    if not 0 <= r <= instance.w:
        raise WidthError(f"bucket bits r={r} outside 0..{instance.w}")
    if h1 is None:
        h1 = LinearHash.from_matrix([], instance.w) if r == 0 else sample_linear_hash(instance.w, r, seed)
    elif h1.mu != r or h1.ell != instance.w:
        raise WidthError("h1 shape does not match (w, r)")
    return _table_from_hash(instance, r, h1)


def resample_until_few_bad(instance: XorInstance, r: int, seed: int,
                           max_retries: int = BAD_RETRY_BUDGET) -> BucketTable:
    """Redraw h1 until fewer than 2R elements sit in overfull buckets."""
    R = 1 << r
    for attempt in range(max_retries):
        table = split_buckets(instance, r, derive_seed(seed, "h1", attempt))
        if len(table.bad_elements) < 2 * R:
            if attempt:
                table = BucketTable(table.r, table.h1, table.buckets, table.hashes,
                                    table.n, table.bad_elements, attempt)
            return table
    raise RuntimeError(f"|bad| >= 2R after {max_retries} hash draws (n={instance.n}, r={r})")


def overfull_statistic(n: int, w: int, m: int, trials: int, seed: int,
                       threshold: Optional[float] = None) -> float:
    """Mean number of keys in buckets of size >= threshold (default 3n/m).

    X is drawn once; only h varies across trials.
    """
    if m < 1 or m & (m - 1) or m > (1 << w):
        raise ValueError("m must be a power of two <= 2^w")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mu = m.bit_length() - 1
    X = generate_instance(n, w, derive_seed(seed, "overfull-X"), "random")
    total = 0
    for t in range(trials):
        if mu == 0:
            sizes = np.array([n])
            hv = np.zeros(n, dtype=np.int64)
        else:
            h = sample_linear_hash(w, mu, derive_seed(seed, "overfull-h", t))
            hv = np.asarray(eval_batch(h, X.words), dtype=np.int64)
            sizes = np.bincount(hv, minlength=m)
        per_key = sizes[hv]
        if threshold is None:
            total += int(np.count_nonzero(per_key * m >= 3 * n))
        else:
            total += int(np.count_nonzero(per_key >= threshold))
    return total / trials
