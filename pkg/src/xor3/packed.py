"""Word-packed arrays on a simulated W-bit machine word.

A packed array of ``k`` entries (``k`` a power of two) lives in
``nwords`` consecutive W-bit words, treated as one long word; every
logical operation on it is charged ``nwords`` simulated-word operations.

Field ``i`` occupies bits ``[i*f, (i+1)*f)`` with ``f = ell + tag_bits``.
Inside a field, from the most significant end:

    test bit | payload (ell-1 bits) | marker | pad | index (idx_bits)

``idx_bits = ceil(log2 k)``.  The sort key of a field is everything below
the test bit, so index tags, padding flags and markers travel with their
payloads and break ties.  Test bits are zero between operations.

Space is reserved for ``2k`` fields so two arrays can be concatenated for
intersection.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

DEFAULT_W = 256
MAX_W = 512
MAX_WORDS = 8

_FAULTS: set = set()


class CapacityError(ValueError):
    pass


class OpCounter:
    """Tally of simulated-word operations."""

    __slots__ = ("ops",)

    def __init__(self):
        self.ops = 0

    def __repr__(self):
        return f"OpCounter(ops={self.ops})"


def inject_fault(name: Optional[str]) -> None:
    """Deliberately break a primitive (used by ``xor3 verify --inject-fault``)."""
    _FAULTS.clear()
    if name:
        _FAULTS.add(name)


def _ceil_log2(x: int) -> int:
    return (x - 1).bit_length() if x > 1 else 0


@dataclass(frozen=True)
class Layout:
    k: int
    ell: int
    W: int

    @property
    def idx_bits(self) -> int:
        return _ceil_log2(self.k)

    @property
    def tag_bits(self) -> int:
        return self.idx_bits + 2

    @property
    def f(self) -> int:
        return self.ell + self.tag_bits

    @property
    def nwords(self) -> int:
        return -(-2 * self.k * self.f // self.W)

    @property
    def pad_bit(self) -> int:
        return self.idx_bits

    @property
    def marker_bit(self) -> int:
        return self.idx_bits + 1

    def check(self) -> None:
        if self.k < 1 or self.k & (self.k - 1):
            raise CapacityError(f"k={self.k} is not a power of two")
        if self.ell < 2:
            raise CapacityError("ell must leave at least one payload bit")
        if not 8 <= self.W <= MAX_W:
            raise CapacityError(f"simulated width W={self.W} outside 8..{MAX_W}")
        if self.nwords > MAX_WORDS:
            raise CapacityError(
                f"{2 * self.k} fields of {self.f} bits need {self.nwords} words of {self.W} bits "
                f"(limit {MAX_WORDS})")


@dataclass(frozen=True)
class PackedArray:
    word: int
    layout: Layout
    count: int  # entries before padding

    @property
    def k(self) -> int:
        return self.layout.k

    @property
    def ell(self) -> int:
        return self.layout.ell

    @property
    def W(self) -> int:
        return self.layout.W

    @property
    def nwords(self) -> int:
        return self.layout.nwords

    def field(self, i: int) -> int:
        lay = self.layout
        return (self.word >> (i * lay.f)) & ((1 << lay.f) - 1)

    def fields(self) -> list:
        return [self.field(i) for i in range(self.k)]

    def __str__(self):
        lay = self.layout
        parts = []
        for fld in self.fields():
            pay = fld >> lay.tag_bits
            tags = fld & ((1 << lay.tag_bits) - 1)
            parts.append(f"{pay:x}/{tags:x}")
        return "(" + ", ".join(parts) + ")"


def pack(values: Sequence[int], W: int = DEFAULT_W, ell: Optional[int] = None) -> PackedArray:
    """Pack (ell-1)-bit values; pads to a power of two with flagged copies of the last value."""
    values = [int(v) for v in values]
    if ell is None:
        ell = max([v.bit_length() for v in values] + [1]) + 1
    m = len(values)
    k = 1
    while k < max(m, 1):
        k <<= 1
    lay = Layout(k, ell, W)
    lay.check()
    limit = 1 << (ell - 1)
    for v in values:
        if not 0 <= v < limit:
            raise CapacityError(f"value {v:#x} exceeds {ell - 1} payload bits")
    fill = values[-1] if values else 0
    word = 0
    f, tb = lay.f, lay.tag_bits
    for i in range(k):
        if i < m:
            fld = (values[i] << tb) | i
        else:
            fld = (fill << tb) | (1 << lay.pad_bit) | i
        word |= fld << (i * f)
    return PackedArray(word, lay, m)


def unpack(pa: PackedArray) -> list:
    """Payloads in field order, padding dropped."""
    lay = pa.layout
    out = []
    for fld in pa.fields():
        if not (fld >> lay.pad_bit) & 1:
            out.append(fld >> lay.tag_bits)
    return out


def index_tags(pa: PackedArray) -> list:
    lay = pa.layout
    return [fld & ((1 << lay.idx_bits) - 1) for fld in pa.fields()
            if not (fld >> lay.pad_bit) & 1]


@lru_cache(maxsize=None)
def _replicate(pattern: int, nfields: int, f: int) -> int:
    out = 0
    for i in range(nfields):
        out |= pattern << (i * f)
    return out


@lru_cache(maxsize=None)
def sort_network(nfields: int, f: int) -> tuple:
    """Per-stage (shift, M, T, DIRM) masks for bitonic sorting ``nfields`` fields.

    ``M`` selects the key bits of the lower partner of every compare-exchange
    pair, ``T`` their test bits, ``DIRM`` the key bits of lower partners that
    sit in a descending block.
    """
    key = (1 << (f - 1)) - 1
    test = 1 << (f - 1)
    stages = []
    size = 2
    while size <= nfields:
        j = size // 2
        while j >= 1:
            M = T = D = 0
            for i in range(nfields):
                if i & j:
                    continue
                M |= key << (i * f)
                T |= test << (i * f)
                if i & size:
                    D |= key << (i * f)
            stages.append((j * f, M, T, D))
            j //= 2
        size *= 2
    return tuple(stages)


OPS_PER_STAGE = 15


def _sort_word(word: int, nfields: int, f: int, nwords: int, counter: Optional[OpCounter]) -> int:
    faulty = "bitonic" in _FAULTS
    for shift, M, T, DIRM in sort_network(nfields, f):
        A = word & M
        B = (word >> shift) & M
        D = ((A | T) - B) & T
        ge = D - (D >> (f - 1))
        swap = ge if faulty else ge ^ DIRM
        X = (A ^ B) & swap
        A ^= X
        B ^= X
        word = A | (B << shift)
    if counter is not None:
        counter.ops += OPS_PER_STAGE * len(sort_network(nfields, f)) * nwords
    return word


def bitonic_sort(pa: PackedArray, counter: Optional[OpCounter] = None) -> PackedArray:
    """Ascending sort by (payload, tags); O(log^2 k) word operations."""
    lay = pa.layout
    return PackedArray(_sort_word(pa.word, lay.k, lay.f, lay.nwords, counter), lay, pa.count)


def xor_broadcast(pa: PackedArray, v: int, counter: Optional[OpCounter] = None) -> PackedArray:
    """XOR ``v`` into every payload with one multiply and one XOR."""
    lay = pa.layout
    if not 0 <= v < (1 << (lay.ell - 1)):
        raise OverflowError(f"{v:#x} does not fit the {lay.ell - 1}-bit payload")
    ones = _replicate(1 << lay.tag_bits, lay.k, lay.f)
    if counter is not None:
        counter.ops += 2 * lay.nwords
    return PackedArray(pa.word ^ (v * ones), lay, pa.count)


@lru_cache(maxsize=None)
def _listing_constants(k: int, f: int, tag_bits: int, idx_bits: int) -> tuple:
    n2 = 2 * k
    marker = 1 << (idx_bits + 1)
    payload = ((1 << (f - 1)) - 1) & ~((1 << tag_bits) - 1)
    markers_k = _replicate(marker, k, f)
    pm = _replicate(payload | marker, n2 - 1, f)
    pos = 0
    for i in range(n2):
        pos |= i << (i * f)
    topfix = payload << ((n2 - 1) * f)
    return markers_k, pm, pos | topfix


def intersect_listing(pa: PackedArray, pb: PackedArray,
                      counter: Optional[OpCounter] = None) -> List[Tuple[int, int]]:
    """All index pairs (i, j) with a_i == b_j, padding excluded.

    Concatenate with marker bits, sort, XOR each field with its upper
    neighbour, sort the differences (marker as low key bit), binary-search
    the first (payload 0, marker 1) entry, then read out the runs of equal
    values on either side of each boundary it names.
    """
    lay = pa.layout
    if pb.layout != lay:
        raise CapacityError("intersect_listing needs two arrays with the same layout")
    k, f, tb, ib = lay.k, lay.f, lay.tag_bits, lay.idx_bits
    nw = lay.nwords
    n2 = 2 * k
    fmask = (1 << f) - 1
    markers_k, pm, pos_top = _listing_constants(k, f, tb, ib)
    ops = 0

    c = pa.word | ((pb.word | markers_k) << (k * f))
    ops += 3
    c = _sort_word(c, n2, f, nw, None)
    ops += OPS_PER_STAGE * len(sort_network(n2, f))
    d = ((c ^ (c >> f)) & pm) | pos_top
    ops += 4
    d = _sort_word(d, n2, f, nw, None)
    ops += OPS_PER_STAGE * len(sort_network(n2, f))

    # keys below this are (payload 0, marker 0); matches are exactly key >> (ib+1) == 1
    target = 1 << (ib + 1)
    lo, hi = 0, n2
    while lo < hi:
        mid = (lo + hi) // 2
        ops += 2
        if (d >> (mid * f)) & fmask < target:
            lo = mid + 1
        else:
            hi = mid
    pairs = []
    pos_mask = (1 << (ib + 1)) - 1
    i = lo
    while i < n2:
        ops += 2
        fld = (d >> (i * f)) & fmask
        if fld >> (ib + 1) != 1:
            break
        p = fld & pos_mask
        value = ((c >> (p * f)) & fmask) >> tb
        left, right = [], []
        q = p
        while q >= 0:
            ops += 2
            g = (c >> (q * f)) & fmask
            if g >> tb != value or (g >> (ib + 1)) & 1:
                break
            if not (g >> ib) & 1:
                left.append(g & ((1 << ib) - 1))
            q -= 1
        q = p + 1
        while q < n2:
            ops += 2
            g = (c >> (q * f)) & fmask
            if g >> tb != value or not (g >> (ib + 1)) & 1:
                break
            if not (g >> ib) & 1:
                right.append(g & ((1 << ib) - 1))
            q += 1
        pairs.extend((x, y) for x in left for y in right)
        i += 1
    if counter is not None:
        counter.ops += ops * nw
    pairs.sort()
    return pairs


def sort_op_count(k: int, f: int, nwords: int = 1) -> int:
    """Exact simulated-word cost of one packed bitonic sort of k fields."""
    return OPS_PER_STAGE * len(sort_network(k, f)) * nwords
