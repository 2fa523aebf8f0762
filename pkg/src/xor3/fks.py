"""Two-level static dictionary with constant-time lookups.

Both levels draw from the 1-universal linear family, so the textbook
analysis applies verbatim: the top level is redrawn until the squared
bucket sizes sum to at most 4n, and each bucket of size s gets its own
injective map into 2^ceil(log2 s^2) slots.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import derive_seed
from .hashing import LinearHash, _ceil_log2, eval_batch, sample_linear_hash

MAX_DRAWS = 200


def _draw(w: int, bits: int, seed: int, *labels) -> LinearHash:
    if bits == 0:
        return LinearHash.from_matrix([], w)
    return sample_linear_hash(w, bits, derive_seed(seed, *labels))


class StaticDict:
    """Membership structure over a fixed set of w-bit keys."""

    def __init__(self, keys: Sequence[int], w: int, seed: int = 0):
        keys = list(keys)
        self.w = w
        self.n = n = len(keys)
        top_bits = min(_ceil_log2(max(n, 1)), w)
        for attempt in range(MAX_DRAWS):
            top = _draw(w, top_bits, seed, "fks-top", attempt)
            slots_of = eval_batch(top, keys)
            sizes = np.bincount(np.asarray(slots_of, dtype=np.int64), minlength=1 << top_bits)
            if int((sizes.astype(np.int64) ** 2).sum()) <= 4 * max(n, 1):
                break
        else:
            raise RuntimeError("top-level draw never met the space bound")
        self.top = top
        groups = [[] for _ in range(1 << top_bits)]
        for x, u in zip(keys, slots_of):
            groups[u].append(x)
        self.second = []
        self.offsets = []
        self.slots = []
        for u, grp in enumerate(groups):
            self.offsets.append(len(self.slots))
            if not grp:
                self.second.append(None)
                continue
            bits = min(_ceil_log2(len(grp) ** 2), w)
            for attempt in range(MAX_DRAWS):
                h = _draw(w, bits, seed, "fks-bucket", u, attempt)
                pos = eval_batch(h, grp)
                if len(set(pos)) == len(grp):
                    break
            else:
                raise RuntimeError(f"no injective second-level map for bucket {u}")
            table = [None] * (1 << bits)
            for x, p in zip(grp, pos):
                table[p] = x
            self.second.append(h)
            self.slots.extend(table)

    @property
    def space(self) -> int:
        return len(self.slots)

    def __contains__(self, x: int) -> bool:
        u = self.top(x)
        h = self.second[u]
        if h is None:
            return False
        return self.slots[self.offsets[u] + h(x)] == x

    def __len__(self):
        return self.n
