"""Instance model, solution conventions, generators and the brute-force oracle.

Keys are plain Python ints. A ``w``-bit key is the integer whose binary
expansion (MSB first, padded to ``w`` digits) is the bit string, so
lexicographic order on strings is integer order.
"""

from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

MAX_WIDTH = 512
SOLUTION_FREE_RETRIES = 200


class InstanceError(ValueError):
    """Raised for malformed or infeasible instances."""


class SolutionTriple(NamedTuple):
    a: int
    b: int
    c: int

    def check(self, instance: "XorInstance", distinct: bool = False) -> bool:
        return is_solution(self.a, self.b, self.c, instance.members, distinct)


def is_solution(a: int, b: int, c: int, members, distinct: bool = False) -> bool:
    """True iff ``a ^ b == c`` with all three in ``members`` under the convention."""
    if a ^ b != c or a not in members or b not in members or c not in members:
        return False
    if distinct and (a == b or a == c or b == c):
        return False
    return True


@dataclass(frozen=True)
class XorInstance:
    """A set of ``n`` distinct ``w``-bit words, stored ascending."""

    words: tuple
    w: int

    def __post_init__(self):
        if not 1 <= self.w <= MAX_WIDTH:
            raise InstanceError(f"width {self.w} outside 1..{MAX_WIDTH}")
        limit = 1 << self.w
        prev = -1
        for x in self.words:
            if not 0 <= x < limit:
                raise InstanceError(f"word {x:#x} does not fit in {self.w} bits")
            if x <= prev:
                raise InstanceError("words must be distinct and ascending")
            prev = x

    @classmethod
    def from_words(cls, words: Iterable[int], w: int) -> "XorInstance":
        """Normalize an arbitrary iterable; duplicates are an error."""
        words = list(words)
        uniq = sorted(set(words))
        if len(uniq) != len(words):
            raise InstanceError("duplicate words in input")
        return cls(tuple(uniq), w)

    @property
    def n(self) -> int:
        return len(self.words)

    @cached_property
    def members(self) -> frozenset:
        return frozenset(self.words)

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def brute_force_solve(instance: XorInstance, distinct: bool = False) -> Optional[SolutionTriple]:
    """Reference oracle: pair scan with set membership, O(n^2)."""
    members = instance.members
    words = instance.words
    for i, a in enumerate(words):
        if distinct and a == 0:
            continue
        for b in words[i:]:
            c = a ^ b
            if c in members:
                if distinct and (a == b or c == a or c == b):
                    continue
                return SolutionTriple(a, b, c)
    return None


def count_all_solutions(instance: XorInstance, distinct: bool = False) -> int:
    """Number of ordered triples (a, b, c) in X^3 with a ^ b == c."""
    members = instance.members
    total = 0
    for a in instance.words:
        for b in instance.words:
            c = a ^ b
            if c in members and not (distinct and (a == b or c == a or c == b)):
                total += 1
    return total


# -- randomness ---------------------------------------------------------------

def derive_seed(seed: int, *labels) -> int:
    """Deterministic 64-bit child seed from a parent seed and labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed).to_bytes(16, "little", signed=False))
    for lab in labels:
        h.update(b"\x00" + str(lab).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int) -> random.Random:
    return random.Random(int(seed) & ((1 << 64) - 1))


def default_seed() -> int:
    raw = os.environ.get("XOR3_SEED")
    return int(raw, 0) if raw else 0


def _distinct_words(rng: random.Random, n: int, w: int, exclude=()) -> list:
    space = 1 << w
    excluded = set(exclude)
    if n + len(excluded) > space:
        raise InstanceError(f"cannot draw {n} distinct {w}-bit words")
    if space <= 4 * (n + len(excluded)) + 64:
        pool = [x for x in range(space) if x not in excluded]
        return rng.sample(pool, n)
    out = set()
    while len(out) < n:
        x = rng.getrandbits(w)
        if x not in excluded:
            out.add(x)
    result = sorted(out)
    rng.shuffle(result)
    return result


def generate_instance(n: int, w: int, seed: int, mode: str = "random",
                      distinct: bool = False,
                      retries: int = SOLUTION_FREE_RETRIES) -> XorInstance:
    """Draw a random instance.

    ``mode`` is ``random``, ``planted`` (one triple injected) or
    ``solution_free`` (rejection-sampled until the oracle finds nothing).
    """
    if n < 1:
        raise InstanceError("n must be >= 1")
    if not 1 <= w <= MAX_WIDTH:
        raise InstanceError(f"width {w} outside 1..{MAX_WIDTH}")
    if n > (1 << w):
        raise InstanceError(f"cannot draw {n} distinct words from {1 << w}")
    rng = make_rng(derive_seed(seed, "gen", n, w, mode))
    if mode == "random":
        return XorInstance.from_words(_distinct_words(rng, n, w), w)
    if mode == "planted":
        if n < 3 or w < 2:
            raise InstanceError("planted instances need n >= 3 and w >= 2")
        while True:
            a = rng.getrandbits(w)
            b = rng.getrandbits(w)
            c = a ^ b
            if len({a, b, c}) == 3 and 0 not in (a, b, c):
                break
        rest = _distinct_words(rng, n - 3, w, exclude=(a, b, c))
        words = rest + [a, b, c]
        rng.shuffle(words)
        return XorInstance.from_words(words, w)
    if mode == "solution_free":
        for _ in range(retries):
            inst = XorInstance.from_words(_distinct_words(rng, n, w), w)
            if brute_force_solve(inst, distinct) is None:
                return inst
        raise InstanceError(
            f"no solution-free instance after {retries} draws (n={n}, w={w}); "
            "solutions are too dense at this width")
    raise InstanceError(f"unknown mode {mode!r}")


def generate_msb_instance(n: int, w: int, seed: int) -> XorInstance:
    """Solution-free by construction: every word has its top bit set.

    The XOR of two such words has the top bit clear, so it is never a member.
    Used where rejection sampling would cost a quadratic oracle call.
    """
    if w < 1 or n > (1 << (w - 1)):
        raise InstanceError(f"cannot draw {n} words with the top bit set at w={w}")
    rng = make_rng(derive_seed(seed, "msb", n, w))
    top = 1 << (w - 1)
    lows = _distinct_words(rng, n, w - 1) if w > 1 else [0]
    return XorInstance.from_words([top | x for x in lows], w)


# -- file format ---------------------------------------------------------------

HEADER = "3XOR v1"


def format_instance(instance: XorInstance) -> str:
    digits = (instance.w + 3) // 4
    lines = [f"{HEADER} n={instance.n} w={instance.w}"]
    lines += [f"{x:0{digits}x}" for x in instance.words]
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> XorInstance:
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise InstanceError("empty instance file")
    head = lines[0].split()
    if head[:2] != HEADER.split() or len(head) != 4:
        raise InstanceError(f"bad header {lines[0]!r}")
    try:
        fields = dict(tok.split("=", 1) for tok in head[2:])
        n, w = int(fields["n"]), int(fields["w"])
    except (KeyError, ValueError) as exc:
        raise InstanceError(f"bad header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != n:
        raise InstanceError(f"header says n={n} but file has {len(body)} words")
    digits = (w + 3) // 4
    words = []
    for lineno, tok in enumerate(body, start=2):
        if len(tok) != digits or tok != tok.lower():
            raise InstanceError(f"line {lineno}: expected {digits} lowercase hex digits")
        try:
            words.append(int(tok, 16))
        except ValueError as exc:
            raise InstanceError(f"line {lineno}: not hex") from exc
    for i in range(1, len(words)):
        if words[i] == words[i - 1]:
            raise InstanceError(f"line {i + 2}: duplicate word")
        if words[i] < words[i - 1]:
            raise InstanceError(f"line {i + 2}: words not sorted ascending")
    return XorInstance(tuple(words), w)


def read_instance(path) -> XorInstance:
    with open(path) as fh:
        return parse_instance(fh.read())


def write_instance(instance: XorInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_instance(instance))


def to_bits(x: int, w: int) -> str:
    return format(x, f"0{w}b")
