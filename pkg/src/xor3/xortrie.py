"""Patricia-style trie T_X with XOR labels, ordered XOR traversal and the
deterministic quadratic solver.

Nodes are integers.  Leaves are ``0..n-1`` (leaf ``i`` holds ``keys[i]``),
inner nodes are ``n..2n-2`` with children and labels stored in flat lists
indexed by ``node - n``.  An inner node over the set Y is labelled
``max(Y0) ^ min(Y1)`` where Y0/Y1 split Y on the first bit after the
longest common prefix; the label is ``0^k 1 b`` with ``k = |lcp(Y)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from .core import InstanceError, SolutionTriple, XorInstance

INF = math.inf  # stream sentinel; compares above every finite label


@dataclass
class TraversalStats:
    visits: int = 0
    comparisons: int = 0


@dataclass(frozen=True, eq=False)
class XorTrie:
    keys: tuple
    w: int
    left: tuple
    right: tuple
    labels: tuple
    root: int

    @property
    def n(self) -> int:
        return len(self.keys)

    def is_leaf(self, node: int) -> bool:
        return node < len(self.keys)

    def label(self, node: int) -> int:
        return self.labels[node - len(self.keys)]

    def children(self, node: int) -> Tuple[int, int]:
        i = node - len(self.keys)
        return self.left[i], self.right[i]

    def as_nested(self):
        """Tree as nested tuples: ``("leaf", x)`` / ``("inner", left, label, right)``."""
        n = len(self.keys)
        done = {}
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if node < n:
                done[node] = ("leaf", self.keys[node])
            elif expanded:
                i = node - n
                done[node] = ("inner", done.pop(self.left[i]), self.labels[i], done.pop(self.right[i]))
            else:
                stack.append((node, True))
                stack.append((self.right[node - n], False))
                stack.append((self.left[node - n], False))
        return done[self.root]

    def inner_paths_decreasing(self) -> bool:
        """Labels strictly decrease along every root-to-leaf path."""
        n = len(self.keys)
        stack = [(self.root, INF)]
        while stack:
            node, bound = stack.pop()
            if node < n:
                continue
            i = node - n
            lab = self.labels[i]
            if not lab < bound:
                return False
            stack.append((self.left[i], lab))
            stack.append((self.right[i], lab))
        return True

    def dump(self) -> str:
        """Indented text form, labels and leaves in hex."""
        digits = max(1, (self.w + 3) // 4)
        n = len(self.keys)
        lines = []
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            pad = "  " * depth
            if node < n:
                lines.append(f"{pad}leaf {self.keys[node]:0{digits}x}")
            else:
                i = node - n
                lines.append(f"{pad}inner {self.labels[i]:0{digits}x}")
                stack.append((self.right[i], depth + 1))
                stack.append((self.left[i], depth + 1))
        return "\n".join(lines) + "\n"


def make_tree(instance: XorInstance) -> XorTrie:
    """One pass over the stream (inf, x1, l1, x2, ..., x_n, inf), l_i = x_i ^ x_{i+1}.

    The recursive consume-a-prefix construction is unrolled onto an explicit
    stack: a frame is (sentinel, subtree); a label below the current sentinel
    opens a child call whose sentinel is that label, and on return the label
    becomes the new inner node's label.
    """
    keys = instance.words
    n = len(keys)
    if n == 0:
        raise InstanceError("cannot build a trie over an empty set")
    stream_labels = [INF] + [keys[i] ^ keys[i + 1] for i in range(n - 1)] + [INF]
    left: List[int] = []
    right: List[int] = []
    labels: List[int] = []
    stack = []
    sentinel = stream_labels[0]
    tree = 0
    pos = 1
    while True:
        if stream_labels[pos] < sentinel:
            stack.append((sentinel, tree))
            sentinel = stream_labels[pos]
            tree = pos
            pos += 1
            continue
        if not stack:
            break
        parent_sentinel, parent_tree = stack.pop()
        left.append(parent_tree)
        right.append(tree)
        labels.append(sentinel)
        tree = n + len(labels) - 1
        sentinel = parent_sentinel
    return XorTrie(keys, instance.w, tuple(left), tuple(right), tuple(labels), tree)


def traverse(tree: XorTrie, a: int, stats: Optional[TraversalStats] = None) -> Iterator[int]:
    """Yield a ^ x for x in X in ascending order, visiting each node once."""
    if not 0 <= a < (1 << tree.w):
        raise InstanceError(f"{a:#x} is not a {tree.w}-bit word")
    keys, left, right, labels = tree.keys, tree.left, tree.right, tree.labels
    n = len(keys)
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if stats is not None:
            stats.visits += 1
        if node < n:
            yield a ^ keys[node]
            continue
        i = node - n
        if stats is not None:
            stats.comparisons += 1
        if a ^ labels[i] > a:
            stack.append(right[i])
            stack.append(left[i])
        else:
            stack.append(left[i])
            stack.append(right[i])


def traverse_list(tree: XorTrie, a: int) -> Tuple[list, int]:
    """Materialized traversal: (sorted a ^ X, node visits)."""
    stats = TraversalStats()
    out = list(traverse(tree, a, stats))
    return out, stats.visits


def _solve_python(tree: XorTrie, distinct: bool, stats: Optional[TraversalStats]):
    keys, left, right, labels = tree.keys, tree.left, tree.right, tree.labels
    n = len(keys)
    root = tree.root
    visits = comparisons = 0
    found = None
    for a in keys:
        if distinct and a == 0:
            continue
        # inline traversal interleaved with the merge against sorted X
        stack = [root]
        j = 0
        x = keys[0]
        while stack:
            node = stack.pop()
            visits += 1
            if node >= n:
                i = node - n
                comparisons += 1
                if a ^ labels[i] > a:
                    stack.append(right[i])
                    stack.append(left[i])
                else:
                    stack.append(left[i])
                    stack.append(right[i])
                continue
            y = a ^ keys[node]
            while x < y:
                comparisons += 1
                j += 1
                if j == n:
                    break
                x = keys[j]
            if j == n:
                break
            comparisons += 1
            if x == y:
                b = keys[node]
                if not distinct or (a != b and y != a and y != b):
                    found = SolutionTriple(a, b, y)
                    break
        if found is not None:
            break
    if stats is not None:
        stats.visits += visits
        stats.comparisons += comparisons
    return found


def solve_quadratic(instance: XorInstance, distinct: bool = False,
                    stats: Optional[TraversalStats] = None,
                    backend: Optional[str] = None) -> Optional[SolutionTriple]:
    """For each a (ascending), merge traverse(T_X, a) with X; a hit y = x_j gives (a, a^y, y).

    ``stats.comparisons`` counts branch tests plus merge comparisons;
    both backends count identically.
    """
    if instance.n == 0:
        return None
    from . import _backend
    tree = make_tree(instance)
    if _backend.use_native(backend, instance.w):
        return _backend.solve_trie_native(tree, distinct, stats)
    return _solve_python(tree, distinct, stats)
