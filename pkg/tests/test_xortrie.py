import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import has_triple, trie_labels
from xor3.core import InstanceError, XorInstance, generate_instance, generate_msb_instance
from xor3.xortrie import TraversalStats, make_tree, solve_quadratic, traverse, traverse_list

FIVE_DUMP = """\
inner 9
  inner 3
    leaf 1
    inner 1
      leaf 2
      leaf 3
  inner 5
    leaf a
    leaf f
"""


def test_five_nested(five):
    t = make_tree(five)
    assert t.as_nested() == (
        "inner",
        ("inner", ("leaf", 0b0001), 0b0011, ("inner", ("leaf", 0b0010), 0b0001, ("leaf", 0b0011))),
        0b1001,
        ("inner", ("leaf", 0b1010), 0b0101, ("leaf", 0b1111)),
    )


def test_five_dump_golden(five):
    assert make_tree(five).dump() == FIVE_DUMP


def test_singleton_and_pair():
    assert make_tree(XorInstance.from_words([5], 4)).as_nested() == ("leaf", 5)
    assert make_tree(XorInstance.from_words([0, 1], 2)).as_nested() == (
        "inner", ("leaf", 0), 1, ("leaf", 1))


def test_empty_rejected():
    with pytest.raises(InstanceError):
        make_tree(XorInstance((), 4))


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(0, 2**12 - 1), min_size=1, max_size=40))
def test_labels_follow_recursive_definition(words):
    t = make_tree(XorInstance.from_words(words, 12))
    got = []

    def pre(node):
        if node < t.n:
            return
        got.append(t.label(node))
        left, right = t.children(node)
        pre(left)
        pre(right)

    pre(t.root)
    assert got == trie_labels(words)
    assert t.inner_paths_decreasing()


@pytest.mark.parametrize("a,expected", [
    (0b0000, [0b0001, 0b0010, 0b0011, 0b1010, 0b1111]),
    (0b1010, [0b0000, 0b0101, 0b1000, 0b1001, 0b1011]),
    (0b1111, [0b0000, 0b0101, 0b1100, 0b1101, 0b1110]),
])
def test_traverse_five(five, a, expected):
    st_ = TraversalStats()
    assert list(traverse(make_tree(five), a, st_)) == expected
    assert st_.visits == 9


@pytest.mark.parametrize("w", [8, 64, 130])
def test_traverse_sorted_random(w):
    rng = random.Random(w)
    for trial in range(30):
        x = generate_instance(rng.randint(1, 120), w, trial)
        t = make_tree(x)
        a = rng.getrandbits(w)
        ys, visits = traverse_list(t, a)
        assert ys == sorted(a ^ v for v in x)
        assert visits == 2 * x.n - 1


def test_traverse_width_mismatch(five):
    with pytest.raises(InstanceError):
        list(traverse(make_tree(five), 1 << 4))


def test_solve_five(five, backend):
    res = solve_quadratic(five, backend=backend)
    assert res is not None and res.check(five)


def test_solve_none_and_zero(backend):
    assert solve_quadratic(XorInstance.from_words([1, 2, 4], 4), backend=backend) is None
    z = XorInstance.from_words([0], 4)
    assert tuple(solve_quadratic(z, backend=backend)) == (0, 0, 0)
    assert solve_quadratic(z, distinct=True, backend=backend) is None


@settings(max_examples=120, deadline=None)
@given(st.sets(st.integers(0, 255), min_size=1, max_size=30), st.booleans())
def test_solve_matches_oracle(words, distinct):
    x = XorInstance.from_words(words, 8)
    for be in ("python", "native"):
        try:
            res = solve_quadratic(x, distinct, backend=be)
        except RuntimeError:
            continue
        assert (res is not None) == has_triple(words, distinct)
        if res is not None:
            assert res.check(x, distinct)


def test_comparison_count_on_msb_family(backend):
    n = 64
    x = generate_msb_instance(n, 32, 1)
    st_ = TraversalStats()
    assert solve_quadratic(x, stats=st_, backend=backend) is None
    assert st_.visits == n * (2 * n - 1)
    assert st_.comparisons == st_.visits


@pytest.mark.parametrize("w", [64, 65, 200, 512])
def test_backends_agree_on_wide_keys(w):
    pytest.importorskip("xor3._ckernels")
    for s in range(10):
        x = generate_instance(60, w, s, "planted" if s % 2 else "random")
        sa, sb = TraversalStats(), TraversalStats()
        ra = solve_quadratic(x, stats=sa, backend="python")
        rb = solve_quadratic(x, stats=sb, backend="native")
        assert ra == rb and sa == sb
