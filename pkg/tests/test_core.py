import pytest
from hypothesis import given, settings, strategies as st

from oracles import has_triple, triples
from xor3.core import (InstanceError, XorInstance, brute_force_solve, count_all_solutions,
                       derive_seed, format_instance, generate_instance, generate_msb_instance,
                       parse_instance, read_instance, write_instance)


def inst(words, w=4):
    return XorInstance.from_words(words, w)


def test_brute_five(five):
    res = brute_force_solve(five)
    assert tuple(res) == (0b0001, 0b0010, 0b0011)
    assert res.check(five)


def test_brute_zero_word():
    x = inst([0])
    assert tuple(brute_force_solve(x)) == (0, 0, 0)
    assert brute_force_solve(x, distinct=True) is None


def test_brute_none():
    assert brute_force_solve(inst([1, 2, 4])) is None


@pytest.mark.parametrize("words,expected", [([1, 2, 3], 6), ([0], 1), ([1, 2, 4], 0)])
def test_count_examples(words, expected):
    assert count_all_solutions(inst(words)) == expected


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(0, 255), min_size=1, max_size=24), st.booleans())
def test_brute_matches_literal_oracle(words, distinct):
    x = inst(words, 8)
    assert (brute_force_solve(x, distinct) is not None) == has_triple(words, distinct)
    assert count_all_solutions(x, distinct) == len(triples(list(words), distinct))


def test_generate_planted_and_solution_free():
    p = generate_instance(3, 8, 11, "planted")
    assert p.n == 3 and brute_force_solve(p) is not None
    f = generate_instance(100, 40, 11, "solution_free")
    assert count_all_solutions(f) == 0


def test_generate_pigeonhole():
    with pytest.raises(InstanceError):
        generate_instance(5, 2, 0, "random")


def test_generate_deterministic():
    a = generate_instance(50, 32, 9, "random")
    assert a == generate_instance(50, 32, 9, "random")
    assert a != generate_instance(50, 32, 10, "random")


def test_msb_instance_is_solution_free():
    x = generate_msb_instance(200, 16, 3)
    assert x.n == 200 and count_all_solutions(x) == 0


def test_normalization_and_duplicates():
    assert inst([3, 1, 2]).words == (1, 2, 3)
    with pytest.raises(InstanceError):
        inst([1, 1])
    with pytest.raises(InstanceError):
        inst([16])
    with pytest.raises(InstanceError):
        XorInstance((2, 1), 4)


def test_file_round_trip(tmp_path, five):
    path = tmp_path / "x.txt"
    write_instance(five, path)
    assert path.read_text() == "3XOR v1 n=5 w=4\n1\n2\n3\na\nf\n"
    assert read_instance(path) == five


@pytest.mark.parametrize("text", [
    "", "3XOR v2 n=1 w=4\n1\n", "3XOR v1 n=2 w=4\n1\n", "3XOR v1 n=2 w=4\n2\n1\n",
    "3XOR v1 n=2 w=4\n1\n1\n", "3XOR v1 n=1 w=8\n1\n", "3XOR v1 n=1 w=4\nz\n",
])
def test_parse_rejects(text):
    with pytest.raises(InstanceError):
        parse_instance(text)


@settings(max_examples=50, deadline=None)
@given(st.sets(st.integers(0, (1 << 130) - 1), min_size=1, max_size=10))
def test_format_parse_wide(words):
    x = inst(words, 130)
    assert parse_instance(format_instance(x)) == x


def test_derive_seed_separates_labels():
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert 0 <= derive_seed(2**70, "x") < 2**64
