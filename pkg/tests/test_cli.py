import json

import pytest

from xor3.bench import read_csv
from xor3.cli import main

FIVE_FILE = "3XOR v1 n=5 w=4\n1\n2\n3\na\nf\n"


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.fixture
def five_file(tmp_path):
    p = tmp_path / "five.txt"
    p.write_text(FIVE_FILE)
    return str(p)


def test_gen_from_list_golden(capsys):
    rc, out, _ = run(capsys, "gen", "--from-list", "0001,0010,0011,1010,1111", "--w", "4")
    assert rc == 0 and out == FIVE_FILE
    rc, out, _ = run(capsys, "gen", "--from-list", "0b0001,0b1111")
    assert rc == 0 and out == "3XOR v1 n=2 w=4\n1\nf\n"


def test_gen_rejects_duplicates(capsys):
    rc, _, err = run(capsys, "gen", "--from-list", "1,1", "--w", "4")
    assert rc == 2 and "duplicate" in err


def test_gen_planted_is_positive(capsys, tmp_path):
    out = tmp_path / "p.txt"
    assert main(["gen", "--n", "50", "--w", "16", "--mode", "planted", "--out", str(out)]) == 0
    rc, line, _ = run(capsys, "solve", str(out), "--algo", "brute")
    assert rc == 0 and line.startswith("SOLUTION")


@pytest.mark.parametrize("algo", ["brute", "trie", "rand", "via-disjointness", "via-intersection"])
def test_solve_five(capsys, five_file, algo):
    rc, out, _ = run(capsys, "solve", five_file, "--algo", algo)
    assert rc == 0
    tag, a, b, c = out.split()
    assert tag == "SOLUTION" and int(a, 16) ^ int(b, 16) == int(c, 16)


@pytest.mark.parametrize("algo", ["brute", "trie", "rand", "via-disjointness", "via-intersection"])
def test_solve_none(capsys, tmp_path, algo):
    p = tmp_path / "free.txt"
    main(["gen", "--n", "60", "--w", "24", "--mode", "solution_free", "--out", str(p)])
    capsys.readouterr()
    rc, out, _ = run(capsys, "solve", str(p), "--algo", algo)
    assert (rc, out) == (0, "NONE\n")


def test_emit_stats(capsys, five_file):
    rc, out, _ = run(capsys, "solve", five_file, "--algo", "rand", "--regime", "long", "--emit-stats")
    lines = out.splitlines()
    assert rc == 0 and lines[0].startswith("SOLUTION")
    stats = json.loads(lines[1])
    assert set(stats) == {"regime", "R", "p", "retries", "colliding_triples_seen", "bound"}
    assert stats["regime"] == "long_word"


def test_json_and_flag_position(capsys, five_file):
    rc, a, _ = run(capsys, "--seed", "4", "solve", five_file, "--format", "json")
    rc2, b, _ = run(capsys, "solve", five_file, "--seed", "4", "--format", "json")
    assert rc == rc2 == 0 and a == b
    a_, b_, c_ = (int(v, 16) for v in json.loads(a)["solution"])
    assert a_ ^ b_ == c_


def test_distinct_flag(capsys):
    assert run(capsys, "solve", "--from-list", "0000", "--w", "4")[1] == "SOLUTION 0 0 0\n"
    assert run(capsys, "solve", "--from-list", "0000", "--w", "4", "--distinct")[1] == "NONE\n"


@pytest.mark.parametrize("argv", [
    ["solve", "--algo", "trie", "--regime", "long", "--from-list", "1,2"],
    ["solve", "--algo", "trie", "--gamma", "0.5", "--from-list", "1,2"],
    ["solve", "--algo", "via-disjointness", "--delta", "0.5", "--from-list", "1,2"],
    ["reduce", "--target", "disjointness", "--gamma", "0.5", "--delta", "0.2", "--from-list", "1,2"],
    ["reduce", "--target", "disjointness", "--gamma", "1.5", "--from-list", "1,2"],
    ["solve"],
    ["solve", "/nonexistent/file"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--algo", "nope"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--simwidth", "4", "verify"])
    assert exc.value.code == 2


def test_width_conflict(capsys, five_file):
    assert run(capsys, "solve", five_file, "--w", "8")[0] == 2


def test_dump_tree(capsys, five_file):
    rc, out, _ = run(capsys, "dump-tree", five_file)
    assert rc == 0 and out.splitlines()[0] == "inner 9"


def test_reduce_json(capsys, tmp_path, five_file):
    out = tmp_path / "off.json"
    assert main(["reduce", five_file, "--target", "disjointness", "--gamma", "0.5",
                 "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert set(d) == {"universe_size", "family_a", "family_b", "queries"}
    assert all(len(q) == 3 for q in d["queries"])
    rc, rep, _ = run(capsys, "reduce", five_file, "--target", "intersection", "--gamma", "0.25",
                     "--report")
    assert rc == 0 and json.loads(rep)["target"] == "intersection"


def test_verify_quick_passes(capsys):
    rc, out, _ = run(capsys, "verify", "--quick", "--trials", "8")
    assert rc == 0 and out.rstrip().endswith("OK")


def test_verify_json(capsys):
    rc, out, _ = run(capsys, "verify", "--quick", "--trials", "4", "--format", "json")
    assert rc == 0 and json.loads(out)["failed"] == 0


def test_verify_fault_fails_with_seed(capsys):
    rc, out, _ = run(capsys, "verify", "--quick", "--trials", "8", "--inject-fault", "bitonic")
    assert rc == 3
    assert "reproduce:" in out and "seed=" in out
    # the fault is cleared afterwards
    assert run(capsys, "verify", "--quick", "--trials", "4")[0] == 0


def test_bench_csv(capsys):
    rc, out, _ = run(capsys, "bench", "--ns", "16,32", "--repeats", "1")
    assert rc == 0 and out.startswith("# schema=1\n")
    rows = read_csv(out)
    assert [(r["algo"], r["n"]) for r in rows] == [
        ("trie", "16"), ("trie", "32"), ("rand", "16"), ("rand", "32")]
    assert rows[0]["node_visits"] == str(16 * 31)


def test_stats_csv(capsys):
    rc, out, _ = run(capsys, "stats", "hashing", "--trials", "3")
    assert rc == 0 and out.splitlines()[1] == "n,m,trials,mean_overfull,bound_m"
    rc, out, _ = run(capsys, "stats", "collisions", "--trials", "2", "--n", "32")
    assert rc == 0 and len(out.splitlines()) == 4


def test_deterministic_given_seed(capsys):
    a = run(capsys, "gen", "--n", "20", "--w", "16", "--seed", "9")[1]
    b = run(capsys, "gen", "--n", "20", "--w", "16", "--seed", "9")[1]
    assert a == b


def test_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("XOR3_SEED", "9")
    a = run(capsys, "gen", "--n", "20", "--w", "16")[1]
    monkeypatch.delenv("XOR3_SEED")
    assert a == run(capsys, "gen", "--n", "20", "--w", "16", "--seed", "9")[1]
