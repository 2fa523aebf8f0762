import numpy as np
import pytest

from xor3 import _backend
from xor3.bench import read_csv, run_series, time_ratios, to_csv


def test_backend_name_env(monkeypatch):
    monkeypatch.setenv("XOR3_BACKEND", "python")
    assert _backend.backend_name() == "python"
    monkeypatch.setenv("XOR3_BACKEND", "auto")
    assert _backend.backend_name() == ("native" if _backend.HAVE_NATIVE else "python")
    with pytest.raises(ValueError):
        _backend.backend_name("gpu")


def test_native_missing_is_error(monkeypatch):
    monkeypatch.setattr(_backend, "HAVE_NATIVE", False)
    with pytest.raises(RuntimeError):
        _backend.backend_name("native")
    assert _backend.backend_name("auto") == "python"


def test_limb_layouts():
    x = (1 << 100) | 5
    limbs = _backend.to_limbs([x], 128)
    assert limbs.shape == (1, 2)
    assert limbs[0].tolist() == [1 << 36, 5]
    assert _backend.lsb_limbs(x, 2).tolist() == [5, 1 << 36]
    assert _backend.to_limbs([], 64).shape == (0, 1)
    assert limbs.dtype == np.uint64


def test_bench_rows_and_ratios():
    rows = run_series(["trie", "rand"], [32, 64], w=32, W=256, repeats=1)
    back = read_csv(to_csv(rows))
    assert len(back) == 4
    trie = [r for r in back if r["algo"] == "trie"]
    assert [int(r["ops"]) for r in trie] == [32 * 63, 64 * 127]
    assert len(time_ratios(back)) == 1
    with pytest.raises(ValueError):
        run_series(["nope"], [8])
