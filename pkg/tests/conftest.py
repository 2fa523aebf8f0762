import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from xor3.core import XorInstance  # noqa: E402

FIVE = [0b0001, 0b0010, 0b0011, 0b1010, 0b1111]


@pytest.fixture
def five():
    return XorInstance.from_words(FIVE, 4)


@pytest.fixture(params=["python", "native"])
def backend(request):
    from xor3._backend import HAVE_NATIVE
    if request.param == "native" and not HAVE_NATIVE:
        pytest.skip("extension not built")
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)
