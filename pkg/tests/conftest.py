import time
from types import SimpleNamespace

import pytest

from modicalab import counterexample


@pytest.fixture(scope="session")
def assembled():
    """The full periodic connection, built once per session (~1 s)."""
    t0 = time.perf_counter()
    pc = counterexample.assemble()
    seconds = time.perf_counter() - t0
    return SimpleNamespace(pc=pc, seconds=seconds)
