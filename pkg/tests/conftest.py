import functools
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402


@functools.lru_cache(maxsize=4)
def grid24(alpha):
    return oracles.grid_values(24, alpha)


@pytest.fixture
def report(capsys):
    """Print a line straight to the terminal, bypassing capture."""

    def emit(line):
        with capsys.disabled():
            print(line, flush=True)

    return emit
