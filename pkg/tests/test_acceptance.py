"""Acceptance criteria with pinned tolerances.

Each test prints a one-line PASS/FAIL summary (visible with ``pytest -s`` or in
the captured output of a failure) and asserts the criterion.
"""
import pytest

from igdyn.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=[fn.__name__ for fn in CRITERIA])
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
