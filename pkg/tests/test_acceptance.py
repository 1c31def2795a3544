"""Reproduction criteria, one test per criterion.

Each test prints the check's one-line ``[PASS]``/``[FAIL]`` summary (shown even
under output capture) and then asserts it at the stated tolerance.
"""

import pytest

from paratransmon.acceptance import CHECKS


@pytest.mark.parametrize("check", CHECKS, ids=[fn.__name__.removeprefix("check_") for fn in CHECKS])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
