"""Acceptance criteria A1-A12, each at its stated tolerance.

Every criterion prints one PASS/FAIL line; the lines are also collected and
repeated in the terminal summary.  A8-A12 are Monte Carlo runs (marked slow;
A12 takes a few minutes).
"""
import pytest

import conftest
from bbmpaths.verify import CRITERIA, FAST

FAST_NAMES = {name for name, _ in FAST}
PARAMS = [pytest.param(name, marks=() if name in FAST_NAMES else pytest.mark.slow)
          for name in CRITERIA]


@pytest.mark.parametrize("name", PARAMS)
def test_criterion(name):
    from bbmpaths.verify import run_criterion
    res = run_criterion(name)
    line = res.line()
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert res.passed, line
