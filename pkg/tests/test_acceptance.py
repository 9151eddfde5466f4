"""Acceptance criteria, one test per criterion.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
pytest terminal summary.  Run this file directly to get just those lines.
"""
import sys

import pytest

from robudom.acceptance import CRITERIA, run_criterion

RESULTS = []


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.key for c in CRITERIA])
def test_criterion(criterion):
    result = run_criterion(criterion)
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    failed = 0
    for c in CRITERIA:
        r = run_criterion(c)
        print(r.line(), flush=True)
        failed += not r.passed
    sys.exit(1 if failed else 0)
