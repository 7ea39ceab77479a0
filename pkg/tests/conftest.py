import os
import sys

import pytest

from puritydist.solver import solve_4xq

sys.path.insert(0, os.path.dirname(__file__))

# one solve per q for the whole session; acceptance checks read sol.seconds
_SOLUTIONS = {}

# criterion number -> (title, passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def solution(q):
    if q not in _SOLUTIONS:
        _SOLUTIONS[q] = solve_4xq(q)
    return _SOLUTIONS[q]


@pytest.fixture(scope='session')
def solved():
    return solution


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line('criterion %d %-28s %s  %s'
                                    % (n, title, 'PASS' if ok else 'FAIL',
                                       detail))
