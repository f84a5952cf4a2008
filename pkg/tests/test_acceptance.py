"""Acceptance suite: one PASS/FAIL line per criterion, printed and asserted.

Each criterion is run through the same entry point as ``quadrail verify`` with
the default seed, so the printed line matches the CLI table row.
"""

import pytest

from quadrail.verify import CHECKS, DEFAULT_SEED, run_all


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    (res,) = run_all(seed=DEFAULT_SEED, only=[number])
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
