"""One pass/fail line per acceptance criterion, repeated in the terminal summary."""
import pytest

from eqindex.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda fn: fn.__name__)
def test_criterion(criterion, acceptance_log):
    result = run_criterion(criterion)
    print(result.line())
    acceptance_log.append(result.line())
    assert result.passed, result.detail
