"""One check per acceptance criterion, each printing a PASS/FAIL line.

The lines appear in the "acceptance criteria" section of the pytest summary;
``bngkit selftest`` runs the same suite outside pytest.
"""

import pytest

from bngkit import acceptance

SEED = 0


@pytest.fixture(scope="module")
def outcomes():
    return {o.number: o for o in acceptance.run_all(SEED)}


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(outcomes, number, acceptance_log):
    outcome = outcomes[number]
    print(outcome.line())
    acceptance_log.append(outcome.line())
    assert outcome.passed, outcome.detail


def test_criteria_are_deterministic_under_a_fixed_seed():
    first = acceptance.commutator_witnesses(7, cases=20).detail
    assert acceptance.commutator_witnesses(7, cases=20).detail == first
