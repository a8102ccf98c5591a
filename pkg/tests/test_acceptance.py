"""End-to-end acceptance criteria at the desk scenario (R = 8, L = 2, sigma = 1, omega = 1).

Each criterion prints one PASS/FAIL line; the lines are repeated in the
terminal summary so they are visible without ``-s``.
"""
import pytest

from vortexprop.verify import ACCEPTANCE, Verifier, run_check

RESULTS = []


@pytest.fixture(scope="module")
def verifier():
    return Verifier()


@pytest.mark.parametrize("number, label, method",
                         [(k + 1, label, method) for k, (label, method) in enumerate(ACCEPTANCE)],
                         ids=[label for label, _ in ACCEPTANCE])
def test_acceptance(verifier, number, label, method):
    res = run_check(verifier, method)
    line = f"[{number:2d}] {res.line()}  ({res.seconds:.1f}s)"
    RESULTS.append(line)
    print(line)
    for name, part in res.detail.get("parts", {}).items():
        print(f"      {name}: value={part['value']!r} limit={part['limit']!r} pass={part['pass']}")
    assert res.passed, line
