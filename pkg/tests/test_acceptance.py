"""Acceptance criteria 1-12, each at its stated tolerance.

Every criterion prints exactly one ``[PASS]``/``[FAIL]`` line.  Run directly
with ``python tests/test_acceptance.py`` for the lines alone, or through
pytest, where they appear in the verbose log.
"""

import pytest

from pertdet.checks import CHECKS, CheckResult

TITLES = {
    1: "HS closed form",
    2: "series/det2 agreement",
    3: "alpha bracket",
    4: "two-sided HS bounds",
    5: "trace identities",
    6: "KdV alpha conservation",
    7: "NLS and Hirota alpha conservation",
    8: "integrator certification",
    9: "Besov constants",
    10: "D diagnostic envelope",
    11: "fallacy demo",
    12: "X/Y equivalence stability",
}


def evaluate(number: int) -> tuple[bool, str]:
    """Run criterion ``number`` and return (passed, one-line summary)."""
    out = CHECKS[number]()
    results = out if isinstance(out, list) else [out]
    passed = all(r.passed for r in results)
    parts = "; ".join(f"{r.name}: measured={r.measured:.6g} threshold={r.threshold:.6g}"
                      for r in results)
    seconds = sum(r.seconds for r in results)
    status = "PASS" if passed else "FAIL"
    return passed, f"[{status}] criterion {number} ({TITLES[number]}) {parts} ({seconds:.1f}s)"


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    passed, line = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


def test_registry_is_complete():
    assert sorted(CHECKS) == list(range(1, 13))
    assert all(callable(fn) for fn in CHECKS.values())
    assert CheckResult("x", True, 0.0, 1.0).line().startswith("[PASS] x")


if __name__ == "__main__":
    import sys
    outcomes = []
    for n in sorted(CHECKS):
        ok, text = evaluate(n)
        outcomes.append(ok)
        print(text, flush=True)
    sys.exit(0 if all(outcomes) else 1)
