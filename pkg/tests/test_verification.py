import pytest

from qchan.verification import SUITES, run_suite, sandwich_ratios


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes_with_few_trials(suite):
    results = run_suite(suite, trials=20, seed=3)
    assert results
    for r in results:
        assert r.passed, r.line()
        assert r.line().startswith("[PASS]")


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_sandwich_ratios_range():
    vals = sandwich_ratios(0.5, 200, seed=0)
    assert len(vals) > 150
    assert vals.min() >= 0 and vals.max() <= 0.5**0.5 + 1e-9
