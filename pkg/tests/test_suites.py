from __future__ import annotations

import pytest

from microformal import brackets
from microformal.suites import SUITE_NAMES, commutator_example, properties, verify


def test_suite_table_is_complete():
    for name in SUITE_NAMES:
        assert properties(name)
    with pytest.raises(KeyError):
        properties("nope")


def test_reports_are_deterministic():
    a = verify("brackets", seed=3, scale=0.2).as_dict()
    b = verify("brackets", seed=3, scale=0.2).as_dict()
    assert a == b


def test_seed_changes_instances_not_verdict():
    for seed in (1, 2):
        assert verify("functorial", seed=seed, scale=0.5).ok


def test_hamjac_report_carries_commutator_example():
    assert commutator_example() == "-12x³"
    report = verify("hamjac", scale=0.1)
    assert any("-12x³" in n for n in report.notes)
    info = [r for r in report.results if not r.asserted]
    assert [r.name for r in info] == ["sign_times_schouten"]
    assert report.ok


def test_lines_end_with_verdict():
    lines = verify("odd", scale=0.1).lines()
    assert lines[0].startswith("# verify odd")
    assert lines[-1] == "OK"


@pytest.fixture
def flipped_sign(monkeypatch):
    """Replace the Koszul sign of the direct derived bracket by +1."""
    monkeypatch.setattr(brackets, "_derived_sign", lambda *a, **k: 1)


def test_mutation_is_caught(flipped_sign):
    report = verify("brackets")
    assert not report.ok
    bad = report.first_failure()
    assert bad.name == "nested_direct"
    assert bad.counterexample["nested"] != bad.counterexample["direct"]
    assert any(line.startswith("FAIL brackets.nested_direct") for line in report.lines())


def test_exceptions_count_as_counterexamples(monkeypatch):
    def boom(*a, **k):
        raise ZeroDivisionError("boom")

    monkeypatch.setattr(brackets, "derived_bracket_direct", boom)
    report = verify("brackets", scale=0.1)
    bad = report.first_failure()
    assert bad is not None and "boom" in bad.counterexample["error"]
