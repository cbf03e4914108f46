"""Acceptance criteria 1-10 and the ``verify all`` wall-clock budget.

Every check is exact.  One PASS/FAIL line per criterion is collected in
``LINES`` and printed in the terminal summary (see conftest.py).
"""
from __future__ import annotations

import time

import pytest

from microformal.suites import verify

LINES: list[str] = []
BUDGET_SECONDS = 60.0


@pytest.fixture(scope="module")
def full_run():
    start = time.perf_counter()
    report = verify("all", seed=0)
    elapsed = time.perf_counter() - start
    by_name = {f"{r.suite}.{r.name}": r for r in report.results}
    return report, by_name, elapsed


def _criterion(number: int, title: str, results, extra_ok: bool = True, detail: str = "") -> bool:
    ok = extra_ok and all(r.ok and r.failures == 0 for r in results)
    counts = ", ".join(f"{r.suite}.{r.name} {r.instances - r.failures}/{r.instances}" for r in results)
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} [{counts}]"
    if detail:
        line += f" {detail}"
    LINES.append(line)
    print(line)
    return ok


def _need(by_name, name, at_least):
    r = by_name[name]
    assert r.instances >= at_least, f"{name} ran {r.instances} < {at_least} instances"
    return r


def test_criterion_01_zero_image(full_run):
    _, by, _ = full_run
    assert _criterion(1, "zero-image law", [_need(by, "pullback.zero_image", 50)])


def test_criterion_02_linear_relations(full_run):
    _, by, _ = full_run
    assert _criterion(2, "linear-relation law", [_need(by, "pullback.linear_law", 50)])


def test_criterion_03_quadratic_order(full_run):
    _, by, _ = full_run
    assert _criterion(3, "second-order coefficient", [_need(by, "pullback.quadratic_law", 20)])


def test_criterion_04_derivative(full_run):
    _, by, _ = full_run
    assert _criterion(4, "derivative is the pullback along the target map",
                      [_need(by, "pullback.derivative_theorem", 50)])


def test_criterion_05_functoriality(full_run):
    _, by, _ = full_run
    assert _criterion(5, "functoriality",
                      [_need(by, "functorial.functoriality", 20), _need(by, "functorial.map_composition", 1)])


def test_criterion_06_coordinate_change(full_run):
    _, by, _ = full_run
    rs = [
        _need(by, "coords.tensor_law_linear", 20),
        _need(by, "coords.tensor_law_quadratic", 10),
        _need(by, "coords.coherence_linear", 20),
        _need(by, "coords.coherence_quadratic", 10),
    ]
    assert _criterion(6, "coordinate change and tensor law", rs)


def test_criterion_07_commutator(full_run):
    _, by, _ = full_run
    rs = [_need(by, "hamjac.commutator_cotangent", 50), _need(by, "hamjac.commutator_anticotangent", 50)]
    assert _criterion(7, "commutator = minus bracket shift (both kinds, all parities)", rs)


@pytest.mark.xfail(strict=True, reason="the literal (-1)^H factor fails for even H; see the decisions ledger")
def test_criterion_07_literal_schouten_sign(full_run):
    _, by, _ = full_run
    r = by["hamjac.sign_times_schouten"]
    ok = r.failures == 0
    line = (f"{'PASS' if ok else 'FAIL'} criterion  7: literal (-1)^H Schouten form "
            f"[{r.instances - r.failures}/{r.instances} hold; expected failure for even H]")
    LINES.append(line)
    print(line)
    assert ok, r.counterexample


def test_criterion_08_derived_brackets(full_run):
    _, by, _ = full_run
    rs = [
        _need(by, "brackets.nested_direct", 100),
        _need(by, "brackets.master_jacobiators", 10),
        _need(by, "brackets.mutant_witness", 1),
    ]
    assert _criterion(8, "derived brackets and higher Jacobi identities", rs)


def test_criterion_09_morphisms(full_run):
    _, by, _ = full_run
    rs = [
        _need(by, "hamjac.morphism_map_family", 10),
        _need(by, "hamjac.morphism_fiber_linear", 10),
        _need(by, "hamjac.classical_relatedness", 1),
    ]
    assert sum(r.instances for r in rs[:2]) >= 20
    assert _criterion(9, "related Hamiltonians give shift-intertwining pullbacks", rs)


def test_criterion_10_odd_pullback(full_run):
    _, by, _ = full_run
    rs = [_need(by, "odd.quadratic_law", 20), _need(by, "odd.target_map_phi2", 1)]
    assert _criterion(10, "odd-kind second-order formula and target map", rs)


def test_verify_all_within_budget(full_run):
    report, _, elapsed = full_run
    ok = report.ok and elapsed < BUDGET_SECONDS
    line = f"{'PASS' if ok else 'FAIL'} verify all: {'OK' if report.ok else 'FAILED'} in {elapsed:.1f}s (budget {BUDGET_SECONDS:.0f}s)"
    LINES.append(line)
    print(line)
    assert report.ok, report.first_failure()
    assert elapsed < BUDGET_SECONDS
