from __future__ import annotations

import random

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from microformal import brackets as br
from microformal import checks
from microformal.errors import ChartError, ParityError
from microformal.geometry import ANTICOTANGENT, COTANGENT, Chart, build_phase_chart
from microformal.hamjac import (
    HJField,
    expected_commutator,
    hj_apply,
    hj_commutator_defect,
    hj_shift,
    morphism_defect,
    odd_hj_residual,
    odd_hj_shift_solution,
    related_hamiltonian,
    relatedness_defect,
)
from microformal.relations import MicroRelation, relation_from_map
from microformal.superalg import SuperPoly, Variable
from oracles import to_sympy

seeds = st.integers(0, 100_000)

line = build_phase_chart(Chart.make("M", ["x"]), COTANGENT, ["p"])
super_line = build_phase_chart(Chart.make("M", ["x"], ["xi"]), COTANGENT)
odd_line = build_phase_chart(Chart.make("M", ["x"], ["th"]), ANTICOTANGENT)


def H(phase, body):
    return br.Hamiltonian(phase, body)


# -- the shift operator ----------------------------------------------------------


def test_square_momentum_on_cubic():
    assert hj_apply(H(line, "p^2"), "x^3") == line.base.parse("9*x^4")


def test_shift_against_sympy():
    x = sp.Symbol("x")
    f = x**3 + 2 * x
    Hs = lambda xv, pv: xv * pv**2 + 3 * pv
    oracle = sp.expand(Hs(x, sp.diff(f, x)))
    got = hj_apply(H(line, "x*p^2 + 3*p"), "x^3 + 2*x")
    assert to_sympy(got, {"x": x}) == oracle


def test_fiber_free_hamiltonian_ignores_f():
    assert hj_apply(H(line, "x^2 + 5"), "x^3") == line.base.parse("x^2 + 5")


def test_operator_is_linear_in_H():
    f = line.base.parse("x^2 - x")
    a, b = H(line, "x*p"), H(line, "p^2")
    both = H(line, "x*p + 3*p^2")
    assert hj_apply(both, f) == hj_apply(a, f) + hj_apply(b, f).scale(3)


def test_shift_parameter_must_match_parity():
    Hm = H(line, "p^2")
    eps = Variable("eps", 0, "param", nil=2)
    out = hj_shift(Hm, line.base.parse("x^2"), eps)
    assert out == line.base.parse("x^2") + SuperPoly.var(eps) * line.base.parse("4*x^2")
    with pytest.raises(ParityError):
        hj_shift(Hm, line.base.parse("x^2"), Variable("tau", 1, "param", nil=2))
    with pytest.raises(ParityError):
        hj_shift(Hm, line.base.parse("x^2"), Variable("e3", 0, "param", nil=3))


def test_anticotangent_operator_acts_on_odd_functions():
    X = HJField(H(odd_line, "x*s_th^2"))
    assert X.function_parity == 1
    assert X.parity == 1
    assert HJField(H(odd_line, "x*s_x*s_th")).parity == 0
    with pytest.raises(ParityError):
        hj_apply(X, "x^2")
    assert hj_apply(H(odd_line, "s_th"), "x*th") == odd_line.base.parse("x")


@given(seeds)
def test_constant_shift_of_f_is_invisible(seed):
    out = checks.hj_constant_invariance(random.Random(seed))
    assert out.ok, out.witness


# -- commutators -------------------------------------------------------------------


def test_commutator_example():
    d = hj_commutator_defect(H(line, "p^2"), H(line, "x^2"), "x^3")
    assert d == line.base.parse("-12*x^3")
    assert d == expected_commutator(H(line, "p^2"), H(line, "x^2"), "x^3")


def test_commutator_with_constant_vanishes():
    assert hj_commutator_defect(H(line, "x*p^3"), H(line, "4"), "x^2").is_zero()


def test_commutator_requires_common_chart():
    with pytest.raises(ChartError):
        hj_commutator_defect(H(line, "p^2"), H(super_line, "p_x"), "x")


@given(seeds, st.sampled_from([COTANGENT, ANTICOTANGENT]))
def test_commutator_is_minus_bracket_shift(seed, kind):
    out = checks.commutator(random.Random(seed), kind)
    assert out.ok, out.witness


def _sign_instance(seed, want_parity):
    rng = random.Random(seed)
    for _ in range(50):
        out = checks.literal_sign_commutator(rng)
        if int(out.witness["H_parity"]) == want_parity and out.witness["defect"] != "0":
            return out
    pytest.skip("no instance with a nonzero defect")


@given(seeds)
@settings(max_examples=20)
def test_plus_sign_form_holds_for_odd_H(seed):
    out = _sign_instance(seed, 1)
    assert out.ok, out.witness


@pytest.mark.xfail(strict=True, reason="the (-1)^H factor disagrees with the computed defect for even H")
def test_plus_sign_form_for_even_H():
    out = _sign_instance(0, 0)
    assert out.ok, out.witness


def test_even_H_counterexample_is_explicit():
    # H = x s_th is even; the defect is -x^2 while [[H, F]] shifts x th to +x^2
    Hm, F = H(odd_line, "x*s_th"), H(odd_line, "x*th")
    f0 = odd_line.base.parse("x*th")
    got = hj_commutator_defect(Hm, F, f0)
    val = hj_apply(br.canonical_schouten(Hm, F), f0)
    assert Hm.parity == 0
    assert val == odd_line.base.parse("x^2")
    assert got == -val


# -- odd shift ---------------------------------------------------------------------


def test_odd_shift_solves_the_flow():
    Q = H(super_line, "xi*p_x")
    tau = Variable("tau", 1, "param", nil=2)
    f = odd_hj_shift_solution(Q, "x^3", tau)
    assert odd_hj_residual(Q, f, tau).is_zero()
    assert f == super_line.base.parse("x^3") + SuperPoly.var(tau) * super_line.base.parse("3*xi*x^2")


def test_odd_shift_with_zero_hamiltonian():
    Q = br.Hamiltonian(super_line, SuperPoly.zero(), 1)
    tau = Variable("tau", 1, "param", nil=2)
    assert odd_hj_shift_solution(Q, "x^2", tau) == super_line.base.parse("x^2")


def test_odd_shift_rejects_non_master():
    with pytest.raises(ValueError):
        odd_hj_shift_solution(H(super_line, "xi*p_x + x*p_xi"), "x^2")
    with pytest.raises(ParityError):
        odd_hj_shift_solution(H(super_line, "p_x^2"), "x^2")


@given(seeds, st.integers(0, 4))
@settings(max_examples=20)
def test_odd_shift_family(seed, index):
    out = checks.odd_shift(random.Random(seed), index)
    assert out.ok, out.witness


# -- relatedness and morphisms ------------------------------------------------------


def _doubling():
    M1, M2 = Chart.make("M1", ["x"]), Chart.make("M2", ["y"])
    sp_, tp = build_phase_chart(M1, COTANGENT, ["p"]), build_phase_chart(M2, COTANGENT, ["q"])
    return relation_from_map(sp_, tp, [M1.parse("2*x")])


def test_doubling_map_relates_quadratic_momenta():
    rel = _doubling()
    H1 = H(rel.source_phase, "1/4*p^2")
    H2 = H(rel.target_phase, "q^2")
    assert relatedness_defect(rel, H1, H2).is_zero()
    assert related_hamiltonian(rel, H2).body == H1.body
    assert not relatedness_defect(rel, H(rel.source_phase, "p^2"), H2).is_zero()


def test_equal_constants_are_related():
    rel = _doubling()
    assert relatedness_defect(rel, H(rel.source_phase, "3"), H(rel.target_phase, "3")).is_zero()


def test_relatedness_rejects_mixed_parity():
    M1, M2 = Chart.make("M1", ["x"], ["xi"]), Chart.make("M2", ["y"], ["eta"])
    rel = relation_from_map(M1, M2, [M1.parse("x"), M1.parse("xi")])
    with pytest.raises(ParityError):
        relatedness_defect(rel, H(rel.source_phase, "p_x"), H(rel.target_phase, "eta*p_y"))


def test_morphism_example():
    rel = _doubling()
    H1, H2 = H(rel.source_phase, "1/4*p^2"), H(rel.target_phase, "q^2")
    assert morphism_defect(rel, H1, H2, "y^3 + y", order=2).is_zero()
    with pytest.raises(ValueError):
        morphism_defect(rel, H(rel.source_phase, "p^2"), H2, "y^2")


def test_morphism_with_quadratic_relation():
    M1, M2 = Chart.make("M1", ["x"]), Chart.make("M2", ["y"])
    sp_, tp = build_phase_chart(M1, COTANGENT, ["p"]), build_phase_chart(M2, COTANGENT, ["q"])
    rel = MicroRelation(sp_, tp, "x*q + x^2 + q^2")
    H2 = H(tp, "y*q")
    H1 = related_hamiltonian(rel, H2)
    assert relatedness_defect(rel, H1, H2).is_zero()
    assert morphism_defect(rel, H1, H2, "y^2", order=2).is_zero()


@given(seeds)
@settings(max_examples=15)
def test_morphism_map_family(seed):
    out = checks.morphism_map_family(random.Random(seed))
    assert out.ok, out.witness


@given(seeds)
@settings(max_examples=15)
def test_morphism_fiber_linear_family(seed):
    out = checks.morphism_fiber_linear_family(random.Random(seed))
    assert out.ok, out.witness


@given(seeds)
@settings(max_examples=30)
def test_classical_vector_fields(seed):
    out = checks.classical_relatedness(random.Random(seed))
    assert out.ok, out.witness
