from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from microformal import checks
from microformal.errors import ChartError, NonFormalError, ParityError
from microformal.geometry import ANTICOTANGENT, COTANGENT, Chart, CoordinateChange, build_phase_chart
from microformal.random_instances import random_chart, random_relation, random_target_function
from microformal.relations import (
    MicroRelation,
    base_change_source,
    change_target_coords,
    compose,
    expansion_terms,
    graded_param,
    identity_relation,
    legendre_change_target_coords,
    pull,
    pullback,
    relation_from_map,
    solve_target_map,
    tangent_pullback,
)
from microformal.superalg import SuperPoly, Variable
from oracles import even_pullback_oracle, from_sympy, to_sympy

seeds = st.integers(0, 100_000)

M1 = Chart.make("M1", ["x"])
M2 = Chart.make("M2", ["y"])


@pytest.fixture
def quad():
    """S = x q + q^2/2 from the line to the line."""
    return MicroRelation(build_phase_chart(M1), build_phase_chart(M2, names=["q"]), "x*q + 1/2*q^2")


def eps_of(result):
    return SuperPoly.var(result.param)


# -- generating functions -------------------------------------------------------


def test_coefficient_accessors():
    ph1 = build_phase_chart(Chart.make("A", ["x"]))
    ph2 = build_phase_chart(Chart.make("B", ["y1", "y2"]), names=["q1", "q2"])
    rel = MicroRelation(ph1, ph2, "x^2 + x*q1 - q2 + 3*q1*q2 + x*q2^2 + q1^3")
    gf = rel.gf
    x = ph1.base["x"]
    assert gf.S0 == x * x
    assert gf.phi == (SuperPoly.var(x), SuperPoly.const(-1))
    assert gf.coefficient(0, 1) == SuperPoly.const(3)
    assert gf.coefficient(1, 1) == x.poly().scale(2)
    assert gf.coefficient(0, 0, 0) == SuperPoly.const(6)


def test_body_parity_matches_kind():
    with_odd = build_phase_chart(Chart.make("A", ["x"], ["xi"]))
    with pytest.raises(ParityError):
        MicroRelation(with_odd, build_phase_chart(M2), "x*p_y + xi")
    odd1 = build_phase_chart(M1, ANTICOTANGENT)
    odd2 = build_phase_chart(M2, ANTICOTANGENT)
    with pytest.raises(ParityError):
        MicroRelation(odd1, odd2, "x")


def test_relation_from_map():
    M = Chart.make("M", ["y1", "y2"])
    rel = relation_from_map(M1, M, ["x", "x^2"])
    q1, q2 = rel.fibers
    x = M1["x"]
    assert rel.body == x * q1 + x * x * q2


def test_identity_relation():
    rel = identity_relation(M1)
    assert rel.body == M1["x"] * rel.fibers[0]


def test_odd_map_needs_odd_shift():
    with pytest.raises(ParityError):
        relation_from_map(M1, M2, ["x"], shift="x", kind="odd")


# -- the quadratic example ---------------------------------------------------------


def test_target_map_of_the_quadratic_example(quad):
    tm = solve_target_map(quad, "y^2", 2)
    (y_expr,) = tm.values()
    eps = next(v for v in y_expr.variables if v.kind == "param")
    x, E = M1["x"].poly(), SuperPoly.var(eps)
    assert y_expr == x + (E * x).scale(2) + (E * E * x).scale(4)


def test_pullback_of_the_quadratic_example(quad):
    res = pullback(quad, "y^2", 2)
    x, E = M1["x"].poly(), eps_of(res)
    assert res.f == E * x * x + (E * E * x * x).scale(2)
    assert res.f.pretty() == "εx² + 2ε²x²"
    # closed form f = eps x^2 / (1 - 2 eps)
    xs, es = sp.symbols("x eps")
    closed = sp.series(es * xs**2 / (1 - 2 * es), es, 0, 3).removeO()
    assert to_sympy(res.f, {"x": xs, "eps": es}) == sp.expand(closed)
    assert expansion_terms(res) == [SuperPoly.zero(), x * x, (x * x).scale(2)]


def test_quadratic_term_matches_second_coefficient(quad):
    res = pullback(quad, "y^2", 2)
    x = M1["x"].poly()
    dh = (x).scale(2)  # dh/dy at y = phi(x) = x
    expected = (quad.gf.coefficient(0, 0) * dh * dh).scale(Fraction(1, 2))
    assert res.coefficient(2) == expected == (x * x).scale(2)


def test_tangent_pullback_of_the_quadratic_example(quad):
    res = pullback(quad, "y^2", 2)
    assert tangent_pullback(quad, "y^2", "y", 2) == res.target_map[M2["y"]]
    assert tangent_pullback(quad, "y^2", "1", 2) == SuperPoly.const(1)


def test_zero_function(quad):
    res = pullback(quad, "0", 3)
    assert res.f == quad.gf.S0
    assert solve_target_map(quad, "0", 3) == {M2["y"]: M1["x"].poly()}
    assert all(t.is_zero() for t in expansion_terms(res)[1:])


def test_linear_relation_with_shift():
    rel = relation_from_map(M1, M2, ["x + x^2"], shift="3*x")
    for N in range(4):
        res = pullback(rel, "y^3 - y", N)
        E = eps_of(res)
        phi = M1.parse("x + x^2")
        assert res.f == M1.parse("3*x") + E * (phi**3 - phi)
        assert all(t.is_zero() for t in expansion_terms(res)[2:])
        assert solve_target_map(rel, "y^3 - y", N) == {M2["y"]: phi}


def test_bindings_satisfy_the_defining_formula(quad):
    res = pullback(quad, "y^2", 3)
    y, q = M2["y"], quad.fibers[0]
    E = eps_of(res)
    S = quad.body.subs({q: res.momenta[q]})
    G = (E * SuperPoly.var(y) ** 2).subs(res.target_map)
    rebuilt = S + G - res.target_map[y] * res.momenta[q]
    assert rebuilt.truncate({res.param: 3}) == res.f


def test_parity_rules():
    odd1, odd2 = Chart.make("A", ["x"], ["xi"]), Chart.make("B", ["y"], ["eta"])
    rel = MicroRelation(build_phase_chart(odd1, ANTICOTANGENT), build_phase_chart(odd2, ANTICOTANGENT),
                        "x*s_y + xi*s_eta")
    assert pullback(rel, "y*eta", 2).f.parity == 1
    with pytest.raises(ParityError):
        pullback(rel, "y^2", 2)
    even = relation_from_map(odd1, odd2, ["x", "xi"])
    with pytest.raises(ParityError):
        pullback(even, "eta", 1)


def test_foreign_symbols_are_rejected(quad):
    with pytest.raises(ChartError):
        pullback(quad, SuperPoly.var(Variable("z")), 1)


@settings(max_examples=12)
@given(seeds)
def test_even_pullback_matches_undetermined_coefficients(seed):
    rng = random.Random(seed)
    A = random_chart(rng, "A", rng.randint(1, 2), 0, "x")
    B = random_chart(rng, "B", rng.randint(1, 2), 0, "y")
    rel = random_relation(rng, A, B, "even", rng.randint(1, 3))
    g = random_target_function(rng, rel, 2, 2)
    N = rng.randint(0, 2)
    res = pullback(rel, g, N)
    names = [v.name for v in A.variables + B.variables + rel.fibers] + [res.param.name]
    syms = {n: sp.Symbol(n) for n in names}
    f_oracle, _ = even_pullback_oracle(
        to_sympy(rel.body, syms), to_sympy(g, syms),
        [syms[v.name] for v in A.variables], [syms[v.name] for v in B.variables],
        [syms[v.name] for v in rel.fibers], syms[res.param.name], N)
    assert to_sympy(res.f, syms) == f_oracle


# -- laws on random instances ----------------------------------------------------


@pytest.mark.parametrize(
    "check",
    [checks.zero_image, checks.linear_law, checks.quadratic_law, checks.derivative_theorem,
     checks.truncation_coherence, checks.parity_preserved],
)
@given(seed=seeds)
def test_pullback_laws(check, seed):
    out = check(random.Random(seed))
    assert out.ok, out.witness


def test_nonformal_argument_is_rejected(quad):
    with pytest.raises(NonFormalError):
        pull(quad, M2.parse("y^2"))


# -- composition -----------------------------------------------------------------------


def test_composition_of_maps():
    assert checks.map_composition_example().ok


def test_identity_is_neutral(quad):
    left = compose(identity_relation(quad.target_phase), quad, 3)
    right = compose(quad, identity_relation(quad.source_phase), 3)
    assert left.body == quad.body
    assert right.body == quad.body


def test_composition_against_two_pullbacks(quad):
    M3 = Chart.make("M3", ["z"])
    A = MicroRelation(build_phase_chart(M2, names=["q"]), build_phase_chart(M3, names=["r"]), "y*r + 1/2*y*r^2")
    C = compose(A, quad, 3)
    lhs = pullback(C, "z^2", 2).f
    rhs = pull(quad, pullback(A, "z^2", 2).f).f
    assert lhs == rhs


def test_composition_needs_formal_input(quad):
    M3 = Chart.make("M3", ["z"])
    A = MicroRelation(build_phase_chart(M2, names=["q"]), build_phase_chart(M3), "y + y*p_z")
    with pytest.raises(NonFormalError):
        compose(A, quad, 2)
    C = compose(A, relation_from_map(M1, build_phase_chart(M2, names=["q"]), ["x"]), 2)
    assert C.body == C.source_phase.base.parse("x") * (1 + SuperPoly.var(C.fibers[0]))


@given(seeds)
def test_functoriality(seed):
    out = checks.functoriality(random.Random(seed))
    assert out.ok, out.witness


# -- coordinate changes -------------------------------------------------------------


def test_scaling_the_target(quad):
    N = Chart.make("N", ["u"])
    cc = CoordinateChange.from_mapping(N, M2, {"y": "2*u"})
    new = change_target_coords(quad, cc, 2)
    assert new.gf.phi == (M1.parse("1/2*x"),)
    assert new.gf.coefficient(0, 0) == SuperPoly.const(Fraction(1, 4))
    assert legendre_change_target_coords(quad, cc, 2).body == new.body


def test_identity_change_keeps_relation(quad):
    N = Chart.make("N", ["u"])
    cc = CoordinateChange.from_mapping(N, M2, {"y": "u"})
    new = change_target_coords(quad, cc, 2, ["q"])
    assert new.body.subs({}) == quad.body.subs({quad.fibers[0]: new.fibers[0]})


def test_source_change_is_substitution():
    N = Chart.make("N", ["u"])
    rel = relation_from_map(M1, M2, ["x"])
    lin = base_change_source(rel, CoordinateChange.from_mapping(N, M1, {"x": "2*u"}))
    assert lin.body == N.parse("2*u") * rel.fibers[0]
    nonlin = base_change_source(rel, CoordinateChange.from_mapping(N, M1, {"x": "u + u^2"}))
    assert nonlin.body == N.parse("u + u^2") * rel.fibers[0]
    same = base_change_source(rel, CoordinateChange.from_mapping(N, M1, {"x": "u"}))
    assert same.body == N.parse("u") * rel.fibers[0]


def test_wrong_chart_for_change(quad):
    N = Chart.make("N", ["u"])
    with pytest.raises(ChartError):
        change_target_coords(quad, CoordinateChange.from_mapping(N, M1, {"x": "u"}))


def test_equality_modulo_constants(quad):
    shifted = MicroRelation(quad.source_phase, quad.target_phase, quad.body + 5)
    assert shifted.equals(quad, modulo_constants=True)
    assert not shifted.equals(quad)


@settings(max_examples=12)
@pytest.mark.parametrize("quadratic", [False, True])
@given(seed=seeds)
def test_tensor_law(quadratic, seed):
    out = checks.tensor_law_check(random.Random(seed), quadratic=quadratic)
    assert out.ok, out.witness


@settings(max_examples=12)
@pytest.mark.parametrize("quadratic", [False, True])
@given(seed=seeds)
def test_change_coherence(quadratic, seed):
    out = checks.coordinate_coherence(random.Random(seed), quadratic=quadratic)
    assert out.ok, out.witness


@given(seeds)
def test_legendre_route_agrees(seed):
    out = checks.legendre_agreement(random.Random(seed))
    assert out.ok, out.witness


# -- odd kind ------------------------------------------------------------------------------


def test_odd_identity_pullback():
    A = Chart.make("A", ["x"], ["xi"])
    rel = identity_relation(A, "odd")
    res = pullback(rel, "x*xi", 3)
    assert res.f == eps_of(res) * A.parse("x*xi")


@given(seeds)
def test_odd_second_order(seed):
    out = checks.odd_second_order(random.Random(seed))
    assert out.ok, out.witness


@given(seeds)
def test_odd_target_map_second_order(seed):
    out = checks.odd_phi2(random.Random(seed))
    assert out.ok, out.witness


def test_graded_param():
    e = graded_param("eps", 2)
    assert e.kind == "param" and e.nil == 3
