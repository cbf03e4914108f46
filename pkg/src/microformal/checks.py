"""Single-instance property checks.

Every check draws one random instance from ``rng`` and returns a
:class:`Outcome`.  The verify suites and the test-suite share these.
"""
from __future__ import annotations

from itertools import product
from dataclasses import dataclass, field
from fractions import Fraction

from . import brackets as br
from .geometry import ANTICOTANGENT, COTANGENT, Chart, CoordinateChange, build_phase_chart, induced_momentum_change
from .hamjac import (
    HJField,
    expected_commutator,
    hj_apply,
    hj_commutator_defect,
    morphism_defect,
    odd_hj_residual,
    odd_hj_shift_solution,
    related_hamiltonian,
    relatedness_defect,
)
from .random_instances import (
    rand_coeff,
    random_chart,
    random_hamiltonian_body,
    random_linear_change,
    random_monomial,
    random_poly,
    random_relation,
    random_target_function,
)
from .relations import (
    EVEN_KIND,
    ODD_KIND,
    MicroRelation,
    change_target_coords,
    compose,
    graded_param,
    legendre_change_target_coords,
    pull,
    pullback,
    relation_from_map,
    tangent_pullback,
    tensor_law,
)
from .superalg import SuperPoly, Variable, normalize


@dataclass
class Outcome:
    ok: bool
    witness: dict = field(default_factory=dict)
    skipped: bool = False


def _w(**kw) -> dict:
    return {k: str(v) for k, v in kw.items()}


def _kind(rng) -> str:
    return rng.choice([EVEN_KIND, ODD_KIND])


def _charts(rng, max_even=2, max_odd=2, min_even=1):
    M1 = random_chart(rng, "M1", rng.randint(min_even, max_even), rng.randint(0, max_odd), "x")
    M2 = random_chart(rng, "M2", rng.randint(min_even, max_even), rng.randint(0, max_odd), "y")
    return M1, M2


def _g_parity(kind: str) -> int:
    return 0 if kind == EVEN_KIND else 1


# --------------------------------------------------------------------------
# pullback


def zero_image(rng, kind=None, max_cap=3) -> Outcome:
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, rng.randint(1, max_cap))
    N = rng.randint(0, 3)
    f = pullback(rel, SuperPoly.zero(), N).f
    return Outcome(f == rel.gf.S0, _w(relation=rel.body, order=N, f=f))


def linear_law(rng, kind=EVEN_KIND, max_order=3) -> Outcome:
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, 1, linear=True)
    g = random_target_function(rng, rel, 3, 3)
    N = rng.randint(0, max_order)
    eps = graded_param("eps", N)
    f = pullback(rel, g, N).f
    phi = dict(zip(M2.variables, rel.gf.phi))
    expected = rel.gf.S0 + eps * g.subs(phi)
    return Outcome(f == expected, _w(relation=rel.body, g=g, order=N, f=f, expected=expected))


def quadratic_law(rng, kind=None, max_cap=3) -> Outcome:
    """eps^2 coefficient of Phi*[eps h] is 1/2 S^{ij} (d_j h)(d_i h) at phi."""
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, rng.randint(2, max_cap))
    h = random_target_function(rng, rel, 3, 3)
    phi = dict(zip(M2.variables, rel.gf.phi))
    ys = M2.variables
    dh = [h.diff(y).subs(phi) for y in ys]
    expected = SuperPoly.zero()
    for i in range(len(ys)):
        for j in range(len(ys)):
            expected = expected + rel.gf.coefficient(i, j) * dh[j] * dh[i]
    expected = expected.scale(Fraction(1, 2))
    got = pullback(rel, h, 2).coefficient(2)
    return Outcome(got == expected, _w(relation=rel.body, h=h, got=got, expected=expected))


def derivative_theorem(rng, kind=None, max_order=3) -> Outcome:
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, rng.randint(1, 3))
    g = random_target_function(rng, rel, 2, 2)
    u = random_poly(rng, M2.variables, 2, rng.randint(0, 1), 3)
    N = rng.randint(1, max_order)
    got = tangent_pullback(rel, g, u, N)
    expected = u.subs(pullback(rel, g, N).target_map)
    return Outcome(got == expected, _w(relation=rel.body, g=g, u=u, order=N, got=got, expected=expected))


def truncation_coherence(rng, kind=None) -> Outcome:
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, rng.randint(1, 3))
    g = random_target_function(rng, rel, 2, 2)
    N = rng.randint(0, 2)
    low = pullback(rel, g, N).expansion_terms()
    high = pullback(rel, g, N + 1).expansion_terms()[: N + 1]
    return Outcome(low == high, _w(relation=rel.body, g=g, order=N))


def parity_preserved(rng, kind=None) -> Outcome:
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, rng.randint(1, 3))
    g = random_target_function(rng, rel, 2, 2)
    f = pullback(rel, g, 2).f
    wrong = random_poly(rng, M2.variables, 2, 1 - _g_parity(kind), 2, min_degree=1)
    rejected = True
    if not wrong.is_zero():
        try:
            pullback(rel, wrong, 1)
            rejected = False
        except ValueError:
            pass
    return Outcome(f.has_parity(_g_parity(kind)) and rejected, _w(relation=rel.body, g=g, f=f, wrong=wrong))


# --------------------------------------------------------------------------
# composition


def functoriality(rng, kind=None, max_order=2) -> Outcome:
    """(A o B)*[g] = B*[A*[g]] with A free of a fiber-free part."""
    kind = kind or _kind(rng)
    M1 = random_chart(rng, "M1", rng.randint(1, 2), rng.randint(0, 1), "x")
    M2 = random_chart(rng, "M2", rng.randint(1, 2), rng.randint(0, 1), "y")
    M3 = random_chart(rng, "M3", rng.randint(1, 2), rng.randint(0, 1), "z")
    N = rng.randint(1, max_order)
    B = random_relation(rng, M1, M2, kind, 2)
    A = random_relation(rng, M2, M3, kind, 2, shift=False)
    C = compose(A, B, max(N, 2) + 1)
    g = random_poly(rng, M3.variables, 2, _g_parity(kind), 2, min_degree=1)
    lhs = pullback(C, g, N).f
    rhs = pull(B, pullback(A, g, N).f).f
    return Outcome(lhs == rhs, _w(A=A.body, B=B.body, composite=C.body, g=g, order=N, lhs=lhs, rhs=rhs))


def map_composition_example() -> Outcome:
    M1, M2, M3 = Chart.make("M1", ["x"]), Chart.make("M2", ["y"]), Chart.make("M3", ["z"])
    B = relation_from_map(M1, M2, ["x^2"])
    A = relation_from_map(M2, M3, ["y + 1"])
    C = compose(A, B)
    r = C.fibers[0]
    x = M1["x"]
    expected = (x * x + 1) * r
    return Outcome(C.body == expected, _w(composite=C.body, expected=expected))


# --------------------------------------------------------------------------
# coordinate changes


def tensor_law_check(rng, kind=None, quadratic=False) -> Outcome:
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, 2)
    cc = random_linear_change(rng, M2, "M2n", "u", order=3, quadratic=quadratic)
    new = change_target_coords(rel, cc, 3)
    phi_new, coeffs, _ = tensor_law(rel, cc)
    ok = tuple(new.gf.phi) == tuple(phi_new) and all(
        new.gf.coefficient(i, j) == c for (i, j), c in coeffs.items()
    )
    return Outcome(ok, _w(relation=rel.body, change=[str(c) for c in cc.forward], new=new.body))


def coordinate_coherence(rng, kind=None, quadratic=False) -> Outcome:
    """Pullbacks before and after a target change agree after substituting g."""
    kind = kind or _kind(rng)
    M1, M2 = _charts(rng)
    rel = random_relation(rng, M1, M2, kind, 2)
    cc = random_linear_change(rng, M2, "M2n", "u", order=3, quadratic=quadratic)
    new = change_target_coords(rel, cc, 3)
    gp = random_poly(rng, cc.new.variables, 2, _g_parity(kind), 2, min_degree=1)
    lhs = pullback(new, gp, 2).f
    rhs = pullback(rel, gp.subs(cc.new_in_old), 2).f
    ok = lhs == rhs
    if ok and not quadratic:
        g = random_poly(rng, M2.variables, 2, _g_parity(kind), 2, min_degree=1)
        ok = pullback(new, g.subs(cc.old_in_new), 2).f == pullback(rel, g, 2).f
    return Outcome(ok, _w(relation=rel.body, change=[str(c) for c in cc.forward], g_new=gp))


def legendre_agreement(rng) -> Outcome:
    """Transform route and composition route agree on nondegenerate instances."""
    M1 = random_chart(rng, "M1", rng.randint(1, 2), rng.randint(0, 1), "x")
    M2 = random_chart(rng, "M2", rng.randint(1, 2), 0, "y")
    rel = random_relation(rng, M1, M2, EVEN_KIND, 1, linear=True)
    n = len(M2.variables)
    body = rel.body
    q = rel.fibers
    for i in range(n):
        body = body + (q[i] * q[i]).scale(rng.choice([1, 2, -1, Fraction(1, 2)]))
    if n == 2 and rng.random() < 0.5:
        body = body + (q[0] * q[1]).scale(Fraction(1, 3))
    if rng.random() < 0.5:
        body = body + normalize(random_monomial(rng, q, 3), rand_coeff(rng))
    rel = MicroRelation(rel.source_phase, rel.target_phase, body, 3)
    cc = random_linear_change(rng, M2, "M2n", "u", order=3)
    try:
        a = change_target_coords(rel, cc, 3)
        b = legendre_change_target_coords(rel, cc, 3)
    except ArithmeticError:
        return Outcome(True, skipped=True)
    return Outcome(a.body == b.body, _w(relation=rel.body, composed=a.body, transformed=b.body))


def formal_inverse_roundtrip(rng) -> Outcome:
    M = random_chart(rng, "M", rng.randint(1, 2), rng.randint(0, 2), "y")
    cc = random_linear_change(rng, M, "Mn", "u", order=3, quadratic=True)
    fwd = cc.old_in_new
    inv = cc.new_in_old
    ok = True
    for v, expr in inv.items():
        back = cc.truncate_new(expr.subs(fwd))
        ok = ok and back == SuperPoly.var(v)
    for v, expr in fwd.items():
        back = cc.truncate_old(expr.subs(inv))
        ok = ok and back == SuperPoly.var(v)
    return Outcome(ok, _w(change=[str(c) for c in cc.forward], inverse=[str(c) for c in cc.inverse]))


def momentum_pairing(rng) -> Outcome:
    """Fiber degree is preserved by the induced phase-space substitution."""
    kind = rng.choice([COTANGENT, ANTICOTANGENT])
    M = random_chart(rng, "M", rng.randint(1, 2), rng.randint(0, 2), "y")
    cc = random_linear_change(rng, M, "Mn", "u", order=3, quadratic=rng.random() < 0.5)
    old, new = build_phase_chart(M, kind), build_phase_chart(cc.new, kind)
    b = induced_momentum_change(cc, old, new)
    H = random_hamiltonian_body(rng, old, rng.randint(0, 1), 3, 1, 3)
    H2 = H.subs(b)
    ok = all(H.homogeneous_part(d, old.fibers).is_zero() == H2.homogeneous_part(d, new.fibers).is_zero()
             for d in range(4))
    return Outcome(ok, _w(H=H, transformed=H2))


# --------------------------------------------------------------------------
# brackets


def _phase(rng, kind=None, max_even=2, max_odd=2):
    kind = kind or rng.choice([COTANGENT, ANTICOTANGENT])
    ch = random_chart(rng, "M", rng.randint(1, max_even), rng.randint(0, max_odd), "x")
    return build_phase_chart(ch, kind)


def _arg(rng, chart, parity=None, degree=2):
    parity = rng.randint(0, 1) if parity is None else parity
    f = random_poly(rng, chart.variables, degree, parity, 2, min_degree=1)
    if f.is_zero():
        evens = [v for v in chart.variables if v.parity == parity]
        f = SuperPoly.var(evens[0]) if evens else SuperPoly.var(chart.variables[0])
    return f


def bracket_jacobi(rng, kind=None) -> Outcome:
    ph = _phase(rng, kind)
    par = [rng.randint(0, 1) for _ in range(3)]
    A, B, C = (random_hamiltonian_body(rng, ph, p, 2, 1, 3) for p in par)
    b = lambda F, G: br.canonical_bracket(ph, F, G)
    s = br.bracket_parity_shift(ph)
    a, bb = par[0] + s, par[1] + s
    lhs = b(A, b(B, C))
    rhs = b(b(A, B), C) + b(B, b(A, C)).scale((-1) ** (a * bb))
    sym = b(A, B) == -(b(B, A).scale((-1) ** (a * bb)))
    return Outcome(lhs == rhs and sym, _w(kind=ph.kind, A=A, B=B, C=C))


def nested_direct(rng, kind=None, max_fiber=4) -> Outcome:
    ph = _phase(rng, kind, 3, 2)
    H = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), max_fiber, 1, 4))
    r = rng.randint(0, 4)
    args = [_arg(rng, ph.base) for _ in range(r)]
    a = br.derived_bracket_nested(H, args)
    b = br.derived_bracket_direct(H, args)
    return Outcome(a == b, _w(kind=ph.kind, H=H.body, args=[str(f) for f in args], nested=a, direct=b))


def derived_symmetry(rng, kind=None) -> Outcome:
    ph = _phase(rng, kind)
    H = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), 3, 1, 4))
    r = rng.randint(2, 3)
    args = [_arg(rng, ph.base) for _ in range(r)]
    k = rng.randint(0, r - 2)
    sw = list(args)
    sw[k], sw[k + 1] = sw[k + 1], sw[k]
    d1, d2 = br.argument_degree(H, args[k]), br.argument_degree(H, args[k + 1])
    a = br.derived_bracket_nested(H, args)
    b = br.derived_bracket_nested(H, sw)
    return Outcome(a == b.scale((-1) ** (d1 * d2)), _w(kind=ph.kind, H=H.body, args=[str(f) for f in args], swap=k))


def derived_leibniz(rng, kind=None) -> Outcome:
    """Last slot is a derivation: {.., gh} = {.., g} h +- g {.., h}."""
    ph = _phase(rng, kind)
    Hp = rng.randint(0, 1)
    H = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, Hp, 3, 1, 4))
    r = rng.randint(1, 3)
    head = [_arg(rng, ph.base) for _ in range(r - 1)]
    g, h = _arg(rng, ph.base), _arg(rng, ph.base)
    lhs = br.derived_bracket_nested(H, head + [g * h])
    # parity of the operator f -> {head, f}
    op = (Hp + sum(f.parity for f in head) + r * br.bracket_parity_shift(ph)) % 2
    rhs = br.derived_bracket_nested(H, head + [g]) * h + (g * br.derived_bracket_nested(H, head + [h])).scale(
        (-1) ** (op * g.parity))
    return Outcome(lhs == rhs, _w(kind=ph.kind, H=H.body, head=[str(f) for f in head], g=g, h=h))


def master_family(rng, index: int) -> br.Hamiltonian:
    """Hamiltonians with vanishing master defect."""
    if index == 0:
        ph = build_phase_chart(Chart.make("M", ["x"], ["xi"]), COTANGENT)
        return br.Hamiltonian(ph, "xi*p_x")
    if index == 1:
        ph = build_phase_chart(Chart.make("M", ["x1", "x2"]), ANTICOTANGENT)
        return br.Hamiltonian(ph, "s_x1*s_x2")
    kind = COTANGENT if index % 2 == 0 else ANTICOTANGENT
    ph = _phase(rng, kind, 2, 2)
    parity = 1 if kind == COTANGENT else 0
    for _ in range(50):
        body = SuperPoly.zero()
        for _ in range(3):
            mono = random_monomial(rng, ph.fibers, rng.randint(1, 3))
            t = normalize(mono, rand_coeff(rng))
            if t.has_parity(parity):
                body = body + t
        if index % 3 == 0:
            # constant coefficients plus an odd vector field xi d/dx
            odd = [v for v in ph.base.variables if v.parity]
            even = [v for v in ph.base.variables if not v.parity]
            if kind == COTANGENT and odd and even and body.degree(ph.fibers) <= 1:
                body = body + odd[0] * ph.conjugate(even[0])
        H = br.Hamiltonian(ph, body, parity)
        if not body.is_zero() and br.master_defect(H).is_zero():
            return H
    return br.Hamiltonian(ph, SuperPoly.zero(), parity)


def jacobi_vanishing(rng, H: br.Hamiltonian, max_n: int = 4) -> Outcome:
    for n in range(max_n + 1):
        args = [_arg(rng, H.phase.base) for _ in range(n)]
        J = br.jacobiator(H, args)
        if not J.is_zero():
            return Outcome(False, _w(H=H.body, n=n, args=[str(f) for f in args], J=J))
    return Outcome(True, _w(H=H.body))


def mutated_witness(rng=None) -> Outcome:
    """A Hamiltonian with nonzero master defect has a nonzero Jacobiator."""
    ph = build_phase_chart(Chart.make("M", ["x"], ["xi"]), COTANGENT)
    H = br.Hamiltonian(ph, "xi*p_x + x*p_xi")
    defect = br.master_defect(H).body
    coords = [SuperPoly.var(v) for v in ph.base.variables]
    for n in range(0, 4):
        for idx in product(range(len(coords)), repeat=n):
            args = [coords[i] for i in idx]
            J = br.jacobiator(H, args)
            if not J.is_zero():
                return Outcome(not defect.is_zero(), _w(H=H.body, defect=defect, n=n,
                                                        args=[str(a) for a in args], J=J))
    return Outcome(False, _w(H=H.body, defect=defect))


# --------------------------------------------------------------------------
# Hamilton-Jacobi


def commutator(rng, kind=COTANGENT, max_fiber=3) -> Outcome:
    ph = _phase(rng, kind, 2, 2)
    H = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), max_fiber, 1, 3))
    F = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), max_fiber, 1, 3))
    f0 = random_poly(rng, ph.base.variables, 3, ph.shift, 3)
    got = hj_commutator_defect(H, F, f0)
    expected = expected_commutator(H, F, f0)
    return Outcome(got == expected, _w(kind=kind, H=H.body, F=F.body, f0=f0, defect=got, expected=expected))


def hj_constant_invariance(rng) -> Outcome:
    ph = _phase(rng, COTANGENT)
    H = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), 3, 1, 3))
    f = random_poly(rng, ph.base.variables, 3, 0, 3)
    c = rand_coeff(rng)
    return Outcome(hj_apply(H, f + c) == hj_apply(H, f), _w(H=H.body, f=f))


def odd_shift(rng, index: int) -> Outcome:
    Q = master_family(rng, 2 * index)
    f0 = random_poly(rng, Q.phase.base.variables, 3, 0, 3)
    tau = Variable("tau", 1, "param", nil=2)
    f = odd_hj_shift_solution(Q, f0, tau)
    res = odd_hj_residual(Q, f, tau)
    return Outcome(res.is_zero(), _w(Q=Q.body, f0=f0, f=f, residual=res))


def _affine_relation(rng, kind, quadratic: bool):
    ne, no = rng.randint(1, 2), rng.randint(0, 1)
    M2 = random_chart(rng, "M2", ne, no, "y")
    change = random_linear_change(rng, M2, "M1", "x")  # y = A x
    fk = COTANGENT if kind == EVEN_KIND else ANTICOTANGENT
    sp, tp = build_phase_chart(change.new, fk), build_phase_chart(M2, fk)
    par = _g_parity(kind)
    body = random_poly(rng, change.new.variables, 2, par, 2, min_degree=1)
    for q, c in zip(tp.fibers, change.forward):
        body = body + c * q
    if quadratic:
        for _ in range(3):
            mono = random_monomial(rng, tp.fibers, rng.randint(2, 3))
            t = normalize(mono, rand_coeff(rng))
            if t.has_parity(par):
                body = body + t
    return MicroRelation(sp, tp, body)


def morphism_map_family(rng, kind=None) -> Outcome:
    """Linear map with shift; arbitrary H2, H1 obtained by elimination."""
    kind = kind or _kind(rng)
    rel = _affine_relation(rng, kind, quadratic=False)
    Hp = rng.randint(0, 1)
    H2 = br.Hamiltonian(rel.target_phase, random_hamiltonian_body(rng, rel.target_phase, Hp, 2, 1, 3), Hp)
    H1 = related_hamiltonian(rel, H2)
    g = random_target_function(rng, rel, 2, 2)
    N = rng.randint(1, 2)
    d = morphism_defect(rel, H1, H2, g, N)
    return Outcome(d.is_zero(), _w(relation=rel.body, H1=H1.body, H2=H2.body, g=g, order=N, defect=d))


def morphism_fiber_linear_family(rng, kind=None) -> Outcome:
    """Relation with higher fiber terms; H2 linear in the fibers."""
    kind = kind or _kind(rng)
    rel = _affine_relation(rng, kind, quadratic=True)
    Hp = rng.randint(0, 1)
    H2 = br.Hamiltonian(rel.target_phase, random_hamiltonian_body(rng, rel.target_phase, Hp, 1, 1, 3), Hp)
    H1 = related_hamiltonian(rel, H2)
    g = random_target_function(rng, rel, 2, 2)
    N = rng.randint(1, 2)
    d = morphism_defect(rel, H1, H2, g, N)
    return Outcome(d.is_zero(), _w(relation=rel.body, H1=H1.body, H2=H2.body, g=g, order=N, defect=d))


def classical_relatedness(rng) -> Outcome:
    """For S = phi^i q_i the defect of X^a p_a, Y^i q_i is (X phi^i - Y^i o phi) q_i."""
    M1, M2 = _charts(rng)
    comps = [random_poly(rng, M1.variables, 2, y.parity, 2, min_degree=1) for y in M2.variables]
    rel = relation_from_map(M1, M2, comps)
    sp, tp = rel.source_phase, rel.target_phase
    vpar = rng.randint(0, 1)
    X = [random_poly(rng, M1.variables, 2, (vpar + x.parity) % 2, 2) for x in M1.variables]
    Y = [random_poly(rng, M2.variables, 2, (vpar + y.parity) % 2, 2) for y in M2.variables]
    H1 = br.Hamiltonian(sp, sum((X[a] * p for a, p in enumerate(sp.fibers)), SuperPoly.zero()), vpar)
    H2 = br.Hamiltonian(tp, sum((Y[i] * q for i, q in enumerate(tp.fibers)), SuperPoly.zero()), vpar)
    phi = dict(zip(M2.variables, comps))
    expected = SuperPoly.zero()
    for i, q in enumerate(tp.fibers):
        push = sum((X[a] * comps[i].diff(x) for a, x in enumerate(M1.variables)), SuperPoly.zero())
        expected = expected + (push - Y[i].subs(phi)) * q
    got = relatedness_defect(rel, H1, H2)
    return Outcome(got == expected, _w(map=[str(c) for c in comps], X=[str(c) for c in X],
                                       Y=[str(c) for c in Y], got=got, expected=expected))


# --------------------------------------------------------------------------
# odd kind


def odd_second_order(rng) -> Outcome:
    return quadratic_law(rng, ODD_KIND)


def odd_phi2(rng) -> Outcome:
    """Second-order target-map term on a two-dimensional target."""
    M1 = Chart.make("M1", ["x"], ["xi1", "xi2"])
    M2 = rng.choice([Chart.make("M2", ["y"], ["eta"]), Chart.make("M2", [], ["eta1", "eta2"])])
    rel = random_relation(rng, M1, M2, ODD_KIND, 3, x_degree=2, n_terms=3)
    g = random_poly(rng, M2.variables, 3, 1, 3, min_degree=1)
    if g.is_zero():
        g = SuperPoly.var(M2.variables[-1])
    res = pullback(rel, g, 2)
    corr = res.corrections()
    phi = dict(zip(M2.variables, rel.gf.phi))
    ys = M2.variables
    n = len(ys)
    dg = [g.diff(y).subs(phi) for y in ys]
    ddg = [[g.diff(ys[j]).diff(ys[k]).subs(phi) for k in range(n)] for j in range(n)]
    C = rel.gf.derivative_coefficient
    ok = True
    for i in range(n):
        first = sum((C(i, j) * dg[j] for j in range(n)), SuperPoly.zero())
        second = SuperPoly.zero()
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    sym = (C(i, j) * C(k, l) + C(i, k) * C(j, l)).scale(Fraction(1, 2))
                    second = second + sym * dg[l] * ddg[k][j]
                second = second + (C(i, j, k) * dg[k] * dg[j]).scale(Fraction(1, 2))
        ok = ok and corr[1][ys[i]] == first and corr[2][ys[i]] == second
    return Outcome(ok, _w(relation=rel.body, g=g, phi1=corr[1], phi2=corr[2]))


def literal_sign_commutator(rng) -> Outcome:
    """The literal anticotangent statement with the factor (-1)^H."""
    ph = _phase(rng, ANTICOTANGENT, 2, 2)
    H = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), 3, 1, 3))
    F = br.Hamiltonian(ph, random_hamiltonian_body(rng, ph, rng.randint(0, 1), 3, 1, 3))
    f0 = random_poly(rng, ph.base.variables, 3, 1, 3)
    got = hj_commutator_defect(H, F, f0)
    val = hj_apply(br.canonical_schouten(H, F), f0)
    expected = -val if H.parity else val
    return Outcome(got == expected, _w(H=H.body, F=F.body, f0=f0, defect=got, expected=expected, H_parity=H.parity))


__all__ = [name for name in dir() if not name.startswith("_")]
