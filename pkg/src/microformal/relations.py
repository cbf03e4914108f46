"""Generating functions, micro-relations and their nonlinear pullbacks.

A relation between phase charts over ``M1`` (coordinates ``x``) and ``M2``
(coordinates ``y``) is given by one function of ``x`` and the target fibers.

* even kind (cotangent fibers ``q``, even ``S(x, q)``)::

      p_a = dS/dx^a,     y^i = (-1)^i dS/dq_i

* odd kind (anticotangent fibers ``y*``, odd ``Sigma(x, y*)``)::

      x*_a = dSigma/dx^a,     y^i = dSigma/dy*_i

A function ``g`` on ``M2`` (even, resp. odd) pulls back to
``f(x) = S(x, q) - y^i q_i + g(y)`` with ``q = dg/dy (y)`` and ``y`` solving
the fixed-point equation above.  ``g`` is graded by a nilpotent ``eps`` so the
iteration stabilizes after finitely many steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ChartError, NonFormalError, ParityError, SingularError
from .geometry import (
    ANTICOTANGENT,
    COTANGENT,
    Chart,
    CoordinateChange,
    PhaseChart,
    build_phase_chart,
    invert_matrix,
    require_on,
)
from .superalg import SuperPoly, Variable, as_poly, parse_poly, truncate

EVEN_KIND = "even"
ODD_KIND = "odd"
_FIBERS_FOR = {EVEN_KIND: COTANGENT, ODD_KIND: ANTICOTANGENT}
_KIND_FOR = {COTANGENT: EVEN_KIND, ANTICOTANGENT: ODD_KIND}


def graded_param(name: str, order: int, parity: int = 0) -> Variable:
    """A formal parameter with ``v**(order+1) == 0``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    return Variable(name, parity, "param", nil=order + 1)


def nilpotency_bound(f: SuperPoly) -> int:
    """Smallest K such that any product of K parameter-divisible terms of f's ideal vanishes."""
    total = 0
    for v in f.variables:
        if v.kind != "param":
            continue
        if v.parity:
            total += 1
        elif v.nil is not None:
            total += v.nil - 1
        else:
            return -1
    return total + 1


@dataclass(frozen=True)
class GeneratingFunction:
    """Function of source base coordinates and target fibers.

    ``body`` is stored as given (after truncation at ``fiber_cap`` when one is
    set).  Coefficients are derived on demand.
    """

    source: PhaseChart
    target: PhaseChart
    body: SuperPoly
    fiber_cap: int | None = None

    def __post_init__(self):
        if self.source.kind != self.target.kind:
            raise ChartError("source and target phase charts must have the same fiber kind")
        body = as_poly(self.body)
        require_on(body, set(self.source.base.variables) | set(self.target.fibers), "generating function")
        want = 0 if self.kind == EVEN_KIND else 1
        if not body.has_parity(want):
            raise ParityError(f"a generating function of {self.kind} kind must be {'odd' if want else 'even'}")
        if self.fiber_cap is not None:
            if self.fiber_cap < 1:
                raise ValueError("fiber cap must be at least 1")
            body = truncate(body, {self.target.fibers: self.fiber_cap})
        object.__setattr__(self, "body", body)

    @property
    def kind(self) -> str:
        return _KIND_FOR[self.source.kind]

    @property
    def fibers(self) -> tuple:
        return self.target.fibers

    def part(self, r: int) -> SuperPoly:
        """Fiber-homogeneous component of degree r."""
        return self.body.homogeneous_part(r, self.fibers)

    @property
    def S0(self) -> SuperPoly:
        return self.body.drop(self.fibers)

    def _fiber(self, i) -> Variable:
        return self.fibers[i] if isinstance(i, int) else i

    def y_sign(self, i: int) -> int:
        if self.kind == ODD_KIND:
            return 1
        return -1 if self.target.base.variables[i].parity else 1

    @property
    def phi(self) -> tuple:
        """Components of the underlying map, ``phi^i = y^i`` at zero fibers."""
        out = []
        for i, q in enumerate(self.fibers):
            d = self.body.diff(q).drop(self.fibers)
            out.append(d if self.y_sign(i) > 0 else -d)
        return tuple(out)

    def coefficient(self, *indices) -> SuperPoly:
        """``S^{i1..ir}``: iterated right derivatives at zero fibers.

        With this normalization ``S_r = (1/r!) S^{i1..ir} q_ir ... q_i1``.
        """
        f = self.body
        for i in indices:
            f = f.rdiff(self._fiber(i))
        return f.drop(self.fibers)

    def derivative_coefficient(self, i, *indices) -> SuperPoly:
        """``(dS/dq_i)`` followed by right derivatives, at zero fibers."""
        f = self.body.diff(self._fiber(i))
        for j in indices:
            f = f.rdiff(self._fiber(j))
        return f.drop(self.fibers)

    def fiber_degree(self) -> int:
        return max(self.body.degree(self.fibers), 0)


class MicroRelation:
    """A formal canonical relation from ``source.base`` to ``target.base``."""

    def __init__(self, source: PhaseChart, target: PhaseChart, body, fiber_cap: int | None = None):
        if isinstance(body, str):
            body = parse_poly(body, source.base.variables + target.fibers)
        self.gf = GeneratingFunction(source, target, as_poly(body), fiber_cap)

    @classmethod
    def from_gf(cls, gf: GeneratingFunction) -> "MicroRelation":
        obj = cls.__new__(cls)
        obj.gf = gf
        return obj

    # views -----------------------------------------------------------
    @property
    def source(self) -> Chart:
        return self.gf.source.base

    @property
    def target(self) -> Chart:
        return self.gf.target.base

    @property
    def source_phase(self) -> PhaseChart:
        return self.gf.source

    @property
    def target_phase(self) -> PhaseChart:
        return self.gf.target

    @property
    def kind(self) -> str:
        return self.gf.kind

    @property
    def body(self) -> SuperPoly:
        return self.gf.body

    @property
    def fiber_cap(self) -> int | None:
        return self.gf.fiber_cap

    @property
    def fibers(self) -> tuple:
        return self.gf.fibers

    def __eq__(self, other):
        return isinstance(other, MicroRelation) and self.gf == other.gf

    def __hash__(self):
        return hash(self.gf)

    def __repr__(self):
        return f"MicroRelation({self.source.name} -> {self.target.name}, {self.kind}, {self.body})"

    # defining equations ---------------------------------------------
    def y_expressions(self) -> dict:
        """``y^i`` as functions of (x, fibers)."""
        return {
            y: (d if self.gf.y_sign(i) > 0 else -d)
            for i, y in enumerate(self.target.variables)
            for d in [self.body.diff(self.fibers[i])]
        }

    def p_expressions(self) -> dict:
        """Source fibers as functions of (x, target fibers)."""
        return {p: self.body.diff(x) for x, p in self.source_phase.pairs}

    def is_fiber_linear(self) -> bool:
        return self.body.degree(self.fibers) <= 1

    def equals(self, other: "MicroRelation", modulo_constants: bool = False) -> bool:
        """Same charts and body; optionally ignore an additive constant."""
        if (self.source_phase, self.target_phase) != (other.source_phase, other.target_phase):
            return False
        diff = self.body - other.body
        return diff.is_constant() if modulo_constants else diff.is_zero()

    def pullback(self, g, order: int = 2) -> "PullbackResult":
        return pullback(self, g, order)


def relation_from_map(
    source: Chart | PhaseChart,
    target: Chart | PhaseChart,
    components: Sequence,
    shift=0,
    kind: str = EVEN_KIND,
) -> MicroRelation:
    """Relation ``S = S0(x) + phi^i(x) fiber_i`` of an ordinary map with a shift."""
    if kind not in _FIBERS_FOR:
        raise ValueError(f"unknown relation kind {kind!r}")
    sp = source if isinstance(source, PhaseChart) else build_phase_chart(source, _FIBERS_FOR[kind])
    tp = target if isinstance(target, PhaseChart) else build_phase_chart(target, _FIBERS_FOR[kind])
    if sp.kind != _FIBERS_FOR[kind] or tp.kind != _FIBERS_FOR[kind]:
        raise ChartError(f"{kind} relations need {_FIBERS_FOR[kind]} phase charts")
    if len(components) != len(tp.base.variables):
        raise ChartError("need one map component per target coordinate")
    shift = sp.base.parse(shift) if isinstance(shift, str) else as_poly(shift)
    sp.base.check(shift, "shift")
    if not shift.has_parity(0 if kind == EVEN_KIND else 1):
        raise ParityError(f"shift of a {kind}-kind relation must be {'even' if kind == EVEN_KIND else 'odd'}")
    body = shift
    for y, q, c in zip(tp.base.variables, tp.fibers, components):
        c = sp.base.parse(c) if isinstance(c, str) else as_poly(c)
        sp.base.check(c, f"component {y.name}")
        if not c.has_parity(y.parity):
            raise ParityError(f"map component for {y.name} must have its parity")
        body = body + c * q
    return MicroRelation(sp, tp, body)


def identity_relation(chart: Chart | PhaseChart, kind: str = EVEN_KIND) -> MicroRelation:
    ph = chart if isinstance(chart, PhaseChart) else build_phase_chart(chart, _FIBERS_FOR[kind])
    return relation_from_map(ph, ph, [SuperPoly.var(v) for v in ph.base.variables], 0, kind)


# --------------------------------------------------------------------------
# pullback


@dataclass
class PullbackResult:
    relation: MicroRelation
    g: SuperPoly
    f: SuperPoly
    target_map: dict
    momenta: dict
    param: Variable | None
    order: int | None
    iterates: list = field(default_factory=list)

    def coefficient(self, r: int) -> SuperPoly:
        """Coefficient of ``eps^r`` in f."""
        if self.param is None or self.order is None:
            raise ValueError("result is not graded by a formal parameter")
        if r < 0 or r > self.order:
            raise ValueError(f"order {r} outside the computed range 0..{self.order}")
        return self.f.coeff(self.param, r)

    def expansion_terms(self) -> list:
        return [self.coefficient(r) for r in range(self.order + 1)]

    def corrections(self) -> list:
        """Per-order pieces ``phi_r[g]`` of the target map, as dicts."""
        return [
            {y: e.coeff(self.param, r) for y, e in self.target_map.items()}
            for r in range(self.order + 1)
        ]

    @property
    def iterations(self) -> int:
        return len(self.iterates)


def expansion_terms(result: PullbackResult, upto: int | None = None) -> list:
    if upto is not None and upto > (result.order or 0):
        raise ValueError(f"order {upto} exceeds computed order {result.order}")
    terms = result.expansion_terms()
    return terms if upto is None else terms[: upto + 1]


def _check_g(rel: MicroRelation, g, what: str = "g") -> SuperPoly:
    g = rel.target.parse(g) if isinstance(g, str) else as_poly(g)
    rel.target.check(g, what)
    want = 0 if rel.kind == EVEN_KIND else 1
    if not g.has_parity(want):
        raise ParityError(
            f"{what} must be {'even' if want == 0 else 'odd'} for an {rel.kind}-kind relation: {g}"
        )
    return g


def _solve(rel: MicroRelation, G: SuperPoly):
    """Fixed point of ``y = y(x, dG/dy(y))`` starting from phi."""
    ys = rel.target.variables
    yexpr = rel.y_expressions()
    dG = [G.diff(y) for y in ys]
    bound = nilpotency_bound(G)
    if bound < 0:
        raise NonFormalError("g carries a parameter of unbounded order")
    y = dict(zip(ys, rel.gf.phi))
    iterates = [y]
    for _ in range(bound + 1):
        q = {qi: d.subs(y) for qi, d in zip(rel.fibers, dG)}
        new = {v: yexpr[v].subs(q) for v in ys}
        if new == y:
            return y, q, iterates
        y = new
        iterates.append(y)
    raise NonFormalError(
        "target-map iteration did not stabilize; g must be small (carry a nilpotent parameter)"
    )


def pull(rel: MicroRelation, G: SuperPoly) -> PullbackResult:
    """Pull back an already graded function G (no extra parameter)."""
    G = _check_g(rel, G)
    y, q, iterates = _solve(rel, G)
    f = rel.body.subs(q) + G.subs(y)
    for (yv, qv) in zip(rel.target.variables, rel.fibers):
        f = f - y[yv] * q[qv]
    return PullbackResult(rel, G, f, y, q, None, None, iterates)


def solve_target_map(rel: MicroRelation, g, order: int = 2, param: Variable | None = None) -> dict:
    g = _check_g(rel, g)
    eps = param or graded_param("eps", order)
    y, _, _ = _solve(rel, eps * g)
    return y


def pullback(rel: MicroRelation, g, order: int = 2, param: Variable | None = None) -> PullbackResult:
    """``Phi*[eps g]`` modulo ``eps^(order+1)``."""
    g = _check_g(rel, g)
    eps = param or graded_param("eps", order)
    res = pull(rel, eps * g)
    res.g, res.param, res.order = g, eps, order
    return res


def tangent_pullback(rel: MicroRelation, g, u, order: int = 2) -> SuperPoly:
    """delta-coefficient of ``Phi*[eps g + delta u]``."""
    g = _check_g(rel, g)
    u = rel.target.check(rel.target.parse(u) if isinstance(u, str) else as_poly(u), "u")
    if not u.is_homogeneous():
        even, odd = u.parity_parts()
        return tangent_pullback(rel, g, even, order) + tangent_pullback(rel, g, odd, order)
    shift = 0 if rel.kind == EVEN_KIND else 1
    delta = Variable("delta", (u.parity + shift) % 2, "param", nil=2)
    eps = graded_param("eps", order)
    res = pull(rel, eps * g + delta * u)
    return res.f.coeff(delta, 1)


# --------------------------------------------------------------------------
# composition and coordinate changes


def compose(relA: MicroRelation, relB: MicroRelation, order: int = 3) -> MicroRelation:
    """Composite ``A o B``: source of B to target of A, ``(A o B)* = B* o A*``.

    ``order`` caps the fiber degree of the result.  The elimination is
    graded by fiber degree in A's fibers; it closes when A has no
    fiber-free part or B is fiber-linear.
    """
    if relA.kind != relB.kind:
        raise ChartError("cannot compose relations of different kinds")
    if relB.target != relA.source:
        raise ChartError(f"middle charts differ: {relB.target.name} vs {relA.source.name}")
    t = graded_param("tgrade", order)
    ys = relB.target.variables
    qs = relB.fibers
    rs = relA.fibers
    scaled = {r: t * r for r in rs}
    SA = relA.body.subs(scaled)
    if not relA.gf.S0.is_zero() and not relB.is_fiber_linear():
        raise NonFormalError("composition needs a fiber-free-part-free first factor or a fiber-linear second")
    dSA = [SA.diff(y) for y in ys]
    yB = relB.y_expressions()
    y = dict(zip(ys, relB.gf.phi))
    bound = order + 2
    for _ in range(bound + 1):
        q = {qi: d.subs(y) for qi, d in zip(qs, dSA)}
        new = {v: yB[v].subs(q) for v in ys}
        if new == y:
            break
        y = new
    else:
        raise NonFormalError("composition elimination did not stabilize")
    body = relB.body.subs(q) + SA.subs(y)
    for yv, qv in zip(ys, qs):
        body = body - y[yv] * q[qv]
    body = body.subs({t: SuperPoly.const(1)})
    return MicroRelation(relB.source_phase, relA.target_phase, body, order)


def change_target_coords(rel: MicroRelation, cc: CoordinateChange, order: int | None = None,
                         fiber_names=None) -> MicroRelation:
    """Re-express the target in new coordinates ``y = Y(y')``.

    Implemented as composition with the relation of ``y' = psi(y)``, where
    psi is the formal inverse of Y.
    """
    if cc.old != rel.target:
        raise ChartError(f"coordinate change acts on {cc.old.name}, relation targets {rel.target.name}")
    D = order if order is not None else (rel.fiber_cap or max(rel.gf.fiber_degree(), 1))
    new_phase = build_phase_chart(cc.new, rel.target_phase.kind, fiber_names)
    change = relation_from_map(rel.target_phase, new_phase, list(cc.inverse), 0, rel.kind)
    return compose(change, rel, D)


def base_change_source(rel: MicroRelation, cc: CoordinateChange, fiber_names=None) -> MicroRelation:
    """Substitute ``x = X(x')`` in the generating function."""
    if cc.old != rel.source:
        raise ChartError(f"coordinate change acts on {cc.old.name}, relation starts at {rel.source.name}")
    new_phase = build_phase_chart(cc.new, rel.source_phase.kind, fiber_names)
    return MicroRelation(new_phase, rel.target_phase, rel.body.subs(cc.old_in_new), rel.fiber_cap)


def tensor_law(rel: MicroRelation, cc: CoordinateChange) -> tuple:
    """Predicted ``phi^{i'}`` and ``S^{i'j'}`` after a target change.

    ``phi' = psi(phi)`` and ``S'^{i'j'} = J^{i'}_i S^{ij} J^{j'}_j`` in the
    form ``S'_2(x, q') = S_2(x, J q')`` with ``J = dpsi/dy`` at ``phi``.
    """
    gf = rel.gf
    phi = dict(zip(rel.target.variables, gf.phi))
    new_phase = build_phase_chart(cc.new, rel.target_phase.kind)
    phi_new = tuple(c.subs(phi) for c in cc.inverse)
    subs_q = {}
    for i, (y, q) in enumerate(zip(rel.target.variables, rel.fibers)):
        expr = SuperPoly.zero()
        for ip, qp in enumerate(new_phase.fibers):
            entry = cc.inverse[ip].diff(y).subs(phi)
            expr = expr + entry * qp
        subs_q[q] = expr
    S2 = gf.part(2).subs(subs_q)
    n = len(new_phase.fibers)
    coeffs = {}
    for i in range(n):
        for j in range(n):
            c = S2
            for k in (i, j):
                c = c.rdiff(new_phase.fibers[k])
            coeffs[(i, j)] = c.drop(new_phase.fibers)
    return phi_new, coeffs, new_phase


def legendre_change_target_coords(rel: MicroRelation, cc: CoordinateChange, order: int | None = None,
                                  fiber_names=None) -> MicroRelation:
    """Target change by transform, substitution and inverse transform.

    Only available for purely even targets with a constant invertible
    quadratic coefficient matrix and a linear change; used as an
    independent cross-check of :func:`change_target_coords`.
    """
    if rel.kind != EVEN_KIND or any(v.parity for v in rel.target.variables):
        raise ChartError("the transform route needs an even-kind relation with a purely even target")
    if not cc.is_linear() or any(c.constant_term() for c in cc.forward):
        raise ChartError("the transform route needs a linear coordinate change")
    gf = rel.gf
    n = len(rel.fibers)
    D = order if order is not None else (rel.fiber_cap or max(gf.fiber_degree(), 2))
    mat = []
    for i in range(n):
        row = []
        for j in range(n):
            c = gf.coefficient(i, j)
            if not c.is_constant():
                raise ChartError("quadratic coefficients must be constant")
            row.append(c.constant_term())
        mat.append(row)
    minv = invert_matrix(mat)
    ys, qs = rel.target.variables, rel.fibers
    ws = tuple(Variable("w_" + y.name, 0, "fiber") for y in ys)
    phi = gf.phi
    # dS/dq = phi + M q + N(x, q); solve for q as a series in w = y - phi
    dS = [rel.body.diff(q) for q in qs]
    nonlin = [
        dS[i] - phi[i] - sum((SuperPoly.var(qs[j]).scale(mat[i][j]) for j in range(n)), SuperPoly.zero())
        for i in range(n)
    ]
    cap = {ws: D}

    def minv_apply(vec):
        return [sum((vec[i].scale(minv[j][i]) for i in range(n) if minv[j][i]), SuperPoly.zero())
                for j in range(n)]

    wv = [SuperPoly.var(w) for w in ws]
    qsol = minv_apply(wv)
    for _ in range(D + 2):
        sub = dict(zip(qs, qsol))
        nxt = [truncate(e, cap) for e in minv_apply([wv[i] - nonlin[i].subs(sub) for i in range(n)])]
        if nxt == qsol:
            break
        qsol = nxt
    else:  # pragma: no cover
        raise NonFormalError("transform inversion did not stabilize")
    qsub = dict(zip(qs, qsol))
    # transformed function of (x, w), y = phi + w
    St = rel.body.subs(qsub)
    for i in range(n):
        St = St - (phi[i] + wv[i]) * qsol[i]
    St = truncate(St, cap)
    # linear change y = A y', so w = A w' with w' = y' - psi(phi)
    A = [[c.diff(v).constant_term() for v in cc.new.variables] for c in cc.forward]
    wps = tuple(Variable("w_" + y.name, 0, "fiber") for y in cc.new.variables)
    if set(wps) & set(ws):
        wps = tuple(Variable("w_" + y.name + "_new", 0, "fiber") for y in cc.new.variables)
    wpv = [SuperPoly.var(w) for w in wps]
    Stp = St.subs({ws[i]: sum((wpv[j].scale(A[i][j]) for j in range(n)), SuperPoly.zero()) for i in range(n)})
    phi_new = [c.subs(dict(zip(ys, phi))) for c in cc.inverse]
    new_phase = build_phase_chart(cc.new, COTANGENT, fiber_names)
    qps = new_phase.fibers
    # inverse transform: q' = -dSt'/dw', solve for w' as a series in q'
    grad = [-Stp.diff(w) for w in wps]
    capp = {wps: D}
    lin = [[grad[i].homogeneous_part(1, wps).coeff(wps[j], 1).constant_term() for j in range(n)] for i in range(n)]
    linv = invert_matrix(lin)
    gnl = [grad[i] - grad[i].homogeneous_part(0, wps)
           - sum((wpv[j].scale(lin[i][j]) for j in range(n)), SuperPoly.zero()) for i in range(n)]
    g0 = [grad[i].homogeneous_part(0, wps) for i in range(n)]
    if any(not c.is_zero() for c in g0):  # pragma: no cover - w' = 0 corresponds to q' = 0
        raise SingularError("transform is not centred at the zero section")
    qpv = [SuperPoly.var(q) for q in qps]
    capq = {qps: D}

    def linv_apply(vec):
        return [sum((vec[i].scale(linv[j][i]) for i in range(n) if linv[j][i]), SuperPoly.zero())
                for j in range(n)]

    wsol = linv_apply(qpv)
    for _ in range(D + 2):
        sub = dict(zip(wps, wsol))
        nxt = [truncate(e, capq) for e in linv_apply([qpv[i] - gnl[i].subs(sub) for i in range(n)])]
        if nxt == wsol:
            break
        wsol = nxt
    else:  # pragma: no cover
        raise NonFormalError("inverse transform did not stabilize")
    body = Stp.subs(dict(zip(wps, wsol)))
    for i in range(n):
        body = body + (phi_new[i] + wsol[i]) * qpv[i]
    body = truncate(body, capq)
    return MicroRelation(rel.source_phase, new_phase, body, D)
