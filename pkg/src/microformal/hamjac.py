"""Hamilton-Jacobi shift operators and their behaviour under pullbacks.

A Hamiltonian ``H(x, p)`` acts on functions of ``x`` by
``X_H[f](x) = H(x, df/dx(x))``.  On a cotangent chart ``f`` is even; on an
anticotangent chart ``f`` is odd and the operator has parity ``H + 1``.
"""
from __future__ import annotations

from .brackets import Hamiltonian, canonical_poisson, canonical_schouten, master_defect
from .errors import ChartError, ParityError
from .geometry import COTANGENT, invert_matrix, require_on
from .relations import MicroRelation, graded_param, pull
from .superalg import SuperPoly, Variable, as_poly


class HJField:
    """The shift operator of a Hamiltonian."""

    __slots__ = ("hamiltonian",)

    def __init__(self, hamiltonian: Hamiltonian):
        self.hamiltonian = hamiltonian

    @property
    def phase(self):
        return self.hamiltonian.phase

    @property
    def parity(self) -> int:
        return (self.hamiltonian.parity + self.phase.shift) % 2

    @property
    def function_parity(self) -> int:
        """Parity of the functions the operator acts on."""
        return self.phase.shift

    def __call__(self, f) -> SuperPoly:
        return hj_apply(self, f)

    def __repr__(self):
        return f"HJField({self.hamiltonian.body})"


def _field(X) -> HJField:
    return X if isinstance(X, HJField) else HJField(X)


def hj_apply(X, f) -> SuperPoly:
    """``H(x, df/dx)``."""
    X = _field(X)
    ph = X.phase
    if isinstance(f, str):
        f = ph.base.parse(f)
    f = require_on(as_poly(f), set(ph.base.variables), "shifted function")
    if not f.has_parity(X.function_parity):
        want = "odd" if X.function_parity else "even"
        raise ParityError(f"HJ operators on a {ph.kind} chart act on {want} functions, got {f}")
    grads = {p: f.diff(x) for x, p in ph.pairs}
    return X.hamiltonian.body.subs(grads)


def hj_shift(X, f, eps: Variable) -> SuperPoly:
    """``f + eps X[f]`` with ``eps**2 = 0`` of the operator's parity."""
    X = _field(X)
    if eps.kind != "param" or eps.nil != 2:
        raise ParityError("the shift parameter must be a parameter with square zero")
    if eps.parity != X.parity:
        raise ParityError(f"shift parameter {eps.name} must have parity {X.parity}")
    f = as_poly(f)
    return f + eps * hj_apply(X, f)


def hj_commutator_defect(H: Hamiltonian, F: Hamiltonian, f0) -> SuperPoly:
    """``(f4 - f0) / (eta eps)`` for the four successive shifts by H, F, -H, -F."""
    XH, XF = HJField(H), HJField(F)
    if H.phase != F.phase:
        raise ChartError("Hamiltonians live on different phase charts")
    eps = Variable("eps", XH.parity, "param", nil=2)
    eta = Variable("eta", XF.parity, "param", nil=2)
    f0 = as_poly(H.phase.base.parse(f0) if isinstance(f0, str) else f0)
    f1 = f0 + eps * hj_apply(XH, f0)
    f2 = f1 + eta * hj_apply(XF, f1)
    f3 = f2 - eps * hj_apply(XH, f2)
    f4 = f3 - eta * hj_apply(XF, f3)
    return (f4 - f0).coeff(eta, 1).coeff(eps, 1)


def expected_commutator(H: Hamiltonian, F: Hamiltonian, f0) -> SuperPoly:
    """Closed form of :func:`hj_commutator_defect`.

    ``-X_{(H,F)}[f0]`` on a cotangent chart and ``-X_{[[H,F]]}[f0]`` on an
    anticotangent chart, for all parities of H and F.
    """
    f0 = as_poly(H.phase.base.parse(f0) if isinstance(f0, str) else f0)
    if H.phase.kind == COTANGENT:
        return -hj_apply(canonical_poisson(H, F), f0)
    return -hj_apply(canonical_schouten(H, F), f0)


def odd_hj_shift_solution(Q: Hamiltonian, f0, tau: Variable | None = None) -> SuperPoly:
    """``f0 + tau Q(x, df0/dx)`` for an odd Q with ``(Q, Q) = 0``."""
    if Q.phase.kind != COTANGENT or Q.parity != 1:
        raise ParityError("the odd shift needs an odd Hamiltonian on a cotangent chart")
    if not master_defect(Q).is_zero():
        raise ValueError("Q does not satisfy the master equation")
    tau = tau or Variable("tau", 1, "param", nil=2)
    if tau.parity != 1:
        raise ParityError("tau must be odd")
    f0 = as_poly(Q.phase.base.parse(f0) if isinstance(f0, str) else f0)
    return f0 + tau * hj_apply(Q, f0)


def odd_hj_residual(Q: Hamiltonian, f, tau: Variable) -> SuperPoly:
    """``df/dtau - Q(x, df/dx)``."""
    return f.diff(tau) - hj_apply(Q, f)


# --------------------------------------------------------------------------
# relations


def relatedness_defect(rel: MicroRelation, H1: Hamiltonian, H2: Hamiltonian, cap: int | None = None) -> SuperPoly:
    """``H1(x, dS/dx) - H2(y(x, q), q)``; optionally truncated in fiber degree."""
    if H1.phase != rel.source_phase:
        raise ChartError("H1 must live on the relation's source phase chart")
    if H2.phase != rel.target_phase:
        raise ChartError("H2 must live on the relation's target phase chart")
    if H1.parity != H2.parity and not (H1.is_zero() or H2.is_zero()):
        raise ParityError("related Hamiltonians must have the same parity")
    lhs = H1.body.subs(rel.p_expressions())
    rhs = H2.body.subs(rel.y_expressions())
    out = lhs - rhs
    if cap is not None:
        out = out.truncate({rel.fibers: cap})
    return out


def related_hamiltonian(rel: MicroRelation, H2: Hamiltonian) -> Hamiltonian:
    """The H1 with ``relatedness_defect(rel, H1, H2) == 0``.

    Needs ``dS/dx`` affine in the fibers with a constant invertible matrix,
    so the fibers can be eliminated exactly.
    """
    fibers = rel.fibers
    ps = rel.p_expressions()
    xs, pvars = rel.source.variables, rel.source_phase.fibers
    if len(xs) != len(fibers):
        raise ChartError("source and target dimensions differ")
    rows, consts = [], []
    for p in pvars:
        e = ps[p]
        if e.degree(fibers) > 1:
            raise ChartError("dS/dx is not affine in the fibers")
        lin = e.homogeneous_part(1, fibers)
        row = []
        for q in fibers:
            c = lin.coeff(q, 1)
            if not c.is_constant():
                raise ChartError("dS/dx has non-constant fiber coefficients")
            row.append(c.constant_term())
        rows.append(row)
        consts.append(e.homogeneous_part(0, fibers))
    inv = invert_matrix(rows)
    qsol = {}
    for i, q in enumerate(fibers):
        expr = SuperPoly.zero()
        for a, p in enumerate(pvars):
            if inv[i][a]:
                expr = expr + (SuperPoly.var(p) - consts[a]).scale(inv[i][a])
        qsol[q] = expr
    on_rel = H2.body.subs(rel.y_expressions())
    return Hamiltonian(rel.source_phase, on_rel.subs(qsol), H2.parity)


def morphism_defect(rel: MicroRelation, H1: Hamiltonian, H2: Hamiltonian, g, order: int = 2,
                    check: bool = True) -> SuperPoly:
    """delta-coefficient of ``Phi*[g + delta X2[g]] - Phi*[g] - delta X1[Phi*[g]]``."""
    if check:
        d = relatedness_defect(rel, H1, H2)
        if not d.is_zero():
            raise ValueError(f"Hamiltonians are not related: defect {d}")
    g = as_poly(rel.target.parse(g) if isinstance(g, str) else g)
    X1, X2 = HJField(H1), HJField(H2)
    eps = graded_param("eps", order)
    delta = Variable("delta", X2.parity, "param", nil=2)
    G = eps * g
    lhs = pull(rel, G + delta * hj_apply(X2, G)).f.coeff(delta, 1)
    base = pull(rel, G).f
    return lhs - hj_apply(X1, base)
