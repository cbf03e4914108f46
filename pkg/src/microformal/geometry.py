"""Charts, (anti)cotangent phase charts and formal coordinate changes."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import sympy

from .errors import ChartError, NonFormalError, ParityError, SingularError
from .superalg import SuperPoly, Variable, as_poly, parse_poly, truncate

COTANGENT = "cotangent"
ANTICOTANGENT = "anticotangent"
FIBER_KINDS = (COTANGENT, ANTICOTANGENT)


@dataclass(frozen=True)
class Chart:
    """A coordinate system of dimension n|m on one supermanifold."""

    name: str
    variables: tuple

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ChartError(f"chart {self.name}: duplicate coordinate names")
        for v in self.variables:
            if v.kind != "base":
                raise ChartError(f"chart {self.name}: {v.name} is not a base coordinate")

    @classmethod
    def make(cls, name: str, even: Iterable[str] = (), odd: Iterable[str] = ()) -> "Chart":
        vs = [Variable(n, 0, "base") for n in even] + [Variable(n, 1, "base") for n in odd]
        return cls(name, tuple(vs))

    @property
    def dim(self) -> tuple[int, int]:
        odd = sum(v.parity for v in self.variables)
        return len(self.variables) - odd, odd

    def __getitem__(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise ChartError(f"chart {self.name} has no coordinate {name!r}")

    def __iter__(self):
        return iter(self.variables)

    def __len__(self):
        return len(self.variables)

    def index(self, v: Variable) -> int:
        return self.variables.index(v)

    def parse(self, text: str) -> SuperPoly:
        return parse_poly(text, self.variables)

    def check(self, f: SuperPoly, what: str = "function", extra: Iterable[Variable] = ()) -> SuperPoly:
        return require_on(f, set(self.variables) | set(extra), f"{what} on chart {self.name}")


def require_on(f, allowed, what: str) -> SuperPoly:
    """Raise ChartError unless every non-parameter variable of f is allowed."""
    f = as_poly(f)
    stray = sorted(v.name for v in f.variables if v.kind != "param" and v not in allowed)
    if stray:
        raise ChartError(f"{what}: unexpected symbols {', '.join(stray)}")
    return f


@dataclass(frozen=True)
class PhaseChart:
    """A chart extended by conjugate fiber coordinates.

    Cotangent fibers have the parity of their base partner; anticotangent
    fibers have the opposite parity.
    """

    base: Chart
    kind: str
    fibers: tuple

    def __post_init__(self):
        if self.kind not in FIBER_KINDS:
            raise ValueError(f"unknown fiber kind {self.kind!r}")
        if len(self.fibers) != len(self.base.variables):
            raise ChartError("one fiber coordinate per base coordinate is required")
        shift = 0 if self.kind == COTANGENT else 1
        for x, p in zip(self.base.variables, self.fibers):
            if p.kind != "fiber":
                raise ChartError(f"{p.name} is not a fiber coordinate")
            if p.parity != (x.parity + shift) % 2:
                raise ParityError(f"fiber {p.name} has the wrong parity for {self.kind} partner {x.name}")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ChartError("base and fiber coordinate names collide")

    @property
    def variables(self) -> tuple:
        return self.base.variables + self.fibers

    @property
    def pairs(self):
        return tuple(zip(self.base.variables, self.fibers))

    @property
    def shift(self) -> int:
        return 0 if self.kind == COTANGENT else 1

    def conjugate(self, v: Variable) -> Variable:
        return self.fibers[self.base.index(v)]

    def parse(self, text: str) -> SuperPoly:
        return parse_poly(text, self.variables)

    def check(self, f, what: str = "function") -> SuperPoly:
        return require_on(f, set(self.variables), f"{what} on {self.kind} chart over {self.base.name}")

    def restrict(self, f: SuperPoly) -> SuperPoly:
        """Set all fiber coordinates to zero."""
        return f.drop(self.fibers)


def default_fiber_name(base_name: str, kind: str) -> str:
    return ("p_" if kind == COTANGENT else "s_") + base_name


def build_phase_chart(base: Chart, kind: str = COTANGENT, names: Sequence[str] | None = None) -> PhaseChart:
    """Adjoin fresh conjugate fiber coordinates to ``base``."""
    if kind not in FIBER_KINDS:
        raise ValueError(f"unknown fiber kind {kind!r}")
    if names is None:
        names = [default_fiber_name(v.name, kind) for v in base.variables]
    if len(names) != len(base.variables):
        raise ChartError("need exactly one fiber name per base coordinate")
    shift = 0 if kind == COTANGENT else 1
    fibers = tuple(Variable(n, (v.parity + shift) % 2, "fiber") for n, v in zip(names, base.variables))
    return PhaseChart(base, kind, fibers)


# --------------------------------------------------------------------------
# formal coordinate changes


def _to_sympy_matrix(rows):
    return sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in rows])


def _from_sympy(r) -> Fraction:
    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


def linear_part(components: Sequence[SuperPoly], variables: Sequence[Variable]) -> list[list[Fraction]]:
    """Matrix of degree-one coefficients, rows = components, columns = variables."""
    rows = []
    for comp in components:
        lin = comp.homogeneous_part(1, variables)
        rows.append([lin.coeff(v, 1).constant_term() for v in variables])
    return rows


def invert_matrix(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    m = _to_sympy_matrix(rows)
    if m.shape[0] != m.shape[1] or m.det() == 0:
        raise SingularError("linear part is not invertible")
    inv = m.inv()
    return [[_from_sympy(inv[i, j]) for j in range(inv.shape[1])] for i in range(inv.shape[0])]


def formal_inverse(
    components: Sequence[SuperPoly],
    source: Sequence[Variable],
    target: Sequence[Variable],
    order: int,
) -> list[SuperPoly]:
    """Invert ``target[i] = components[i](source)`` as a truncated series.

    Returns polynomials ``source[j] = G_j(target)`` such that both
    compositions are the identity modulo total degree ``order + 1``.
    The linear part must be invertible; a constant term is only accepted
    for affine maps.
    """
    if len(components) != len(source) or len(source) != len(target):
        raise ChartError("a coordinate change needs as many components as coordinates")
    comps = [as_poly(c) for c in components]
    for c, t in zip(comps, target):
        require_on(c, set(source), "coordinate-change component")
        if not c.has_parity(t.parity):
            raise ParityError(f"component for {t.name} does not have its parity")
    lin = linear_part(comps, source)
    inv = invert_matrix(lin)
    consts = [c.constant_term() for c in comps]
    nonlinear = [
        c - sum((SuperPoly.var(s).scale(lin[i][j]) for j, s in enumerate(source)), SuperPoly.zero()) - consts[i]
        for i, c in enumerate(comps)
    ]
    affine = all(n.is_zero() for n in nonlinear)
    if any(consts) and not affine:
        raise NonFormalError("a nonlinear coordinate change must fix the origin (no constant terms)")
    tvars = [SuperPoly.var(t) for t in target]

    def apply_inverse(vec):
        return [
            sum((vec[i].scale(inv[j][i]) for i in range(len(vec)) if inv[j][i]), SuperPoly.zero())
            for j in range(len(source))
        ]

    rhs = [tvars[i] - consts[i] for i in range(len(target))]
    guess = apply_inverse(rhs)
    caps = {tuple(target): order}
    for _ in range(order + 2):
        sub = dict(zip(source, guess))
        nxt = apply_inverse([rhs[i] - nonlinear[i].subs(sub) for i in range(len(target))])
        nxt = [truncate(g, caps) for g in nxt]
        if nxt == guess:
            return nxt
        guess = nxt
    raise NonFormalError("series reversion did not stabilize")  # pragma: no cover


@dataclass(frozen=True)
class CoordinateChange:
    """``old = X(new)``: old coordinates as polynomials in new ones.

    ``order`` is the base-degree truncation used for the formal inverse and
    everything derived from it.
    """

    new: Chart
    old: Chart
    forward: tuple
    order: int = 3
    inverse: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.new.dim != self.old.dim:
            raise ChartError("a coordinate change preserves the dimension")
        if len(self.forward) != len(self.old.variables):
            raise ChartError("need one expression per old coordinate")
        inv = formal_inverse(self.forward, self.new.variables, self.old.variables, self.order)
        object.__setattr__(self, "inverse", tuple(inv))

    @classmethod
    def from_mapping(cls, new: Chart, old: Chart, mapping: Mapping, order: int = 3) -> "CoordinateChange":
        """``mapping`` sends old coordinates (or their names) to expressions in new ones."""
        comps = []
        for v in old.variables:
            expr = mapping.get(v, mapping.get(v.name))
            if expr is None:
                raise ChartError(f"no expression for old coordinate {v.name}")
            if isinstance(expr, str):
                expr = new.parse(expr)
            comps.append(as_poly(expr))
        return cls(new, old, tuple(comps), order)

    @property
    def old_in_new(self) -> dict:
        return dict(zip(self.old.variables, self.forward))

    @property
    def new_in_old(self) -> dict:
        return dict(zip(self.new.variables, self.inverse))

    def is_linear(self) -> bool:
        return all(c.degree(self.new.variables) <= 1 for c in self.forward)

    def inverse_jacobian(self) -> list[list[SuperPoly]]:
        """``J[a][a'] = d x'^{a'} / d x^a`` as polynomials in the old coordinates."""
        return [[g.diff(x) for g in self.inverse] for x in self.old.variables]

    def truncate_new(self, f: SuperPoly) -> SuperPoly:
        return truncate(f, {self.new.variables: self.order})

    def truncate_old(self, f: SuperPoly) -> SuperPoly:
        return truncate(f, {self.old.variables: self.order})


def induced_momentum_change(cc: CoordinateChange, old_phase: PhaseChart, new_phase: PhaseChart) -> dict:
    """Phase-space substitution for the old phase coordinates.

    ``x^a = X^a(x')`` together with ``p_a = (dx^{a'}/dx^a)(X(x')) p_{a'}``.
    The fiber transformation is linear in the new fibers, so fiber degree is
    preserved.
    """
    if old_phase.base != cc.old or new_phase.base != cc.new:
        raise ChartError("phase charts do not match the coordinate change")
    if old_phase.kind != new_phase.kind:
        raise ChartError("cannot mix cotangent and anticotangent fibers")
    back = cc.old_in_new
    jac = cc.inverse_jacobian()
    bindings = dict(back)
    for a, p in enumerate(old_phase.fibers):
        expr = SuperPoly.zero()
        for ap, pp in enumerate(new_phase.fibers):
            entry = jac[a][ap]
            if entry.is_zero():
                continue
            entry = cc.truncate_new(entry.subs(back))
            expr = expr + entry * pp
        bindings[p] = expr
    return bindings
