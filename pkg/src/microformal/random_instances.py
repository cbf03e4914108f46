"""Random charts, polynomials, relations and Hamiltonians for property checks."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .geometry import ANTICOTANGENT, COTANGENT, Chart, CoordinateChange, build_phase_chart
from .relations import EVEN_KIND, ODD_KIND, MicroRelation
from .superalg import SuperPoly, Variable, normalize

_COEFFS = [Fraction(c) for c in (1, -1, 2, -2, 3)] + [Fraction(1, 2), Fraction(-1, 3)]


def rand_coeff(rng: random.Random) -> Fraction:
    return rng.choice(_COEFFS)


def random_chart(rng: random.Random, name: str, n_even: int, n_odd: int, prefix: str = "x") -> Chart:
    even = [f"{prefix}{i + 1}" for i in range(n_even)]
    odd = [f"{prefix}o{i + 1}" for i in range(n_odd)]
    return Chart.make(name, even, odd)


def random_monomial(rng: random.Random, variables: Sequence[Variable], degree: int) -> tuple:
    evens = [v for v in variables if not v.parity]
    odds = [v for v in variables if v.parity]
    factors = []
    for _ in range(degree):
        pool = evens + [v for v in odds if v not in factors]
        if not pool:
            break
        factors.append(rng.choice(pool))
    return tuple((v, 1) for v in factors)


def random_poly(
    rng: random.Random,
    variables: Sequence[Variable],
    max_degree: int = 2,
    parity: int | None = 0,
    n_terms: int = 3,
    min_degree: int = 0,
) -> SuperPoly:
    """A polynomial of the requested parity (any parity when ``None``)."""
    out = SuperPoly.zero()
    if not variables and parity == 1:
        return out
    for _ in range(n_terms * 4):
        if len(out) >= n_terms:
            break
        d = rng.randint(min_degree, max_degree)
        mono = random_monomial(rng, variables, d)
        term = normalize(mono, rand_coeff(rng))
        if term.is_zero() or sum(e for _, e in mono) < min_degree:
            continue
        if parity is not None and not term.has_parity(parity):
            continue
        out = out + term
    return out


def random_relation(
    rng: random.Random,
    source: Chart,
    target: Chart,
    kind: str = EVEN_KIND,
    fiber_cap: int = 2,
    x_degree: int = 1,
    shift: bool = True,
    linear: bool = False,
    n_terms: int = 2,
    target_fibers: Sequence[str] | None = None,
) -> MicroRelation:
    """Generating function ``S0 + phi^i fiber_i + (higher fiber terms)``.

    ``phi`` has no constant term so composites stay formal.
    """
    fk = COTANGENT if kind == EVEN_KIND else ANTICOTANGENT
    sp = build_phase_chart(source, fk)
    tp = build_phase_chart(target, fk, target_fibers)
    body_par = 0 if kind == EVEN_KIND else 1
    xs = source.variables
    body = SuperPoly.zero()
    if shift:
        body = body + random_poly(rng, xs, x_degree + 1, body_par, n_terms, min_degree=1)
    for y, q in zip(target.variables, tp.fibers):
        comp = random_poly(rng, xs, x_degree + 1, y.parity, n_terms, min_degree=1)
        body = body + comp * q
    if not linear:
        for d in range(2, fiber_cap + 1):
            for _ in range(n_terms):
                mono = random_monomial(rng, tp.fibers, d)
                fm = normalize(mono, 1)
                if fm.is_zero() or sum(e for _, e in mono) != d:
                    continue
                need = (body_par + fm.parity) % 2
                c = random_poly(rng, xs, x_degree, need, 1)
                if c.is_zero() and need == 0:
                    c = SuperPoly.const(rand_coeff(rng))
                body = body + c * fm
    return MicroRelation(sp, tp, body, fiber_cap)


def random_target_function(rng: random.Random, rel: MicroRelation, max_degree: int = 2, n_terms: int = 2) -> SuperPoly:
    par = 0 if rel.kind == EVEN_KIND else 1
    g = random_poly(rng, rel.target.variables, max_degree, par, n_terms, min_degree=1)
    return g


def random_linear_change(rng: random.Random, old: Chart, new_name: str, prefix: str, order: int = 3,
                         quadratic: bool = False) -> CoordinateChange:
    """``old = A new (+ quadratic terms)``, parity-block invertible A."""
    n_even, n_odd = old.dim
    new = random_chart(rng, new_name, n_even, n_odd, prefix)
    while True:
        comps = []
        for v in old.variables:
            same = [w for w in new.variables if w.parity == v.parity]
            lin = SuperPoly.zero()
            for w in same:
                if rng.random() < 0.6 or w.name.endswith(v.name[-1]):
                    lin = lin + SuperPoly.var(w).scale(rng.choice([1, -1, 2, Fraction(1, 2)]))
            if quadratic:
                lin = lin + random_poly(rng, new.variables, 2, v.parity, 1, min_degree=2)
            comps.append(lin)
        try:
            return CoordinateChange(new, old, tuple(comps), order)
        except ArithmeticError:
            continue


def random_hamiltonian_body(rng: random.Random, phase, parity: int, max_fiber: int = 2, x_degree: int = 1,
                            n_terms: int = 3) -> SuperPoly:
    out = SuperPoly.zero()
    for _ in range(n_terms):
        d = rng.randint(0, max_fiber)
        mono = random_monomial(rng, phase.fibers, d)
        fm = normalize(mono, 1)
        if fm.is_zero():
            continue
        need = (parity + fm.parity) % 2
        c = random_poly(rng, phase.base.variables, x_degree, need, 1)
        if c.is_zero() and need == 0:
            c = SuperPoly.const(rand_coeff(rng))
        out = out + c * fm
    return out
