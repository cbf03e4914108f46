"""Canonical brackets on phase charts and higher derived brackets.

On a cotangent chart the even bracket is::

    (H, F) = sum_a (-1)^(a H) [ (-1)^a dH/dp_a dF/dx^a - dH/dx^a dF/dp_a ]

and on an anticotangent chart the odd bracket is the biderivation fixed by
``[[x*_a, x^b]] = delta_a^b``::

    [[F, G]] = (-1)^((F+1)(a+1)) dF/dx*_a dG/dx^a - (-1)^((F+1)a) dF/dx^a dG/dx*_a

(all derivatives from the left, parities written without tildes).
"""
from __future__ import annotations

from itertools import combinations, product
from typing import Sequence

from .errors import ChartError, ParityError
from .geometry import ANTICOTANGENT, COTANGENT, PhaseChart, require_on
from .superalg import SuperPoly, as_poly


class Hamiltonian:
    """A parity-homogeneous function on a phase chart."""

    __slots__ = ("phase", "body", "parity")

    def __init__(self, phase: PhaseChart, body, parity: int | None = None):
        if isinstance(body, str):
            body = phase.parse(body)
        body = phase.check(as_poly(body), "Hamiltonian")
        if parity is None:
            if not body.is_homogeneous():
                raise ParityError(f"Hamiltonian has no definite parity: {body}")
            parity = body.parity
        elif not body.has_parity(parity):
            raise ParityError(f"Hamiltonian declared {'odd' if parity else 'even'} but body is not: {body}")
        self.phase = phase
        self.body = body
        self.parity = parity

    def __eq__(self, other):
        return (
            isinstance(other, Hamiltonian)
            and self.phase == other.phase
            and self.body == other.body
            and (self.parity == other.parity or self.body.is_zero())
        )

    def __hash__(self):
        return hash((self.phase, self.body))

    def __repr__(self):
        return f"Hamiltonian({self.body}, {'odd' if self.parity else 'even'}, {self.phase.kind})"

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        _same_phase(self, other)
        return Hamiltonian(self.phase, self.body + other.body)

    def scale(self, c) -> "Hamiltonian":
        return Hamiltonian(self.phase, self.body.scale(c), self.parity)

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def fiber_degree(self) -> int:
        return max(self.body.degree(self.phase.fibers), 0)

    def coefficient(self, *indices) -> SuperPoly:
        """``H^{a1..ar}``: right fiber derivatives at zero fibers."""
        f = self.body
        for a in indices:
            f = f.rdiff(self.phase.fibers[a] if isinstance(a, int) else a)
        return self.phase.restrict(f)


def _same_phase(H, F):
    if H.phase != F.phase:
        raise ChartError("Hamiltonians live on different phase charts")


def _split(f: SuperPoly):
    even, odd = f.parity_parts()
    if not even.is_zero():
        yield 0, even
    if not odd.is_zero():
        yield 1, odd


def poisson_bracket(phase: PhaseChart, F, G) -> SuperPoly:
    """Even canonical bracket of two functions on a cotangent chart."""
    if phase.kind != COTANGENT:
        raise ChartError("the Poisson bracket needs a cotangent chart")
    F, G = as_poly(F), as_poly(G)
    out = SuperPoly.zero()
    for fp, Fh in _split(F):
        for x, p in phase.pairs:
            a = x.parity
            t1 = Fh.diff(p) * G.diff(x)
            if a:
                t1 = -t1
            term = t1 - Fh.diff(x) * G.diff(p)
            out = out - term if (a and fp) else out + term
    return out


def schouten_bracket(phase: PhaseChart, F, G) -> SuperPoly:
    """Odd canonical bracket of two functions on an anticotangent chart."""
    if phase.kind != ANTICOTANGENT:
        raise ChartError("the Schouten bracket needs an anticotangent chart")
    F, G = as_poly(F), as_poly(G)
    out = SuperPoly.zero()
    for fp, Fh in _split(F):
        for x, s in phase.pairs:
            a = x.parity
            t1 = Fh.diff(s) * G.diff(x)
            if ((fp + 1) * (a + 1)) % 2:
                t1 = -t1
            t2 = Fh.diff(x) * G.diff(s)
            if ((fp + 1) * a) % 2:
                t2 = -t2
            out = out + t1 - t2
    return out


def canonical_bracket(phase: PhaseChart, F, G) -> SuperPoly:
    if phase.kind == COTANGENT:
        return poisson_bracket(phase, F, G)
    return schouten_bracket(phase, F, G)


def canonical_poisson(H: Hamiltonian, F: Hamiltonian) -> Hamiltonian:
    _same_phase(H, F)
    return Hamiltonian(H.phase, poisson_bracket(H.phase, H.body, F.body), (H.parity + F.parity) % 2)


def canonical_schouten(H: Hamiltonian, F: Hamiltonian) -> Hamiltonian:
    _same_phase(H, F)
    return Hamiltonian(H.phase, schouten_bracket(H.phase, H.body, F.body), (H.parity + F.parity + 1) % 2)


def bracket_parity_shift(phase: PhaseChart) -> int:
    """Parity of the canonical bracket itself."""
    return 0 if phase.kind == COTANGENT else 1


# --------------------------------------------------------------------------
# derived brackets


def _check_args(H: Hamiltonian, args) -> list:
    out = []
    base = set(H.phase.base.variables)
    for k, f in enumerate(args):
        if isinstance(f, str):
            f = H.phase.base.parse(f)
        out.append(require_on(as_poly(f), base, f"argument {k + 1}"))
    return out


def derived_bracket_nested(H: Hamiltonian, args: Sequence) -> SuperPoly:
    """``(...((H, f1), f2), ..., fr)`` restricted to zero fibers."""
    args = _check_args(H, args)
    acc = H.body
    for f in args:
        if acc.is_zero():
            break
        acc = canonical_bracket(H.phase, acc, f)
    return H.phase.restrict(acc)


def _derived_sign(fiber_parities: Sequence[int], factor_parities: Sequence[int]) -> int:
    """Sign of ``H^{a1..ar} d_{a1}f1 ... d_{ar}fr`` in the nested bracket.

    ``fiber_parities[l]`` is the parity of the fiber conjugate to ``a_l``,
    ``factor_parities[k]`` the parity of ``d_{a_k} f_k``.
    """
    e = 0
    run = 0
    for phi, fac in zip(fiber_parities, factor_parities):
        e += phi * run
        run += fac
    return -1 if e % 2 else 1


def derived_bracket_direct(H: Hamiltonian, args: Sequence) -> SuperPoly:
    """Derived bracket from the coefficients ``H^{a1..ar}`` of H."""
    args = _check_args(H, args)
    r = len(args)
    if r == 0:
        return H.phase.restrict(H.body)
    if r > H.fiber_degree():
        return SuperPoly.zero()
    # multilinear split into homogeneous arguments
    pieces = [list(_split(f)) for f in args]
    out = SuperPoly.zero()
    xs = H.phase.base.variables
    fibers = H.phase.fibers
    coeff_cache: dict = {}
    for choice in product(*pieces):
        parts = [f for _, f in choice]
        pars = [p for p, _ in choice]
        grads = [[f.diff(x) for x in xs] for f in parts]
        for idx in product(range(len(xs)), repeat=r):
            factors = [grads[k][a] for k, a in enumerate(idx)]
            if any(fac.is_zero() for fac in factors):
                continue
            c = coeff_cache.get(idx)
            if c is None:
                c = H.coefficient(*idx)
                coeff_cache[idx] = c
            if c.is_zero():
                continue
            sign = _derived_sign(
                [fibers[a].parity for a in idx],
                [(xs[a].parity + pars[k]) % 2 for k, a in enumerate(idx)],
            )
            term = c
            for fac in factors:
                term = term * fac
            out = out + term if sign > 0 else out - term
    return out


def argument_degree(H: Hamiltonian, f: SuperPoly) -> int:
    """Grading used for Koszul signs of derived-bracket arguments."""
    return (f.parity + bracket_parity_shift(H.phase)) % 2


def koszul_sign(degrees: Sequence[int], order: Sequence[int]) -> int:
    """Sign of reordering graded symbols into ``order``."""
    e = 0
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                e += degrees[order[i]] * degrees[order[j]]
    return -1 if e % 2 else 1


def unshuffles(n: int, k: int):
    for first in combinations(range(n), k):
        rest = tuple(i for i in range(n) if i not in first)
        yield first, rest


def jacobiator(H: Hamiltonian, args: Sequence, bracket=derived_bracket_nested) -> SuperPoly:
    """Shuffle sum ``sum eps(s) {{v_s1..v_sk}, v_s(k+1)..v_sn}``."""
    if H.parity != (1 if H.phase.kind == COTANGENT else 0):
        raise ParityError("the higher Jacobi identities need an odd Hamiltonian (even on an anticotangent chart)")
    args = _check_args(H, args)
    for f in args:
        if not f.is_homogeneous():
            raise ParityError(f"Jacobiator arguments must be homogeneous: {f}")
    n = len(args)
    degs = [argument_degree(H, f) for f in args]
    out = SuperPoly.zero()
    for k in range(n + 1):
        for first, rest in unshuffles(n, k):
            sign = koszul_sign(degs, first + rest)
            inner = bracket(H, [args[i] for i in first])
            term = bracket(H, [inner] + [args[i] for i in rest])
            out = out + term if sign > 0 else out - term
    return out


def master_defect(H: Hamiltonian) -> Hamiltonian:
    """(H, H) for odd H on a cotangent chart, [[P, P]] for even P on an anticotangent one."""
    if H.phase.kind == COTANGENT:
        if H.parity != 1:
            raise ParityError("master equation on a cotangent chart needs an odd Hamiltonian")
        return canonical_poisson(H, H)
    if H.parity != 0:
        raise ParityError("master equation on an anticotangent chart needs an even Hamiltonian")
    return canonical_schouten(H, H)
