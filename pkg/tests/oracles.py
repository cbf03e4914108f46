"""Independent reference computations for the test-suite.

None of these reuse the engine's arithmetic: Grassmann products are redone
by bubble-sorting factor words, even-variable calculus goes through sympy,
and Jacobiators are summed over full permutations instead of unshuffles.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import factorial

import sympy as sp

from microformal.superalg import SuperPoly, Variable, normalize


# --------------------------------------------------------------------------
# Grassmann words


def word_normal_form(word, parity):
    """Sort a list of variable names; returns (sign, sorted word) or (0, None).

    ``parity`` maps names to 0/1.  Adjacent transpositions of two odd
    factors flip the sign.
    """
    w = list(word)
    sign = 1
    for i in range(len(w)):
        for j in range(len(w) - 1 - i):
            if w[j] > w[j + 1]:
                if parity[w[j]] and parity[w[j + 1]]:
                    sign = -sign
                w[j], w[j + 1] = w[j + 1], w[j]
    for a, b in zip(w, w[1:]):
        if a == b and parity[a]:
            return 0, None
    return sign, tuple(w)


def poly_to_words(f: SuperPoly) -> dict:
    out = {}
    for mono, c in f.terms():
        word = tuple(v.name for v, e in mono for _ in range(e))
        out[word] = out.get(word, 0) + c
    return out


def word_product(f: SuperPoly, g: SuperPoly) -> dict:
    """Product of two polynomials as a dict sorted word -> coefficient."""
    parity = {v.name: v.parity for v in f.variables | g.variables}
    out: dict = {}
    for w1, c1 in poly_to_words(f).items():
        for w2, c2 in poly_to_words(g).items():
            s, w = word_normal_form(w1 + w2, parity)
            if s:
                out[w] = out.get(w, 0) + s * c1 * c2
    return {w: c for w, c in out.items() if c}


# --------------------------------------------------------------------------
# sympy helpers for purely even computations


def to_sympy(f: SuperPoly, symbols: dict):
    expr = sp.Integer(0)
    for mono, c in f.terms():
        term = sp.Rational(c.numerator, c.denominator)
        for v, e in mono:
            term *= symbols[v.name] ** e
        expr += term
    return sp.expand(expr)


def from_sympy(expr, variables) -> SuperPoly:
    by_name = {v.name: v for v in variables}
    poly = sp.Poly(sp.expand(expr), *[sp.Symbol(n) for n in by_name])
    out = SuperPoly.zero()
    names = list(by_name)
    for exps, c in poly.terms():
        c = sp.Rational(c)
        mono = [(by_name[n], e) for n, e in zip(names, exps) if e]
        out = out + normalize(mono, Fraction(int(c.p), int(c.q)))
    return out


def even_pullback_oracle(S_expr, g_expr, xs, ys, qs, eps, order):
    """Pullback on purely even charts by undetermined coefficients.

    Writes ``y = sum_k eps^k y_k(x)``, solves ``y = dS/dq(x, eps dg/dy(y))``
    order by order, and returns the eps-expansion of
    ``S(x, q) - y q + eps g(y)``.
    """
    ks = [[sp.Symbol(f"c_{i}_{k}") for k in range(order + 1)] for i in range(len(ys))]
    yser = [sum(ks[i][k] * eps**k for k in range(order + 1)) for i in range(len(ys))]
    sub_y = dict(zip(ys, yser))
    qser = [sp.diff(eps * g_expr, y).subs(sub_y, simultaneous=True) for y in ys]
    sub_q = dict(zip(qs, qser))
    eqs = [sp.expand(yser[i] - sp.diff(S_expr, qs[i]).subs(sub_q, simultaneous=True)) for i in range(len(ys))]
    sol = {}
    for k in range(order + 1):
        layer = [sp.expand(e.subs(sol)).coeff(eps, k) for e in eqs]
        unknowns = [ks[i][k] for i in range(len(ys))]
        sol.update(sp.solve(layer, unknowns, dict=True)[0])
    y_final = [sp.expand(e.subs(sol)) for e in yser]
    sub_y = dict(zip(ys, y_final))
    q_final = [sp.expand(sp.diff(eps * g_expr, y).subs(sub_y, simultaneous=True)) for y in ys]
    f = S_expr.subs(dict(zip(qs, q_final)), simultaneous=True) + eps * g_expr.subs(sub_y, simultaneous=True)
    f -= sum(y_final[i] * q_final[i] for i in range(len(ys)))
    f = sp.expand(f)
    f = sum(f.coeff(eps, k) * eps**k for k in range(order + 1))
    return sp.expand(f), y_final


def series_reversion(expr, x, xp, order):
    """Solve ``x = expr(xp)`` for xp by the iteration ``xp <- x - (expr(xp) - xp)``."""
    nonlinear = sp.expand(expr - xp)
    sol = x
    for _ in range(order + 1):
        sol = sp.expand(x - nonlinear.subs(xp, sol))
        sol = sum(sol.coeff(x, k) * x**k for k in range(order + 1))
    return sp.expand(sol)


# --------------------------------------------------------------------------
# Jacobiator over all permutations


def koszul_permutation_sign(degrees, perm) -> int:
    e = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                e += degrees[perm[i]] * degrees[perm[j]]
    return -1 if e % 2 else 1


def jacobiator_by_permutations(bracket, args, degrees) -> SuperPoly:
    """``sum_k 1/(k!(n-k)!) sum_sigma eps(sigma) {{v_s1..v_sk}, v_s(k+1)..v_sn}``."""
    n = len(args)
    out = SuperPoly.zero()
    for k in range(n + 1):
        weight = Fraction(1, factorial(k) * factorial(n - k))
        for perm in permutations(range(n)):
            s = koszul_permutation_sign(degrees, perm)
            inner = bracket([args[i] for i in perm[:k]])
            term = bracket([inner] + [args[i] for i in perm[k:]])
            out = out + term.scale(weight * s)
    return out
