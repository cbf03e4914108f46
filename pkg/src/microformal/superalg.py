"""Exact supercommutative polynomials with Koszul-sign bookkeeping.

A :class:`SuperPoly` is a finite sum of monomials with :class:`~fractions.Fraction`
coefficients.  Variables are even (commuting) or odd (anticommuting); formal
parameters may additionally carry a nilpotency order, so ``eps**k == 0`` holds
in the ring and "modulo eps^(N+1)" is plain truncation.

Monomials are stored in sign-normal form: factors sorted by a global total
order on variables (parameters, then base coordinates, then fiber
coordinates, then by name).  Derivatives are *left* derivatives unless stated
otherwise, ``d(fg)/dv = (df/dv) g + (-1)^(|v||f|) f (dg/dv)``.
"""
from __future__ import annotations

import re
import threading
from fractions import Fraction
from typing import Iterable, Mapping, Union

import gmpy2

from .errors import ParityError, ParseError

__all__ = [
    "EVEN",
    "ODD",
    "Variable",
    "SuperPoly",
    "normalize",
    "left_derivative",
    "right_derivative",
    "substitute",
    "truncate",
    "parse_poly",
    "as_poly",
]

EVEN = 0
ODD = 1

KIND_RANK = {"param": 0, "base": 1, "fiber": 2}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Variable:
    """A polynomial generator.

    Parameters
    ----------
    name : str
        Identifier used in canonical text.
    parity : int
        0 for even, 1 for odd.
    kind : str
        One of ``"base"``, ``"fiber"``, ``"param"``.
    nil : int, optional
        Nilpotency order for parameters: ``v**nil == 0``.  Odd variables
        always square to zero regardless of this setting.
    """

    __slots__ = ("name", "parity", "kind", "nil", "_key", "_hash")

    def __init__(self, name: str, parity: int = EVEN, kind: str = "base", nil: int | None = None):
        if not isinstance(name, str) or not _IDENT.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        if parity not in (0, 1):
            raise ValueError(f"parity must be 0 or 1, got {parity!r}")
        if kind not in KIND_RANK:
            raise ValueError(f"unknown variable class {kind!r}")
        if nil is not None:
            if kind != "param":
                raise ValueError("only parameters carry a nilpotency order")
            if int(nil) != nil or nil < 1:
                raise ValueError("nilpotency order must be a positive integer")
            nil = int(nil)
        self.name = name
        self.parity = parity
        self.kind = kind
        self.nil = nil
        self._key = (KIND_RANK[kind], name, parity, nil or 0)
        self._hash = hash(self._key)

    @property
    def order(self) -> int | None:
        """Effective nilpotency order (2 for odd variables), or None."""
        if self.parity:
            return 2 if self.nil is None else min(2, self.nil)
        return self.nil

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Variable) and self._key == other._key

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        par = "odd" if self.parity else "even"
        extra = f", nil={self.nil}" if self.nil is not None else ""
        return f"Variable({self.name!r}, {par}, {self.kind}{extra})"

    def __str__(self):
        return self.name

    # arithmetic sugar: variables behave like degree-one polynomials
    def poly(self) -> "SuperPoly":
        return SuperPoly.var(self)

    def __add__(self, other):
        return self.poly() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self.poly() - other

    def __rsub__(self, other):
        return as_poly(other) - self.poly()

    def __mul__(self, other):
        return self.poly() * other

    def __rmul__(self, other):
        return as_poly(other) * self.poly()

    def __neg__(self):
        return -self.poly()

    def __pow__(self, k):
        return self.poly() ** k


# --------------------------------------------------------------------------
# monomial interning.  A monomial is a sorted tuple of (Variable, exponent);
# polynomials key their terms by small integer ids so products and
# derivatives can be memoized cheaply.
_lock = threading.Lock()
_MONO_ID: dict = {(): 0}
_MONOS: list = [()]
_MONO_PARITY: list = [0]
_MUL_CACHE: dict = {}
_DIFF_CACHE: dict = {}


def _intern(mono: tuple) -> int:
    i = _MONO_ID.get(mono)
    if i is not None:
        return i
    with _lock:
        i = _MONO_ID.get(mono)
        if i is None:
            i = len(_MONOS)
            _MONOS.append(mono)
            _MONO_PARITY.append(sum(v.parity for v, _ in mono) & 1)
            _MONO_ID[mono] = i
    return i


def _mono_mul(i: int, j: int):
    """Product of interned monomials: (sign bit, id) or None when it vanishes."""
    key = (i, j)
    hit = _MUL_CACHE.get(key, False)
    if hit is not False:
        return hit
    a, b = _MONOS[i], _MONOS[j]
    # odd factors of `a` not yet emitted, for the Koszul count
    odd_left = [0] * (len(a) + 1)
    for k in range(len(a) - 1, -1, -1):
        odd_left[k] = odd_left[k + 1] + a[k][0].parity
    out = []
    sign = 0
    ia = ib = 0
    result = None
    while ia < len(a) and ib < len(b):
        va, ea = a[ia]
        vb, eb = b[ib]
        if va._key == vb._key:
            e = ea + eb
            if va.parity or (va.nil is not None and e >= va.nil):
                break
            out.append((va, e))
            ia += 1
            ib += 1
        elif va._key < vb._key:
            out.append((va, ea))
            ia += 1
        else:
            if vb.parity:
                sign ^= odd_left[ia] & 1
            out.append((vb, eb))
            ib += 1
    else:
        out.extend(a[ia:])
        out.extend(b[ib:])
        result = (sign, _intern(tuple(out)))
    _MUL_CACHE[key] = result
    return result


def _mono_diff(i: int, v: Variable, right: bool = False):
    """Derivative of a monomial: (integer factor, new id) or None."""
    key = (i, v, right)
    hit = _DIFF_CACHE.get(key, False)
    if hit is not False:
        return hit
    mono = _MONOS[i]
    result = None
    for k, (w, e) in enumerate(mono):
        if w == v:
            if v.parity:
                others = mono[k + 1:] if right else mono[:k]
                n = sum(u.parity for u, _ in others)
                factor = -1 if n & 1 else 1
                rest = mono[:k] + mono[k + 1:]
            else:
                factor = e
                rest = mono[:k] + ((v, e - 1),) + mono[k + 1:] if e > 1 else mono[:k] + mono[k + 1:]
            result = (factor, _intern(rest))
            break
    _DIFF_CACHE[key] = result
    return result


def _mono_sort_key(i: int):
    mono = _MONOS[i]
    pdeg = sum(e for v, e in mono if v.kind == "param")
    tdeg = sum(e for _, e in mono)
    return (pdeg, tdeg, tuple((v._key, e) for v, e in mono))


Scalar = Union[int, Fraction]

# coefficients are held as gmpy2 rationals internally and exposed as Fraction
_Q = gmpy2.mpq
_QTYPE = type(_Q(0))
_ONE = _Q(1)
_SCALARS = (int, Fraction, _QTYPE)


def _frac(c):
    if isinstance(c, _QTYPE):
        return c
    if isinstance(c, int):
        return _Q(c)
    if isinstance(c, Fraction):
        return _Q(c.numerator, c.denominator)
    if isinstance(c, str):
        f = Fraction(c)
        return _Q(f.numerator, f.denominator)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def _out(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


class SuperPoly:
    """Immutable sparse polynomial in even and odd variables."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                if isinstance(mono, tuple):
                    mono = normalize(mono, 1)
                    for m, s in mono._terms.items():
                        v = clean.get(m, 0) + s * _frac(c)
                        clean[m] = v
                    continue
                c = _frac(c)
                clean[mono] = clean.get(mono, 0) + c
        self._terms = {m: c for m, c in clean.items() if c != 0}
        self._hash = None

    @classmethod
    def _make(cls, terms: dict) -> "SuperPoly":
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "SuperPoly":
        return cls._make({})

    @classmethod
    def const(cls, c: Scalar) -> "SuperPoly":
        c = _frac(c)
        return cls._make({0: c} if c else {})

    @classmethod
    def var(cls, v: Variable) -> "SuperPoly":
        if v.nil == 1:
            return cls._make({})
        return cls._make({_intern(((v, 1),)): _ONE})

    # inspection ------------------------------------------------------
    def terms(self):
        """(monomial, coefficient) pairs in canonical order.

        A monomial is a tuple of ``(Variable, exponent)`` in sign-normal order.
        """
        for m in sorted(self._terms, key=_mono_sort_key):
            yield _MONOS[m], _out(self._terms[m])

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def variables(self) -> frozenset:
        out = set()
        for m in self._terms:
            out.update(v for v, _ in _MONOS[m])
        return frozenset(out)

    def is_constant(self) -> bool:
        return all(m == 0 for m in self._terms)

    def constant_term(self) -> Fraction:
        return _out(self._terms.get(0, _Q(0)))

    def has_parity(self, parity: int) -> bool:
        """True if every monomial has the given parity (vacuous for zero)."""
        return all(_MONO_PARITY[m] == parity for m in self._terms)

    def is_homogeneous(self) -> bool:
        return self.has_parity(0) or self.has_parity(1)

    @property
    def parity(self) -> int:
        """Parity of a homogeneous polynomial; zero counts as even."""
        if self.has_parity(0):
            return 0
        if self.has_parity(1):
            return 1
        raise ParityError(f"polynomial has no definite parity: {self}")

    def parity_parts(self) -> tuple["SuperPoly", "SuperPoly"]:
        ev = {m: c for m, c in self._terms.items() if not _MONO_PARITY[m]}
        od = {m: c for m, c in self._terms.items() if _MONO_PARITY[m]}
        return SuperPoly._make(ev), SuperPoly._make(od)

    def degree(self, variables: Iterable[Variable] | None = None, kind: str | None = None) -> int:
        """Largest total degree in the selected variables (-1 for zero)."""
        sel = _selector(variables, kind)
        best = -1
        for m in self._terms:
            best = max(best, sum(e for v, e in _MONOS[m] if sel(v)))
        return best

    def homogeneous_part(self, degree: int, variables=None, kind=None) -> "SuperPoly":
        sel = _selector(variables, kind)
        return SuperPoly._make({
            m: c for m, c in self._terms.items()
            if sum(e for v, e in _MONOS[m] if sel(v)) == degree
        })

    # arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        res = dict(self._terms)
        for m, c in other._terms.items():
            v = res.get(m)
            if v is None:
                res[m] = c
            else:
                v += c
                if v:
                    res[m] = v
                else:
                    del res[m]
        return SuperPoly._make(res)

    __radd__ = __add__

    def __neg__(self):
        return SuperPoly._make({m: -c for m, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return self.scale(other)
        other = _coerce(other)
        if other is NotImplemented:
            return other
        res: dict = {}
        mul = _mono_mul
        cache = _MUL_CACHE
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                r = cache.get((m1, m2), False)
                if r is False:
                    r = mul(m1, m2)
                if r is None:
                    continue
                s, m = r
                c = c1 * c2
                if s:
                    c = -c
                v = res.get(m)
                if v is None:
                    res[m] = c
                else:
                    v += c
                    if v:
                        res[m] = v
                    else:
                        del res[m]
        return SuperPoly._make(res)

    def __rmul__(self, other):
        if isinstance(other, _SCALARS):
            return self.scale(other)
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self

    def __truediv__(self, other):
        if isinstance(other, _SCALARS):
            return self.scale(_ONE / _frac(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are defined")
        result = SuperPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c: Scalar) -> "SuperPoly":
        c = _frac(c)
        if not c:
            return SuperPoly.zero()
        return SuperPoly._make({m: c * v for m, v in self._terms.items()})

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus ----------------------------------------------------------
    def diff(self, v: Variable) -> "SuperPoly":
        """Left partial derivative."""
        return left_derivative(self, v)

    def rdiff(self, v: Variable) -> "SuperPoly":
        """Right partial derivative."""
        return right_derivative(self, v)

    def subs(self, bindings: Mapping) -> "SuperPoly":
        return substitute(self, bindings)

    def truncate(self, caps: Mapping) -> "SuperPoly":
        return truncate(self, caps)

    def coeff(self, v: Variable, k: int = 1) -> "SuperPoly":
        """The polynomial ``f_k`` in the unique expansion ``f = sum_k v^k f_k``.

        ``v`` is placed on the left, so for odd ``v`` the degree-one
        coefficient coincides with the left derivative.
        """
        if v.parity and k > 1:
            return SuperPoly.zero()
        res: dict = {}
        for m, c in self._terms.items():
            mono = _MONOS[m]
            e = next((ex for w, ex in mono if w == v), 0)
            if e != k:
                continue
            if k == 0:
                res[m] = c
                continue
            if v.parity:
                factor, nm = _mono_diff(m, v)
                c = c * factor
            else:
                nm = _intern(tuple(t for t in mono if t[0] != v))
            res[nm] = res.get(nm, 0) + c
        return SuperPoly._make({m: c for m, c in res.items() if c})

    def drop(self, variables: Iterable[Variable]) -> "SuperPoly":
        """Set the given variables to zero."""
        vs = set(variables)
        return SuperPoly._make({
            m: c for m, c in self._terms.items()
            if not any(v in vs for v, _ in _MONOS[m])
        })

    def map_coefficients(self, fn) -> "SuperPoly":
        return SuperPoly({m: fn(_out(c)) for m, c in self._terms.items()})

    def evaluate(self, point: Mapping) -> "SuperPoly":
        """Substitute rational constants for even variables."""
        for v in point:
            if v.parity:
                raise ParityError(f"cannot evaluate odd variable {v.name} at a number")
        return substitute(self, {v: SuperPoly.const(c) for v, c in point.items()})

    # text ------------------------------------------------------------
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"SuperPoly({to_text(self)!r})"

    def pretty(self, names: Mapping[str, str] | None = None) -> str:
        return to_pretty(self, names)


def _selector(variables, kind):
    if variables is not None:
        vs = set(variables)
        return lambda v: v in vs
    if kind is not None:
        return lambda v: v.kind == kind
    return lambda v: True


def as_poly(x) -> SuperPoly:
    p = _coerce(x)
    if p is NotImplemented:
        raise TypeError(f"cannot interpret {type(x).__name__} as a polynomial")
    return p


def _coerce(x):
    if isinstance(x, SuperPoly):
        return x
    if isinstance(x, Variable):
        return SuperPoly.var(x)
    if isinstance(x, _SCALARS):
        return SuperPoly.const(x)
    return NotImplemented


# --------------------------------------------------------------------------
# operations


def normalize(raw: Iterable, coeff: Scalar = 1) -> SuperPoly:
    """Bring an ordered product of factors into sign-normal form.

    ``raw`` lists ``(Variable, exponent)`` pairs (or bare variables) in the
    order they are multiplied.
    """
    result = SuperPoly.const(coeff)
    for item in raw:
        v, e = (item, 1) if isinstance(item, Variable) else item
        result = result * (SuperPoly.var(v) ** e)
    return result


def left_derivative(f: SuperPoly, v: Variable) -> SuperPoly:
    if not isinstance(v, Variable):
        raise TypeError(f"expected a Variable, got {type(v).__name__}")
    return _derivative(f, v, False)


def right_derivative(f: SuperPoly, v: Variable) -> SuperPoly:
    if not isinstance(v, Variable):
        raise TypeError(f"expected a Variable, got {type(v).__name__}")
    return _derivative(f, v, True)


def _derivative(f, v, right):
    res: dict = {}
    for m, c in f._terms.items():
        r = _mono_diff(m, v, right)
        if r is None:
            continue
        factor, nm = r
        val = res.get(nm, 0) + c * factor
        res[nm] = val
    return SuperPoly._make({m: c for m, c in res.items() if c})


def substitute(f: SuperPoly, bindings: Mapping) -> SuperPoly:
    """Simultaneous substitution ``v -> bindings[v]``.

    Each bound value must be parity-homogeneous with the parity of its
    variable; the substitution is then a ring homomorphism.
    """
    vals = {}
    for v, val in bindings.items():
        p = as_poly(val)
        if not p.has_parity(v.parity):
            raise ParityError(f"binding for {v.name} must be {'odd' if v.parity else 'even'}, got {p}")
        vals[v] = p
    if not vals:
        return f
    powers: dict = {}

    def power(v, e):
        key = (v, e)
        p = powers.get(key)
        if p is None:
            p = vals[v] if e == 1 else power(v, e - 1) * vals[v]
            powers[key] = p
        return p

    acc: dict = {}
    for m, c in f._terms.items():
        mono = _MONOS[m]
        if not any(v in vals for v, _ in mono):
            acc[m] = acc.get(m, 0) + c
            continue
        prod = SuperPoly.const(c)
        for v, e in mono:
            factor = power(v, e) if v in vals else SuperPoly._make({_intern(((v, e),)): _ONE})
            prod = prod * factor
            if not prod._terms:
                break
        for nm, nc in prod._terms.items():
            acc[nm] = acc.get(nm, 0) + nc
    return SuperPoly._make({m: c for m, c in acc.items() if c})


def truncate(f: SuperPoly, caps: Mapping) -> SuperPoly:
    """Drop monomials whose degree in a capped group exceeds its cap.

    Keys of ``caps`` are a variable class (``"base"``, ``"fiber"``,
    ``"param"``), a single :class:`Variable`, or a collection of variables.
    """
    groups = []
    for key, cap in caps.items():
        if cap < 0:
            raise ValueError("truncation caps must be non-negative")
        if isinstance(key, str):
            sel = (lambda k: lambda v: v.kind == k)(key)
        elif isinstance(key, Variable):
            sel = (lambda k: lambda v: v == k)(key)
        else:
            ks = frozenset(key)
            sel = (lambda k: lambda v: v in k)(ks)
        groups.append((sel, cap))
    keep = {}
    for m, c in f._terms.items():
        mono = _MONOS[m]
        if all(sum(e for v, e in mono if sel(v)) <= cap for sel, cap in groups):
            keep[m] = c
    return SuperPoly._make(keep)


# --------------------------------------------------------------------------
# canonical text


def _coef_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _mono_text(mono) -> str:
    return "*".join(v.name if e == 1 else f"{v.name}^{e}" for v, e in mono)


def to_text(f: SuperPoly) -> str:
    """Canonical ASCII text; parses back to the same polynomial."""
    if not f._terms:
        return "0"
    parts = []
    for mono, c in f.terms():
        neg = c < 0
        a = -c if neg else c
        body = _mono_text(mono)
        if not body:
            s = _coef_text(a)
        elif a == 1:
            s = body
        else:
            s = f"{_coef_text(a)}*{body}"
        if not parts:
            parts.append(("-" if neg else "") + s)
        else:
            parts.append((" - " if neg else " + ") + s)
    return "".join(parts)


_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")
PRETTY_NAMES = {"eps": "ε", "eta": "η", "tau": "τ", "delta": "δ"}


def to_pretty(f: SuperPoly, names: Mapping[str, str] | None = None) -> str:
    """Human-oriented rendering, e.g. ``εx² + 2ε²x²``."""
    table = dict(PRETTY_NAMES)
    table.update(names or {})
    if not f._terms:
        return "0"
    parts = []
    for mono, c in f.terms():
        neg = c < 0
        a = -c if neg else c
        names = [table.get(v.name, v.name) for v, _ in mono]
        # juxtaposition is only unambiguous for one-letter names
        sep = "" if all(len(n) == 1 for n in names) else "·"
        body = sep.join(n + ("" if e == 1 else str(e).translate(_SUPERSCRIPT)) for n, (_, e) in zip(names, mono))
        coef = _coef_text(a)
        if "/" in coef and body:
            coef = f"({coef})"
        s = body if (a == 1 and body) else coef + body
        if not parts:
            parts.append(("-" if neg else "") + s)
        else:
            parts.append((" - " if neg else " + ") + s)
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+/\d+|\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*^()]))")


def parse_poly(text: str, variables) -> SuperPoly:
    """Parse canonical text.

    Grammar::

        expr   := ['-'|'+'] term (('+'|'-') term)*
        term   := factor ('*' factor)*
        factor := atom (('^'|'**') INT)?
        atom   := RATIONAL | NAME | '(' expr ')'

    Products are read left to right, so the text ``eta*xi`` with odd
    ``xi < eta`` parses to ``-xi*eta``.
    """
    if isinstance(variables, Mapping):
        names = dict(variables)
    else:
        names = {v.name: v for v in variables}
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        start = m.start(m.lastindex)
        tokens.append((m.lastindex, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append((0, None, len(text)))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        t = tokens[i]
        i += 1
        return t

    def expr():
        sign = 1
        kind, val, p = peek()
        if kind == 3 and val in "+-":
            take()
            sign = -1 if val == "-" else 1
        acc = term().scale(sign)
        while True:
            kind, val, p = peek()
            if kind == 3 and val in ("+", "-"):
                take()
                t = term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def term():
        acc = factor()
        while True:
            kind, val, p = peek()
            if kind == 3 and val == "*":
                take()
                acc = acc * factor()
            else:
                return acc

    def factor():
        base = atom()
        kind, val, p = peek()
        if kind == 3 and val in ("^", "**"):
            take()
            k2, v2, p2 = take()
            if k2 != 1 or "/" in v2:
                raise ParseError("exponent must be a non-negative integer", position=p2)
            return base ** int(v2)
        return base

    def atom():
        kind, val, p = take()
        if kind == 1:
            return SuperPoly.const(Fraction(val))
        if kind == 2:
            if val not in names:
                raise ParseError(f"unknown symbol {val!r}", position=p)
            return SuperPoly.var(names[val])
        if kind == 3 and val == "(":
            inner = expr()
            k2, v2, p2 = take()
            if not (k2 == 3 and v2 == ")"):
                raise ParseError("expected ')'", position=p2)
            return inner
        if kind == 3 and val == "-":
            return -atom()
        raise ParseError("unexpected end of input" if kind == 0 else f"unexpected token {val!r}", position=p)

    result = expr()
    kind, val, p = peek()
    if kind != 0:
        raise ParseError(f"unexpected token {val!r}", position=p)
    return result
