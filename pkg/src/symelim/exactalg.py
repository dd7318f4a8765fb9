"""Exact multivariate polynomials over the rationals.

Polynomials live in a :class:`PolyRing`, which fixes the ordered list of
variables; a monomial is the exponent tuple over that list. Coefficients are
:class:`fractions.Fraction` values, so no arithmetic ever rounds.

>>> R = PolyRing(["x", "y"])
>>> x, y = R.gens
>>> str((x + 1) * (x - 1))
'x^2 - 1'
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce as _fold
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from . import checks

Monomial = tuple
Rational = Fraction
Coeff = Union[int, Fraction]


class RingMismatchError(ValueError):
    """Operands belong to rings with different variable lists."""


class PolynomialSyntaxError(ValueError):
    pass


# ---------------------------------------------------------------------------
# monomial orders


class MonomialOrder:
    """A term order on monomials.

    ``kind`` is one of ``"lex"``, ``"grevlex"`` or ``"block"``. ``priority``
    lists variables from most to least significant; ring variables missing
    from it follow in ring order. A block order compares the exponents of the
    ``front`` variables first (grevlex inside the block), then the rest
    (grevlex again).
    """

    KINDS = ("lex", "grevlex", "block")

    def __init__(self, kind: str, priority: Sequence[str] = (), front: Iterable[str] = ()):
        if kind not in self.KINDS:
            raise ValueError(f"unknown monomial order kind {kind!r}")
        self.kind = kind
        self.priority = tuple(priority)
        self.front = frozenset(front)
        if kind != "block" and self.front:
            raise ValueError("front variables only apply to block orders")
        self._keys: dict[tuple, Callable[[Monomial], tuple]] = {}

    @classmethod
    def lex(cls, priority: Sequence[str] = ()) -> "MonomialOrder":
        return cls("lex", priority)

    @classmethod
    def grevlex(cls, priority: Sequence[str] = ()) -> "MonomialOrder":
        return cls("grevlex", priority)

    @classmethod
    def block(cls, front: Iterable[str], priority: Sequence[str] = ()) -> "MonomialOrder":
        return cls("block", priority, front)

    def __repr__(self):
        extra = f", front={sorted(self.front)}" if self.front else ""
        return f"MonomialOrder({self.kind!r}, {list(self.priority)}{extra})"

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and self.kind == other.kind
                and self.priority == other.priority and self.front == other.front)

    def __hash__(self):
        return hash((self.kind, self.priority, self.front))

    def _ranked(self, gens: tuple) -> list[int]:
        index = {g: i for i, g in enumerate(gens)}
        ranked = [index[v] for v in self.priority if v in index]
        seen = set(ranked)
        ranked += [i for i in range(len(gens)) if i not in seen]
        return ranked

    def key(self, gens: Sequence[str]) -> Callable[[Monomial], tuple]:
        """Sort key on exponent tuples over ``gens``; larger key = larger monomial."""
        gens = tuple(gens)
        cached = self._keys.get(gens)
        if cached is not None:
            return cached
        ranked = self._ranked(gens)
        if self.kind == "lex":
            def key(m, r=ranked):
                return tuple(m[i] for i in r)
        elif self.kind == "grevlex":
            rev = ranked[::-1]

            def key(m, rev=rev):
                return (sum(m), tuple(-m[i] for i in rev))
        else:
            front = [i for i in ranked if gens[i] in self.front]
            rest = [i for i in ranked if gens[i] not in self.front]
            frev, rrev = front[::-1], rest[::-1]

            def key(m, frev=frev, rrev=rrev):
                return (sum(m[i] for i in frev), tuple(-m[i] for i in frev),
                        sum(m[i] for i in rrev), tuple(-m[i] for i in rrev))
        self._keys[gens] = key
        return key

    def compare(self, m1: Monomial, m2: Monomial, gens: Sequence[str]) -> int:
        k = self.key(gens)
        a, b = k(m1), k(m2)
        return (a > b) - (a < b)


def monomial_compare(order: MonomialOrder, m1: Monomial, m2: Monomial,
                     gens: Sequence[str]) -> int:
    """Return -1, 0 or 1 as ``m1`` is less than, equal to, or greater than ``m2``."""
    if len(m1) != len(gens) or len(m2) != len(gens):
        raise RingMismatchError("monomial length differs from the variable list")
    return order.compare(m1, m2, gens)


def monomial_divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def monomial_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def monomial_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# rings and polynomials


class PolyRing:
    """Polynomial ring QQ[gens] with a fixed variable order."""

    def __init__(self, gens: Iterable[str]):
        self.gens_names = tuple(gens)
        if len(set(self.gens_names)) != len(self.gens_names):
            raise ValueError(f"duplicate ring variables in {self.gens_names}")
        self.index = {g: i for i, g in enumerate(self.gens_names)}
        self.nvars = len(self.gens_names)
        self.zero_mono = (0,) * self.nvars

    def __repr__(self):
        return f"PolyRing({list(self.gens_names)})"

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.gens_names == other.gens_names

    def __hash__(self):
        return hash(self.gens_names)

    def __contains__(self, name):
        return name in self.index

    @property
    def gens(self) -> tuple["Polynomial", ...]:
        return tuple(self.gen(g) for g in self.gens_names)

    def gen(self, name: str) -> "Polynomial":
        i = self.index[name]
        mono = tuple(1 if j == i else 0 for j in range(self.nvars))
        return Polynomial(self, {mono: Fraction(1)})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def const(self, c: Coeff) -> "Polynomial":
        c = Fraction(c)
        return Polynomial(self, {self.zero_mono: c} if c else {})

    def monomial(self, exps: Mapping[str, int], coeff: Coeff = 1) -> "Polynomial":
        mono = [0] * self.nvars
        for name, e in exps.items():
            mono[self.index[name]] = e
        c = Fraction(coeff)
        return Polynomial(self, {tuple(mono): c} if c else {})

    def extend(self, names: Iterable[str], front: bool = False) -> "PolyRing":
        new = [n for n in names if n not in self.index]
        return PolyRing(new + list(self.gens_names) if front else list(self.gens_names) + new)

    def parse(self, text: str) -> "Polynomial":
        return parse_polynomial(text, self)


class Polynomial:
    """Element of a :class:`PolyRing`.

    ``terms`` maps exponent tuples to nonzero Fractions and must not be
    mutated after construction.
    """

    __slots__ = ("ring", "terms", "_hash", "_lead")

    def __init__(self, ring: PolyRing, terms: Mapping[Monomial, Coeff] | None = None):
        self.ring = ring
        if terms is None:
            terms = {}
        clean = {}
        for m, c in terms.items():
            if c:
                if len(m) != ring.nvars:
                    raise RingMismatchError(f"monomial {m} does not fit {ring}")
                clean[tuple(m)] = c if isinstance(c, Fraction) else Fraction(c)
        self.terms = clean
        self._hash = None
        self._lead = {}

    @classmethod
    def _raw(cls, ring, terms):
        # terms already clean: Fraction values, no zeros
        p = cls.__new__(cls)
        p.ring = ring
        p.terms = terms
        p._hash = None
        p._lead = {}
        return p

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(
                    f"{self.ring} vs {other.ring}; align with to_ring() first")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def to_ring(self, ring: PolyRing) -> "Polynomial":
        """Re-express in ``ring``; every variable actually used must exist there."""
        if ring == self.ring:
            return self
        src = self.ring.gens_names
        perm = []
        for i, g in enumerate(src):
            if g in ring.index:
                perm.append((i, ring.index[g]))
        used = {i for m in self.terms for i, e in enumerate(m) if e}
        missing = [src[i] for i in used if src[i] not in ring.index]
        if missing:
            raise RingMismatchError(f"variables {missing} not in {ring}")
        out = {}
        for m, c in self.terms.items():
            nm = [0] * ring.nvars
            for i, j in perm:
                nm[j] = m[i]
            out[tuple(nm)] = c
        return Polynomial._raw(ring, out)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Polynomial._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.ring.zero()
            other = Fraction(other)
            return Polynomial._raw(self.ring, {m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial._raw(self.ring, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_term(self, mono: Monomial, coeff: Fraction) -> "Polynomial":
        return Polynomial._raw(self.ring, {
            tuple(a + b for a, b in zip(m, mono)): c * coeff for m, c in self.terms.items()})

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring.zero_mono in self.terms)

    # -- structure --------------------------------------------------------

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ring.index[name]
        return max((m[i] for m in self.terms), default=-1)

    def variables(self) -> set[str]:
        names = self.ring.gens_names
        return {names[i] for m in self.terms for i, e in enumerate(m) if e}

    def constant_term(self) -> Fraction:
        return self.terms.get(self.ring.zero_mono, Fraction(0))

    def coefficient(self, exps: Mapping[str, int]) -> Fraction:
        mono = [0] * self.ring.nvars
        for name, e in exps.items():
            mono[self.ring.index[name]] = e
        return self.terms.get(tuple(mono), Fraction(0))

    def leading_term(self, order: MonomialOrder) -> tuple[Monomial, Fraction]:
        hit = self._lead.get(order)
        if hit is None:
            if not self.terms:
                raise ValueError("zero polynomial has no leading term")
            key = order.key(self.ring.gens_names)
            m = max(self.terms, key=key)
            hit = (m, self.terms[m])
            self._lead[order] = hit
        return hit

    def leading_monomial(self, order: MonomialOrder) -> Monomial:
        return self.leading_term(order)[0]

    def leading_coefficient(self, order: MonomialOrder) -> Fraction:
        return self.leading_term(order)[1]

    def sorted_terms(self, order: MonomialOrder) -> list[tuple[Monomial, Fraction]]:
        key = order.key(self.ring.gens_names)
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def monic(self, order: MonomialOrder) -> "Polynomial":
        if not self.terms:
            return self
        return self * (1 / self.leading_coefficient(order))

    def primitive(self, order: MonomialOrder | None = None) -> "Polynomial":
        """Scale to coprime integer coefficients with a positive leading coefficient."""
        if not self.terms:
            return self
        order = order or MonomialOrder.grevlex()
        den = _fold(math.lcm, (c.denominator for c in self.terms.values()), 1)
        nums = [int(c * den) for c in self.terms.values()]
        g = _fold(math.gcd, nums, 0)
        scaled = self * Fraction(den, g)
        if scaled.leading_coefficient(order) < 0:
            scaled = -scaled
        return scaled

    # -- evaluation and substitution -------------------------------------

    def eval(self, point: Mapping[str, Coeff]) -> Fraction:
        """Exact value at ``point``; every variable that occurs must be bound."""
        names = self.ring.gens_names
        used = sorted({i for m in self.terms for i, e in enumerate(m) if e})
        missing = [names[i] for i in used if names[i] not in point]
        if missing:
            raise KeyError(f"no value for variables {missing}")
        vals = {i: Fraction(point[names[i]]) for i in used}
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for i, e in enumerate(m):
                if e:
                    t *= vals[i] ** e
            total += t
        return total

    def subs(self, mapping: Mapping[str, Union["Polynomial", Coeff]],
             ring: PolyRing | None = None) -> "Polynomial":
        """Simultaneously replace variables by polynomials or constants.

        The result lives in ``ring`` (default: this ring); untouched variables
        must exist there.
        """
        target = ring or self.ring
        names = self.ring.gens_names
        images = []
        for i, g in enumerate(names):
            if g in mapping:
                v = mapping[g]
                if isinstance(v, Polynomial):
                    images.append(v.to_ring(target) if v.ring != target else v)
                else:
                    images.append(target.const(v))
            elif g in target.index:
                images.append(target.gen(g))
            else:
                images.append(None)
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(i, e):
            p = powers.get((i, e))
            if p is None:
                if images[i] is None:
                    raise RingMismatchError(f"variable {names[i]} has no image in {target}")
                p = images[i] ** e
                powers[(i, e)] = p
            return p

        acc: dict = {}
        for m, c in self.terms.items():
            term = target.const(c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            for tm, tc in term.terms.items():
                acc[tm] = acc.get(tm, 0) + tc
        return Polynomial._raw(target, {m: c for m, c in acc.items() if c})

    # -- text -------------------------------------------------------------

    def to_str(self, order: MonomialOrder | None = None) -> str:
        if not self.terms:
            return "0"
        order = order or MonomialOrder.grevlex()
        parts = []
        for m, c in self.sorted_terms(order):
            mono = "*".join(
                g if e == 1 else f"{g}^{e}"
                for g, e in zip(self.ring.gens_names, m) if e)
            mag = abs(c)
            if not mono:
                body = _fmt(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{_fmt(mag)}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Polynomial({self.to_str()!r}, gens={list(self.ring.gens_names)})"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_arith(op: str, f: Polynomial, g: Union[Polynomial, int]) -> Polynomial:
    """Named entry point for ``add``, ``sub``, ``mul`` and ``pow``."""
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "pow":
        return f ** g
    raise ValueError(f"unknown operation {op!r}")


def poly_eval(f: Polynomial, point: Mapping[str, Coeff]) -> Fraction:
    return f.eval(point)


def common_ring(polys: Iterable[Polynomial], extra: Iterable[str] = ()) -> PolyRing:
    """Smallest ring (in first-seen variable order) holding all ``polys``."""
    names: list[str] = []
    seen = set()
    for p in polys:
        for g in p.ring.gens_names:
            if g not in seen:
                seen.add(g)
                names.append(g)
    for g in extra:
        if g not in seen:
            seen.add(g)
            names.append(g)
    return PolyRing(names)


# ---------------------------------------------------------------------------
# division


def poly_reduce(f: Polynomial, divisors: Sequence[Polynomial],
                order: MonomialOrder) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division of ``f`` by ``divisors``.

    Returns ``(quotients, remainder)`` with ``f == sum(q*d) + remainder`` and
    no remainder term divisible by any divisor's leading monomial. The first
    divisor (in list order) whose leading monomial divides the current
    leading term is always used.
    """
    ring = f.ring
    for d in divisors:
        if d.ring != ring:
            raise RingMismatchError("divisors must share the dividend's ring")
        if not d:
            raise ZeroDivisionError("division by the zero polynomial")
    key = order.key(ring.gens_names)
    leads = [d.leading_term(order) for d in divisors]
    quotients: list[dict] = [{} for _ in divisors]
    rest = dict(f.terms)
    remainder: dict = {}
    while rest:
        m = max(rest, key=key)
        c = rest[m]
        for i, (lm, lc) in enumerate(leads):
            if monomial_divides(lm, m):
                qm = monomial_div(m, lm)
                qc = c / lc
                quotients[i][qm] = quotients[i].get(qm, 0) + qc
                for dm, dc in divisors[i].terms.items():
                    tm = monomial_mul(dm, qm)
                    v = rest.get(tm, 0) - qc * dc
                    if v:
                        rest[tm] = v
                    else:
                        rest.pop(tm, None)
                break
        else:
            remainder[m] = c
            del rest[m]
    qs = [Polynomial(ring, q) for q in quotients]
    r = Polynomial._raw(ring, remainder)
    if checks.enabled():
        recombined = _fold(lambda acc, qd: acc + qd[0] * qd[1], zip(qs, divisors), r)
        assert recombined == f, "division identity violated"
    return qs, r


# ---------------------------------------------------------------------------
# parsing the canonical text form

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^|\*|\+|-|/|\(|\)))")


def _tokenize(text: str) -> Iterator[tuple[str, str]]:
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolynomialSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
        pos = m.end()
        if m.group(1):
            yield "num", m.group(1)
        elif m.group(2):
            yield "id", m.group(2)
        else:
            yield "op", m.group(3)


def parse_polynomial(text: str, ring: PolyRing | None = None) -> Polynomial:
    """Parse ``+ - * ^ /`` expressions; division is only by constants.

    Without ``ring`` the variables are collected in order of appearance.
    """
    toks = list(_tokenize(text))
    if ring is None:
        names: list[str] = []
        for kind, val in toks:
            if kind == "id" and val not in names:
                names.append(val)
        ring = PolyRing(names)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise PolynomialSyntaxError("unexpected end of input")
        tok = toks[pos]
        if expected is not None and tok[1] != expected:
            raise PolynomialSyntaxError(f"expected {expected!r}, got {tok[1]!r}")
        pos += 1
        return tok

    def expr():
        acc = None
        sign = 1
        if peek() == ("op", "-"):
            take()
            sign = -1
        elif peek() == ("op", "+"):
            take()
        while True:
            t = term()
            acc = t * sign if acc is None else acc + t * sign
            if peek() == ("op", "+"):
                take()
                sign = 1
            elif peek() == ("op", "-"):
                take()
                sign = -1
            else:
                return acc

    def term():
        acc = power()
        while peek() in (("op", "*"), ("op", "/")):
            _, op = take()
            rhs = power()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or not rhs:
                    raise PolynomialSyntaxError("division only by nonzero constants")
                acc = acc / rhs.constant_term()
        return acc

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num":
                raise PolynomialSyntaxError("exponent must be a natural number")
            return base ** int(val)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return ring.const(int(val))
        if kind == "id":
            if val not in ring.index:
                raise PolynomialSyntaxError(f"unknown variable {val!r}")
            return ring.gen(val)
        if val == "(":
            e = expr()
            take(")")
            return e
        if val == "-":
            return -atom()
        raise PolynomialSyntaxError(f"unexpected {val!r}")

    if not toks:
        raise PolynomialSyntaxError("empty polynomial")
    result = expr()
    if pos != len(toks):
        raise PolynomialSyntaxError(f"trailing input at token {toks[pos][1]!r}")
    return result
