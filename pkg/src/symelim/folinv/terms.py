"""First-order terms with built-in integer polynomial arithmetic.

Arithmetic is kept in a canonical form: a :class:`Sum` maps monomials over
non-arithmetic atoms (variables and applications) to integer coefficients.
Constants are :class:`Num`, and a sum that is a single atom with coefficient
one collapses to that atom, so equal polynomials are equal terms.
"""

from __future__ import annotations

from typing import Iterator, Mapping


class Term:
    __slots__ = ("_hash", "_key")

    def __eq__(self, other):
        return self is other or (type(other) is type(self) and hash(self) == hash(other)
                                 and self.key == other.key)

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return self.key

    def __str__(self):
        return self.key


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._key = name
        self._hash = hash(("V", name))

    @property
    def key(self):
        return self._key


class Num(Term):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = int(value)
        self._key = str(self.value)
        self._hash = hash(("N", self.value))

    @property
    def key(self):
        return self._key


class App(Term):
    __slots__ = ("fn", "args")

    def __init__(self, fn: str, args: tuple = ()):
        self.fn = fn
        self.args = tuple(args)
        self._key = fn if not self.args else f"{fn}({', '.join(a.key for a in self.args)})"
        self._hash = hash(("A", self._key))

    @property
    def key(self):
        return self._key


Mono = tuple  # ((atom, exponent), ...) sorted by atom key; () is the constant monomial


def _mono_key(m: Mono) -> str:
    return "*".join(a.key if e == 1 else f"{a.key}^{e}" for a, e in m)


class Sum(Term):
    """Polynomial with integer coefficients over atoms; use :func:`arith` to build."""

    __slots__ = ("items",)

    def __init__(self, items: tuple):
        self.items = items  # ((mono, coeff), ...), constant last
        parts = []
        for m, c in items:
            body = _mono_key(m)
            if not m:
                txt = str(abs(c))
            elif abs(c) == 1:
                txt = body
            else:
                txt = f"{abs(c)}*{body}"
            parts.append(txt if not parts and c > 0 else
                         f"-{txt}" if not parts else (" + " if c > 0 else " - ") + txt)
        self._key = "(" + "".join(parts) + ")"
        self._hash = hash(("S", self._key))

    @property
    def key(self):
        return self._key

    def as_dict(self) -> dict:
        return dict(self.items)


def _sort_mono(pairs) -> Mono:
    acc: dict = {}
    for a, e in pairs:
        acc[a] = acc.get(a, 0) + e
    return tuple(sorted(acc.items(), key=lambda p: p[0].key))


def arith(poly: Mapping[Mono, int]) -> Term:
    """Canonical term for a polynomial given as monomial -> coefficient."""
    items = [(m, int(c)) for m, c in poly.items() if c]
    if not items:
        return Num(0)
    if len(items) == 1:
        m, c = items[0]
        if not m:
            return Num(c)
        if c == 1 and len(m) == 1 and m[0][1] == 1:
            return m[0][0]
    items.sort(key=lambda mc: (not mc[0], _mono_key(mc[0])))
    return Sum(tuple(items))


def poly_of(t: Term) -> dict:
    if isinstance(t, Sum):
        return dict(t.items)
    if isinstance(t, Num):
        return {(): t.value} if t.value else {}
    return {((t, 1),): 1}


def padd(p: Mapping, q: Mapping, scale: int = 1) -> dict:
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pmul(p: Mapping, q: Mapping) -> dict:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _sort_mono(m1 + m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def pscale(p: Mapping, c: int) -> dict:
    return {m: v * c for m, v in p.items()} if c else {}


def add(*terms: Term) -> Term:
    acc: dict = {}
    for t in terms:
        acc = padd(acc, poly_of(t))
    return arith(acc)


def sub(s: Term, t: Term) -> Term:
    return arith(padd(poly_of(s), poly_of(t), -1))


def mul(s: Term, t: Term) -> Term:
    return arith(pmul(poly_of(s), poly_of(t)))


def num(v: int) -> Num:
    return Num(v)


def atoms(t: Term) -> list[Term]:
    """Atoms occurring in an arithmetic term (the term itself if it is one)."""
    if isinstance(t, Sum):
        seen = []
        for m, _ in t.items:
            for a, _ in m:
                if a not in seen:
                    seen.append(a)
        return seen
    if isinstance(t, Num):
        return []
    return [t]


# -- substitution, unification, matching ------------------------------------------------


def subst(t: Term, sigma: Mapping[str, Term]) -> Term:
    if not sigma:
        return t
    if isinstance(t, Var):
        v = sigma.get(t.name)
        return t if v is None else v
    if isinstance(t, Num):
        return t
    if isinstance(t, App):
        if not t.args:
            return t
        new = tuple(subst(a, sigma) for a in t.args)
        return t if all(x is y for x, y in zip(new, t.args)) else App(t.fn, new)
    acc: dict = {}
    for m, c in t.items:
        term = {(): c}
        for a, e in m:
            pa = poly_of(subst(a, sigma))
            for _ in range(e):
                term = pmul(term, pa)
        acc = padd(acc, term)
    return arith(acc)


def walk(t: Term, sigma: Mapping[str, Term]) -> Term:
    while isinstance(t, Var) and t.name in sigma:
        t = sigma[t.name]
    return t


def variables(t: Term, out: set | None = None) -> set:
    out = set() if out is None else out
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, App):
        for a in t.args:
            variables(a, out)
    elif isinstance(t, Sum):
        for m, _ in t.items:
            for a, _ in m:
                variables(a, out)
    return out


def _resolve(t: Term, sigma: dict) -> Term:
    # fully apply a triangular substitution
    if isinstance(t, Var):
        v = sigma.get(t.name)
        return t if v is None else _resolve(v, sigma)
    if isinstance(t, Num):
        return t
    names = variables(t)
    if not names & set(sigma):
        return t
    return subst(t, {n: _resolve(Var(n), sigma) for n in names if n in sigma})


def unify(s: Term, t: Term, sigma: dict | None = None) -> dict | None:
    """Most general unifier extending ``sigma`` (returned fully applied), or None."""
    sigma = dict(sigma or {})
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = walk(a, sigma), walk(b, sigma)
        if isinstance(a, (Sum, App)) and variables(a) & set(sigma):
            a = _resolve(a, sigma)
        if isinstance(b, (Sum, App)) and variables(b) & set(sigma):
            b = _resolve(b, sigma)
        if a == b:
            continue
        if isinstance(a, Var):
            if a.name in variables(b):
                return None
            sigma[a.name] = b
            continue
        if isinstance(b, Var):
            if b.name in variables(a):
                return None
            sigma[b.name] = a
            continue
        if isinstance(a, App) and isinstance(b, App):
            if a.fn != b.fn or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
            continue
        if isinstance(a, Sum) and isinstance(b, Sum) and len(a.items) == len(b.items):
            pairs = _pair_monomials(a, b)
            if pairs is None:
                return None
            stack.extend(pairs)
            continue
        return None
    return {k: _resolve(v, sigma) for k, v in sigma.items()}


def _pair_monomials(a: Sum, b: Sum):
    # syntactic pairing of equally shaped monomials in canonical order
    pairs = []
    for (m1, c1), (m2, c2) in zip(a.items, b.items):
        if c1 != c2 or len(m1) != len(m2):
            return None
        for (x, e1), (y, e2) in zip(m1, m2):
            if e1 != e2:
                return None
            pairs.append((x, y))
    return pairs


def match(pattern: Term, target: Term, sigma: dict | None = None) -> dict | None:
    """Substitution σ with pattern σ == target (target variables are rigid)."""
    sigma = dict(sigma or {})
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = t
            elif bound != t:
                return None
            continue
        if isinstance(p, Num):
            if p != t:
                return None
            continue
        if isinstance(p, App):
            if not isinstance(t, App) or p.fn != t.fn or len(p.args) != len(t.args):
                return None
            stack.extend(zip(p.args, t.args))
            continue
        if not isinstance(t, Sum) or len(p.items) != len(t.items):
            return None
        pairs = _pair_monomials(p, t)
        if pairs is None:
            return None
        stack.extend(pairs)
    return sigma


def rename(t: Term, suffix: str) -> Term:
    names = variables(t)
    return subst(t, {n: Var(n + suffix) for n in names}) if names else t


# -- subterms -------------------------------------------------------------------------


def subterms(t: Term) -> Iterator[Term]:
    """Non-variable, non-arithmetic subterms (candidates for rewriting)."""
    if isinstance(t, App):
        yield t
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, Sum):
        for m, _ in t.items:
            for a, _ in m:
                yield from subterms(a)


def replace(t: Term, old: Term, new: Term) -> Term:
    """Replace every occurrence of ``old`` (an application) by ``new``."""
    if t == old:
        return new
    if isinstance(t, App) and t.args:
        args = tuple(replace(a, old, new) for a in t.args)
        return t if all(x is y for x, y in zip(args, t.args)) else App(t.fn, args)
    if isinstance(t, Sum):
        acc: dict = {}
        changed = False
        for m, c in t.items:
            term = {(): c}
            for a, e in m:
                ra = replace(a, old, new)
                changed |= ra is not a
                pa = poly_of(ra)
                for _ in range(e):
                    term = pmul(term, pa)
            acc = padd(acc, term)
        return arith(acc) if changed else t
    return t


def symbols(t: Term, out: set | None = None) -> set:
    """Function symbols (with arity) occurring in ``t``."""
    out = set() if out is None else out
    if isinstance(t, App):
        out.add((t.fn, len(t.args)))
        for a in t.args:
            symbols(a, out)
    elif isinstance(t, Sum):
        for m, _ in t.items:
            for a, _ in m:
                symbols(a, out)
    return out


def size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(size(a) for a in t.args)
    if isinstance(t, Sum):
        return sum(1 + sum(size(a) * e for a, e in m) for m, _ in t.items)
    return 1
