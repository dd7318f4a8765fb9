"""Signature partition and the Knuth-Bendix order used for eligibility."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

from .terms import App, Num, Sum, Term, Var

BASE = "base"
EXTENDED = "extended"


class UnregisteredSymbol(KeyError):
    pass


@dataclass
class Signature:
    """Symbols keyed by (name, arity), each tagged base or extended.

    Predicates share the table with functions; ``kinds`` records which role a
    symbol plays ("const", "value", "array", "uf", "counter", "skolem",
    "update", "path") for printing and export.
    """

    tags: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    predicates: set = field(default_factory=set)

    def add(self, name: str, arity: int, tag: str, kind: str, predicate: bool = False) -> None:
        key = (name, arity)
        old = self.tags.get(key)
        if old is not None and old != tag:
            raise ValueError(f"symbol {name}/{arity} registered as both {old} and {tag}")
        self.tags[key] = tag
        self.kinds[key] = kind
        if predicate:
            self.predicates.add(key)

    def tag(self, name: str, arity: int) -> str:
        try:
            return self.tags[(name, arity)]
        except KeyError:
            raise UnregisteredSymbol(f"{name}/{arity}") from None

    def is_extended(self, name: str, arity: int) -> bool:
        return self.tag(name, arity) == EXTENDED

    def base_symbols(self) -> list:
        return sorted(k for k, t in self.tags.items() if t == BASE)

    def extended_symbols(self) -> list:
        return sorted(k for k, t in self.tags.items() if t == EXTENDED)


class Precedence:
    """Total order: extended above base, then by arity, then by name."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self._rank = {key: i for i, key in enumerate(sorted(sig.tags, key=self._key))}

    def _key(self, sym):
        name, arity = sym
        return (self.sig.tags[sym] == EXTENDED, arity, name)

    def rank(self, name: str, arity: int) -> int:
        try:
            return self._rank[(name, arity)]
        except KeyError:
            raise UnregisteredSymbol(f"{name}/{arity}") from None

    def greater(self, f: tuple, g: tuple) -> bool:
        return self.rank(*f) > self.rank(*g)

    def symbols(self) -> list:
        return sorted(self._rank, key=self._rank.get)


# -- weights and variable multisets ---------------------------------------------------


@lru_cache(maxsize=200_000)
def weight(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(weight(a) for a in t.args)
    if isinstance(t, Sum):
        # a sum is read as a tree of +, * and numerals
        return sum(1 + sum(weight(a) * e for a, e in m) for m, _ in t.items)
    return 1


@lru_cache(maxsize=200_000)
def var_counts(t: Term) -> Counter:
    if isinstance(t, Var):
        return Counter({t.name: 1})
    out: Counter = Counter()
    if isinstance(t, App):
        for a in t.args:
            out.update(var_counts(a))
    elif isinstance(t, Sum):
        for m, _ in t.items:
            for a, e in m:
                for name, n in var_counts(a).items():
                    out[name] += n * e
    return out


def _covers(big: Counter, small: Counter) -> bool:
    return all(big.get(x, 0) >= n for x, n in small.items())


class KBO:
    """Knuth-Bendix order with unit weights over a precedence.

    Numerals and sums are treated as special heads below every signature
    symbol: numerals ordered by value, a sum compared through its sorted
    monomial list.
    """

    def __init__(self, precedence: Precedence):
        self.prec = precedence
        self._cache: dict = {}

    def _head(self, t: Term):
        if isinstance(t, Num):
            return (0, t.value, "")
        if isinstance(t, Sum):
            return (1, 0, "")
        return (2, self.prec.rank(t.fn, len(t.args)), t.fn)

    def _children(self, t: Term) -> list:
        if isinstance(t, App):
            return list(t.args)
        if isinstance(t, Sum):
            out = []
            for m, c in t.items:
                out.append(Num(c))
                for a, e in m:
                    out.extend([a] * e)
            return out
        return []

    def greater(self, s: Term, t: Term) -> bool:
        key = (s, t)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._greater(s, t)
            if len(self._cache) > 500_000:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def _greater(self, s: Term, t: Term) -> bool:
        if s == t:
            return False
        if isinstance(s, Var):
            return False
        if isinstance(t, Var):
            return t.name in var_counts(s)
        vs, vt = var_counts(s), var_counts(t)
        if not _covers(vs, vt):
            return False
        ws, wt = weight(s), weight(t)
        if ws != wt:
            return ws > wt
        hs, ht = self._head(s), self._head(t)
        if hs != ht:
            return hs > ht
        for a, b in zip(self._children(s), self._children(t)):
            if a != b:
                return self.greater(a, b)
        return len(self._children(s)) > len(self._children(t))

    def compare(self, s: Term, t: Term) -> int:
        """1 if s > t, -1 if t > s, 0 if equal or incomparable."""
        if self.greater(s, t):
            return 1
        if self.greater(t, s):
            return -1
        return 0

    def maximal(self, terms) -> list:
        """Terms not strictly below any other term of the collection."""
        terms = list(dict.fromkeys(terms))
        return [t for t in terms if not any(self.greater(u, t) for u in terms if u is not t)]
