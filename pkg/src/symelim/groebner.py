"""Buchberger's algorithm and the ideal operations built on it."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import checks
from .exactalg import (
    MonomialOrder,
    PolyRing,
    Polynomial,
    RingMismatchError,
    monomial_div,
    monomial_divides,
    monomial_lcm,
    monomial_mul,
)


class ResourceCapExceeded(RuntimeError):
    """A configured limit stopped the computation; no partial basis is returned."""


@dataclass(frozen=True)
class GBLimits:
    max_basis: int = 5000
    max_degree: int = 40


DEFAULT_LIMITS = GBLimits()


class Ideal:
    """Finitely generated ideal of a :class:`PolyRing`."""

    def __init__(self, ring: PolyRing, generators: Iterable[Polynomial] = ()):
        self.ring = ring
        gens: list[Polynomial] = []
        seen = set()
        for g in generators:
            if g.ring != ring:
                g = g.to_ring(ring)
            if g and g not in seen:
                seen.add(g)
                gens.append(g)
        self.generators = tuple(gens)

    def __repr__(self):
        return f"Ideal({[str(g) for g in self.generators]}, gens={list(self.ring.gens_names)})"

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    def is_zero(self) -> bool:
        return not self.generators

    def __add__(self, other: "Ideal") -> "Ideal":
        if other.ring != self.ring:
            raise RingMismatchError("ideal sum needs a common ring")
        return Ideal(self.ring, self.generators + other.generators)


@dataclass
class GroebnerBasis:
    basis: list[Polynomial]
    order: MonomialOrder
    reduced: bool = True
    ring: PolyRing | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.ring is None and self.basis:
            self.ring = self.basis[0].ring

    def __iter__(self):
        return iter(self.basis)

    def __len__(self):
        return len(self.basis)

    def reduce(self, f: Polynomial) -> Polynomial:
        return reduce_modulo(f, self)

    def contains(self, f: Polynomial) -> bool:
        return not reduce_modulo(f, self)

    def is_unit(self) -> bool:
        return any(g.is_constant() and g for g in self.basis)

    def same_as(self, other: "GroebnerBasis") -> bool:
        return set(self.basis) == set(other.basis)

    def to_ideal(self) -> Ideal:
        return Ideal(self.ring, self.basis)


def _normal_form(terms: dict, basis: Sequence[tuple], key) -> dict:
    """Fully reduce a term dict by ``(lm, lc, terms)`` triples."""
    rest = dict(terms)
    out = {}
    while rest:
        m = max(rest, key=key)
        c = rest[m]
        for lm, lc, gterms in basis:
            if monomial_divides(lm, m):
                qm = monomial_div(m, lm)
                qc = c / lc
                for gm, gc in gterms.items():
                    tm = monomial_mul(gm, qm)
                    v = rest.get(tm, 0) - qc * gc
                    if v:
                        rest[tm] = v
                    else:
                        rest.pop(tm, None)
                break
        else:
            out[m] = c
            del rest[m]
    return out


def _triples(polys: Iterable[Polynomial], order: MonomialOrder) -> list[tuple]:
    out = []
    for p in polys:
        lm, lc = p.leading_term(order)
        out.append((lm, lc, p.terms))
    return out


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder) -> Polynomial:
    """Critical-pair combination (lcm/lt(f))*f - (lcm/lt(g))*g."""
    if f.ring != g.ring:
        raise RingMismatchError("S-polynomial needs a common ring")
    if not f or not g:
        raise ValueError("S-polynomial of the zero polynomial")
    fm, fc = f.leading_term(order)
    gm, gc = g.leading_term(order)
    lcm = monomial_lcm(fm, gm)
    return (f.mul_term(monomial_div(lcm, fm), 1 / fc)
            - g.mul_term(monomial_div(lcm, gm), 1 / gc))


def reduce_modulo(f: Polynomial, gb: GroebnerBasis) -> Polynomial:
    """Normal form of ``f``; zero exactly when ``f`` lies in the ideal."""
    if gb.ring is not None and f.ring != gb.ring:
        f = f.to_ring(gb.ring)
    if not gb.basis or not f:
        return f
    key = gb.order.key(f.ring.gens_names)
    nf = _normal_form(f.terms, _triples(gb.basis, gb.order), key)
    return Polynomial._raw(f.ring, nf)


def is_groebner(basis: Sequence[Polynomial], order: MonomialOrder) -> bool:
    """Check that every S-polynomial reduces to zero (no criteria shortcuts)."""
    if not basis:
        return True
    key = order.key(basis[0].ring.gens_names)
    triples = _triples(basis, order)
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            s = s_polynomial(basis[i], basis[j], order)
            if _normal_form(s.terms, triples, key):
                return False
    return True


def is_reduced(basis: Sequence[Polynomial], order: MonomialOrder) -> bool:
    for i, g in enumerate(basis):
        lm, lc = g.leading_term(order)
        if lc != 1:
            return False
        for j, h in enumerate(basis):
            if i == j:
                continue
            hm = h.leading_monomial(order)
            if any(monomial_divides(hm, m) for m in g.terms):
                return False
    return True


def buchberger(ideal: Ideal, order: MonomialOrder,
               limits: GBLimits = DEFAULT_LIMITS) -> GroebnerBasis:
    """Reduced Gröbner basis of ``ideal`` under ``order``.

    Pairs are processed by lcm degree, then insertion index; the
    Gebauer-Möller update applies the coprime and chain criteria.
    """
    ring = ideal.ring
    key = order.key(ring.gens_names)
    gens = [g.monic(order) for g in ideal.generators]
    if any(g.is_constant() for g in gens):
        return GroebnerBasis([ring.one()], order, True, ring)
    gens.sort(key=lambda g: (key(g.leading_monomial(order)), len(g.terms)))

    basis: list[tuple] = []       # (lm, lc, terms)
    alive: list[bool] = []
    pairs: dict[tuple[int, int], tuple] = {}
    candidates = 0

    def add(terms: dict) -> None:
        nonlocal candidates
        candidates += 1
        if candidates > limits.max_basis:
            raise ResourceCapExceeded(
                f"Gröbner basis exceeded {limits.max_basis} candidates")
        lm = max(terms, key=key)
        if sum(lm) > limits.max_degree:
            raise ResourceCapExceeded(
                f"Gröbner basis element of degree {sum(lm)} exceeds cap {limits.max_degree}")
        lc = terms[lm]
        if lc != 1:
            terms = {m: c / lc for m, c in terms.items()}
        new = len(basis)
        # Gebauer-Möller: drop old pairs whose lcm is strictly divisible by lm
        for (i, j), lcm in list(pairs.items()):
            if (monomial_divides(lm, lcm)
                    and monomial_lcm(basis[i][0], lm) != lcm
                    and monomial_lcm(basis[j][0], lm) != lcm):
                del pairs[(i, j)]
        by_lcm: dict[tuple, list[int]] = {}
        for i, (gm, _, _) in enumerate(basis):
            if alive[i]:
                by_lcm.setdefault(monomial_lcm(gm, lm), []).append(i)
        kept: list[tuple] = []
        for lcm in sorted(by_lcm, key=lambda m: (sum(m), key(m))):
            if any(monomial_divides(other, lcm) and other != lcm for other, _ in kept):
                continue
            kept.append((lcm, by_lcm[lcm]))
        for lcm, idxs in kept:
            coprime = any(monomial_lcm(basis[i][0], lm) == monomial_mul(basis[i][0], lm)
                          for i in idxs)
            if not coprime:
                pairs[(min(idxs), new)] = lcm
        for i in range(len(basis)):
            if alive[i] and monomial_divides(lm, basis[i][0]):
                alive[i] = False
        basis.append((lm, Fraction(1), terms))
        alive.append(True)

    for g in gens:
        nf = _normal_form(g.terms, [b for b, a in zip(basis, alive) if a], key)
        if nf:
            if any(m == ring.zero_mono for m in nf) and len(nf) == 1:
                return GroebnerBasis([ring.one()], order, True, ring)
            add(nf)

    while pairs:
        (i, j), lcm = min(pairs.items(), key=lambda it: (sum(it[1]), it[0][1], it[0][0]))
        del pairs[(i, j)]
        fm, fc, ft = basis[i]
        gm, gc, gt = basis[j]
        s = {}
        qf, qg = monomial_div(lcm, fm), monomial_div(lcm, gm)
        for m, c in ft.items():
            tm = monomial_mul(m, qf)
            s[tm] = s.get(tm, 0) + c / fc
        for m, c in gt.items():
            tm = monomial_mul(m, qg)
            v = s.get(tm, 0) - c / gc
            if v:
                s[tm] = v
            else:
                s.pop(tm, None)
        s = {m: c for m, c in s.items() if c}
        if not s:
            continue
        active = [b for b, a in zip(basis, alive) if a]
        nf = _normal_form(s, active, key)
        if not nf:
            continue
        if len(nf) == 1 and ring.zero_mono in nf:
            return GroebnerBasis([ring.one()], order, True, ring)
        add(nf)

    result = _reduce_basis([Polynomial._raw(ring, b[2]) for b, a in zip(basis, alive) if a],
                           order)
    gb = GroebnerBasis(result, order, True, ring)
    if checks.enabled():
        assert is_groebner(gb.basis, order), "S-polynomial failed to reduce to zero"
        assert is_reduced(gb.basis, order), "basis not reduced"
    return gb


def _reduce_basis(polys: list[Polynomial], order: MonomialOrder) -> list[Polynomial]:
    if not polys:
        return []
    ring = polys[0].ring
    key = order.key(ring.gens_names)
    polys = sorted((p.monic(order) for p in polys), key=lambda p: key(p.leading_monomial(order)))
    minimal: list[Polynomial] = []
    for p in polys:
        lm = p.leading_monomial(order)
        if not any(monomial_divides(q.leading_monomial(order), lm) for q in minimal):
            minimal.append(p)
    reduced = []
    for i, p in enumerate(minimal):
        others = _triples(minimal[:i] + minimal[i + 1:], order)
        lm, lc = p.leading_term(order)
        tail = {m: c for m, c in p.terms.items() if m != lm}
        nf = _normal_form(tail, others, key)
        nf[lm] = lc
        reduced.append(Polynomial._raw(ring, nf).monic(order))
    reduced.sort(key=lambda p: key(p.leading_monomial(order)), reverse=True)
    return reduced


def groebner_basis(ideal: Ideal, order: MonomialOrder | None = None,
                   limits: GBLimits = DEFAULT_LIMITS) -> GroebnerBasis:
    return buchberger(ideal, order or MonomialOrder.grevlex(), limits)


def eliminate(ideal: Ideal, drop_vars: Iterable[str],
              limits: GBLimits = DEFAULT_LIMITS) -> Ideal:
    """Elimination ideal: ``ideal`` intersected with the ring of the kept variables.

    The result lives in the ring of the remaining variables (original order)
    and its generators form the reduced grevlex-inside-block basis part free
    of ``drop_vars``.
    """
    drop = set(drop_vars)
    ring = ideal.ring
    unknown = drop - set(ring.gens_names)
    if unknown:
        raise RingMismatchError(f"cannot drop unknown variables {sorted(unknown)}")
    keep = [g for g in ring.gens_names if g not in drop]
    small = PolyRing(keep)
    if not drop:
        gb = buchberger(ideal, MonomialOrder.grevlex(), limits)
        return Ideal(small, gb.basis)
    order = MonomialOrder.block(drop)
    gb = buchberger(ideal, order, limits)
    kept = [g.to_ring(small) for g in gb.basis if not (g.variables() & drop)]
    return Ideal(small, kept)


def _fresh(ring: PolyRing, stem: str) -> str:
    name = stem
    i = 0
    while name in ring.index:
        i += 1
        name = f"{stem}{i}"
    return name


def intersect(i1: Ideal, i2: Ideal, limits: GBLimits = DEFAULT_LIMITS) -> Ideal:
    """I1 ∩ I2 by eliminating t from t*I1 + (1 - t)*I2."""
    if i1.ring != i2.ring:
        raise RingMismatchError("intersection needs a common ring")
    ring = i1.ring
    if i1.is_zero() or i2.is_zero():
        return Ideal(ring)
    t = _fresh(ring, "t")
    big = ring.extend([t], front=True)
    tp = big.gen(t)
    gens = [tp * f.to_ring(big) for f in i1] + [(1 - tp) * g.to_ring(big) for g in i2]
    out = eliminate(Ideal(big, gens), [t], limits)
    return Ideal(ring, [g.to_ring(ring) for g in out])


def ideal_member(f: Polynomial, ideal: Ideal, limits: GBLimits = DEFAULT_LIMITS,
                 gb: GroebnerBasis | None = None) -> bool:
    if not f:
        return True
    if f.ring != ideal.ring:
        f = f.to_ring(ideal.ring)
    if ideal.is_zero():
        return False
    gb = gb or buchberger(ideal, MonomialOrder.grevlex(), limits)
    return not reduce_modulo(f, gb)
