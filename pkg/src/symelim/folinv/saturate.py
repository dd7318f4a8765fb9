"""Given-clause saturation with ordered resolution, chaining and paramodulation.

Inference rules, all restricted to eligible literals (the selected literal if
there is one, otherwise the maximal ones):

* ``res``: binary resolution on predicate atoms;
* ``eqres``: resolution between ``P = 0`` and ``P != 0``;
* ``chain``: Fourier-Motzkin chaining of two ``>=`` literals on a maximal,
  non-variable atom occurring with opposite signs;
* ``para``: paramodulation from an equation whose maximal atom has
  coefficient +-1, replacing every instance in the target clause;
* ``factor``: positive factoring of predicate literals.

Simplification is demodulation by oriented unit equations, tautology deletion,
forward subsumption and backward subsumption.  Each retained clause records
its rule, parents, the inference details and the rewrite steps applied, and
:func:`replay` recomputes it from that record.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field

from .clauses import (
    EQ, GE, NE, ArithLit, Clause, Derivation, PredLit, make_clause, rename_clause, subsumes,
)
from .order import KBO, Precedence, Signature
from .terms import (
    App, Num, Sum, Var, arith, atoms, match, padd, poly_of, pscale, replace, subst, subterms, unify,
    variables,
)


@dataclass
class SaturationLimits:
    max_retained: int = 10_000
    max_generated: int = 50_000
    max_seconds: float | None = None
    age_weight: tuple = (1, 4)
    # generated clauses with a numeral above this are discarded; None means
    # twice the largest numeral of the input plus two
    max_numeral: int | None = None
    # likewise for clause length; None means twice the longest input clause
    max_literals: int | None = None


@dataclass
class SaturationResult:
    clauses: list
    refuted: bool
    partial: bool
    reason: str
    generated: int
    iterations: int
    log: dict = field(repr=False, default_factory=dict)
    discarded: int = 0

    @property
    def empty_clause(self):
        for c in self.clauses:
            if c.is_empty():
                return c
        return None


class SaturationError(RuntimeError):
    pass


# -- literal eligibility --------------------------------------------------------------


def _lone_atoms(lit: ArithLit) -> dict:
    """Atoms that occur only as a degree-one monomial, with their coefficient."""
    p = poly_of(lit.poly)
    out = {}
    for m, c in p.items():
        if len(m) == 1 and m[0][1] == 1:
            out[m[0][0]] = c
    for m in p:
        if len(m) > 1 or (m and m[0][1] > 1):
            for a, _ in m:
                out.pop(a, None)
    return out


class Calculus:
    """The inference rules parameterized by an order and a signature."""

    def __init__(self, sig: Signature, precedence: Precedence | None = None):
        self.sig = sig
        self.prec = precedence or Precedence(sig)
        self.kbo = KBO(self.prec)
        self._elig: dict = {}

    # ordering on literals through their maximal terms
    def max_terms(self, lit) -> list:
        if isinstance(lit, PredLit):
            return [lit.atom]
        return self.kbo.maximal(atoms(lit.poly))

    def lit_greater(self, a, b) -> bool:
        ma, mb = self.max_terms(a), self.max_terms(b)
        if not mb:
            return bool(ma)
        return all(any(self.kbo.greater(s, t) for s in ma) for t in mb)

    def _extended_pred(self, lit) -> bool:
        return isinstance(lit, PredLit) and self.sig.is_extended(lit.pred, len(lit.args))

    def selected(self, lits) -> int | None:
        cands = [i for i, l in enumerate(lits) if isinstance(l, PredLit) and not l.positive
                 and self._extended_pred(l)]
        if not cands:
            return None

        def rank(i):
            l = lits[i]
            kind = self.sig.kinds.get((l.pred, len(l.args)))
            return (kind != "update", -len(l.atom.key), l.key)
        return min(cands, key=rank)

    def eligible(self, clause: Clause) -> list:
        key = clause.key
        hit = self._elig.get(key)
        if hit is not None:
            return hit
        lits = clause.literals
        sel = self.selected(lits)
        if sel is not None:
            out = [sel]
        else:
            out = [i for i, l in enumerate(lits)
                   if not any(self.lit_greater(o, l) for j, o in enumerate(lits) if j != i)]
        if len(self._elig) > 200_000:
            self._elig.clear()
        self._elig[key] = out
        return out

    def rewrite_rule(self, lit) -> tuple | None:
        """(lhs atom, rhs term) for an equation oriented on its maximal atom."""
        if not isinstance(lit, ArithLit) or lit.rel != EQ:
            return None
        mx = self.max_terms(lit)
        if len(mx) != 1 or isinstance(mx[0], Var):
            return None
        t = mx[0]
        c = _lone_atoms(lit).get(t)
        if c not in (1, -1):
            return None
        rest = padd(poly_of(lit.poly), {((t, 1),): c}, -1)
        rhs = arith(pscale(rest, -c))
        return t, rhs

    # -- rules ---------------------------------------------------------------------------

    def resolve(self, c1: Clause, i: int, c2: Clause, j: int):
        l1, l2 = c1.literals[i], c2.literals[j]
        if not (isinstance(l1, PredLit) and isinstance(l2, PredLit)) or l1.positive == l2.positive \
                or l1.pred != l2.pred or len(l1.args) != len(l2.args):
            return None
        other = rename_clause(c2.literals, "_r")
        sigma = unify(App("", l1.args), App("", other[j].args))
        if sigma is None:
            return None
        lits = [l.subst(sigma) for k, l in enumerate(c1.literals) if k != i]
        lits += [l.subst(sigma) for k, l in enumerate(other) if k != j]
        return lits

    def eq_resolve(self, c1: Clause, i: int, c2: Clause, j: int):
        l1, l2 = c1.literals[i], c2.literals[j]
        if not (isinstance(l1, ArithLit) and isinstance(l2, ArithLit)) \
                or (l1.rel, l2.rel) != (EQ, NE):
            return None
        other = rename_clause(c2.literals, "_r")
        sigma = unify(l1.poly, other[j].poly)
        if sigma is None:
            return None
        lits = [l.subst(sigma) for k, l in enumerate(c1.literals) if k != i]
        lits += [l.subst(sigma) for k, l in enumerate(other) if k != j]
        return lits

    def chain(self, c1: Clause, i: int, t1_key: str, c2: Clause, j: int, t2_key: str):
        l1, l2 = c1.literals[i], c2.literals[j]
        if not (isinstance(l1, ArithLit) and isinstance(l2, ArithLit)) \
                or l1.rel != GE or l2.rel != GE:
            return None
        other = rename_clause(c2.literals, "_r")
        lone1 = {t.key: (t, c) for t, c in _lone_atoms(l1).items()}
        lone2 = {t.key: (t, c) for t, c in _lone_atoms(other[j]).items()}
        if t1_key not in lone1 or t2_key not in lone2:
            return None
        (t1, a), (t2, b) = lone1[t1_key], lone2[t2_key]
        if a <= 0 or b >= 0:
            return None
        sigma = unify(t1, t2)
        if sigma is None:
            return None
        combo = padd(pscale(poly_of(subst(l1.poly, sigma)), -b),
                     pscale(poly_of(subst(other[j].poly, sigma)), a))
        lits = [l.subst(sigma) for k, l in enumerate(c1.literals) if k != i]
        lits += [l.subst(sigma) for k, l in enumerate(other) if k != j]
        lits.append(ArithLit(GE, arith(combo)))
        return lits

    def paramodulate(self, c1: Clause, i: int, c2: Clause, j: int, u_key: str):
        rule = self.rewrite_rule(c1.literals[i])
        if rule is None:
            return None
        other = rename_clause(c2.literals, "_r")
        target = None
        for lit_term in other[j].terms():
            for u in subterms(lit_term):
                if u.key == u_key:
                    target = u
                    break
            if target is not None:
                break
        if target is None:
            return None
        lhs, rhs = rule
        # one-way matching: the target clause is never instantiated
        sigma = match(lhs, target)
        if sigma is None:
            return None
        lhs_s, rhs_s = subst(lhs, sigma), subst(rhs, sigma)
        if any(self.kbo.greater(a, lhs_s) or a == lhs_s for a in atoms(rhs_s)):
            return None
        lits = [l.subst(sigma) for k, l in enumerate(c1.literals) if k != i]
        for l in other:
            l = l.subst(sigma)
            lits.append(_replace_lit(l, lhs_s, rhs_s))
        return lits

    def factor(self, c: Clause, i: int, j: int):
        l1, l2 = c.literals[i], c.literals[j]
        if not (isinstance(l1, PredLit) and isinstance(l2, PredLit)) or not l1.positive \
                or not l2.positive or l1.pred != l2.pred:
            return None
        sigma = unify(App("", l1.args), App("", l2.args))
        if sigma is None:
            return None
        return [l.subst(sigma) for k, l in enumerate(c.literals) if k != j]

    def apply(self, rule: str, parents: list, info: tuple):
        """Re-run one recorded inference (used for generation and replay)."""
        if rule == "res":
            return self.resolve(parents[0], info[0], parents[1], info[1])
        if rule == "eqres":
            return self.eq_resolve(parents[0], info[0], parents[1], info[1])
        if rule == "chain":
            return self.chain(parents[0], info[0], info[1], parents[1], info[2], info[3])
        if rule == "para":
            return self.paramodulate(parents[0], info[0], parents[1], info[1], info[2])
        if rule == "factor":
            return self.factor(parents[0], info[0], info[1])
        raise SaturationError(f"unknown rule {rule}")

    # -- demodulation ----------------------------------------------------------------

    def demod_rule(self, clause: Clause):
        if len(clause.literals) != 1:
            return None
        rule = self.rewrite_rule(clause.literals[0])
        if rule is None:
            return None
        lhs, rhs = rule
        if not variables(rhs) <= variables(lhs):
            return None
        return rule

    def rewrite_step(self, lits, unit: Clause, instance_key: str):
        lhs, rhs = self.demod_rule(unit)
        for lit in lits:
            for t in lit.terms():
                for u in subterms(t):
                    if u.key == instance_key:
                        sigma = match(lhs, u)
                        if sigma is None:
                            return None
                        new = subst(rhs, sigma)
                        return [_replace_lit(l, u, new) for l in lits]
        return None


def _shallow(t) -> bool:
    """Every argument is a variable, possibly plus a numeral offset."""
    for a in t.args:
        if isinstance(a, Var):
            continue
        if isinstance(a, Sum) and all(not m or (len(m) == 1 and m[0][1] == 1
                                                  and isinstance(m[0][0], Var) and c == 1)
                                      for m, c in a.items):
            continue
        return False
    return True


def _numerals(lits) -> int:
    top = 0
    for lit in lits:
        for t in lit.terms():
            top = max(top, _term_numerals(t))
    return top


def _term_numerals(t) -> int:
    if isinstance(t, Num):
        return abs(t.value)
    if isinstance(t, App):
        return max((_term_numerals(a) for a in t.args), default=0)
    if isinstance(t, Sum):
        return max(max(abs(c), *(_term_numerals(a) for a, _ in m)) if m else abs(c)
                   for m, c in t.items)
    return 0


def _replace_lit(lit, old, new):
    if isinstance(lit, PredLit):
        return PredLit(lit.positive, lit.pred, tuple(replace(a, old, new) for a in lit.args))
    return ArithLit(lit.rel, replace(lit.poly, old, new))


# -- the given-clause loop ------------------------------------------------------------


class Saturator:
    def __init__(self, sig: Signature, precedence: Precedence | None = None,
                 limits: SaturationLimits | None = None):
        self.calc = Calculus(sig, precedence)
        self.limits = limits or SaturationLimits()
        self.log: dict = {}
        self.active: dict = {}
        self.passive: dict = {}
        self.units: dict = {}  # lhs head -> [(clause, lhs)]
        self._ids = itertools.count()
        self._syms: dict = {}
        self.generated = 0

    # bookkeeping
    def _register(self, clause: Clause) -> Clause:
        clause.id = next(self._ids)
        self.log[clause.id] = clause
        return clause

    def _demodulate(self, lits):
        steps = []
        for _ in range(200):
            hit = self._find_rewrite(lits)
            if hit is None:
                break
            unit, key = hit
            lits = self.calc.rewrite_step(lits, unit, key)
            steps.append((unit.id, key))
        return lits, tuple(steps)

    def _find_rewrite(self, lits):
        for lit in lits:
            for t in lit.terms():
                for u in subterms(t):
                    for unit, lhs in self.units.get((u.fn, len(u.args)), ()):
                        if match(lhs, u) is not None:
                            return unit, u.key
        return None

    def _finish(self, lits, derivation: Derivation):
        lits, steps = self._demodulate(lits)
        derivation.rewrites = steps
        return make_clause(lits, derivation)

    def _symbols(self, clause: Clause) -> frozenset:
        hit = self._syms.get(clause.id)
        if hit is None:
            hit = frozenset(clause.symbols())
            if clause.id >= 0:
                self._syms[clause.id] = hit
        return hit

    def _base_only(self, clause: Clause) -> bool:
        sig = self.calc.sig
        return all(not sig.is_extended(*sym) for sym in self._symbols(clause))

    def _redundant(self, clause: Clause) -> bool:
        syms = self._symbols(clause)
        size = len(clause.literals)
        for other in self.active.values():
            if len(other.literals) <= size and self._symbols(other) <= syms \
                    and subsumes(other, clause):
                return True
        return False

    def _add_unit(self, clause: Clause) -> bool:
        rule = self.calc.demod_rule(clause)
        if rule is None:
            return False
        lhs = rule[0]
        self.units.setdefault((lhs.fn, len(lhs.args)), []).append((clause, lhs))
        return True

    def _back_demodulate(self, unit: Clause) -> list:
        """Active clauses rewritten by a new unit move back to passive."""
        lhs = self.calc.demod_rule(unit)[0]
        out = []
        for cid, c in list(self.active.items()):
            if c is unit or not any(match(lhs, u) is not None
                                    for l in c.literals for t in l.terms()
                                    for u in subterms(t)):
                continue
            self.active.pop(cid)
            lits, steps = self._demodulate(list(c.literals))
            new = make_clause(lits, Derivation("demod", (c.id,), rewrites=steps))
            if new is not None:
                out.append(self._register(new))
        return out

    # main loop
    def run(self, inputs) -> SaturationResult:
        start = time.monotonic()
        queue_age: list = []
        queue_weight: list = []
        reason = "saturated"
        partial = False
        refuted = False

        def push(c: Clause):
            self.passive[c.id] = c
            # clauses already in the base language are results, not stepping
            # stones toward eliminating extended symbols; select them last
            tier = int(self._base_only(c))
            heapq.heappush(queue_age, (tier, c.id))
            heapq.heappush(queue_weight, (tier, c.weight(), c.id))

        seen: set = set()
        for c in inputs:
            if c is None or c.key in seen:
                continue
            seen.add(c.key)
            push(self._register(c))
        cap = self.limits.max_numeral
        if cap is None:
            cap = 2 * max((_numerals(c.literals) for c in self.passive.values()), default=0) + 2
        width = self.limits.max_literals
        if width is None:
            width = 2 * max((len(c.literals) for c in self.passive.values()), default=0)
        discarded = 0

        age, wt = self.limits.age_weight
        pattern = [0] * age + [1] * wt
        turn = 0
        iterations = 0
        while self.passive:
            if self.limits.max_seconds is not None \
                    and time.monotonic() - start > self.limits.max_seconds:
                reason, partial = "time limit", True
                break
            queue = queue_age if pattern[turn % len(pattern)] == 0 else queue_weight
            turn += 1
            given = None
            while queue:
                cid = heapq.heappop(queue)[-1]
                if cid in self.passive:
                    given = self.passive.pop(cid)
                    break
            if given is None:
                continue
            iterations += 1
            # forward simplification of the given clause
            lits, steps = self._demodulate(list(given.literals))
            if steps:
                d = Derivation("demod", (given.id,), rewrites=steps)
                simplified = make_clause(lits, d)
                if simplified is None:
                    continue
                if simplified.key != given.key:
                    given = self._register(simplified)
            if self._redundant(given):
                continue
            if given.is_empty():
                self.active[given.id] = given
                refuted, reason = True, "empty clause derived"
                break
            # backward subsumption
            g_syms = self._symbols(given)
            for cid in [cid for cid, c in self.active.items()
                        if len(given.literals) <= len(c.literals) and g_syms <= self._symbols(c)
                        and subsumes(given, c)]:
                self.active.pop(cid)
            self.active[given.id] = given
            if self._add_unit(given):
                for c in self._back_demodulate(given):
                    if c.key not in seen:
                        seen.add(c.key)
                        push(c)
            for lits, derivation in self._inferences(given):
                self.generated += 1
                new = self._finish(lits, derivation)
                if new is None or new.key in seen:
                    continue
                if _numerals(new.literals) > cap or len(new.literals) > width:
                    discarded += 1
                    continue
                seen.add(new.key)
                if self._redundant(new):
                    continue
                push(self._register(new))
                if new.is_empty():
                    break
            if any(c.is_empty() for c in self.passive.values()):
                empty = next(c for c in self.passive.values() if c.is_empty())
                self.active[empty.id] = empty
                self.passive.pop(empty.id)
                refuted, reason = True, "empty clause derived"
                break
            if len(self.active) + len(self.passive) > self.limits.max_retained:
                reason, partial = "retained-clause cap", True
                break
            if self.generated > self.limits.max_generated:
                reason, partial = "generated-clause cap", True
                break
        retained = sorted(list(self.active.values()) + list(self.passive.values()),
                          key=lambda c: c.id)
        return SaturationResult(retained, refuted, partial, reason, self.generated,
                                iterations, self.log, discarded)

    def _inferences(self, given: Clause):
        calc = self.calc
        partners = list(self.active.values())
        g_elig = calc.eligible(given)
        for other in partners:
            o_elig = calc.eligible(other)
            for a, ai, b, bi in ((given, g_elig, other, o_elig), (other, o_elig, given, g_elig)):
                if b is a and a is other:
                    continue
                for i in ai:
                    li = a.literals[i]
                    for j in bi:
                        lj = b.literals[j]
                        yield from self._pair(a, i, li, b, j, lj, same=a is b)
        for i in g_elig:
            for j in range(len(given.literals)):
                if i != j and calc.factor(given, i, j) is not None:
                    yield calc.factor(given, i, j), Derivation("factor", (given.id,), (i, j))

    def _pair(self, a, i, li, b, j, lj, same):
        calc = self.calc
        if isinstance(li, PredLit) and isinstance(lj, PredLit):
            if li.positive and not lj.positive and li.pred == lj.pred and not same:
                out = calc.resolve(a, i, b, j)
                if out is not None:
                    yield out, Derivation("res", (a.id, b.id), (i, j))
        if isinstance(li, ArithLit) and isinstance(lj, ArithLit) and not same:
            if li.rel == EQ and lj.rel == NE:
                out = calc.eq_resolve(a, i, b, j)
                if out is not None:
                    yield out, Derivation("eqres", (a.id, b.id), (i, j))
            if li.rel == GE and lj.rel == GE:
                m1 = calc.max_terms(li)
                lone1 = _lone_atoms(li)
                renamed = rename_clause(b.literals, "_r")[j]
                lone2 = _lone_atoms(renamed)
                m2 = calc.max_terms(renamed)
                for t1 in m1:
                    if isinstance(t1, Var) or lone1.get(t1, 0) <= 0:
                        continue
                    for t2 in m2:
                        if isinstance(t2, Var) or lone2.get(t2, 0) >= 0:
                            continue
                        if t1.fn != t2.fn or (_shallow(t1) and _shallow(t2)):
                            continue
                        out = calc.chain(a, i, t1.key, b, j, t2.key)
                        if out is not None:
                            yield out, Derivation("chain", (a.id, b.id), (i, t1.key, j, t2.key))
        if isinstance(li, ArithLit) and li.rel == EQ and not same \
                and not (len(a.literals) == 1 and calc.demod_rule(a) is not None):
            # oriented unit equations already act through demodulation
            rule = calc.rewrite_rule(li)
            if rule is not None:
                lhs = rule[0]
                renamed = rename_clause(b.literals, "_r")[j]
                # into predicate arguments anywhere, into arithmetic only
                # below a maximal atom
                roots = renamed.terms() if isinstance(renamed, PredLit) \
                    else calc.max_terms(renamed)
                done = set()
                for t in roots:
                    for u in subterms(t):
                        if u.key in done or u.fn != lhs.fn or len(u.args) != len(lhs.args):
                            continue
                        done.add(u.key)
                        out = calc.paramodulate(a, i, b, j, u.key)
                        if out is not None:
                            yield out, Derivation("para", (a.id, b.id), (i, j, u.key))


def saturate(clauses, sig: Signature, precedence: Precedence | None = None,
             limits: SaturationLimits | None = None) -> SaturationResult:
    """Saturate ``clauses``; the result lists every retained clause."""
    return Saturator(sig, precedence, limits).run(list(clauses))


def replay(clause: Clause, log: dict, calc: Calculus) -> bool:
    """Re-derive ``clause`` from its recorded parents and compare."""
    d = clause.derivation
    if d.rule == "input":
        return True
    parents = [log[p] for p in d.parents]
    if d.rule == "demod":
        lits = list(parents[0].literals)
    else:
        lits = calc.apply(d.rule, parents, d.info)
        if lits is None:
            return False
    for unit_id, key in d.rewrites:
        lits = calc.rewrite_step(lits, log[unit_id], key)
        if lits is None:
            return False
    again = make_clause(lits, Derivation("replay"))
    return again is not None and again.key == clause.key
