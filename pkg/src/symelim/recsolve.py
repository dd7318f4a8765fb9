"""Per-path recurrences, closed forms of the affine C-finite fragment, and
algebraic relations among exponential sequences."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .exactalg import MonomialOrder, PolyRing, Polynomial
from .groebner import DEFAULT_LIMITS, GBLimits, Ideal, eliminate, groebner_basis
from .loopspec.syntax import (
    ArrayAssign,
    ArrayRead,
    Assign,
    BinOp,
    GuardedPath,
    Neg,
    Num,
    Program,
    Var,
    statement_exprs,
    walk_expr,
)


Coeff = int | Fraction


class UnsupportedRecurrence(ValueError):
    """The loop (or one equation) falls outside the supported affine fragment."""


def fresh_name(stem: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name = stem
    while name in taken:
        name += "_"
    return name


# -- recurrence systems -----------------------------------------------------------


@dataclass(frozen=True)
class Recurrence:
    """x(k+1) = coeff * x(k) + rhs, with ``rhs`` free of x."""
    var: str
    coeff: Fraction
    rhs: Polynomial

    def format(self, counter: str = "k") -> str:
        def at(poly: Polynomial) -> str:
            text = poly.to_str()
            for g in sorted(poly.variables(), key=len, reverse=True):
                if g != counter:
                    text = _replace_word(text, g, f"{g}({counter})")
            return text

        lhs = f"{self.var}({counter}+1)"
        own = "" if self.coeff == 0 else (
            f"{self.var}({counter})" if self.coeff == 1 else f"{_fmt(self.coeff)}*{self.var}({counter})")
        rest = at(self.rhs) if self.rhs else ""
        if own and rest:
            rest = rest[1:].lstrip() if rest.startswith("-") else rest
            sign = "-" if at(self.rhs).startswith("-") else "+"
            return f"{lhs} = {own} {sign} {rest}"
        return f"{lhs} = {own or rest or '0'}"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"({c})"


def _replace_word(text: str, word: str, new: str) -> str:
    return re.sub(rf"(?<![A-Za-z0-9_]){re.escape(word)}(?![A-Za-z0-9_(])", new, text)


@dataclass(frozen=True)
class RecurrenceSystem:
    """Equations in dependency order over ``ring``.

    ``ring`` holds the loop counter, the written variables and read-only
    parameters; right-hand sides may mention the counter, parameters and
    variables solved earlier in ``equations``.
    """
    ring: PolyRing
    counter: str
    equations: tuple
    params: tuple = ()
    path_id: int | None = None

    def __post_init__(self):
        seen = set()
        written = {e.var for e in self.equations}
        for eq in self.equations:
            bad = eq.rhs.variables() & (written - seen)
            if bad:
                raise UnsupportedRecurrence(
                    f"{eq.format(self.counter)} reads {sorted(bad)} before it is solved")
            seen.add(eq.var)

    @classmethod
    def from_equations(cls, eqs: Sequence[tuple[str, Coeff, str | Polynomial]],
                       params: Sequence[str] = (), counter: str = "k") -> "RecurrenceSystem":
        """Build from ``(var, coeff, rhs)`` triples, already in dependency order."""
        names = [counter] + [v for v, _, _ in eqs] + list(params)
        ring = PolyRing(names)
        out = []
        for v, c, q in eqs:
            q = ring.parse(q) if isinstance(q, str) else q.to_ring(ring)
            out.append(Recurrence(v, Fraction(c), q))
        return cls(ring, counter, tuple(out), tuple(params))

    @property
    def variables(self) -> list[str]:
        return [e.var for e in self.equations]

    def step(self, values: Mapping[str, Fraction], k: int) -> dict:
        """One exact iteration from ``values`` (which also bind parameters)."""
        point = dict(values)
        point[self.counter] = k
        out = dict(values)
        for eq in self.equations:
            out[eq.var] = eq.coeff * point[eq.var] + eq.rhs.eval(point)
        return out

    def format(self) -> str:
        return "\n".join(e.format(self.counter) for e in self.equations)


def _to_poly(e, ring: PolyRing, env: Mapping[str, Polynomial]) -> Polynomial:
    if isinstance(e, Num):
        return ring.const(e.value)
    if isinstance(e, Var):
        return env[e.name] if e.name in env else ring.gen(e.name)
    if isinstance(e, Neg):
        return -_to_poly(e.operand, ring, env)
    if isinstance(e, BinOp):
        lhs, rhs = _to_poly(e.left, ring, env), _to_poly(e.right, ring, env)
        return lhs + rhs if e.op == "+" else lhs - rhs if e.op == "-" else lhs * rhs
    kind = "array read" if isinstance(e, ArrayRead) else "function application"
    raise UnsupportedRecurrence(f"{kind} in a scalar update is not P-solvable")


def path_transition(path: GuardedPath, scalars: Sequence[str]) -> tuple[PolyRing, dict]:
    """Compose the path's scalar assignments into one simultaneous update.

    Returns the ring over ``scalars`` and a map from each written scalar to
    its new value as a polynomial in the values at the start of the iteration.
    """
    ring = PolyRing(scalars)
    env: dict[str, Polynomial] = {}
    for stmt in path.assignments:
        if isinstance(stmt, Assign):
            env[stmt.target] = _to_poly(stmt.expr, ring, env)
        elif not isinstance(stmt, ArrayAssign):
            raise UnsupportedRecurrence("path contains a conditional")
    return ring, env


def extract_recurrences(path: GuardedPath, program: Program | None = None,
                        scalars: Sequence[str] | None = None) -> RecurrenceSystem:
    """One affine recurrence per scalar written on ``path``, in dependency order.

    With ``program`` given, scalars written elsewhere in the loop body get the
    identity recurrence. Array writes are ignored here. Raises :class:`UnsupportedRecurrence` for
    non-affine self-dependence or cyclic dependence between variables.
    """
    if scalars is None:
        scalars = program.scalars if program is not None else _path_scalars(path)
    counter = fresh_name("k", scalars)
    base_ring, update = path_transition(path, scalars)
    if program is not None:
        # scalars written on other paths keep their value on this one
        for v in program.written_scalars():
            update.setdefault(v, base_ring.gen(v))
    written = [v for v in scalars if v in update]
    coeffs, rests = {}, {}
    for v in written:
        f = update[v]
        if f.degree_in(v) > 1:
            raise UnsupportedRecurrence(f"{v} := {f}: not P-solvable in supported fragment")
        i = base_ring.index[v]
        own = {m: c for m, c in f.terms.items() if m[i]}
        unit = tuple(1 if j == i else 0 for j in range(base_ring.nvars))
        if set(own) - {unit}:
            raise UnsupportedRecurrence(
                f"{v} := {f}: coefficient of {v} is not constant; not P-solvable in supported fragment")
        coeffs[v] = own.get(unit, Fraction(0))
        rests[v] = f - base_ring.monomial({v: 1}, coeffs[v])
    deps = {v: rests[v].variables() & set(written) for v in written}
    order = _topological(written, deps)
    params = sorted({g for v in written for g in rests[v].variables()} - set(written),
                    key=list(scalars).index)
    ring = PolyRing([counter] + order + params)
    eqs = tuple(Recurrence(v, coeffs[v], rests[v].to_ring(ring)) for v in order)
    return RecurrenceSystem(ring, counter, eqs, tuple(params), path.path_id)


def _path_scalars(path: GuardedPath) -> list[str]:
    names = []
    for s in path.assignments:
        if isinstance(s, Assign) and s.target not in names:
            names.append(s.target)
        for e in statement_exprs(s):
            for x in walk_expr(e):
                if isinstance(x, Var) and x.name not in names:
                    names.append(x.name)
    return names


def _topological(nodes: list[str], deps: Mapping[str, set]) -> list[str]:
    done: list[str] = []
    remaining = list(nodes)
    while remaining:
        ready = [v for v in remaining if deps[v] <= set(done)]
        if not ready:
            raise UnsupportedRecurrence(
                f"cyclic dependence among {sorted(remaining)}; not P-solvable in supported fragment")
        done.append(ready[0])
        remaining.remove(ready[0])
    return done


# -- closed forms ------------------------------------------------------------------


@dataclass
class ClosedFormSystem:
    """x(k) as polynomials in the counter, exponential variables and initials.

    ``exp_vars[i]`` stands for ``bases[i] ** k``. ``initials`` maps every
    solved variable to the symbol that names its value at k = 0; variables
    in ``fixed`` had that symbol replaced by a concrete value.
    """
    ring: PolyRing
    counter: str
    exp_vars: tuple
    bases: tuple
    initials: dict
    forms: dict
    params: tuple = ()
    recurrences: RecurrenceSystem | None = field(default=None, repr=False)
    fixed: dict = field(default_factory=dict)

    def evaluate(self, k: int, initial_values: Mapping[str, Coeff],
                 params: Mapping[str, Coeff] | None = None) -> dict:
        point = {self.counter: k}
        point.update({z: Fraction(b) ** k for z, b in zip(self.exp_vars, self.bases)})
        point.update({self.initials[v]: initial_values[v]
                      for v in self.forms if v not in self.fixed})
        point.update(params or {})
        return {v: f.eval(point) for v, f in self.forms.items()}

    def shifted(self, f: Polynomial) -> Polynomial:
        """f with k -> k+1 and each z -> base * z."""
        ring = self.ring
        mapping = {self.counter: ring.gen(self.counter) + 1}
        for z, b in zip(self.exp_vars, self.bases):
            mapping[z] = ring.gen(z) * b
        return f.subs(mapping)

    def verify(self) -> None:
        """Check x(0) = x0 and x(k+1) = c*x(k) + q(k) as exact identities."""
        if self.recurrences is None:
            return
        ring = self.ring
        at_zero = {self.counter: 0, **{z: 1 for z in self.exp_vars}}
        images = {v: f for v, f in self.forms.items()}
        for eq in self.recurrences.equations:
            cf = self.forms[eq.var]
            start = cf.subs(at_zero)
            expect = (ring.const(self.fixed[eq.var]) if eq.var in self.fixed
                      else ring.gen(self.initials[eq.var]))
            if start != expect:
                raise AssertionError(f"closed form of {eq.var} fails at k=0: {start}")
            q = eq.rhs.subs({v: images[v] for v in eq.rhs.variables() if v in images}, ring)
            if self.shifted(cf) != cf * eq.coeff + q:
                raise AssertionError(f"closed form {eq.var}(k) = {cf} does not satisfy "
                                     f"{eq.format(self.counter)}")

    def substitute_initials(self, values: Mapping[str, Coeff | Polynomial]) -> "ClosedFormSystem":
        """Replace some initial symbols by constants (or polynomials)."""
        values = {v: val for v, val in values.items()
                  if v in self.initials and v not in self.fixed}
        mapping = {self.initials[v]: val for v, val in values.items()}
        keep = [g for g in self.ring.gens_names if g not in mapping]
        ring = PolyRing(keep)
        forms = {v: f.subs(mapping, ring) for v, f in self.forms.items()}
        return ClosedFormSystem(ring, self.counter, self.exp_vars, self.bases,
                                dict(self.initials), forms, self.params, self.recurrences,
                                {**self.fixed, **values})

    def format(self) -> str:
        lines = [f"{v}({self.counter}) = {f}" for v, f in self.forms.items()]
        lines += [f"{z} = ({b})^{self.counter}" for z, b in zip(self.exp_vars, self.bases)]
        return "\n".join(lines)


def initial_symbol(var: str, taken: Iterable[str]) -> str:
    return fresh_name(f"{var}_0", taken)


def _shift_solution(beta: Fraction, c: Fraction, d: int) -> list[Fraction]:
    """Coefficients r_0..r_D of R with beta*R(k+1) - c*R(k) = k^d.

    For beta == c the degree rises by one and r_0 is fixed to 0; this is the
    telescoping recursion behind the Faulhaber power sums.
    """
    if beta != c:
        r = [Fraction(0)] * (d + 1)
        for m in range(d, -1, -1):
            acc = Fraction(1 if m == d else 0)
            acc -= beta * sum((r[j] * comb(j, m) for j in range(m + 1, d + 1)), Fraction(0))
            r[m] = acc / (beta - c)
        return r
    r = [Fraction(0)] * (d + 2)
    for m in range(d, -1, -1):
        acc = Fraction(1 if m == d else 0) / c
        acc -= sum((r[j] * comb(j, m) for j in range(m + 2, d + 2)), Fraction(0))
        r[m + 1] = acc / (m + 1)
    return r


def solve_cfinite(system: RecurrenceSystem, initials: Mapping[str, Coeff | None] | None = None,
                  verify: bool = True) -> ClosedFormSystem:
    """Closed forms x(k) for every equation, solved in dependency order.

    ``initials`` gives concrete starting values; variables missing from it
    (or mapped to None) keep a symbolic initial ``x_0``. The result is always
    checked by substitution before it is returned.
    """
    for eq in system.equations:
        if eq.coeff == 0:
            raise UnsupportedRecurrence(
                f"{eq.format(system.counter)}: zero coefficient gives no polynomial closed form")
    taken = set(system.ring.gens_names)
    bases: list[Fraction] = []
    for eq in system.equations:
        if eq.coeff != 1 and eq.coeff not in bases:
            bases.append(eq.coeff)
    zs = []
    for i in range(len(bases)):
        z = fresh_name(f"z{i + 1}", taken)
        taken.add(z)
        zs.append(z)
    inits = {}
    for eq in system.equations:
        inits[eq.var] = initial_symbol(eq.var, taken)
        taken.add(inits[eq.var])
    k = system.counter
    ring = PolyRing([k] + zs + [inits[e.var] for e in system.equations] + list(system.params))
    z_of = dict(zip(bases, zs))
    base_of = dict(zip(zs, bases))
    zi = [ring.index[z] for z in zs]
    ki = ring.index[k]
    forms: dict[str, Polynomial] = {}
    for eq in system.equations:
        q = eq.rhs.subs({v: forms[v] for v in eq.rhs.variables() if v in forms}, ring)
        c = eq.coeff
        particular = ring.zero()
        for m, coeff in q.terms.items():
            beta = Fraction(1)
            for i in zi:
                beta *= base_of[ring.gens_names[i]] ** m[i]
            d = m[ki]
            rest = list(m)
            rest[ki] = 0
            r = _shift_solution(beta, c, d)
            kpoly = ring.zero()
            for j, rj in enumerate(r):
                if rj:
                    kpoly = kpoly + ring.monomial({k: j}, rj)
            particular = particular + kpoly.mul_term(tuple(rest), coeff)
        at_zero = particular.subs({k: 0, **{z: 1 for z in zs}})
        homog = ring.gen(inits[eq.var]) - at_zero
        if c != 1:
            homog = homog * ring.gen(z_of[c])
        forms[eq.var] = homog + particular
    cfs = ClosedFormSystem(ring, k, tuple(zs), tuple(bases), inits, forms,
                           tuple(system.params), system)
    if verify:
        cfs.verify()
    concrete = {v: val for v, val in (initials or {}).items()
                if val is not None and v in inits}
    if concrete:
        cfs = cfs.substitute_initials(concrete)
    return cfs


# -- exponential relations ------------------------------------------------------------


def _factor_int(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def signed_factorization(c: Coeff) -> tuple[int, dict[int, int]]:
    """(sign bit, prime -> exponent) with negative exponents for the denominator."""
    c = Fraction(c)
    if c == 0:
        raise ValueError("zero base has no multiplicative relations")
    exps = _factor_int(abs(c.numerator))
    for p, e in _factor_int(c.denominator).items():
        exps[p] = exps.get(p, 0) - e
    return (1 if c < 0 else 0), exps


def _hermite_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form: an echelon basis of the row lattice."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out = []
    for col in range(ncols):
        while True:
            nz = [r for r in rows if r[col]]
            if len(nz) <= 1:
                break
            pivot = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not pivot:
                    q = r[col] // pivot[col]
                    for j in range(ncols):
                        r[j] -= q * pivot[j]
            rows = [r for r in rows if any(r)]
        nz = [r for r in rows if r[col]]
        if nz:
            pivot = nz[0]
            if pivot[col] < 0:
                pivot[:] = [-x for x in pivot]
            rows.remove(pivot)
            for r in out:
                q = r[col] // pivot[col]
                if q:
                    for j in range(ncols):
                        r[j] -= q * pivot[j]
            out.append(pivot)
    return out


def integer_left_kernel(matrix: list[list[int]]) -> list[list[int]]:
    """Lattice basis of {v in Z^m : v * matrix = 0}."""
    m = len(matrix)
    if m == 0:
        return []
    ncols = len(matrix[0])
    aug = [list(row) + [1 if j == i else 0 for j in range(m)] for i, row in enumerate(matrix)]
    # eliminate the matrix part column by column with unimodular row operations
    active = aug
    for col in range(ncols):
        while True:
            nz = [r for r in active if r[col]]
            if len(nz) <= 1:
                break
            pivot = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not pivot:
                    q = r[col] // pivot[col]
                    for j in range(len(r)):
                        r[j] -= q * pivot[j]
        nz = [r for r in active if r[col]]
        if nz:
            active = [r for r in active if r is not nz[0]]
    return [r[ncols:] for r in active]


@dataclass
class ExponentialRelationSet:
    """Generators of the ideal of all polynomial relations among ``bases[i]**k``."""
    bases: tuple
    names: tuple
    ring: PolyRing
    generators: list
    lattice: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    def check(self, ks: Iterable[int] = range(11)) -> bool:
        for k in ks:
            point = {z: Fraction(b) ** k for z, b in zip(self.names, self.bases)}
            if any(g.eval(point) for g in self.generators):
                return False
        return True


def _binomial(ring: PolyRing, names: Sequence[str], vec: Sequence[int]) -> Polynomial:
    pos = {n: e for n, e in zip(names, vec) if e > 0}
    neg = {n: -e for n, e in zip(names, vec) if e < 0}
    return ring.monomial(pos) - ring.monomial(neg)


def exponential_relations(bases: Sequence[Coeff], names: Sequence[str] | None = None,
                          limits: GBLimits = DEFAULT_LIMITS) -> ExponentialRelationSet:
    """All algebraic relations among the sequences z_i = bases[i]**k.

    The relations form the lattice ideal of integer vectors e with
    prod bases[i]**e_i = 1. Signs enter through an extra column that is only
    required to vanish modulo 2. The binomials of a lattice basis are
    saturated by the product of the z_i to obtain the whole lattice ideal.
    """
    bases = tuple(Fraction(b) for b in bases)
    if names is None:
        names = tuple(f"z{i + 1}" for i in range(len(bases)))
    names = tuple(names)
    ring = PolyRing(names)
    if not bases:
        return ExponentialRelationSet(bases, names, ring, [], [])
    facts = [signed_factorization(b) for b in bases]
    primes = sorted({p for _, f in facts for p in f})
    rows = [[sign] + [f.get(p, 0) for p in primes] for sign, f in facts]
    rows.append([2] + [0] * len(primes))  # signs only matter mod 2
    kernel = integer_left_kernel(rows)
    lattice = _hermite_rows([v[:len(bases)] for v in kernel])
    binomials = [_binomial(ring, names, v) for v in lattice]
    if not binomials:
        return ExponentialRelationSet(bases, names, ring, [], lattice)
    w = fresh_name("w", names)
    big = PolyRing([w] + list(names))
    prod = big.one()
    for n in names:
        prod = prod * big.gen(n)
    sat = Ideal(big, [b.to_ring(big) for b in binomials] + [big.gen(w) * prod - 1])
    relations = eliminate(sat, [w], limits)
    gb = groebner_basis(Ideal(ring, [g.to_ring(ring) for g in relations]),
                        MonomialOrder.grevlex(), limits)
    return ExponentialRelationSet(bases, names, ring, list(gb.basis), lattice)
