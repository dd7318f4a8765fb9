"""Concrete execution of loop programs, producing traces."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .syntax import (
    ArrayAssign,
    ArrayRead,
    Assign,
    Call,
    Cond,
    If,
    Neg,
    Num,
    Program,
    Var,
    extract_paths,
    walk_expr,
    walk_statements,
    statement_exprs,
)


class LoopRuntimeError(RuntimeError):
    pass


class IndexOutOfBounds(LoopRuntimeError):
    def __init__(self, array, index, iteration):
        self.array, self.index, self.iteration = array, index, iteration
        super().__init__(f"{array}[{index}] out of bounds in iteration {iteration}")


@dataclass(frozen=True)
class UFInterpretation:
    """Deterministic meaning for uninterpreted functions.

    ``zero`` maps everything to 0, ``identity`` returns the first argument,
    ``random`` looks values up in a table derived from ``seed``.
    """

    kind: str = "zero"
    seed: int = 0
    low: int = -10
    high: int = 10

    def __post_init__(self):
        if self.kind not in ("zero", "identity", "random"):
            raise ValueError(f"unknown function interpretation {self.kind!r}")

    def __call__(self, fn: str, args: tuple) -> Fraction:
        if self.kind == "zero":
            return Fraction(0)
        if self.kind == "identity":
            return Fraction(args[0])
        rng = random.Random(f"{self.seed}:{fn}:{','.join(str(a) for a in args)}")
        return Fraction(rng.randint(self.low, self.high))

    def describe(self) -> str:
        return self.kind if self.kind != "random" else f"random(seed={self.seed})"


@dataclass
class Inputs:
    """Concrete inputs: fixed-extent arrays, values of uninitialised scalars."""

    arrays: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    uf: UFInterpretation = field(default_factory=UFInterpretation)
    step_cap: int = 10_000


@dataclass(frozen=True)
class Snapshot:
    k: int
    scalars: Mapping[str, Fraction]
    arrays: Mapping[str, Mapping[int, Fraction]]
    path: int | None  # path that produced this snapshot; None for snapshot 0


@dataclass
class Trace:
    snapshots: list
    inputs: Inputs
    capped: bool = False
    exited: bool = True

    @property
    def initial(self) -> Snapshot:
        return self.snapshots[0]

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def uf(self) -> UFInterpretation:
        return self.inputs.uf

    def paths(self) -> list[int]:
        return [s.path for s in self.snapshots[1:]]

    def states(self, with_initials: bool = True) -> list[dict]:
        """Scalar valuations per snapshot; ``x_0`` keys carry the initial values."""
        first = self.snapshots[0].scalars
        out = []
        for s in self.snapshots:
            row = dict(s.scalars)
            if with_initials:
                row.update({f"{k}_0": v for k, v in first.items()})
            out.append(row)
        return out

    def array_list(self, name: str, k: int = -1) -> list:
        cells = self.snapshots[k].arrays[name]
        return [cells[i] for i in range(len(cells)) if i in cells]


class _State:
    def __init__(self, program: Program, inputs: Inputs):
        self.program = program
        self.uf = inputs.uf
        self.scalars: dict[str, Fraction] = {}
        init = program.init_values
        for v in program.scalars:
            if v in init:
                self.scalars[v] = Fraction(init[v])
            elif v in inputs.params:
                self.scalars[v] = Fraction(inputs.params[v])
        self.arrays: dict[str, dict[int, Fraction]] = {}
        self.extent: dict[str, int | None] = {}
        for a in program.arrays:
            if a in inputs.arrays:
                content = inputs.arrays[a]
                self.arrays[a] = {i: Fraction(v) for i, v in enumerate(content)}
                self.extent[a] = len(content)
            else:
                self.arrays[a] = {}
                self.extent[a] = None
        self.iteration = 0

    def eval(self, e) -> Fraction:
        if isinstance(e, Num):
            return Fraction(e.value)
        if isinstance(e, Var):
            try:
                return self.scalars[e.name]
            except KeyError:
                raise LoopRuntimeError(f"scalar {e.name!r} has no value") from None
        if isinstance(e, ArrayRead):
            idx = self.index(e.array, self.eval(e.index))
            cells = self.arrays[e.array]
            if idx not in cells:
                raise IndexOutOfBounds(e.array, idx, self.iteration)
            return cells[idx]
        if isinstance(e, Call):
            return self.uf(e.fn, tuple(self.eval(a) for a in e.args))
        if isinstance(e, Neg):
            return -self.eval(e.operand)
        lhs, rhs = self.eval(e.left), self.eval(e.right)
        if e.op == "+":
            return lhs + rhs
        if e.op == "-":
            return lhs - rhs
        return lhs * rhs

    def index(self, array: str, value: Fraction) -> int:
        if value.denominator != 1:
            raise LoopRuntimeError(f"non-integer index {value} into {array}")
        idx = int(value)
        ext = self.extent[array]
        if idx < 0 or (ext is not None and idx >= ext):
            raise IndexOutOfBounds(array, idx, self.iteration)
        return idx

    def test(self, c: Cond) -> bool:
        lhs, rhs = self.eval(c.left), self.eval(c.right)
        return {
            "<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs,
            ">=": lhs >= rhs, "==": lhs == rhs, "!=": lhs != rhs,
        }[c.op]

    def run(self, stmts, decisions: list) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                self.scalars[s.target] = self.eval(s.expr)
            elif isinstance(s, ArrayAssign):
                idx = self.index(s.array, self.eval(s.index))
                self.arrays[s.array][idx] = self.eval(s.value)
            elif isinstance(s, If):
                taken = self.test(s.cond)
                decisions.append(taken)
                self.run(s.then if taken else s.orelse, decisions)

    def snapshot(self, path) -> Snapshot:
        return Snapshot(self.iteration, dict(self.scalars),
                        {a: dict(c) for a, c in self.arrays.items()}, path)


def interpret(program: Program, inputs: Inputs | None = None) -> Trace:
    """Run ``program`` with sequential assignment semantics.

    Stops when the guard is false or after ``inputs.step_cap`` iterations
    (``trace.capped`` is then set and the partial trace returned).
    """
    inputs = inputs or Inputs()
    missing = [v for v in program.scalars
               if v not in program.init_values and v not in inputs.params]
    if missing:
        raise LoopRuntimeError(f"no value for uninitialised scalars {missing}")
    by_decisions = {p.decisions: p.path_id for p in extract_paths(program.loop)}
    state = _State(program, inputs)
    snaps = [state.snapshot(None)]
    capped = False
    while state.test(program.loop.guard):
        if state.iteration >= inputs.step_cap:
            capped = True
            break
        decisions: list = []
        state.run(program.loop.body, decisions)
        state.iteration += 1
        snaps.append(state.snapshot(by_decisions[tuple(decisions)]))
    return Trace(snaps, inputs, capped=capped, exited=not capped)


def replay_path(path, snapshot: Snapshot, uf: UFInterpretation, program: Program) -> Snapshot:
    """Execute one guarded path's assignments from ``snapshot`` (guards ignored)."""
    state = _State.__new__(_State)
    state.program = program
    state.uf = uf
    state.scalars = dict(snapshot.scalars)
    state.arrays = {a: dict(c) for a, c in snapshot.arrays.items()}
    state.extent = {a: None for a in snapshot.arrays}
    state.iteration = snapshot.k
    state.run(path.assignments, [])
    state.iteration += 1
    return state.snapshot(path.path_id)


# -- random inputs -------------------------------------------------------------


def guard_parameters(program: Program) -> set[str]:
    written = set(program.written_scalars())
    return {e.name for e in walk_expr(program.loop.guard)
            if isinstance(e, Var) and e.name not in written}


def random_inputs(program: Program, rng: random.Random, length: int = 40,
                  uf: UFInterpretation | str | None = None, value_range: int = 9,
                  params: Mapping[str, int] | None = None) -> Inputs:
    """Inputs for roughly ``length`` iterations with random data.

    Read-only scalars in the loop guard get ``length``; other uninitialised
    scalars get small random values; arrays that are read get random content.
    """
    params = dict(params or {})
    init = program.init_values
    bounds = guard_parameters(program)
    for v in program.scalars:
        if v in init or v in params:
            continue
        params[v] = length if v in bounds else rng.randint(-5, 5)
    read = set()
    for s in walk_statements(program.loop.body):
        for e in statement_exprs(s):
            read |= {x.array for x in walk_expr(e) if isinstance(x, ArrayRead)}
    read |= {x.array for x in walk_expr(program.loop.guard) if isinstance(x, ArrayRead)}
    arrays = {a: [rng.randint(-value_range, value_range) for _ in range(length + 10)]
              for a in program.arrays if a in read}
    if uf is None:
        uf = UFInterpretation("random", rng.randrange(1 << 30))
    elif isinstance(uf, str):
        uf = UFInterpretation(uf, rng.randrange(1 << 30))
    return Inputs(arrays, params, uf, step_cap=length + 10)


def random_traces(program: Program, count: int, length: int = 40, seed: int = 0,
                  uf: UFInterpretation | str | None = None) -> list[Trace]:
    rng = random.Random(seed)
    return [interpret(program, random_inputs(program, rng, length, uf)) for _ in range(count)]
