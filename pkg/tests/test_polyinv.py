import random
import warnings

import pytest

from symelim.exactalg import MonomialOrder, PolyRing
from symelim.groebner import Ideal, ideal_member
from symelim.loopspec import (
    Inputs,
    extract_paths,
    interpret,
    parse_file,
    parse_program,
    random_inputs,
    random_traces,
)
from symelim.polyinv import (
    InsufficientTraceData,
    PolyInvConfig,
    ansatz_oracle,
    invariant_fixed_point,
    merge_branches,
    path_invariant_ideal,
    verify_on_traces,
)
from symelim.recsolve import extract_recurrences, solve_cfinite


@pytest.fixture(scope="module")
def fig1(corpus_dir):
    return parse_file(corpus_dir / "fig1.loop")


@pytest.fixture(scope="module")
def fig1_result(fig1):
    return invariant_fixed_point(fig1)


@pytest.fixture(scope="module")
def fig1_traces(fig1):
    return random_traces(fig1, 40, 40, seed=2)


def _path_ideal(prog, path):
    cf = solve_cfinite(extract_recurrences(path, prog), prog.init_values)
    return path_invariant_ideal(cf)


def test_fig1_path_ideal_contains_sum_of_squares(fig1):
    for path in extract_paths(fig1.loop):
        ideal = _path_ideal(fig1, path)
        f = ideal.ring.parse("6*s - a*(a+1)*(2*a+1)")
        assert ideal_member(f, ideal)
        assert not ({"k"} & set(ideal.ring.gens_names))


def test_path_ideal_with_exponentials():
    prog = parse_program("vars x, y; x := 1; y := 1; while (x < 100) { x := 2*x; y := 4*y; }")
    ideal = _path_ideal(prog, extract_paths(prog.loop)[0])
    r = ideal.ring
    assert [g.monic(MonomialOrder.grevlex()) for g in ideal] == [r.parse("x^2 - y")]
    t = interpret(prog, Inputs(step_cap=20))
    assert all(s.scalars["x"] ** 2 == s.scalars["y"] for s in t.snapshots)


def test_path_ideal_constant_variable():
    prog = parse_program("vars x; while (x < 1) { x := x; }")
    ideal = _path_ideal(prog, extract_paths(prog.loop)[0])
    assert list(ideal) == [ideal.ring.parse("x - x_0")]
    prog = parse_program("vars x; x := 5; while (x < 1) { x := x; }")
    ideal = _path_ideal(prog, extract_paths(prog.loop)[0])
    assert list(ideal) == [ideal.ring.parse("x - 5")]


def test_merge_fig1_paths(fig1):
    ideals = [_path_ideal(fig1, p) for p in extract_paths(fig1.loop)]
    ring = PolyRing(["a", "b", "c", "s"])
    aligned = [Ideal(ring, [g.to_ring(ring) for g in i]) for i in ideals]
    merged = merge_branches(aligned)
    assert ideal_member(ring.parse("a - b - c"), merged)
    assert merge_branches(aligned[:1]) is aligned[0]


def test_merge_principal():
    r = PolyRing(["x", "y"])
    merged = merge_branches([Ideal(r, [r.parse("x")]), Ideal(r, [r.parse("y")])])
    assert list(merged) == [r.parse("x*y")]


def test_fig1_fixed_point(fig1_result):
    inv, report = fig1_result
    r = inv.ring
    assert inv.contains(r.parse("a - b - c"))
    assert inv.contains(r.parse("6*s - a*(a+1)*(2*a+1)"))
    assert report.stabilized_at == 2
    assert not report.possibly_incomplete
    assert inv.display() == ["6*s - 2*a^3 - 3*a^2 - a = 0", "a - b - c = 0"]
    assert set(inv.variables) == {"a", "b", "c", "s"}


def test_rounds_shrink(fig1_result, corpus_dir):
    results = [fig1_result, invariant_fixed_point(parse_file(corpus_dir / "nested.loop"))]
    for inv, _ in results:
        for prev, nxt in zip(inv.rounds, inv.rounds[1:]):
            assert all(prev.contains(g) for g in nxt.basis)


def test_straight_line_stabilizes_immediately(corpus_dir):
    inv, report = invariant_fixed_point(parse_file(corpus_dir / "squares.loop"))
    assert report.stabilized_at == 1
    assert inv.display() == ["y - x^2 = 0"]


def test_identical_branches_match_straight_line():
    body = "x := x + 1; y := y + x*x;"
    plain = parse_program(f"vars x, y, n; x := 0; y := 0; while (x < n) {{ {body} }}")
    split = parse_program(
        "vars x, y, n; arrays A; x := 0; y := 0;"
        f"while (x < n) {{ if (A[x] > 0) {{ {body} }} else {{ {body} }} }}")
    a, _ = invariant_fixed_point(plain)
    b, _ = invariant_fixed_point(split)
    assert [str(g) for g in a.generators] == [str(g) for g in b.generators]


def test_symbolic_initials(corpus_dir):
    prog = parse_file(corpus_dir / "triangle.loop")
    inv, _ = invariant_fixed_point(prog)
    assert set(inv.initial_symbols) == {"x", "y"}
    traces = random_traces(prog, 30, 30, seed=4)
    assert all(v.passed for v in verify_on_traces(inv, traces))


def test_determinism(fig1):
    _, r1 = invariant_fixed_point(fig1)
    _, r2 = invariant_fixed_point(fig1)
    assert r1.as_dict() == r2.as_dict()


def test_l_max_one_flags_incomplete(fig1):
    _, report = invariant_fixed_point(fig1, PolyInvConfig(L_max=1))
    assert report.possibly_incomplete and report.stabilized_at is None


# -- trace checks


def test_verify_fig1_on_traces(fig1_result, fig1_traces):
    inv, _ = fig1_result
    assert all(v.passed for v in verify_on_traces(inv, fig1_traces))


def test_fake_generator_fails(fig1_result, fig1_traces):
    inv, _ = fig1_result
    fake = inv.ring.parse("a - b")
    zero = inv.ring.zero()
    bad, ok = verify_on_traces([fake, zero], fig1_traces)
    assert not bad.passed and ok.passed
    cx = bad.counterexample
    snap = fig1_traces[cx["trace"]].snapshots[cx["k"]]
    assert snap.scalars["c"] != 0
    assert "FAIL" in bad.describe()


def test_oracle_fig1(fig1_traces):
    (lin,) = ansatz_oracle(fig1_traces, ["a", "b", "c"], 1)
    assert str(lin) == "a - b - c"
    (cubic,) = ansatz_oracle(fig1_traces, ["a", "s"], 3)
    assert cubic == cubic.ring.parse("2*a^3 + 3*a^2 + a - 6*s")


def test_oracle_free_counter():
    prog = parse_program("vars x, n; while (x < n) { x := x + 1; }")
    rng = random.Random(0)
    traces = [interpret(prog, random_inputs(prog, rng, 30)) for _ in range(25)]
    assert ansatz_oracle(traces, ["x"], 1) == []
    polys = ansatz_oracle(traces, ["x", "x_0"], 1, {"x": "x_0"})
    assert polys == []  # x - x_0 only holds at the first snapshot


def test_oracle_warns_on_thin_data(fig1):
    t = interpret(fig1, Inputs({"A": [1, 2]}, {"n": 2}))
    with pytest.warns(InsufficientTraceData):
        ansatz_oracle([t], ["a", "b", "c", "s"], 2)


def test_oracle_polys_are_members_fig1(fig1_result, fig1_traces):
    inv, _ = fig1_result
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InsufficientTraceData)
        polys = ansatz_oracle(fig1_traces, inv.variables, 3)
    assert polys and all(inv.contains(p) for p in polys)
