import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from symelim.groebner import Ideal, ideal_member
from symelim.loopspec import extract_paths, parse_file, parse_program
from symelim.recsolve import (
    RecurrenceSystem,
    UnsupportedRecurrence,
    exponential_relations,
    extract_recurrences,
    integer_left_kernel,
    solve_cfinite,
)


def _single_path(body: str, vars_="x, y, z", extra=""):
    prog = parse_program(f"vars {vars_}; {extra} while (x < 100) {{ {body} }}")
    (path,) = extract_paths(prog.loop)
    return prog, path


@pytest.fixture(scope="module")
def fig1(corpus_dir):
    return parse_file(corpus_dir / "fig1.loop")


def test_fig1_recurrences_are_sequential(fig1):
    for path in extract_paths(fig1.loop):
        rs = extract_recurrences(path, fig1)
        by_var = {e.var: e for e in rs.equations}
        assert by_var["a"].coeff == 1 and by_var["a"].rhs == 1
        s = by_var["s"]
        assert s.coeff == 1
        assert s.rhs == rs.ring.parse("(a + 1)^2")
        assert rs.variables.index("a") < rs.variables.index("s")
    assert "s(k+1) = s(k) + a(k)^2 + 2*a(k) + 1" in rs.format()


def test_identity_and_affine_transcription():
    prog, path = _single_path("x := x;")
    (eq,) = extract_recurrences(path, prog).equations
    assert eq.coeff == 1 and eq.rhs == 0
    prog, path = _single_path("x := 2*x + 1;")
    (eq,) = extract_recurrences(path, prog).equations
    assert eq.coeff == 2 and eq.rhs == 1


@pytest.mark.parametrize("body", [
    "x := x*x;",
    "x := x*y; y := y + 1;",
    "x := x + y; y := y + x;",  # y reads the new x, so each depends on the other
    "y := x; x := y + z; z := z + 1; x := x + y*x;",
])
def test_unsupported_shapes(body):
    prog, path = _single_path(body)
    with pytest.raises(UnsupportedRecurrence):
        extract_recurrences(path, prog)


def test_array_read_in_scalar_update_is_unsupported():
    prog = parse_program("vars x, n; arrays A; while (x < n) { x := x + A[x]; }")
    with pytest.raises(UnsupportedRecurrence):
        extract_recurrences(extract_paths(prog.loop)[0], prog)


def test_swap_is_cyclic():
    prog, path = _single_path("z := x; x := y; y := z;")
    with pytest.raises(UnsupportedRecurrence, match="cyclic"):
        extract_recurrences(path, prog)


def test_read_only_scalars_become_parameters():
    prog, path = _single_path("x := x + y + 1; z := z + x*y;", "x, y, z, n")
    rs = extract_recurrences(path, prog)
    assert rs.params == ("y",)
    cf = solve_cfinite(rs)
    assert "y" in cf.ring


def test_fig1_closed_forms(fig1):
    path = extract_paths(fig1.loop)[0]
    cf = solve_cfinite(extract_recurrences(path, fig1), fig1.init_values)
    k = cf.ring.gen("k")
    assert cf.forms["a"] == k
    assert cf.forms["s"] == k * (k + 1) * (2 * k + 1) / 6
    assert cf.exp_vars == ()


def test_constant_sequence():
    cf = solve_cfinite(RecurrenceSystem.from_equations([("x", 1, "0")]))
    assert cf.forms["x"] == cf.ring.gen("x_0")


def test_doubling_introduces_exponential():
    cf = solve_cfinite(RecurrenceSystem.from_equations([("x", 2, "0")]))
    (z,) = cf.exp_vars
    assert cf.bases == (2,)
    assert cf.forms["x"] == cf.ring.gen("x_0") * cf.ring.gen(z)


def test_zero_coefficient_rejected():
    with pytest.raises(UnsupportedRecurrence):
        solve_cfinite(RecurrenceSystem.from_equations([("x", 0, "k")]))


def test_fresh_names_avoid_program_variables():
    prog, path = _single_path("k := k + 1; z1 := 3*z1; x := x + k;", "x, k, z1")
    cf = solve_cfinite(extract_recurrences(path, prog))
    assert cf.counter not in prog.scalars
    assert not set(cf.exp_vars) & set(prog.scalars)
    cf.verify()


def _numeric_agreement(rs, cf, rng, steps=30):
    for _ in range(20):
        start = {v: Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for v in rs.variables}
        params = {p: Fraction(rng.randint(-9, 9)) for p in rs.params}
        vals = {**start, **params}
        for k in range(steps + 1):
            got = cf.evaluate(k, start, params)
            assert got == {v: vals[v] for v in rs.variables}, k
            vals = rs.step(vals, k)


_coeffs = st.sampled_from([1, 1, 1, 2, -1, 3, Fraction(1, 2), -2])


@st.composite
def recurrence_systems(draw):
    n = draw(st.integers(1, 3))
    names = ["x", "y", "w"][:n]
    eqs = []
    for i, v in enumerate(names):
        avail = ["k", "p"] + names[:i]
        terms = draw(st.lists(st.tuples(st.integers(-3, 3),
                                        st.lists(st.sampled_from(avail), max_size=2)),
                              max_size=3))
        rhs = " + ".join(f"({c})" + "".join(f"*{x}" for x in xs) for c, xs in terms) or "0"
        eqs.append((v, draw(_coeffs), rhs))
    return RecurrenceSystem.from_equations(eqs, params=["p"])


@settings(max_examples=60, deadline=None)
@given(recurrence_systems(), st.integers(0, 10**6))
def test_random_systems_verify_and_agree(rs, seed):
    cf = solve_cfinite(rs)
    cf.verify()
    _numeric_agreement(rs, cf, random.Random(seed))


def test_corpus_closed_forms_agree_numerically(corpus_dir):
    rng = random.Random(11)
    solved = 0
    for file in sorted(corpus_dir.glob("*.loop")):
        prog = parse_file(file)
        for path in extract_paths(prog.loop):
            try:
                rs = extract_recurrences(path, prog)
            except UnsupportedRecurrence:
                continue
            cf = solve_cfinite(rs)
            _numeric_agreement(rs, cf, rng)
            solved += 1
    assert solved >= 2


def test_solver_is_deterministic(fig1):
    path = extract_paths(fig1.loop)[1]
    one = solve_cfinite(extract_recurrences(path, fig1))
    two = solve_cfinite(extract_recurrences(path, fig1))
    assert one.format() == two.format()
    assert one.ring == two.ring


# -- exponential relations


def test_relation_examples():
    (g,) = exponential_relations([2, 4]).generators
    assert str(g) == "z1^2 - z2"
    assert exponential_relations([2, 3]).generators == []
    (g,) = exponential_relations([2, 3, 6]).generators
    assert str(g) == "z1*z2 - z3"
    (g,) = exponential_relations([-1]).generators
    assert str(g) == "z1^2 - 1"
    assert [str(g) for g in exponential_relations([1])] == ["z1 - 1"]


def test_zero_base_rejected():
    with pytest.raises(ValueError):
        exponential_relations([2, 0])


def test_left_kernel():
    m = [[1, 0], [2, 0], [0, 1]]
    (v,) = integer_left_kernel(m)
    assert sum(v[i] * m[i][0] for i in range(3)) == 0 and v[2] == 0
    assert abs(v[0]) == 2 and abs(v[1]) == 1


BASES = [-1, 2, 3, 4, 6, 8, 9]


@pytest.mark.parametrize("size", [2, 3])
def test_relations_vanish_and_are_complete(size):
    for combo in itertools.combinations(BASES, size):
        rel = exponential_relations(combo)
        assert rel.check(range(11)), combo
        ideal = Ideal(rel.ring, rel.generators)
        # every small multiplicative relation must follow from the generators
        for vec in itertools.product(range(-2, 3), repeat=size):
            if not any(vec):
                continue
            value = Fraction(1)
            for b, e in zip(combo, vec):
                value *= Fraction(b) ** e
            pos = {n: e for n, e in zip(rel.names, vec) if e > 0}
            neg = {n: -e for n, e in zip(rel.names, vec) if e < 0}
            binom = rel.ring.monomial(pos) - rel.ring.monomial(neg)
            assert ideal_member(binom, ideal) == (value == 1), (combo, vec)


def test_rational_bases():
    rel = exponential_relations([Fraction(1, 2), 2, Fraction(-1, 4)])
    assert rel.check()
    r = rel.ring
    assert ideal_member(r.parse("z1*z2 - 1"), Ideal(r, rel.generators))
    assert ideal_member(r.parse("z3^2 - z1^4"), Ideal(r, rel.generators))
