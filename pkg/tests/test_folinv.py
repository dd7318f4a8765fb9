import itertools
import random
import warnings

import pytest

from symelim.folinv import (
    AxiomWarning,
    BASE,
    Calculus,
    EXTENDED,
    KBO,
    Precedence,
    SaturationLimits,
    Signature,
    UnregisteredSymbol,
    filter_base_language,
    first_order_invariants,
    generate_extended_axioms,
    ground_check,
    make_clause,
    minimize,
    render_invariant,
    replay,
    saturate,
    subsumes,
    tptp_dump,
)
from symelim.folinv.clauses import PredLit, eq, ge, gt, lt
from symelim.folinv.terms import App, Var, add, num, subst, unify
from symelim.loopspec import Inputs, UFInterpretation, interpret, parse_file, parse_program, \
    random_traces
from symelim.polyinv import invariant_fixed_point

X, Y = Var("X"), Var("Y")


def _sig(*entries):
    sig = Signature()
    for name, arity, tag, pred in entries:
        sig.add(name, arity, tag, "uf", predicate=pred)
    return sig


def _target(fig1_sig):
    # forall p. 0 <= p && p < b ==> B[p] - h(p) > 0, as a clause
    b, B, h = App("b"), fig1_sig.array_fn["B"], "h"
    return make_clause([lt(X, num(0)), ge(X, b), gt(App(B, (X,)), App(h, (X,)))])


@pytest.fixture(scope="module")
def fig1(corpus_dir):
    return parse_file(corpus_dir / "fig1.loop")


@pytest.fixture(scope="module")
def fig1_result(fig1):
    ideal, _ = invariant_fixed_point(fig1)
    return first_order_invariants(fig1, ideal)


# -- saturation on small clause sets ----------------------------------------------------


def test_one_resolution_step():
    # P extended puts P(X) on top of P(X) | Q(X), so the resolution is ordered
    sig = _sig(("P", 1, EXTENDED, True), ("Q", 1, BASE, True))
    c1 = make_clause([PredLit(True, "P", (X,)), PredLit(True, "Q", (X,))])
    c2 = make_clause([PredLit(False, "P", (X,))])
    res = saturate([c1, c2], sig)
    assert not res.partial and not res.refuted
    assert "Q(X0)" in {c.key for c in res.clauses}


def test_refutation():
    sig = _sig(("P", 1, BASE, True), ("a", 0, BASE, False))
    a = App("a")
    res = saturate([make_clause([PredLit(True, "P", (a,))]),
                    make_clause([PredLit(False, "P", (a,))])], sig)
    assert res.refuted and res.empty_clause is not None


def test_equality_and_ordering_literals():
    sig = _sig(("f", 1, BASE, False), ("c", 0, BASE, False))
    f, c = (lambda t: App("f", (t,))), App("c")
    # f(X) = X + 1 and f(c) <= c is contradictory
    res = saturate([make_clause([eq(f(X), add(X, num(1)))]),
                    make_clause([ge(c, f(c))])], sig)
    assert res.refuted


def test_ground_literals_are_evaluated():
    assert make_clause([ge(num(3), num(1))]) is None          # tautology
    c = make_clause([ge(num(0), num(1)), PredLit(True, "P", ())])
    assert c.key == "P"


def test_limits_flag_partial():
    # ~P(X) is selected, so P(z), P(s(z)), ... never ends
    sig = _sig(("s", 1, BASE, False), ("P", 1, EXTENDED, True), ("z", 0, BASE, False))
    s = lambda t: App("s", (t,))
    clauses = [make_clause([PredLit(True, "P", (App("z"),))]),
               make_clause([PredLit(False, "P", (X,)), PredLit(True, "P", (s(X),))])]
    res = saturate(clauses, sig, limits=SaturationLimits(max_retained=20, max_numeral=10**6))
    assert res.partial and "retained" in res.reason


def test_subsumption_weakening():
    c = App("c")
    f = lambda t: App("f", (t,))
    general = make_clause([ge(f(X), c)])
    specific = make_clause([ge(add(f(App("d")), num(2)), c), PredLit(True, "Q", ())])
    assert subsumes(general, specific)
    assert not subsumes(specific, general)


# -- the order ------------------------------------------------------------------------


def test_extended_above_base(fig1):
    sig = generate_extended_axioms(fig1).signature
    prec = Precedence(sig)
    base, ext = sig.base_symbols(), sig.extended_symbols()
    assert base and ext
    for b, e in itertools.product(base, ext):
        assert prec.greater(e, b) and not prec.greater(b, e)
    # within a class: arity, then name
    ranks = [prec.rank(*s) for s in sorted(base, key=lambda s: (s[1], s[0]))]
    assert ranks == sorted(ranks)


def _random_term(rng, funs, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([Var("X"), Var("Y"), Var("Z"), App("a"), App("b")])
    name, arity = rng.choice(funs)
    return App(name, tuple(_random_term(rng, funs, depth - 1) for _ in range(arity)))


def test_kbo_stable_under_substitution():
    funs = [("f", 1), ("g", 2), ("h", 1), ("k", 3)]
    sig = _sig(*[(n, a, BASE, False) for n, a in funs + [("a", 0), ("b", 0)]])
    sig.add("k", 3, BASE, "uf")
    kbo = KBO(Precedence(sig))
    rng = random.Random(7)
    ordered = 0
    for _ in range(1000):
        s, t = _random_term(rng, funs, 3), _random_term(rng, funs, 3)
        sigma = {v: _random_term(rng, funs, 2) for v in "XYZ"}
        if kbo.greater(s, t):
            ordered += 1
            assert kbo.greater(subst(s, sigma), subst(t, sigma)), (s, t, sigma)
    assert ordered > 200


def test_unregistered_symbol_is_an_error():
    sig = _sig(("P", 1, BASE, True))
    with pytest.raises(UnregisteredSymbol):
        filter_base_language([make_clause([PredLit(True, "R", (X,))])], sig)


def test_unify_applies_bindings():
    f = lambda *a: App("f", a)
    sigma = unify(f(X, Y), f(Y, App("c")))
    assert sigma == {"X": App("c"), "Y": App("c")}


# -- axioms -----------------------------------------------------------------------------


def test_fig1_update_introduction(fig1):
    ax = generate_extended_axioms(fig1)
    sig = ax.signature
    a1 = {c.key for c in ax.by_schema("A1")}
    b_i, a_i = App("b", (Var("X0"),)), App("a", (Var("X0"),))
    then_branch = make_clause([PredLit(False, sig.path_pred[1], (Var("X0"),)),
                               PredLit(True, sig.upd_pred["B"],
                                       (Var("X0"), b_i, add(App("A_at", (a_i,)), App("h", (b_i,)))))])
    assert then_branch.key in a1
    # the then-branch predicate implies the guard A[a] > 0
    guard = make_clause([PredLit(False, sig.path_pred[1], (Var("X0"),)),
                         gt(App("A_at", (a_i,)), num(0))])
    assert guard.key in {c.key for c in ax.by_schema("A3")}


def test_fig1_monotone_b(fig1):
    ax = generate_extended_axioms(fig1)
    mono = make_clause([gt(X, Y), ge(App("b", (Y,)), App("b", (X,)))])
    assert mono.key in {c.key for c in ax.by_schema("A3")}


def test_monotone_b_on_traces(fig1):
    for tr in random_traces(fig1, 10, length=15, seed=3):
        bs = [s.scalars["b"] for s in tr.snapshots]
        assert bs == sorted(bs)


def test_no_array_writes_only_scalar_schemas(corpus_dir):
    ax = generate_extended_axioms(parse_file(corpus_dir / "squares.loop"))
    tags = {c.derivation.note.split(":")[0] for c in ax.clauses}
    assert tags <= {"A3", "A5"} and "A3" in tags


def test_unsupported_write_warns():
    prog = parse_program("""
        vars i, n; arrays A; i := 0;
        while (i < n) { A[i] := A[i] + 1; i := i + 1; }
    """)
    with pytest.warns(AxiomWarning):
        ax = generate_extended_axioms(prog)
    assert ax.skipped


# -- the fig1 run -------------------------------------------------------------------------


def test_fig1_target_derived(fig1_result):
    target = _target(fig1_result.signature)
    assert not fig1_result.partial
    assert any(subsumes(c, target) for c in fig1_result.emitted)
    assert "forall p. 0 <= p && p < b ==> B[p] > h(p)" in fig1_result.formulas


def test_fig1_scalar_invariants_pass_through(fig1_result):
    assert "a == b + c" in fig1_result.formulas
    assert "2 * a * a * a + 3 * a * a + a == 6 * s" in fig1_result.formulas


def test_elimination_guarantee(fig1_result):
    sig = fig1_result.signature
    for c in fig1_result.emitted:
        assert all(sig.tags[s] == BASE for s in c.symbols())
    dropped = [c for c in fig1_result.saturation.clauses if c not in fig1_result.emitted]
    assert any(sig.upd_pred["B"] in {s[0] for s in c.symbols()} for c in dropped)


def test_emitted_set_is_minimal(fig1_result):
    em = fig1_result.emitted
    for a, b in itertools.permutations(em, 2):
        assert not subsumes(a, b)
    assert minimize(em + em[:1]) == em


def test_derivations_replay(fig1_result):
    res = fig1_result.saturation
    calc = Calculus(fig1_result.signature)
    derived = [c for c in res.log.values() if c.derivation.rule != "input"]
    assert derived
    for c in derived:
        assert replay(c, res.log, calc), c


def test_existential_attempt_reported(fig1_result):
    texts = [e.text for e in fig1_result.existential]
    assert any("p < b ==> (exists q." in t and "A[q] > 0" in t and "B[p]" in t for t in texts)


def test_rendered_invariant_parses(fig1_result):
    text = next(f for f in fig1_result.formulas if "B[p]" in f)
    prog = parse_program(f"vars a, b, c, s, n; arrays A, B, C; funs h/1; "
                         f"while (a < n) {{ a := a + 1; }} assert({text});")
    assert prog.assertion is not None


def test_tptp_dump(fig1_result):
    text = tptp_dump(fig1_result.saturation.log.values(), fig1_result.signature)
    lines = text.strip().splitlines()
    assert all(l.startswith("tff(") and l.endswith(").") for l in lines)
    assert any(", axiom, " in l and "introduced(a1" in l for l in lines)
    assert any(", plain, " in l and "inference(" in l for l in lines)
    assert "upd_B" in text and "arr_B" in text and "cnt" in text
    assert "A_at" not in text


# -- ground checking ----------------------------------------------------------------------


def _fig1_trace(fig1):
    return interpret(fig1, Inputs({"A": [1, -2, 3]}, {"n": 3}, UFInterpretation("zero")))


def test_ground_check_target_passes(fig1):
    sig = generate_extended_axioms(fig1).signature
    tr = _fig1_trace(fig1)
    assert tr.array_list("B") == [1, 3]
    verdict = ground_check(_target(sig), tr, 10, sig)
    assert verdict.passed and verdict.checked > 0 and verdict.skipped > 0


def test_ground_check_detects_violation(fig1):
    sig = generate_extended_axioms(fig1).signature
    verdict = ground_check(make_clause([lt(App("b"), num(0))]), _fig1_trace(fig1), 10, sig)
    assert not verdict.passed


def test_ground_check_vacuous(fig1):
    sig = generate_extended_axioms(fig1).signature
    assert ground_check(None, _fig1_trace(fig1), 10, sig).passed


def test_emitted_clauses_sound_on_traces(fig1, fig1_result):
    sig = fig1_result.signature
    traces = random_traces(fig1, 25, length=12, seed=11)
    for c in fig1_result.emitted:
        for tr in traces:
            verdict = ground_check(c, tr, 20, sig)
            assert verdict.passed, (render_invariant(c, sig), verdict.counterexample)


@pytest.mark.parametrize("name,expected", [
    ("copy.loop", "forall p. 0 <= p && p < i ==> A[p] == B[p]"),
    ("fill.loop", "forall p. 0 <= p && p < i ==> 2 * p == B[p]"),
])
def test_other_array_loops(corpus_dir, name, expected):
    prog = parse_file(corpus_dir / name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ideal, _ = invariant_fixed_point(prog)
    res = first_order_invariants(prog, ideal)
    assert expected in res.formulas
    for c in res.emitted:
        for tr in random_traces(prog, 5, length=8, seed=1):
            assert ground_check(c, tr, 12, res.signature).passed
