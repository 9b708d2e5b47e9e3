import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from truecon.equivalences import graph_of_lts
from truecon.logics.checking import (
    NotPermissible, eil_model_of_lts, eval_eil, mc_brm_graph, mc_brm_process, mc_brm_scs,
    mc_eil_process, mc_eil_scs,
)
from truecon.logics.closure import EilDomain, brm_closure
from truecon.logics.enumerate import (
    brm_formula_count, eil_formula_count, enumerate_brm_formulas, enumerate_eil_formulas,
    multisets, random_brm_formula,
)
from truecon.logics.formulas import (
    TRUE, And, Atom, Back, Bind, Declare, FormulaError, Fwd, Not, depth, fid, format_formula,
    parse_brm, parse_eil, rename,
)
from truecon.logics.translation import (
    TranslationError, history_search, translate_brm_to_eil, witness_environment,
)
from truecon.multiset import ActionMultiset
from truecon.semantics import cached_lts, history_configuration
from truecon.structures import denote, scs
from truecon.syntax import actions_of, parse_process, to_initial
from truecon.terms import Base, Dot, ParL, ParR

from conftest import reachable_states

P = parse_process
E0 = frozenset()


# Syntax

def test_fid_examples():
    assert fid(TRUE) == frozenset()
    assert fid(Back("x", TRUE)) == {"x"}
    assert fid(Bind("x", "a", Back("x", TRUE))) == frozenset()
    assert fid(Declare("x", "a", Back("y", TRUE))) == {"y"}


def test_depth_examples():
    assert depth(TRUE) == 0
    assert depth(Atom(ActionMultiset({"a": 1}))) == 0
    assert depth(Fwd("a", Not(TRUE))) == 2
    assert depth(And(TRUE, Fwd("a", TRUE))) == 2


def test_parse_examples():
    f = parse_brm("<a> !{a:2,b:1} & <b!> true")
    assert f == And(Fwd("a", Not(Atom(ActionMultiset({"a": 2, "b": 1})))),
                    parse_brm("<b!> true"))
    g = parse_eil("<x:a> (y:b) <<x>> true")
    assert g == Bind("x", "a", Declare("y", "b", Back("x", TRUE)))
    assert parse_brm("{}") == Atom(ActionMultiset())


@pytest.mark.parametrize("text,logic", [
    ("<a>", "brm"), ("{a:1,a:2}", "brm"), ("{a:x}", "brm"), ("true true", "brm"),
    ("<<x>> true", "brm"), ("{a:1}", "eil"), ("(x:) true", "eil"), ("<x> true", "eil"),
])
def test_parse_errors(text, logic):
    with pytest.raises(FormulaError):
        (parse_brm if logic == "brm" else parse_eil)(text)


def test_print_parse_round_trip_brm():
    for f in enumerate_brm_formulas("ab", 2, 1):
        assert parse_brm(format_formula(f)) == f


def test_print_parse_round_trip_eil():
    for f in enumerate_eil_formulas("ab", 2, 2, closed=False):
        assert parse_eil(format_formula(f)) == f


def test_rename_avoids_capture():
    f = Bind("y", "a", Back("x", TRUE))
    with pytest.raises(ValueError):
        rename(f, {"x": "y"})
    assert rename(f, {"x": "z"}) == Bind("y", "a", Back("z", TRUE))


# Enumeration

def test_enumeration_depth_zero():
    assert [format_formula(f) for f in enumerate_brm_formulas("a", 0, 1)] == ["true", "{}", "{a:1}"]


def test_enumeration_depth_one_has_diamonds():
    fs = set(enumerate_brm_formulas("a", 1, 1))
    assert Fwd("a", TRUE) in fs and parse_brm("<a!> true") in fs


@pytest.mark.parametrize("n,d,m,expected", [(1, 1, 1, 21), (1, 2, 1, 507), (1, 2, 2, 1124)])
def test_enumeration_counts(n, d, m, expected):
    # expected values come from the grammar recurrence worked by hand
    assert brm_formula_count(n, d, m) == expected
    fs = list(enumerate_brm_formulas("ab"[:n], d, m))
    assert len(fs) == len(set(fs)) == expected
    assert max(depth(f) for f in fs) == d


def test_eil_enumeration_counts_and_closedness():
    fs = list(enumerate_eil_formulas("ab", 2, 2, closed=False))
    assert len(fs) == len(set(fs)) == eil_formula_count(2, 2, 2) == 313
    closed = list(enumerate_eil_formulas("ab", 2, 2))
    assert closed and all(not fid(f) for f in closed)
    assert list(enumerate_eil_formulas("ab", 2, 2)) == closed


# BRM model checking

def test_mc_brm_examples():
    assert mc_brm_process(P("a!.0 |[]| a!.0"), parse_brm("{a:2}"))
    f = parse_brm("<a> <a> {a:2}")
    assert mc_brm_process(P("a.0 |[]| a.0"), f)
    assert not mc_brm_process(P("a.a.0"), f)
    assert mc_brm_process(P("a.b.0"), TRUE)


def test_mc_brm_scs_examples():
    assert mc_brm_scs(denote(P("a!.0 |[]| a!.0")), parse_brm("{a:2}"))
    assert mc_brm_scs(denote(P("a.a.0")), parse_brm("<a> <a> {a:1}"))
    assert not mc_brm_scs(denote(P("a.a.0")), parse_brm("<a!> true"))


@given(reachable_states(actions=2), st.integers(0, 10**6))
def test_brm_process_and_structure_agree(p, seed):
    f = random_brm_formula(random.Random(seed), actions_of(p) or {"a"}, 3)
    assert mc_brm_process(p, f) == mc_brm_scs(denote(p), f)


# EIL model checking

def test_mc_eil_scs_examples():
    f = parse_eil("<x:a> <y:a> <<x>> true")
    a, b = scs(P("a.0 |[]| a.0")), scs(P("a.a.0"))
    assert mc_eil_scs(a, E0, {}, f)
    assert not mc_eil_scs(b, E0, {}, f)
    assert mc_eil_scs(b, E0, {}, TRUE)
    top = {Base("a"), Dot("a", Base("a"))}
    assert not mc_eil_scs(b, top, {"x": Base("a")}, parse_eil("<<x>> true"))
    assert mc_eil_scs(b, top, {"x": Dot("a", Base("a"))}, parse_eil("<<x>> true"))


def test_mc_eil_process_examples():
    assert mc_eil_process(P("a!.b!.0"), {}, parse_eil("(x:a) true"))
    assert not mc_eil_process(P("a.0"), {}, parse_eil("(x:a) true"))
    f = parse_eil("<x:a> <y:a> <<x>> true")
    assert mc_eil_process(P("a.0 |[]| a.0"), {}, f)
    assert not mc_eil_process(P("a.a.0"), {}, f)


def test_non_permissible_environment():
    with pytest.raises(NotPermissible):
        mc_eil_process(P("a.0"), {}, parse_eil("<<x>> true"))
    with pytest.raises(NotPermissible):
        mc_eil_process(P("a.0"), {"x": Base("a")}, parse_eil("<<x>> true"))
    with pytest.raises(NotPermissible):
        mc_eil_scs(scs(P("a.0")), E0, {"x": Base("a")}, parse_eil("<<x>> true"))


def _random_eil(rng, actions, ids, d):
    if d == 0 or rng.random() < 0.2:
        return TRUE
    r = rng.random()
    sub = _random_eil(rng, actions, ids, d - 1)
    if r < 0.15:
        return Not(sub)
    if r < 0.3:
        return And(sub, _random_eil(rng, actions, ids, d - 1))
    x, a = rng.choice(ids), rng.choice(actions)
    if r < 0.55:
        return Bind(x, a, sub)
    if r < 0.8:
        return Declare(x, a, sub)
    return Back(x, sub)


def _permissible_envs(p, ids, rng):
    events = sorted(history_configuration(p), key=repr)
    env = {}
    for x in ids:
        if events and rng.random() < 0.7:
            env[x] = rng.choice(events)
    return env


@given(reachable_states(actions=2), st.integers(0, 10**6))
def test_eil_process_and_structure_agree(p, seed):
    rng = random.Random(seed)
    acts = sorted(actions_of(p)) or ["a"]
    f = _random_eil(rng, acts, ["x", "y"], 3)
    env = _permissible_envs(p, ["x", "y"], rng)
    d = denote(p)
    f = Declare("x", acts[0], Declare("y", acts[0], f)) if fid(f) - set(env) else f
    assert mc_eil_process(p, env, f) == mc_eil_scs(d.structure, d.cursor, env, f)


@given(reachable_states(actions=2), st.integers(0, 10**6))
def test_substitution_lemma(p, seed):
    rng = random.Random(seed)
    acts = sorted(actions_of(p)) or ["a"]
    f = _random_eil(rng, acts, ["x", "y"], 3)
    env = _permissible_envs(p, ["x", "y"], rng)
    if fid(f) - set(env):
        return
    free = sorted(fid(f))
    # injective renaming into fresh identifiers
    sigma = {x: f"v{k}" for k, x in enumerate(free)}
    env2 = {sigma[x]: env[x] for x in free}
    assert mc_eil_process(p, env, f) == mc_eil_process(p, env2, rename(f, sigma))
    # merging two identifiers is sound only when the environment already agrees on them
    if len(free) == 2 and env[free[0]] == env[free[1]]:
        merged = {free[0]: "v", free[1]: "v"}
        assert mc_eil_process(p, env, f) == mc_eil_process(p, {"v": env[free[0]]}, rename(f, merged))


# Translation

def test_translate_true_and_diamond():
    assert translate_brm_to_eil(TRUE, {"a"}, []) == TRUE
    g = translate_brm_to_eil(parse_brm("<a> true"), {"a"}, [("x1", "a")])
    assert isinstance(g, Bind) and g.action == "a" and g.ident != "x1" and g.body == TRUE


def test_translate_atom_example():
    g = translate_brm_to_eil(parse_brm("{a:1}"), {"a", "b"}, [("x1", "a")])
    y = g.right.body.ident
    assert g == And(Back("x1", TRUE), Not(Declare(y, "b", Back(y, TRUE))))


def test_translate_atom_reads_top_of_history():
    h = [("z1", "a"), ("x1", "a")]
    g = translate_brm_to_eil(parse_brm("{a:1}"), {"a"}, h)
    assert g == And(Back("x1", TRUE), Not(Back("z1", TRUE)))


def test_translate_backward_diamond_and_freshness():
    g = translate_brm_to_eil(parse_brm("<a!> {} & <a!> {}"), {"a", "b"}, [("u1", "a")])
    names = [g.left.ident, g.right.ident]
    assert len(set(names)) == 2 and "u1" not in names
    assert isinstance(g.left, Declare) and isinstance(g.left.body, Back)


def test_translate_short_history():
    with pytest.raises(TranslationError):
        translate_brm_to_eil(parse_brm("{a:2}"), {"a"}, [("x1", "a")])
    with pytest.raises(TranslationError):
        translate_brm_to_eil(TRUE, {"a"}, [("x", "a"), ("x", "a")])
    g = translate_brm_to_eil(parse_brm("{a:2}"), {"a"}, [("x1", "a")], short_atoms="false")
    assert g == Not(TRUE)


def test_witness_examples():
    h, env = witness_environment(P("a!.0 |[]| a!.0"), parse_brm("{a:2}"))
    assert [a for _, a in h] == ["a", "a"]
    assert set(env.values()) == {ParL(E0, Base("a")), ParR(E0, Base("a"))}
    assert witness_environment(P("a.0"), parse_brm("{}")) == ((), {})
    assert witness_environment(P("a!.a!.0"), parse_brm("{a:2}")) is None


def test_witness_after_undo_and_redo_needs_a_partial_history():
    # a complete history keeps a name for the redone event; only the empty one works
    p, f = P("b!.0"), parse_brm("<b!> <b> {b:1}")
    assert history_search(p, f) is None
    assert witness_environment(p, f) == ((), {})


def test_translation_gap_for_universal_branches():
    # every a-successor has two undoable a's, but no single history order serves both branches
    p, f = P("a!.a.0 |[]| a!.a.0"), parse_brm("!<a> !{a:2}")
    assert mc_brm_process(p, f)
    assert witness_environment(p, f) is None


def test_converse_gap_under_negation():
    # the existential over histories can pick an order that falsifies the atom
    p, f = P("a!.a!.0"), parse_brm("!{a:1}")
    assert not mc_brm_process(p, f)
    assert history_search(p, f) is not None


# Closure engine

@pytest.mark.parametrize("text", ["a.0 |[]| a.a.0", "(a.0 |[]| b.0) + a.b.0", "a.0 |[a]| (a.0 + b.a.0)"])
def test_brm_closure_matches_enumeration(text):
    p = P(text)
    g = graph_of_lts(cached_lts(p))
    acts = sorted(actions_of(p))
    brute = {tuple(mc_brm_graph(g, s, f) for s in range(len(g.brm)))
             for f in enumerate_brm_formulas(acts, 2, 2)}
    closed = {tuple(np.frombuffer(k, dtype=bool)) for k in brm_closure(g, acts, multisets(acts, 2)).extensions(2)}
    assert brute == closed


@pytest.mark.parametrize("text", ["a.0 |[]| a.a.0", "(a.0 |[]| b.0) + a.b.0"])
def test_eil_closure_matches_enumeration(text):
    p = P(text)
    m = eil_model_of_lts(p)
    dom = EilDomain([m], ("x", "y"))
    names = {v: k for k, v in dom.events.items()}
    points = []
    for s in range(len(m.out)):
        for cx in range(dom.base):
            for cy in range(dom.base):
                env = {x: names[c] for x, c in (("x", cx), ("y", cy)) if c}
                points.append((s, env))
    idx = [dom.point(s, env) for s, env in points]
    acts = sorted(actions_of(p))
    brute = {tuple(eval_eil(m, s, env, f) for s, env in points)
             for f in enumerate_eil_formulas(acts, 2, 2, closed=False)}
    closed = {tuple(np.frombuffer(k, dtype=bool)[idx]) for k in dom.closure(acts).extensions(2)}
    assert brute == closed


def test_closure_separation_finds_a_witness():
    p, q = P("a.0 |[]| a.0"), P("a.a.0")
    from truecon.properties import brm_agreement
    f = brm_agreement(p, q, 3)
    assert f is not None and mc_brm_process(p, f) and not mc_brm_process(q, f)
    assert brm_agreement(p, P("a.0 |[]| a.0"), 3) is None


def test_forward_gap_after_undo_and_redo():
    # the undone event keeps its name in the history, so the redo leaves a stale entry
    p, f = P("b.0"), parse_brm("<b> <b!> <b> {b:1}")
    assert mc_brm_process(p, f)
    assert witness_environment(p, f) is None
