import pytest
from hypothesis import given

from truecon.multiset import ActionMultiset
from truecon.semantics import (
    EnrichmentError, StateCapExceeded, apt, brm_by_clauses, brm_process, build_lts, enr,
    enr_walk, forward_transitions, history_configuration, incoming_transitions, path_labels,
    project, zip_interleave,
)
from truecon.syntax import (
    NIL, ChoiceLeft, IntoPrefix, Prefix, executed_occurrences, is_well_formed, parse_process,
    parse_term, print_process, to_initial,
)
from truecon.terms import Base, Dot, ParL, ParR, PlusL, PlusR, Syn, act

from conftest import initial_processes, reachable_states

P = parse_process
T = parse_term
EX42 = "(a.0 |[]| a.0) |[a]| a.a.0"
EX43 = "(a.0 |[]| a.0) |[a]| (a.0 |[]| a.0)"


def test_forward_single_prefix():
    assert forward_transitions(P("a.0")) == ((Base("a"), P("a!.0")),)


def test_forward_choice_of_identical_prefixes():
    got = dict(forward_transitions(P("a.0 + a.0")))
    assert got == {PlusL(Base("a")): P("a!.0 + a.0"), PlusR(Base("a")): P("a.0 + a!.0")}


def test_forward_under_executed_prefix():
    assert forward_transitions(P("a!.b.0")) == ((Dot("a", Base("b")), P("a!.b!.0")),)


def test_enr_installs_sync_term():
    label = T("<|L[]a,a>[a]")
    got = enr(P("(a!.0 |[]| a.0) |[a]| a!.a.0"), label)
    assert got == P("(a!<|L[]a,a>[a].0 |[]| a.0) |[a]| a!<|L[]a,a>[a].a.0")


def test_enr_nil_and_unexecuted():
    bar = T("<a,a>[a]")
    assert enr_walk(NIL, Base("a"), bar) == NIL
    with pytest.raises(EnrichmentError):
        enr_walk(P("a.0"), Base("a"), bar)


def test_lts_sizes():
    lts = build_lts(P("a.0"))
    assert (len(lts.states), len(lts.edges)) == (2, 1)
    lts = build_lts(P(EX42))
    assert (len(lts.states), len(lts.edges)) == (5, 4)
    paths = lts.maximal_paths()
    assert len(paths) == 2 and paths[0][-1] != paths[1][-1]
    lts = build_lts(P(EX43))
    assert (len(lts.states), len(lts.edges)) == (7, 8)


def test_ex42_labels_and_histories():
    lts = build_lts(P(EX42))
    labels = {t for _, t, _ in lts.edges}
    assert T("<|L[]a,a>[a]") in labels and T("<|R[]a,.a a>[a]") in labels
    final = lts.maximal_paths()[0][-1]
    assert history_configuration(lts.states[final]) == {T("<|L[]a,a>[a]"), T("<|R[]a,.a a>[a]")}
    assert brm_process(lts.states[final]) == ActionMultiset({"a": 1})
    assert len(incoming_transitions(lts, lts.states[final])) == 1


def test_incoming_transitions():
    lts = build_lts(P("a.0 + a.0"))
    assert incoming_transitions(lts, lts.root) == []
    assert incoming_transitions(lts, P("a!.0 + a.0")) == [(P("a.0 + a.0"), PlusL(Base("a")))]


def test_state_cap():
    with pytest.raises(StateCapExceeded):
        build_lts(P(EX43), cap=3)


def test_state_cap_from_environment(monkeypatch):
    monkeypatch.setenv("TRUECON_STATE_CAP", "2")
    with pytest.raises(StateCapExceeded):
        build_lts(P("a.b.0"))


def test_brm_examples():
    assert brm_process(P("a!.0 |[]| a!.0")) == ActionMultiset({"a": 2})
    assert brm_process(P("a!.a!.0")) == ActionMultiset({"a": 1})
    assert brm_process(P("a.b.0")) == ActionMultiset()


def test_literal_clause_overcounts_synchronizations():
    # the multiplicative clause counts one sync step twice; the corrected brm does not
    lts = build_lts(P(EX42))
    final = lts.states[lts.maximal_paths()[0][-1]]
    assert brm_by_clauses(final) == ActionMultiset({"a": 2})
    assert brm_process(final) == ActionMultiset({"a": 1})
    lts = build_lts(P(EX43))
    top = [s for i, s in enumerate(lts.states) if not lts.out[i]]
    assert all(brm_by_clauses(s) == ActionMultiset({"a": 4}) for s in top)
    assert all(brm_process(s) == ActionMultiset({"a": 2}) for s in top)


def test_apt_examples():
    p = P("a!.b!.0")
    assert apt((IntoPrefix("a"),), p) == Dot("a", Base("b"))
    assert apt((ChoiceLeft(),), P("a!.0 + c.0")) == PlusL(Base("a"))
    lts = build_lts(P(EX42))
    mid = lts.states[1]
    terms = {apt(occ, mid) for occ, _ in executed_occurrences(mid)}
    assert terms == {T("<|L[]a,a>[a]")}


def test_history_configuration_examples():
    assert history_configuration(P("a.b.0")) == frozenset()
    assert history_configuration(P("a!.b!.0")) == {Base("a"), Dot("a", Base("b"))}


def test_zip_examples():
    assert zip_interleave([], [], {"a"}) == []
    assert zip_interleave([Base("a")], [Base("b")], set()) == [
        ParL(frozenset(), Base("a")), ParR(frozenset(), Base("b"))]
    assert zip_interleave([Base("a")], [Base("a")], {"a"}) == [Syn(Base("a"), Base("a"), frozenset({"a"}))]


def test_zip_synchronization_advances_both_sides():
    L = frozenset({"a"})
    got = zip_interleave([Base("a"), Dot("a", Base("b"))], [Base("a")], L)
    assert got == [Syn(Base("a"), Base("a"), L), ParL(L, Dot("a", Base("b")))]


def test_lts_export():
    lts = build_lts(P("a.0"))
    data = lts.to_json()
    assert data["edges"] == [{"src": 0, "label": "a", "dst": 1}]
    assert "s0 -> s1" in lts.to_dot()


@given(reachable_states())
def test_reachable_states_are_well_formed(p):
    assert is_well_formed(p)


@given(reachable_states())
def test_history_equals_path_labels(p):
    lts = build_lts(to_initial(p))
    assert history_configuration(p) == frozenset(path_labels(lts, lts.state_id(p)))


@given(reachable_states())
def test_brm_equals_incoming_multiset(p):
    lts = build_lts(to_initial(p))
    inc = incoming_transitions(lts, p)
    assert brm_process(p) == ActionMultiset(act(t) for _, t in inc)


@given(initial_processes())
def test_edges_are_deterministic_and_labelled(p):
    lts = build_lts(p)
    assert len(set(lts.edges)) == len(lts.edges)
    for i, t, j in lts.edges:
        assert act(t) is not None
        assert dict(forward_transitions(lts.states[i]))[t] == lts.states[j]


@given(reachable_states(width=2))
def test_project_then_zip_rebuilds_parallel_history(p):
    from truecon.syntax import Parallel
    if not isinstance(p, Parallel):
        return
    lts = build_lts(to_initial(p))
    labels = path_labels(lts, lts.state_id(p))
    left, right = project(labels, p.sync)
    merged = zip_interleave(left, right, p.sync)
    # zip picks one canonical interleaving; the set of events is what must survive
    assert set(merged) == set(labels)
