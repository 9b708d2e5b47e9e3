import io
import json

import pytest
from hypothesis import given

from truecon import fixture_path
from truecon.multiset import ActionMultiset
from truecon.structures import (
    ConfigStructure, brm_config, causality, concurrency, conflicts, denote, is_conflict_local,
    load_scs, nonlocal_cliques, save_scs, scs, scs_choice, scs_nil, scs_parallel, scs_prefix,
    scs_to_json, scs_transitions, validate_stable,
)
from truecon.syntax import parse_process
from truecon.terms import Base, Dot, ParL, ParR, PlusL, PlusR

from conftest import initial_processes

P = parse_process
E0 = frozenset()
LA, RA = ParL(E0, Base("a")), ParR(E0, Base("a"))
A1, A2 = Base("a"), Dot("a", Base("a"))


def fig1a():
    return scs(P("a.0 |[]| a.0"))


def fig1b():
    return scs(P("a.a.0"))


def test_fig1_shapes_are_stable():
    assert len(fig1a().masks) == 4 and validate_stable(fig1a()).ok
    assert len(fig1b().masks) == 3 and validate_stable(fig1b()).ok


def test_missing_root_is_reported():
    c = ConfigStructure(["e"], [["e"]], {"e": "a"})
    rep = validate_stable(c)
    assert not rep.ok and "rooted" in rep.violations[0]


def test_missing_union_is_reported():
    c = ConfigStructure(["e", "f"], [[], ["e"], ["f"]], {"e": "a", "f": "b"})
    assert validate_stable(c).ok
    c = ConfigStructure(["e", "f", "g"], [[], ["e"], ["f"], ["e", "f", "g"]], {"e": "a", "f": "b", "g": "c"})
    assert not validate_stable(c).ok


def test_causality_and_concurrency():
    top_b = {A1, A2}
    assert (A1, A2) in causality(fig1b(), top_b)
    assert concurrency(fig1b(), top_b) == frozenset()
    top_a = {LA, RA}
    assert {(x, y) for x, y in causality(fig1a(), top_a) if x != y} == set()
    assert concurrency(fig1a(), top_a) == {frozenset({LA, RA})}
    assert causality(fig1b(), {A1}) == {(A1, A1)}
    assert concurrency(fig1b(), {A1}) == frozenset()


def test_conflicts():
    assert conflicts(scs(P("a.0 + a.0"))) == {frozenset({PlusL(A1), PlusR(A1)})}
    assert conflicts(fig1a()) == frozenset()
    assert conflicts(scs(P("a.0"))) == frozenset()


def test_transitions():
    assert scs_transitions(fig1b()) == {(frozenset(), "a", frozenset({A1})),
                                        (frozenset({A1}), "a", frozenset({A1, A2}))}
    assert len(scs_transitions(fig1a())) == 4
    assert scs_transitions(scs_nil()) == frozenset()


def test_brm_config():
    assert brm_config(fig1a(), {LA, RA}) == ActionMultiset({"a": 2})
    assert brm_config(fig1b(), {A1, A2}) == ActionMultiset({"a": 1})
    assert brm_config(fig1a(), set()) == ActionMultiset()


def test_operators():
    c = scs_prefix("a", scs_nil())
    assert set(c.events) == {A1} and c.configurations == {E0, frozenset({A1})}
    d = scs_choice(c, c)
    assert len(d.events) == 2 and len(d.masks) == 3
    e = scs_parallel(c, c, frozenset())
    assert set(e.events) == {LA, RA} and e.configurations == fig1a().configurations


def test_synchronized_parallel_drops_blocked_events():
    c = scs(P("a.0 |[a]| b.0"))
    assert c.configurations == {E0, frozenset({ParR(frozenset({"a"}), Base("b"))})}


def test_denote():
    d = denote(P("a.0 |[]| a.0"))
    assert (len(d.structure.events), len(d.structure.masks), d.cursor) == (2, 4, E0)
    d = denote(P("a.a.0"))
    assert (len(d.structure.events), len(d.structure.masks), d.cursor) == (2, 3, E0)
    d = denote(P("a!.a.0"))
    assert d.structure == fig1b() and d.cursor == {A1}


def test_locality_fixtures():
    E, _ = load_scs(fixture_path("E.json"))
    F, _ = load_scs(fixture_path("F.json"))
    assert len(E.masks) == 13 and len(F.masks) == 12
    assert validate_stable(E).ok and validate_stable(F).ok
    for c in (E, F):
        ok, clique = is_conflict_local(c)
        assert not ok and clique == {"b1", "b2", "b3"}
    assert frozenset({"a3", "b1", "b2"}) in nonlocal_cliques(F)


def test_locality_simple():
    assert is_conflict_local(scs(P("a.0 + a.0"))) == (True, None)
    assert is_conflict_local(fig1a()) == (True, None)
    assert not is_conflict_local(scs(P("a.0 + a.0")), strict=True)[0]


def test_load_save_round_trip():
    E, _ = load_scs(fixture_path("E.json"))
    buf = io.StringIO()
    save_scs(E, buf, cursor={"a1"})
    buf.seek(0)
    E2, cursor = load_scs(buf)
    assert E2 == E and cursor == {"a1"}


def test_load_empty_structure():
    c, cursor = load_scs({"events": [], "configurations": [[]]})
    assert c == scs_nil() and cursor is None


@pytest.mark.parametrize("data", [
    {"events": [{"id": "e", "label": "a"}], "configurations": [[], ["f"]]},
    {"events": [{"id": "e", "label": "a"}, {"id": "e", "label": "b"}], "configurations": [[]]},
    {"events": [{"id": "e", "label": "a"}], "configurations": [[], ["e"], ["e"]]},
    {"configurations": [[]]},
])
def test_load_rejects_malformed(data):
    with pytest.raises(ValueError):
        load_scs(data)


@given(initial_processes())
def test_denotations_are_stable(p):
    assert validate_stable(scs(p)).ok


@given(initial_processes())
def test_structure_json_round_trip(p):
    c = scs(p)
    back, _ = load_scs(json.loads(json.dumps(scs_to_json(c))))
    assert len(back.masks) == len(c.masks) and len(back.events) == len(c.events)
