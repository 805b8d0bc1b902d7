"""History words: encoding, column checks, verification, extraction, store NFA."""

import random

import pytest

from storelang import fixtures, nfa as N
from storelang.history import (
    ColumnSymbol,
    Node,
    SojournOverflowError,
    build_history_two_nfa,
    column_ok,
    encode_history,
    extraction_gsm,
    format_history,
    link_gives,
    link_needs,
    store_nfa,
)
from storelang.machine import simulate, store_config_of
from storelang.twonfa import two_nfa_membership


def _samples(m, words, k, max_steps=200):
    out = []
    for w in words:
        res = simulate(m, tuple(w), max_steps=max_steps)
        for comp in res.accepting:
            for snap in range(len(comp.configs)):
                out.append((comp, snap, encode_history(comp, snap, k)))
    return out


def test_encode_history_structure():
    m = fixtures.copy_match()
    comp = simulate(m, tuple("ab$ab")).accepting[0]
    hw = encode_history(comp, 3, 7)
    assert hw[0].track0[0] == "state"
    begins = sum(1 for col in hw if col.nodes and col.nodes[0].p_d is None)
    ends = sum(1 for col in hw if col.nodes and col.nodes[-1].s_d is None)
    marks = sum(1 for col in hw
                if col.track0[0] == "cell" and col.track0[2] is not None)
    assert begins == ends == marks == 1
    assert all(column_ok(m, col, 7) for col in hw[1:])


def test_encode_history_overflow():
    m = fixtures.copy_match()
    comp = simulate(m, tuple("a$a")).accepting[0]
    with pytest.raises(SojournOverflowError):
        encode_history(comp, 0, 1)


def test_column_ok_rejects_malformed():
    m = fixtures.copy_match()
    bad_cases = [
        # begin node below track 1
        ColumnSymbol(("pad",), (Node("a", False, "R", 1, "L", 1),
                                Node("a", True, None, None, None, None))),
        # unmarked node after a marked one
        ColumnSymbol(("pad",), (Node("a", True, "R", 1, "L", 1),
                                Node("a", False, None, None, "L", 2))),
        # link target out of range
        ColumnSymbol(("pad",), (Node("a", True, "R", 9, None, None),)),
        # unmarked end node
        ColumnSymbol(("pad",), (Node("a", False, None, None, None, None),)),
        # unwritable symbol
        ColumnSymbol(("pad",), (Node("$", True, None, None, None, None),)),
    ]
    for col in bad_cases:
        assert not column_ok(m, col, 7), col


def test_link_needs_gives_are_duals():
    col = ColumnSymbol(("pad",), (
        Node("a", False, "R", 2, None, None),
        Node("a", True, "L", 1, "R", 1),
    ))
    assert link_needs(col) == {(2, "P", 1), (1, "S", 2)}
    assert link_gives(col) == {(2, "S", 1)}


def test_roundtrip_full_phase():
    m = fixtures.copy_match()
    tn = build_history_two_nfa(m, 7)
    for comp, snap, hw in _samples(m, ["a$a", "ab$ab", "ba$ba"], 7):
        assert two_nfa_membership(tn, hw), (snap, format_history(hw))


def test_extraction_gsm_projects_snapshot():
    m = fixtures.copy_match()
    g = extraction_gsm(m)
    comp = simulate(m, tuple("ab$ab")).accepting[0]
    for snap in range(len(comp.configs)):
        hw = encode_history(comp, snap, 7)
        word = []
        for col in hw:
            (dst, out), = g.moves(0, col)
            assert dst == 0
            word.extend(out)
        assert tuple(word) == store_config_of(comp.configs[snap]).to_word()


def test_mutated_links_are_rejected():
    m = fixtures.copy_match()
    tn = build_history_two_nfa(m, 7)
    rng = random.Random(7)
    samples = _samples(m, ["a$a", "ab$ab"], 7)
    rejected = total = 0
    while total < 120:
        comp, snap, hw = samples[rng.randrange(len(samples))]
        ci = rng.randrange(1, len(hw))
        col = hw[ci]
        if not col.nodes:
            continue
        ni = rng.randrange(len(col.nodes))
        nd = col.nodes[ni]
        field = rng.choice(["s_t", "p_t", "s_d", "p_d"])
        val = getattr(nd, field)
        if field.endswith("_t"):
            if val is None:
                continue
            new = rng.choice([t for t in range(1, 8) if t != val])
        else:
            if val is None:
                continue
            new = "L" if val == "R" else "R"
        nodes = list(col.nodes)
        nodes[ni] = nd._replace(**{field: new})
        mutated = hw[:ci] + (ColumnSymbol(col.track0, tuple(nodes)),) + hw[ci + 1:]
        total += 1
        if not two_nfa_membership(tn, mutated):
            rejected += 1
    assert rejected / total >= 0.99


def test_store_nfa_small_r_is_sound():
    m = fixtures.copy_match()
    a = store_nfa(m, 1)
    b = store_nfa(m, 3)
    # monotone in r: raising the budget only adds store configurations
    assert N.is_empty(N.difference(a, b))


def test_store_nfa_rejects_bad_parameters():
    m = fixtures.copy_match()
    with pytest.raises(ValueError):
        store_nfa(m, 0)


def test_store_nfa_requires_counter_free():
    from storelang.machine import CounterRule, END, Machine
    m = Machine("c", frozenset({"s0", "s1"}), ("a",), ("_",), "_", 1,
                (CounterRule("s0", END, 1, 0, "s1", 0),), "s0",
                frozenset({"s1"}))
    with pytest.raises(ValueError):
        store_nfa(m, 1)
