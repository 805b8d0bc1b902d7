"""Verification layer: filters, existence decisions, loaded/unloaded machines,
trimming, common configurations, right quotient."""

import pytest

from storelang import fixtures
from storelang import nfa as N
from storelang import verify as V
from storelang.machine import (
    END,
    LAMBDA,
    Machine,
    TapeRule,
    metrics,
    parse_store_config,
    simulate,
    store_config_of,
)
from storelang.oracle import accepted_words, all_inputs, oracle_quotient


def _min_metric(m, w, mode):
    res = simulate(m, w)
    if not res.accepting:
        return None
    key = {"turn": lambda x: x.turns, "visit": lambda x: x.max_visits,
           "crossing": lambda x: x.max_crossings}[mode]
    return min(key(metrics(c)) for c in res.accepting)


SHORT_INPUTS = list(all_inputs(fixtures.copy_match().input_alphabet, 3)) + [
    tuple("ab$ab")
]


@pytest.mark.parametrize("mode,k", [("turn", 2), ("visit", 3), ("crossing", 3)])
def test_bound_filter_membership_matches_metrics(mode, k):
    m = fixtures.copy_match()
    filt = V.bound_filter(m, k, mode)
    for w in SHORT_INPUTS:
        best = _min_metric(m, w, mode)
        want = best is not None and best <= k
        got = bool(simulate(filt, w, max_steps=400).accepting)
        assert got == want, (w, mode, k, best)


def test_bound_filter_is_monotone_in_k():
    m = fixtures.segmented_copy_match()
    inputs = list(all_inputs(m.input_alphabet, 3))
    accepted = []
    for k in (1, 2, 3):
        filt = V.bound_filter(m, k, "crossing")
        accepted.append({w for w in inputs
                         if simulate(filt, w, max_steps=400).accepting})
    assert accepted[0] <= accepted[1] <= accepted[2]


def test_bound_filter_rejects_unknown_mode():
    with pytest.raises(ValueError):
        V.bound_filter(fixtures.copy_match(), 1, "steps")


def test_exists_k_bounded_crossing():
    m = fixtures.copy_match()
    assert V.exists_k_bounded(m, 3, "crossing")
    assert not V.exists_k_bounded(m, 0, "crossing")


def test_exists_k_bounded_visit_zero_is_false():
    assert not V.exists_k_bounded(fixtures.copy_match(), 0, "visit")


def _stationary_machine():
    """Accepts 'a' without ever moving the head."""
    rules = (
        TapeRule("s0", "a", "_", "s1", "x", "S"),
        TapeRule("s1", END, "x", "s2", "x", "S"),
    )
    return Machine("stationary", frozenset({"s0", "s1", "s2"}), ("a",),
                   ("x", "_"), "_", 0, rules, "s0", frozenset({"s2"}))


def test_exists_k_bounded_turn_and_zero_crossing():
    m = _stationary_machine()
    assert V.exists_k_bounded(m, 0, "turn")
    assert V.exists_k_bounded(m, 0, "crossing")
    # the accepting run holds three configurations at its single cell
    assert V.exists_k_bounded(m, 3, "visit")
    assert not V.exists_k_bounded(m, 2, "visit")


def test_trim_machine_preserves_language_and_drops_dead_states():
    m = fixtures.copy_match()
    dead = Machine(m.name, frozenset(m.states | {"zombie"}), m.input_alphabet,
                   m.tape_alphabet, m.blank, 0,
                   m.rules + (TapeRule("zombie", "a", "_", "zombie", "a", "R"),),
                   m.initial, m.finals)
    t = V.trim_machine(dead)
    assert "zombie" not in t.states
    assert accepted_words(t, 4) == accepted_words(m, 4)


def test_config_set_roundtrip():
    m = fixtures.copy_match()
    c = V.config_set(m, ["q0 _^", parse_store_config("q2 a^b", m)])
    assert c.accepts(("q0", "_", "^"))
    assert c.accepts(("q2", "a", "^", "b"))
    assert not c.accepts(("q1", "_", "^"))


def test_loaded_machine_simulates_from_the_seed():
    m = fixtures.copy_match()
    c = V.config_set(m, ["q0 _^"])
    loaded = V.loaded_machine(m, c)
    delim = next(t for t in loaded.input_alphabet if t.startswith("$cfg"))
    cases = [
        (("q0", "_", "^", delim, "a", "$", "a", delim), True),   # full run
        (("q0", "_", "^", delim, "a", delim), True),             # partial run
        (("q0", "_", "^", delim, delim), True),                  # zero steps
        (("q1", "a", "_", "^", delim, delim), False),            # not in seed
    ]
    for w, want in cases:
        assert bool(simulate(loaded, w, max_steps=400).accepting) == want, w


def test_unloaded_machine_checks_the_reached_config():
    m = fixtures.copy_match()
    target = store_config_of(simulate(m, tuple("a$a")).accepting[0].configs[-1])
    c = V.config_set(m, [target])
    un = V.unloaded_machine(m, c)
    delim = next(t for t in un.input_alphabet if t.startswith("$cfg"))
    cases = [
        # q2 a^ drives into the target on remaining input "a"
        (("q2", "a", "^", delim, "a", delim), True),
        (("q2", "a", "^", delim, delim), False),     # stops short of the target
        (("q0", "_", "^", delim, "a", "$", "a", delim), True),  # full run
        (("q0", "_", "^", delim, "b", "$", "b", delim), False),  # wrong target
    ]
    for w, want in cases:
        assert bool(simulate(un, w, max_steps=400).accepting) == want, w


def test_common_configs_shared_with_itself():
    m = fixtures.copy_match()
    res = V.common_configs(m, 3, m, 3)
    assert res.answer
    known = fixtures.copy_match_store_nfa()
    assert known.accepts(res.witness)
    assert res.witness != (m.initial, m.blank, "^")


def _renamed_segmented():
    m = fixtures.segmented_copy_match()
    ren = {q: q.replace("q", "s") for q in m.states}
    rules = tuple(
        TapeRule(ren[r.state], r.inp, r.read, ren[r.new_state], r.write, r.move)
        for r in m.rules)
    return Machine("renamed", frozenset(ren.values()), m.input_alphabet,
                   m.tape_alphabet, m.blank, 0, rules, ren[m.initial],
                   frozenset(ren[q] for q in m.finals), m.declared_bound)


def test_common_configs_disjoint_after_renaming():
    res = V.common_configs(fixtures.copy_match(), 3, _renamed_segmented(), 3)
    assert not res.answer
    assert res.witness is None


def test_right_quotient_machine_matches_oracle():
    m = fixtures.copy_match()
    rgx = N.plus(N.symbol_choice(m.input_alphabet, ("a", "b")))
    qm = V.right_quotient_machine(m, rgx)
    got = {w for w in accepted_words(qm, 6, max_tape=8)}
    want = {u for u in oracle_quotient(m, rgx, 6) if len(u) <= 6}
    assert got == want


def test_right_quotient_rejects_foreign_alphabet():
    m = fixtures.copy_match()
    with pytest.raises(N.AlphabetMismatchError):
        V.right_quotient_machine(m, N.literal(("z",), ("z",)))
