"""Machine model: stepping, simulation, metrics, store configs, text format."""

import pytest

from storelang import fixtures
from storelang.machine import (
    CounterRule,
    END,
    HEAD,
    LAMBDA,
    Machine,
    MachineFormatError,
    TapeRule,
    initial_config,
    is_deterministic,
    metrics,
    parse_machine,
    parse_store_config,
    serialize_machine,
    simulate,
    store_alphabet,
    store_config_of,
    store_configs_of,
)


def test_copy_match_accepts_exactly_wdollarw():
    m = fixtures.copy_match()
    for w, want in [("a$a", True), ("ab$ab", True), ("b$b", True),
                    ("a$b", False), ("ab$a", False), ("$", False),
                    ("", False), ("ab", False), ("a$ab", False)]:
        res = simulate(m, tuple(w))
        assert bool(res.accepting) == want, w


def test_segmented_copy_match_language():
    m = fixtures.segmented_copy_match()
    for w, want in [("", True), ("$#", True), ("ab$ab#", True),
                    ("a$a#b$b#", True), ("a$b#", False), ("a$a", False),
                    ("#", False)]:
        res = simulate(m, tuple(w), max_steps=400)
        assert bool(res.accepting) == want, w


def test_duplicator_accepts_nonempty_ab():
    m = fixtures.duplicator()
    for w, want in [("a", True), ("ba", True), ("", False)]:
        res = simulate(m, tuple(w), max_steps=400)
        assert bool(res.accepting) == want, w


def test_power_of_two_language():
    m = fixtures.power_of_two()
    for n, want in [(1, True), (2, True), (3, False), (4, True),
                    (5, False), (6, False), (7, False), (8, True)]:
        res = simulate(m, ("a",) * n, max_steps=400)
        assert bool(res.accepting) == want, n


def test_left_edge_move_extends_tape_with_blank():
    # moving left off the leftmost cell lands on a fresh blank cell
    rules = [
        TapeRule("s0", LAMBDA, "_", "s1", "x", "L"),
        TapeRule("s1", END, "_", "s2", "_", "S"),
    ]
    m = Machine("edge", frozenset({"s0", "s1", "s2"}), ("a",), ("x", "_"), "_",
                0, tuple(rules), "s0", frozenset({"s2"}))
    res = simulate(m, ())
    assert res.accepting
    final = res.accepting[0].configs[-1]
    assert final.tape_left == ("_",) and final.tape_right == ("x",)


def test_trailing_blank_is_suppressed():
    rules = [
        TapeRule("s0", LAMBDA, "_", "s1", "x", "R"),
        TapeRule("s1", LAMBDA, "_", "s2", "_", "L"),
        TapeRule("s2", END, "x", "s3", "x", "S"),
    ]
    m = Machine("trail", frozenset({"s0", "s1", "s2", "s3"}), ("a",),
                ("x", "_"), "_", 0, tuple(rules), "s0", frozenset({"s3"}))
    res = simulate(m, ())
    assert res.accepting
    final = res.accepting[0].configs[-1]
    assert final.tape_right == ()  # the blank right of the head is not stored


def test_counter_rules_guard_and_update():
    rules = [
        CounterRule("s0", "a", 1, 0, "s0", +1),   # on zero or not, inc per a
        CounterRule("s0", "a", 1, 1, "s0", +1),
        CounterRule("s0", END, 1, 1, "s1", -1),
        CounterRule("s1", LAMBDA, 1, 1, "s1", -1),
        CounterRule("s1", LAMBDA, 1, 0, "s2", 0),
    ]
    m = Machine("count", frozenset({"s0", "s1", "s2"}), ("a",), ("_",), "_",
                1, tuple(rules), "s0", frozenset({"s2"}))
    assert simulate(m, ("a", "a")).accepting
    assert not simulate(m, ()).accepting  # END rule requires a nonzero counter


def test_counter_rule_consumes_guarded_input():
    # a letter-guarded counter rule must consume its input letter
    rules = [
        CounterRule("s0", "a", 1, 0, "s1", +1),
        TapeRule("s1", END, "_", "s2", "_", "S"),
    ]
    m = Machine("consume", frozenset({"s0", "s1", "s2"}), ("a",), ("_",), "_",
                1, tuple(rules), "s0", frozenset({"s2"}))
    assert simulate(m, ("a",)).accepting
    assert not simulate(m, ("a", "a")).accepting


def test_acceptance_requires_consumed_end_marker():
    # final state alone does not accept: END must be consumed by a rule
    rules = [TapeRule("s0", "a", "_", "s1", "a", "S")]
    m = Machine("noend", frozenset({"s0", "s1"}), ("a",), ("a", "_"), "_",
                0, tuple(rules), "s0", frozenset({"s1"}))
    assert not simulate(m, ("a",)).accepting


def test_metrics_copy_match():
    m = fixtures.copy_match()
    for w in ("a$a", "ab$ab", "abb$abb"):
        res = simulate(m, tuple(w))
        assert len(res.accepting) == 1
        met = metrics(res.accepting[0])
        assert met.turns == 2
        assert met.max_visits <= 3
        assert met.max_crossings <= 3


def test_metrics_counter_reversals():
    rules = [
        CounterRule("s0", "a", 1, 0, "s0", +1),
        CounterRule("s0", "a", 1, 1, "s0", +1),
        CounterRule("s0", END, 1, 1, "s1", -1),
        CounterRule("s1", LAMBDA, 1, 1, "s1", -1),
        CounterRule("s1", LAMBDA, 1, 0, "s2", 0),
    ]
    m = Machine("count", frozenset({"s0", "s1", "s2"}), ("a",), ("_",), "_",
                1, tuple(rules), "s0", frozenset({"s2"}))
    res = simulate(m, ("a", "a", "a"))
    assert metrics(res.accepting[0]).counter_reversals == (1,)


def test_store_config_word_and_text():
    m = fixtures.copy_match()
    res = simulate(m, tuple("ab$ab"))
    sc = store_config_of(res.accepting[0].configs[-1])
    assert sc.to_word() == ("q4",) + sc.tape
    assert HEAD in sc.tape
    roundtrip = parse_store_config(sc.to_text(), m)
    assert roundtrip == sc


def test_parse_store_config_rejects_malformed():
    m = fixtures.copy_match()
    with pytest.raises(ValueError):
        parse_store_config("q0 ^a", m)  # head marker first
    with pytest.raises(ValueError):
        parse_store_config("nosuch _^", m)
    with pytest.raises(ValueError):
        parse_store_config("q0 _^z", m)  # z not a tape symbol


def test_store_alphabet_collision_detected():
    m = fixtures.copy_match()
    bad = Machine("bad", frozenset({"a", "q"}), ("a",), ("a", "_"), "_", 0,
                  (TapeRule("q", END, "_", "a", "_", "S"),), "q",
                  frozenset({"a"}))
    with pytest.raises(ValueError):
        store_alphabet(bad)
    assert "^" in store_alphabet(m)


def test_machine_serialization_roundtrip():
    for fn in fixtures.ALL_FIXTURES.values():
        m = fn()
        m2 = parse_machine(serialize_machine(m))
        assert m2.states == m.states
        assert m2.rules == m.rules
        assert m2.initial == m.initial
        assert m2.finals == m.finals
        assert m2.declared_bound == m.declared_bound


def test_parse_machine_rejects_garbage():
    with pytest.raises(MachineFormatError):
        parse_machine("t q a b -> q2\n")
    with pytest.raises(MachineFormatError):
        parse_machine("machine x\nstates q\ninitial q\nfinal q\n"
                      "blank _\ntape-alphabet _\ninput-alphabet a\n"
                      "t q z _ -> q _ S\n")  # z undeclared


def test_is_deterministic():
    assert is_deterministic(fixtures.power_of_two())
    assert is_deterministic(fixtures.copy_match())
    rules = (
        TapeRule("s0", "a", "_", "s1", "a", "S"),
        TapeRule("s0", LAMBDA, "_", "s1", "_", "S"),  # co-enabled with the letter rule
    )
    m = Machine("nd", frozenset({"s0", "s1"}), ("a",), ("a", "_"), "_", 0,
                rules, "s0", frozenset({"s1"}))
    assert not is_deterministic(m)


def test_simulation_exhaustion_reported():
    m = fixtures.duplicator()
    res = simulate(m, ("a", "b"), max_steps=3)
    assert not res.accepting and res.exhausted


def test_store_configs_of_matches_configs():
    m = fixtures.copy_match()
    comp = simulate(m, tuple("a$a")).accepting[0]
    scs = store_configs_of(comp)
    assert len(scs) == len(comp.configs)
    assert scs[0] == store_config_of(initial_config(m, tuple("a$a")))
