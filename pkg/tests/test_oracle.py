"""Brute-force oracle: store enumeration, reachability, quotient witnesses."""

import pytest

from storelang import fixtures
from storelang import nfa as N
from storelang.machine import parse_store_config, simulate, store_configs_of
from storelang.oracle import (
    accepted_words,
    all_inputs,
    enumerate_store,
    oracle_quotient,
    oracle_reach,
)


def test_all_inputs_order_and_count():
    words = list(all_inputs(("a", "b"), 2))
    assert words[0] == ()
    assert len(words) == 1 + 2 + 4
    assert all(len(w) <= 2 for w in words)


def test_enumerate_store_agrees_with_closed_form():
    m = fixtures.copy_match()
    rep = enumerate_store(m, 3, 200)
    assert not rep.exhausted
    known = fixtures.copy_match_store_nfa()
    assert parse_store_config("q0 _^", m) in rep.entries
    for sc, entry in rep.entries.items():
        assert known.accepts(sc.to_word()), sc.to_text()
        assert entry.min_visits >= 1
        # the witness computation really passes through the configuration
        assert sc in set(store_configs_of(entry.witness))


def test_enumerate_store_rejects_bad_bounds():
    with pytest.raises(ValueError):
        enumerate_store(fixtures.copy_match(), 0, 10)


def test_accepted_words_matches_simulation():
    m = fixtures.copy_match()
    words = accepted_words(m, 5)
    expect = {tuple(w + "$" + w) for w in ("a", "b", "aa", "ab", "ba", "bb")}
    assert words == expect


def test_oracle_reach_forward_contains_seed_and_is_monotone():
    m = fixtures.copy_match()
    seed = parse_store_config("q0 _^", m)
    small = oracle_reach(m, [seed], 2, 10)
    big = oracle_reach(m, [seed], 4, 40)
    assert seed in small
    assert small <= big


def test_oracle_reach_backward_recovers_run_prefix():
    m = fixtures.copy_match()
    comp = simulate(m, tuple("a$a")).accepting[0]
    configs = list(store_configs_of(comp))
    target = configs[-1]
    back = oracle_reach(m, [target], 4, 40, direction="backward")
    for sc in configs:
        assert sc in back, sc.to_text()


def test_oracle_reach_rejects_malformed_seed():
    m = fixtures.copy_match()
    from storelang.machine import StoreConfig

    with pytest.raises(ValueError):
        oracle_reach(m, [StoreConfig("q0", ("a",), ())], 2, 10)


def test_oracle_quotient_single_suffix():
    m = fixtures.copy_match()
    A = m.input_alphabet
    rgx = N.literal(A, ("a",))
    assert oracle_quotient(m, rgx, 3) == {("a", "$")}
