"""Two-way NFAs: membership, crossing-sequence conversion, differential tests."""

from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from storelang.twonfa import (
    ExplicitTwoNfa,
    InfiniteAlphabetError,
    L,
    LEFT_END,
    R,
    RIGHT_END,
    S,
    SymbolSource,
    two_nfa_membership,
    two_nfa_to_nfa,
)

AB = ("a", "b")


def _forward_all_a():
    """One-way scan accepting a*."""
    trans = {
        (0, LEFT_END): [(0, R)],
        (0, "a"): [(0, R)],
        (0, RIGHT_END): [(1, R)],
    }
    return ExplicitTwoNfa(2, AB, trans, 0, {1})


def _zigzag_even():
    """Scans right, bounces back, re-scans: accepts even-length words."""
    trans = {
        (0, LEFT_END): [(0, R)],
        (0, "a"): [(0, R)], (0, "b"): [(0, R)],
        (0, RIGHT_END): [(1, L)],
        (1, "a"): [(2, L)], (1, "b"): [(2, L)],
        (2, "a"): [(1, L)], (2, "b"): [(1, L)],
        (1, LEFT_END): [(3, R)],
        (3, "a"): [(3, R)], (3, "b"): [(3, R)],
        (3, RIGHT_END): [(4, R)],
    }
    return ExplicitTwoNfa(5, AB, trans, 0, {4})


def test_membership_one_way():
    m = _forward_all_a()
    assert two_nfa_membership(m, ())
    assert two_nfa_membership(m, ("a", "a"))
    assert not two_nfa_membership(m, ("a", "b"))


def test_membership_two_way():
    m = _zigzag_even()
    for w in [(), ("a", "b"), ("b", "b", "a", "a")]:
        assert two_nfa_membership(m, w), w
    for w in [("a",), ("a", "b", "a")]:
        assert not two_nfa_membership(m, w), w


def _nfa_accepts(a, w):
    """The conversion's alphabet holds only discovered usable symbols; words
    using anything else are rejected by construction."""
    if any(sym not in set(a.alphabet) for sym in w):
        return False
    return a.accepts(w)


def test_conversion_matches_membership_on_fixed_machines():
    for m in (_forward_all_a(), _zigzag_even()):
        a = two_nfa_to_nfa(m)
        for n in range(5):
            for w in product(AB, repeat=n):
                assert _nfa_accepts(a, w) == two_nfa_membership(m, w), w


def test_infinite_symbol_source_rejected():
    class Bottomless(SymbolSource):
        finite = False

    m = _forward_all_a()
    m.symbol_source = Bottomless()
    with pytest.raises(InfiniteAlphabetError):
        two_nfa_to_nfa(m)


@st.composite
def random_two_nfa(draw):
    n = draw(st.integers(1, 4))
    final = {draw(st.integers(0, n - 1))}
    trans = {}
    symbols = [LEFT_END, RIGHT_END, *AB]
    for q in range(n):
        for sym in symbols:
            if not draw(st.booleans()):
                continue
            moves = []
            for _ in range(draw(st.integers(1, 2))):
                q2 = draw(st.integers(0, n - 1))
                if sym is LEFT_END:
                    d = draw(st.sampled_from([S, R]))
                elif sym is RIGHT_END:
                    d = draw(st.sampled_from([S, L]))
                else:
                    d = draw(st.sampled_from([L, S, R]))
                moves.append((q2, d))
            trans[(q, sym)] = moves
    # accepting exits: fall off the right end in a final state
    for q in sorted(final):
        trans.setdefault((q - 1 if q else q, RIGHT_END), [])
    q_acc = draw(st.integers(0, n - 1))
    trans.setdefault((q_acc, RIGHT_END), []).append((next(iter(final)), R))
    return ExplicitTwoNfa(n, AB, trans, 0, final)


@settings(max_examples=50, deadline=None)
@given(random_two_nfa())
def test_conversion_differential(m):
    a = two_nfa_to_nfa(m)
    for n in range(7):
        for w in product(AB, repeat=n):
            assert _nfa_accepts(a, w) == two_nfa_membership(m, w), w
