"""NFA library: constructions, boolean operations, decision procedures, format."""

import pytest
from hypothesis import given, settings, strategies as st

from storelang import nfa as N

AB = ("a", "b")


def _lang(a, max_len=4):
    """Finite snapshot of L(a): all accepted words up to max_len."""
    from itertools import product
    out = set()
    for n in range(max_len + 1):
        for w in product(a.alphabet, repeat=n):
            if a.accepts(w):
                out.add(w)
    return out


def test_literal_and_symbol_choice():
    lit = N.literal(AB, ("a", "b"))
    assert lit.accepts(("a", "b"))
    assert not lit.accepts(("a",))
    choice = N.symbol_choice(AB, ["a"])
    assert choice.accepts(("a",)) and not choice.accepts(("b",))


def test_union_concat_star_plus():
    a = N.literal(AB, ("a",))
    b = N.literal(AB, ("b",))
    assert _lang(N.union(a, b), 1) == {("a",), ("b",)}
    assert _lang(N.concat(a, b), 2) == {("a", "b")}
    assert () in _lang(N.star(a)) and ("a", "a", "a") in _lang(N.star(a), 3)
    assert () not in _lang(N.plus(a))


def test_empty_and_epsilon_languages():
    assert N.is_empty(N.empty_language(AB))
    eps = N.epsilon_language(AB)
    assert eps.accepts(()) and not eps.accepts(("a",))


def test_intersect_difference():
    evens = N.star(N.concat(N.symbol_choice(AB, AB), N.symbol_choice(AB, AB)))
    starts_a = N.concat(N.literal(AB, ("a",)), N.star(N.symbol_choice(AB, AB)))
    both = N.intersect(evens, starts_a)
    assert both.accepts(("a", "b")) and not both.accepts(("a",))
    only_even = N.difference(evens, starts_a)
    assert only_even.accepts(("b", "b")) and not only_even.accepts(("a", "b"))


def test_determinize_complement():
    a = N.concat(N.star(N.symbol_choice(AB, AB)), N.literal(AB, ("a",)))
    comp = N.complement(N.determinize(a))
    for w in [(), ("b",), ("a", "b")]:
        assert comp.accepts(w)
    for w in [("a",), ("b", "a")]:
        assert not comp.accepts(w)


def test_equivalence_and_separating_word():
    a = N.union(N.literal(AB, ("a",)), N.literal(AB, ("b",)))
    b = N.symbol_choice(AB, AB)
    assert N.equivalent(a, b)
    c = N.literal(AB, ("a",))
    w = N.separating_word(b, c)
    assert w == ("b",)


def test_shortest_word():
    a = N.concat(N.literal(AB, ("a", "a")), N.star(N.literal(AB, ("b",))))
    assert N.shortest_word(a) == ("a", "a")
    assert N.shortest_word(N.empty_language(AB)) is None


def test_quotients():
    lang = N.literal(AB, ("a", "b", "b"))
    left = N.left_quotient_by_word(lang, ("a",))
    assert _lang(left, 3) == {("b", "b")}
    right = N.right_quotient_by_regular(lang, N.plus(N.literal(AB, ("b",))))
    assert _lang(right, 3) == {("a",), ("a", "b")}


def test_gsm_image_identity_and_projection():
    a = N.literal(AB, ("a", "b", "a"))
    assert N.equivalent(N.gsm_image(a, N.identity_gsm(AB)), a)
    # erase b's, double a's
    g = N.Gsm(1, {(0, "a"): [(0, ("a", "a"))], (0, "b"): [(0, ())]}, 0, {0}, AB)
    img = N.gsm_image(a, g)
    assert _lang(img, 5) == {("a", "a", "a", "a")}


def test_serialization_roundtrip():
    a = N.union(N.star(N.literal(AB, ("a", "b"))), N.literal(AB, ("b",)))
    b = N.parse_nfa(N.serialize_nfa(a))
    assert N.equivalent(a, b)
    assert tuple(b.alphabet) == tuple(a.alphabet)


def test_parse_nfa_rejects_garbage():
    with pytest.raises(N.NfaFormatError):
        N.parse_nfa("not an nfa\n")


def test_accepts_rejects_unknown_symbol():
    a = N.literal(AB, ("a",))
    with pytest.raises(N.UnknownSymbolError):
        a.accepts(("z",))


@st.composite
def random_nfa(draw):
    n = draw(st.integers(1, 4))
    trans = {}
    for q in range(n):
        for s in AB:
            if draw(st.booleans()):
                trans[(q, s)] = set(draw(st.lists(st.integers(0, n - 1),
                                                  min_size=1, max_size=2)))
    final = set(draw(st.lists(st.integers(0, n - 1), max_size=n)))
    return N.make_nfa(n, AB, trans, {0}, final)


@settings(max_examples=60, deadline=None)
@given(random_nfa(), random_nfa())
def test_boolean_algebra_properties(a, b):
    inter = _lang(N.intersect(a, b), 3)
    assert inter == _lang(a, 3) & _lang(b, 3)
    diff = _lang(N.difference(a, b), 3)
    assert diff == _lang(a, 3) - _lang(b, 3)


@settings(max_examples=60, deadline=None)
@given(random_nfa())
def test_determinization_preserves_language(a):
    d = N.determinize(a)
    assert _lang(d, 3) == _lang(a, 3)
    comp = N.complement(d)
    universe = {w for w in _lang(N.star(N.symbol_choice(AB, AB)), 3)}
    assert _lang(comp, 3) == universe - _lang(a, 3)
