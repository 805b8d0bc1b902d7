"""Reference machines used across the test suite and CLI docs.

- copy_match: writes the prefix before $ to the tape, rewinds, matches the
  suffix against the tape.  Accepts {w$w | w in {a,b}+}.  2-turn, 3-visit,
  3-crossing; its store language is known in closed form (see store nfa below).
- segmented_copy_match: the iterated variant over #-separated segments,
  accepting {w$w# | w in {a,b}*}*.  Not finite-turn; 4-visit, 3-crossing.
- duplicator: copies input w, then duplicates it on the tape as w$w.  Accepts
  {a,b}+ but is not finite-crossing (the $ cell is crossed ~2n times).
- power_of_two: accepts {a^(2^k) | k >= 0} by repeated halving sweeps; makes
  2k+2 turns on a^(2^k).
"""

from __future__ import annotations

from .machine import LAMBDA, END, Machine, TapeRule, store_alphabet
from . import nfa as N

BLANK = "_"


def copy_match() -> Machine:
    rules = []
    for c in ("a", "b"):
        rules.append(TapeRule("q0", c, BLANK, "q1", c, "R"))
    for c in ("a", "b"):
        rules.append(TapeRule("q1", c, BLANK, "q1", c, "R"))
    rules.append(TapeRule("q1", "$", BLANK, "q2", BLANK, "L"))
    for c in ("a", "b"):
        rules.append(TapeRule("q2", LAMBDA, c, "q2", c, "L"))
    rules.append(TapeRule("q2", LAMBDA, BLANK, "q3", BLANK, "R"))
    for c in ("a", "b"):
        rules.append(TapeRule("q3", c, c, "q3", c, "R"))
    rules.append(TapeRule("q3", END, BLANK, "q4", BLANK, "S"))
    return Machine(
        name="copy_match",
        states=frozenset({"q0", "q1", "q2", "q3", "q4"}),
        input_alphabet=("a", "b", "$"),
        tape_alphabet=("a", "b", BLANK),
        blank=BLANK,
        counter_count=0,
        rules=tuple(rules),
        initial="q0",
        finals=frozenset({"q4"}),
        declared_bound=("crossing", 3),
    )


def segmented_copy_match() -> Machine:
    rules = [TapeRule("q0", LAMBDA, BLANK, "q1", "#", "R")]
    for c in ("a", "b"):
        rules.append(TapeRule("q1", c, BLANK, "q1", c, "R"))
    rules.append(TapeRule("q1", "$", BLANK, "q2", BLANK, "L"))
    for c in ("a", "b"):
        rules.append(TapeRule("q2", LAMBDA, c, "q2", c, "L"))
    rules.append(TapeRule("q2", LAMBDA, "#", "q3", "#", "R"))
    for c in ("a", "b"):
        rules.append(TapeRule("q3", c, c, "q3", c, "R"))
    rules.append(TapeRule("q3", "#", BLANK, "q0", BLANK, "S"))
    rules.append(TapeRule("q0", END, BLANK, "q0", BLANK, "S"))
    return Machine(
        name="segmented_copy_match",
        states=frozenset({"q0", "q1", "q2", "q3"}),
        input_alphabet=("a", "b", "$", "#"),
        tape_alphabet=("a", "b", "#", BLANK),
        blank=BLANK,
        counter_count=0,
        rules=tuple(rules),
        initial="q0",
        finals=frozenset({"q0"}),
        declared_bound=("crossing", 3),
    )


def duplicator() -> Machine:
    AB = ("a", "b")
    ABD = ("a", "b", "$")
    rules = []
    for x in AB:
        rules.append(TapeRule("q0", x, BLANK, "q0", x, "R"))
    rules.append(TapeRule("q0", END, BLANK, "q1", "$", "L"))
    for x in AB:
        rules.append(TapeRule("q1", LAMBDA, x, "q1", x, "L"))
    rules.append(TapeRule("q1", LAMBDA, BLANK, "q2", BLANK, "R"))
    rules.append(TapeRule("q2", LAMBDA, "a", "q3", "a'", "R"))
    rules.append(TapeRule("q2", LAMBDA, "b", "q4", "b'", "R"))
    for y in ABD:
        rules.append(TapeRule("q3", LAMBDA, y, "q3", y, "R"))
    rules.append(TapeRule("q3", LAMBDA, BLANK, "q5", "a", "L"))
    for y in ABD:
        rules.append(TapeRule("q4", LAMBDA, y, "q4", y, "R"))
    rules.append(TapeRule("q4", LAMBDA, BLANK, "q5", "b", "L"))
    for y in ABD:
        rules.append(TapeRule("q5", LAMBDA, y, "q5", y, "L"))
    for x in AB:
        rules.append(TapeRule("q5", LAMBDA, x + "'", "q6", x, "R"))
    for x in AB:
        rules.append(TapeRule("q6", LAMBDA, x, "q2", x, "S"))
    rules.append(TapeRule("q6", LAMBDA, "$", "q7", "$", "S"))
    return Machine(
        name="duplicator",
        states=frozenset({f"q{i}" for i in range(8)}),
        input_alphabet=("a", "b"),
        tape_alphabet=("a", "b", "a'", "b'", "$", BLANK),
        blank=BLANK,
        counter_count=0,
        rules=tuple(rules),
        initial="q0",
        finals=frozenset({"q7"}),
    )


def power_of_two() -> Machine:
    r = [
        TapeRule("q0", "a", BLANK, "q0", "a", "R"),
        TapeRule("q0", END, BLANK, "q1", BLANK, "L"),
        TapeRule("q1", LAMBDA, "a", "q1", "a", "L"),
        TapeRule("q1", LAMBDA, BLANK, "q2", BLANK, "R"),
        TapeRule("q2", LAMBDA, "a", "q3", "b", "R"),
        TapeRule("q2", LAMBDA, "b", "q2", "b", "R"),
        TapeRule("q3", LAMBDA, "a", "q4", "a", "R"),
        TapeRule("q3", LAMBDA, "b", "q3", "b", "R"),
        TapeRule("q3", LAMBDA, BLANK, "q7", BLANK, "L"),
        TapeRule("q4", LAMBDA, "a", "q5", "b", "R"),
        TapeRule("q4", LAMBDA, "b", "q4", "b", "R"),
        TapeRule("q4", LAMBDA, BLANK, "q6", BLANK, "L"),
        TapeRule("q5", LAMBDA, "a", "q4", "a", "R"),
        TapeRule("q5", LAMBDA, "b", "q5", "b", "R"),
        TapeRule("q6", LAMBDA, "a", "q6", "a", "L"),
        TapeRule("q6", LAMBDA, "b", "q6", "b", "L"),
        TapeRule("q6", LAMBDA, BLANK, "q2", BLANK, "R"),
    ]
    return Machine(
        name="power_of_two",
        states=frozenset({f"q{i}" for i in range(8)}),
        input_alphabet=("a",),
        tape_alphabet=("a", "b", BLANK),
        blank=BLANK,
        counter_count=0,
        rules=tuple(r),
        initial="q0",
        finals=frozenset({"q7"}),
    )


# -- known store languages, compiled to NFAs over the store alphabet -----------


def copy_match_store_nfa() -> N.Nfa:
    """S for copy_match:
    {q0 _^}  ∪  {q x _^ | q∈{q1,q3,q4}, x∈{a,b}+}  ∪  {q2 _^ x | x∈{a,b}+}
             ∪  {q x ^ y | q∈{q2,q3}, x∈{a,b}+, y∈{a,b}*}
    """
    A = store_alphabet(copy_match())
    sig = N.symbol_choice(A, ["a", "b"])
    sig_plus, sig_star = N.plus(sig), N.star(sig)

    def lit(*syms):
        return N.literal(A, syms)

    parts = [
        lit("q0", BLANK, "^"),
        N.concat(N.concat(N.symbol_choice(A, ["q1", "q3", "q4"]), sig_plus), lit(BLANK, "^")),
        N.concat(lit("q2", BLANK, "^"), sig_plus),
        N.concat(N.concat(N.symbol_choice(A, ["q2", "q3"]), sig_plus), N.concat(lit("^"), sig_star)),
    ]
    out = parts[0]
    for p in parts[1:]:
        out = N.union(out, p)
    return out


def segmented_copy_match_store_nfa() -> N.Nfa:
    """S for segmented_copy_match:
    {q0 x _^ | x∈(#Σ̄*)*}  ∪  {q x _^ | q∈{q1,q3}, x∈(#Σ̄*)+}
      ∪  {q2 x ^ y | x∈(#Σ̄*)+, y∈Σ̄*}  ∪  {q3 x ^ y | x∈(#Σ̄*)*#Σ̄+, y∈Σ̄*}
    """
    A = store_alphabet(segmented_copy_match())
    sig_star = N.star(N.symbol_choice(A, ["a", "b"]))
    sig_plus = N.plus(N.symbol_choice(A, ["a", "b"]))
    seg = N.concat(N.literal(A, ("#",)), sig_star)  # #Σ̄*
    segs_star, segs_plus = N.star(seg), N.plus(seg)

    def lit(*syms):
        return N.literal(A, syms)

    parts = [
        N.concat(lit("q0"), N.concat(segs_star, lit(BLANK, "^"))),
        N.concat(N.symbol_choice(A, ["q1", "q3"]), N.concat(segs_plus, lit(BLANK, "^"))),
        N.concat(lit("q2"), N.concat(segs_plus, N.concat(lit("^"), sig_star))),
        N.concat(lit("q3"),
                 N.concat(segs_star,
                          N.concat(lit("#"), N.concat(sig_plus, N.concat(lit("^"), sig_star))))),
    ]
    out = parts[0]
    for p in parts[1:]:
        out = N.union(out, p)
    return out


ALL_FIXTURES = {
    "copy_match": copy_match,
    "segmented_copy_match": segmented_copy_match,
    "duplicator": duplicator,
    "power_of_two": power_of_two,
}
