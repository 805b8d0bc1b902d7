"""One-way nondeterministic finite automata with a regular-language algebra.

Symbols are arbitrary whitespace-free string tokens (or any hashable for
in-memory use); epsilon is represented by ``None``.  Automata are immutable;
all operations are pure functions returning fresh automata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections import deque
from typing import Hashable, Iterable, Mapping, Optional, Sequence

EPSILON = None

Symbol = Hashable
Word = tuple


class AlphabetMismatchError(ValueError):
    """Raised when an operation requires identical alphabets (same symbols, same order)."""


class UnknownSymbolError(ValueError):
    pass


class NfaFormatError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Nfa:
    state_count: int
    alphabet: tuple
    transitions: Mapping  # (state, symbol-or-None) -> frozenset of states
    initial: frozenset
    final: frozenset

    def __post_init__(self):
        syms = set(self.alphabet)
        if len(syms) != len(self.alphabet):
            raise ValueError("duplicate alphabet symbol")
        for (src, sym), dsts in self.transitions.items():
            if not (0 <= src < self.state_count):
                raise ValueError(f"transition source {src} out of range")
            if sym is not EPSILON and sym not in syms:
                raise ValueError(f"transition symbol {sym!r} not in alphabet")
            for d in dsts:
                if not (0 <= d < self.state_count):
                    raise ValueError(f"transition target {d} out of range")
        for s in self.initial | self.final:
            if not (0 <= s < self.state_count):
                raise ValueError(f"state {s} out of range")

    # -- core queries ------------------------------------------------------

    def epsilon_closure(self, states: Iterable[int]) -> frozenset:
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for d in self.transitions.get((s, EPSILON), ()):
                if d not in seen:
                    seen.add(d)
                    stack.append(d)
        return frozenset(seen)

    def move(self, states: Iterable[int], sym) -> frozenset:
        out = set()
        for s in states:
            out |= self.transitions.get((s, sym), frozenset())
        return self.epsilon_closure(out)

    def accepts(self, word: Sequence) -> bool:
        cur = self.epsilon_closure(self.initial)
        for sym in word:
            if sym not in set(self.alphabet):
                raise UnknownSymbolError(repr(sym))
            cur = self.move(cur, sym)
            if not cur:
                return False
        return bool(cur & self.final)


def make_nfa(state_count, alphabet, transitions, initial, final) -> Nfa:
    """Normalize loose inputs (dict of iterables, lists) into an Nfa."""
    trans = {k: frozenset(v) for k, v in transitions.items() if v}
    return Nfa(state_count, tuple(alphabet), trans, frozenset(initial), frozenset(final))


def _require_same_alphabet(a: Nfa, b: Nfa):
    if a.alphabet != b.alphabet:
        raise AlphabetMismatchError(f"{a.alphabet!r} != {b.alphabet!r}")


# -- product / boolean operations ------------------------------------------


def intersect(a: Nfa, b: Nfa) -> Nfa:
    """Product automaton, reachable states only.  Epsilon moves advance one side."""
    _require_same_alphabet(a, b)
    index: dict = {}
    trans: dict = {}
    queue = deque()

    # index transitions by source state so huge alphabets are never scanned
    a_by_state: dict = {}
    for (p, sym), dsts in a.transitions.items():
        if sym is not EPSILON:
            a_by_state.setdefault(p, []).append((sym, dsts))

    def sid(pair):
        if pair not in index:
            index[pair] = len(index)
            queue.append(pair)
        return index[pair]

    for p in a.initial:
        for q in b.initial:
            sid((p, q))
    initial = set(index.values())
    while queue:
        p, q = pair = queue.popleft()
        src = index[pair]
        for sym, p_dsts in a_by_state.get(p, ()):
            q_dsts = b.transitions.get((q, sym))
            if not q_dsts:
                continue
            for p2 in p_dsts:
                for q2 in q_dsts:
                    trans.setdefault((src, sym), set()).add(sid((p2, q2)))
        for p2 in a.transitions.get((p, EPSILON), ()):
            trans.setdefault((src, EPSILON), set()).add(sid((p2, q)))
        for q2 in b.transitions.get((q, EPSILON), ()):
            trans.setdefault((src, EPSILON), set()).add(sid((p, q2)))
    final = {i for (p, q), i in index.items() if p in a.final and q in b.final}
    return make_nfa(max(len(index), 1), a.alphabet, trans, initial, final)


def determinize(a: Nfa) -> Nfa:
    """Reachable subset construction, completed with an explicit dead state."""
    start = a.epsilon_closure(a.initial)
    index = {start: 0}
    queue = deque([start])
    trans = {}
    while queue:
        subset = queue.popleft()
        src = index[subset]
        for sym in a.alphabet:
            nxt = a.move(subset, sym)
            if nxt not in index:
                index[nxt] = len(index)
                queue.append(nxt)
            trans[(src, sym)] = {index[nxt]}
    # the empty subset is the dead state; add it if no transition ever produced it
    if frozenset() not in index:
        dead = len(index)
        index[frozenset()] = dead
        for sym in a.alphabet:
            trans[(dead, sym)] = {dead}
    final = {i for subset, i in index.items() if subset & a.final}
    return make_nfa(len(index), a.alphabet, trans, {0}, final)


def complement(a: Nfa) -> Nfa:
    d = determinize(a)
    return make_nfa(d.state_count, d.alphabet, d.transitions, d.initial,
                    set(range(d.state_count)) - d.final)


def is_empty(a: Nfa) -> bool:
    seen = set(a.initial)
    stack = list(seen)
    while stack:
        s = stack.pop()
        if s in a.final:
            return False
        for (src, _sym), dsts in a.transitions.items():
            if src == s:
                for d in dsts:
                    if d not in seen:
                        seen.add(d)
                        stack.append(d)
    return True


def shortest_word(a: Nfa) -> Optional[tuple]:
    """A shortest accepted word, or None if the language is empty."""
    start = a.epsilon_closure(a.initial)
    if start & a.final:
        return ()
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        subset, word = queue.popleft()
        for sym in a.alphabet:
            nxt = a.move(subset, sym)
            if not nxt or nxt in seen:
                continue
            w2 = word + (sym,)
            if nxt & a.final:
                return w2
            seen.add(nxt)
            queue.append((nxt, w2))
    return None


def difference(a: Nfa, b: Nfa) -> Nfa:
    _require_same_alphabet(a, b)
    return intersect(a, complement(b))


def equivalent(a: Nfa, b: Nfa) -> bool:
    _require_same_alphabet(a, b)
    return is_empty(difference(a, b)) and is_empty(difference(b, a))


def separating_word(a: Nfa, b: Nfa) -> Optional[tuple]:
    """A shortest word in the symmetric difference, None when equivalent."""
    _require_same_alphabet(a, b)
    for diff in (difference(a, b), difference(b, a)):
        w = shortest_word(diff)
        if w is not None:
            return w
    return None


# -- quotients ---------------------------------------------------------------


def left_quotient_by_word(a: Nfa, w: Sequence) -> Nfa:
    syms = set(a.alphabet)
    cur = a.epsilon_closure(a.initial)
    for sym in w:
        if sym not in syms:
            raise UnknownSymbolError(repr(sym))
        cur = a.move(cur, sym)
    return make_nfa(a.state_count, a.alphabet, dict(a.transitions), cur, a.final)


def right_quotient_by_regular(a: Nfa, r: Nfa) -> Nfa:
    """L(result) = { u | exists v in L(r) with uv in L(a) }.

    A state s of `a` becomes final when, pairing it with some initial state of
    `r`, the product can reach a (final, final) pair.
    """
    _require_same_alphabet(a, r)
    # backward reachability over the full product graph
    good = {(p, q) for p in a.final for q in r.final}
    # build reverse edges
    rev: dict = {}
    for p in range(a.state_count):
        for q in range(r.state_count):
            for sym in a.alphabet:
                for p2 in a.transitions.get((p, sym), ()):
                    for q2 in r.transitions.get((q, sym), ()):
                        rev.setdefault((p2, q2), set()).add((p, q))
            for p2 in a.transitions.get((p, EPSILON), ()):
                rev.setdefault((p2, q), set()).add((p, q))
            for q2 in r.transitions.get((q, EPSILON), ()):
                rev.setdefault((p, q2), set()).add((p, q))
    stack = list(good)
    while stack:
        pair = stack.pop()
        for pred in rev.get(pair, ()):
            if pred not in good:
                good.add(pred)
                stack.append(pred)
    r_start = r.epsilon_closure(r.initial)
    final = {p for p in range(a.state_count) if any((p, q) in good for q in r_start)}
    return make_nfa(a.state_count, a.alphabet, dict(a.transitions), a.initial, final)


# -- gsm image ----------------------------------------------------------------


class Gsm:
    """Finite-state transducer; transitions map (state, input sym) to (state, output word) pairs.

    Subclasses may override `moves` to compute transitions on demand (the
    extraction transducer over column symbols does this).
    """

    def __init__(self, state_count, transitions, initial, final, output_alphabet):
        self.state_count = state_count
        self._transitions = {k: tuple(v) for k, v in transitions.items()}
        self.initial = initial
        self.final = frozenset(final)
        self.output_alphabet = tuple(output_alphabet)

    def moves(self, state, sym):
        return self._transitions.get((state, sym), ())


def identity_gsm(alphabet) -> Gsm:
    return Gsm(1, {(0, s): [(0, (s,))] for s in alphabet}, 0, {0}, alphabet)


def gsm_image(a: Nfa, g: Gsm) -> Nfa:
    """Image of L(a) under g; built as a product with outputs on the labels."""
    index: dict = {}
    trans: dict = {}
    queue = deque()

    a_by_state: dict = {}
    for (p, sym), dsts in a.transitions.items():
        if sym is not EPSILON:
            a_by_state.setdefault(p, []).append((sym, dsts))

    def sid(node):
        if node not in index:
            index[node] = len(index)
            if len(node) == 2:
                queue.append(node)
        return index[node]

    for p in a.initial:
        sid((p, g.initial))
    initial = set(index.values())

    def emit(src_id, out_word, dst_node):
        # chain intermediate states for multi-symbol outputs
        cur = src_id
        if not out_word:
            trans.setdefault((cur, EPSILON), set()).add(sid(dst_node))
            return
        for i, osym in enumerate(out_word):
            last = i == len(out_word) - 1
            nxt = sid(dst_node) if last else sid(dst_node + (src_id, i, out_word))
            trans.setdefault((cur, osym), set()).add(nxt)
            cur = nxt

    while queue:
        p, q = node = queue.popleft()
        src = index[node]
        for p2 in a.transitions.get((p, EPSILON), ()):
            trans.setdefault((src, EPSILON), set()).add(sid((p2, q)))
        for sym, dsts in a_by_state.get(p, ()):
            for p2 in dsts:
                for q2, out in g.moves(q, sym):
                    emit(src, out, (p2, q2))
    final = {i for node, i in index.items()
             if len(node) == 2 and node[0] in a.final and node[1] in g.final}
    return make_nfa(max(len(index), 1), g.output_alphabet, trans, initial, final)


# -- small combinators (used to compile displayed store languages) -----------


def empty_language(alphabet) -> Nfa:
    return make_nfa(1, alphabet, {}, {0}, set())


def epsilon_language(alphabet) -> Nfa:
    return make_nfa(1, alphabet, {}, {0}, {0})


def symbol_choice(alphabet, symbols) -> Nfa:
    for s in symbols:
        if s not in set(alphabet):
            raise UnknownSymbolError(repr(s))
    return make_nfa(2, alphabet, {(0, s): {1} for s in symbols}, {0}, {1})


def literal(alphabet, word) -> Nfa:
    n = len(word)
    trans = {(i, sym): {i + 1} for i, sym in enumerate(word)}
    return make_nfa(n + 1, alphabet, trans, {0}, {n})


def _shift(transitions, off):
    return {(s + off, sym): {d + off for d in dsts} for (s, sym), dsts in transitions.items()}


def union(a: Nfa, b: Nfa) -> Nfa:
    _require_same_alphabet(a, b)
    off = a.state_count
    trans = dict(a.transitions)
    trans.update(_shift(b.transitions, off))
    return make_nfa(a.state_count + b.state_count, a.alphabet, trans,
                    set(a.initial) | {s + off for s in b.initial},
                    set(a.final) | {s + off for s in b.final})


def concat(a: Nfa, b: Nfa) -> Nfa:
    _require_same_alphabet(a, b)
    off = a.state_count
    trans = {k: set(v) for k, v in a.transitions.items()}
    for (s, sym), dsts in _shift(b.transitions, off).items():
        trans.setdefault((s, sym), set()).update(dsts)
    for f in a.final:
        trans.setdefault((f, EPSILON), set()).update(s + off for s in b.initial)
    return make_nfa(a.state_count + b.state_count, a.alphabet, trans,
                    a.initial, {s + off for s in b.final})


def star(a: Nfa) -> Nfa:
    # fresh initial+final state with epsilon loops
    off = 1
    trans = {k: set(v) for k, v in _shift(a.transitions, off).items()}
    trans.setdefault((0, EPSILON), set()).update(s + off for s in a.initial)
    for f in a.final:
        trans.setdefault((f + off, EPSILON), set()).add(0)
    return make_nfa(a.state_count + 1, a.alphabet, trans, {0}, {0})


def plus(a: Nfa) -> Nfa:
    return concat(a, star(a))


# -- textual format & DOT -----------------------------------------------------


def serialize_nfa(a: Nfa) -> str:
    lines = [f"nfa {a.state_count}"]
    lines.append("alphabet " + " ".join(str(s) for s in a.alphabet))
    lines.append("initial " + " ".join(str(s) for s in sorted(a.initial)))
    lines.append("final " + " ".join(str(s) for s in sorted(a.final)))
    for (src, sym), dsts in sorted(a.transitions.items(),
                                   key=lambda kv: (kv[0][0], "" if kv[0][1] is None else str(kv[0][1]))):
        tok = "@" if sym is EPSILON else str(sym)
        for d in sorted(dsts):
            lines.append(f"t {src} {tok} {d}")
    return "\n".join(lines) + "\n"


def parse_nfa(text: str) -> Nfa:
    state_count = None
    alphabet: list = []
    initial: set = set()
    final: set = set()
    trans: dict = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kw = parts[0]
        try:
            if kw == "nfa":
                state_count = int(parts[1])
            elif kw == "alphabet":
                alphabet = parts[1:]
            elif kw == "initial":
                initial = {int(p) for p in parts[1:]}
            elif kw == "final":
                final = {int(p) for p in parts[1:]}
            elif kw == "t":
                if len(parts) != 4:
                    raise NfaFormatError("transition needs 3 fields", ln)
                src, tok, dst = int(parts[1]), parts[2], int(parts[3])
                sym = EPSILON if tok == "@" else tok
                if sym is not EPSILON and sym not in alphabet:
                    raise NfaFormatError(f"undeclared symbol {tok!r}", ln)
                trans.setdefault((src, sym), set()).add(dst)
            else:
                raise NfaFormatError(f"unknown keyword {kw!r}", ln)
        except (ValueError, IndexError) as e:
            if isinstance(e, NfaFormatError):
                raise
            raise NfaFormatError(str(e), ln) from e
    if state_count is None:
        raise NfaFormatError("missing 'nfa <stateCount>' header")
    try:
        return make_nfa(state_count, alphabet, trans, initial, final)
    except ValueError as e:
        raise NfaFormatError(str(e)) from e


def to_dot(a: Nfa, name="nfa") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in range(a.state_count):
        shape = "doublecircle" if s in a.final else "circle"
        lines.append(f'  n{s} [shape={shape}];')
    for s in sorted(a.initial):
        lines.append(f'  start{s} [shape=point]; start{s} -> n{s};')
    for (src, sym), dsts in sorted(a.transitions.items(),
                                   key=lambda kv: (kv[0][0], str(kv[0][1]))):
        label = "ε" if sym is EPSILON else str(sym)
        for d in sorted(dsts):
            lines.append(f'  n{src} -> n{d} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
