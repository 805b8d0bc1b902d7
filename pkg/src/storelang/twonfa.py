"""Two-way NFAs over lazily enumerable alphabets, plus conversion to one-way NFAs.

A TwoNfa reads ▷w◁ and accepts by moving right off the right endmarker in a
final state.  The conversion to a one-way NFA uses crossing sequences: the
one-way states are the sequences of (state, direction) crossing events at a
cell boundary, explored lazily.  Candidate input symbols for each reachable
sequence are drawn from the symbol source under a constraint derived from the
sequence, so astronomically large alphabets are never materialized.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .nfa import Nfa, make_nfa

L, S, R = "L", "S", "R"


class _Endmarker:
    __slots__ = ("label",)

    def __init__(self, label):
        self.label = label

    def __repr__(self):
        return self.label


LEFT_END = _Endmarker("|>")
RIGHT_END = _Endmarker("<|")


class InfiniteAlphabetError(ValueError):
    pass


@dataclass(frozen=True)
class CellConstraint:
    """Local constraint handed to a symbol source: the crossing sequence at the
    left boundary of the candidate cell, plus the machine asking."""

    sequence: tuple
    two_nfa: "TwoNfa"

    @property
    def live_states(self):
        return tuple(st for st, d in self.sequence if d == R)


class SymbolSource:
    finite = True

    def members(self) -> Iterable:
        raise NotImplementedError

    def enumerate(self, constraint: Optional[CellConstraint] = None) -> Iterable:
        raise NotImplementedError

    def __contains__(self, sym) -> bool:
        raise NotImplementedError


class ListSymbolSource(SymbolSource):
    def __init__(self, symbols):
        self._symbols = tuple(symbols)
        self._set = set(self._symbols)

    def members(self):
        return self._symbols

    def __contains__(self, sym):
        return sym in self._set

    def enumerate(self, constraint=None):
        if constraint is None:
            yield from self._symbols
            return
        live = constraint.live_states
        m = constraint.two_nfa
        for sym in self._symbols:
            if any(m.moves(st, sym) for st in live):
                yield sym


class TwoNfa:
    """Base class; subclasses provide moves/entrants/is_final and a symbol source."""

    symbol_source: SymbolSource
    initial_state = None

    def moves(self, state, sym):
        """Ordered iterable of (state, direction) successors."""
        raise NotImplementedError

    def entrants(self, sym):
        """States that may enter a cell holding `sym` by crossing onto it from
        the right.  Over-approximation is safe (spurious guesses die locally)."""
        raise NotImplementedError

    def is_final(self, state) -> bool:
        raise NotImplementedError


class ExplicitTwoNfa(TwoNfa):
    def __init__(self, state_count, symbols, transitions, initial, final):
        """transitions: dict (state, symbol-or-endmarker) -> iterable of (state, dir)."""
        self.state_count = state_count
        self.symbol_source = ListSymbolSource(symbols)
        self._transitions = {k: tuple(v) for k, v in transitions.items()}
        self.initial_state = initial
        self._final = frozenset(final)
        for (q, sym), moves in self._transitions.items():
            for q2, d in moves:
                if sym is LEFT_END and d == L:
                    raise ValueError("left move from left endmarker")
                if sym is RIGHT_END and d == R and q2 not in self._final:
                    raise ValueError("right move from right endmarker must accept")
        # entrants: states entered by some left move may cross onto any cell
        # from the right, including the left endmarker (bounce-back runs)
        ent = {q2 for moves in self._transitions.values()
               for q2, d in moves if d == L}
        self._entrants = tuple(sorted(ent, key=repr))

    def moves(self, state, sym):
        return self._transitions.get((state, sym), ())

    def entrants(self, sym):
        if sym is RIGHT_END:
            return ()  # no cell lies right of the right endmarker
        return self._entrants

    def is_final(self, state):
        return state in self._final


def two_nfa_membership(m: TwoNfa, word) -> bool:
    """Reachability over (state, head position) pairs on ▷w◁."""
    tape = [LEFT_END, *word, RIGHT_END]
    n = len(tape)
    start = (m.initial_state, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        q, pos = queue.popleft()
        for q2, d in m.moves(q, tape[pos]):
            if d == R and pos == n - 1:
                if m.is_final(q2):
                    return True
                continue
            if d == L and pos == 0:
                continue
            nxt = (q2, pos + {L: -1, S: 0, R: 1}[d])
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


# -- crossing-sequence conversion ---------------------------------------------
#
# A crossing sequence is a tuple of (state, dir) events at one boundary, in
# temporal order.  The first event always has dir R; directions alternate
# (planarity); duplicate events never occur on loop-free runs, so they are
# pruned.

_IN_LEFT = 0  # the run is somewhere left of the cell
_IN_RIGHT = 1  # the run is somewhere right of the cell


def _stay_closure(m, sym, state):
    seen = {state}
    stack = [state]
    while stack:
        q = stack.pop()
        for q2, d in m.moves(q, sym):
            if d == S and q2 not in seen:
                seen.add(q2)
                stack.append(q2)
    return seen


def _cell_outcomes(m, x_seq, sym, *, first_cell=False, last_cell=False):
    """Simulate one cell: consume the left-boundary sequence x_seq, generate
    right-boundary sequences.  For the ◁ cell (last_cell) instead report
    whether an accepting fall-off consumes x_seq exactly.

    A machine may provide event_ok(prefix, event): a sound local filter on
    appending a crossing event to a boundary sequence.  It prunes guessed
    sequences that no global run could realize before they enter the search.
    """
    results = set()
    accepted = [False]
    event_ok = getattr(m, "event_ok", None)

    def walk(xi, where, y):
        if where == _IN_RIGHT:
            if xi == len(x_seq) and not last_cell:
                results.add(y)
            # guessed re-entries from the right side
            for q in m.entrants(sym):
                ev = (q, L)
                if ev not in y and (event_ok is None or event_ok(y, ev)):
                    enter(xi, q, y + (ev,))
            return
        # where == _IN_LEFT: next event must come from x_seq, entering rightward
        if xi < len(x_seq):
            q, d = x_seq[xi]
            if d == R:
                enter(xi + 1, q, y)

    def enter(xi, q, y):
        for q2 in _stay_closure(m, sym, q):
            for q3, d in m.moves(q2, sym):
                if d == S:
                    continue
                if d == L:
                    if first_cell:
                        continue
                    if xi < len(x_seq) and x_seq[xi] == (q3, L):
                        walk(xi + 1, _IN_LEFT, y)
                elif d == R:
                    if last_cell:
                        if m.is_final(q3) and xi == len(x_seq) and not y:
                            accepted[0] = True
                        continue
                    ev = (q3, R)
                    if ev not in y and (event_ok is None or event_ok(y, ev)):
                        walk(xi, _IN_RIGHT, y + (ev,))

    if first_cell:
        enter(0, m.initial_state, ())
    else:
        walk(0, _IN_LEFT, ())
    return accepted[0] if last_cell else results


def initial_sequences(m: TwoNfa):
    return _cell_outcomes(m, (), LEFT_END, first_cell=True)


def is_final_sequence(m: TwoNfa, x_seq) -> bool:
    return _cell_outcomes(m, x_seq, RIGHT_END, last_cell=True)


def two_nfa_to_nfa(m: TwoNfa) -> Nfa:
    if not m.symbol_source.finite:
        raise InfiniteAlphabetError("symbol source must declare itself finite")

    initials = sorted(initial_sequences(m), key=repr)
    index = {}
    queue = deque()

    def sid(seq):
        if seq not in index:
            index[seq] = len(index)
            queue.append(seq)
        return index[seq]

    for seq in initials:
        sid(seq)
    init_ids = {index[s] for s in initials}
    trans = {}
    alphabet = []
    sym_seen = set()
    final_cache = {}
    while queue:
        x_seq = queue.popleft()
        src = index[x_seq]
        constraint = CellConstraint(x_seq, m)
        for sym in m.symbol_source.enumerate(constraint):
            outcomes = _cell_outcomes(m, x_seq, sym)
            if not outcomes:
                continue
            if sym not in sym_seen:
                sym_seen.add(sym)
                alphabet.append(sym)
            dsts = trans.setdefault((src, sym), set())
            for y_seq in sorted(outcomes, key=repr):
                dsts.add(sid(y_seq))
    final = set()
    for seq, i in index.items():
        if seq not in final_cache:
            final_cache[seq] = is_final_sequence(m, seq)
        if final_cache[seq]:
            final.add(i)
    return make_nfa(max(len(index), 1), alphabet, trans, init_ids, final)
