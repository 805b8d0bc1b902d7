"""Verification layer on top of the store-language construction.

k-bounded filter machines and the derived existence decision, loaded/unloaded
machine transformations, pre*/post* over regular sets of store configurations,
the common-configurations decision, and right quotient by a regular language —
all as machine/automaton transformations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .history import store_nfa
from .machine import (
    CounterRule,
    END,
    HEAD,
    LAMBDA,
    Machine,
    StoreConfig,
    TapeRule,
    parse_store_config,
    store_alphabet,
)
from . import nfa as N
from .nfa import Gsm, Nfa

# Extra crossings per boundary added by the load phase (one rightward load
# sweep, one leftward rewind) and, for the unloaded machine, by the final scan
# (one leftward walk to the edge marker, one rightward verification sweep).
LOADED_OVERHEAD = 2
UNLOADED_OVERHEAD = 4


def _fresh(base: str, taken) -> str:
    taken = set(taken)
    tok = base
    while tok in taken:
        tok += "_"
    return tok


def _sep(m: Machine) -> str:
    """Separator for annotated tokens, guaranteed absent from existing tokens."""
    taken = set(m.states) | set(m.tape_alphabet) | set(m.input_alphabet)
    sep = "~"
    while any(sep in tok for tok in taken):
        sep += "~"
    return sep


def _dfa_step(d: Nfa, state: int, sym) -> int:
    (nxt,) = d.transitions[(state, sym)]
    return nxt


# -- k-bounded filter machines ---------------------------------------------------


def bound_filter(m: Machine, k: int, mode: str) -> Machine:
    """A machine accepting { w | some accepting computation of m on w is
    k-bounded in the given mode }, itself finite-crossing by construction
    (bound recorded in declared_bound)."""
    if mode == "turn":
        return _turn_filter(m, k)
    if mode == "visit":
        return _visit_filter(m, k)
    if mode == "crossing":
        return _crossing_filter(m, k)
    raise ValueError(f"unknown mode {mode!r}")


def _turn_filter(m: Machine, k: int) -> Machine:
    sep = _sep(m)

    def st(q, d, t):
        return f"{q}{sep}{d}{t}"

    dirs = ("N", "L", "R")
    rules = []
    for r in m.rules:
        move = r.move if isinstance(r, TapeRule) else "S"
        for d in dirs:
            for t in range(k + 1):
                if move == "S":
                    d2, t2 = d, t
                else:
                    t2 = t + (1 if d != "N" and move != d else 0)
                    if t2 > k:
                        continue
                    d2 = move
                if isinstance(r, TapeRule):
                    rules.append(TapeRule(st(r.state, d, t), r.inp, r.read,
                                          st(r.new_state, d2, t2), r.write, r.move))
                else:
                    rules.append(CounterRule(st(r.state, d, t), r.inp, r.index,
                                             r.zero, st(r.new_state, d2, t2), r.delta))
    states = {st(q, d, t) for q in m.states for d in dirs for t in range(k + 1)}
    finals = {st(q, d, t) for q in m.finals for d in dirs for t in range(k + 1)}
    return Machine(
        name=f"{m.name}-turn{k}",
        states=frozenset(states),
        input_alphabet=m.input_alphabet,
        tape_alphabet=m.tape_alphabet,
        blank=m.blank,
        counter_count=m.counter_count,
        rules=tuple(rules),
        initial=st(m.initial, "N", 0),
        finals=frozenset(finals),
        declared_bound=("crossing", k + 1),
    )


def _visit_filter(m: Machine, k: int) -> Machine:
    """Tape cells carry their visit count; the control carries the number of
    configurations at the current cell not yet recorded on the tape."""
    sep = _sep(m)
    blank = m.blank

    def tok(sym, c):
        return blank if c == 0 else f"{sym}{sep}{c}"

    def st(q, f):
        return f"{q}{sep}f{f}"

    qf = _fresh(f"accept{sep}", m.states)
    tape = [blank] + [f"{s}{sep}{c}" for s in sorted(m.tape_alphabet)
                      for c in range(1, k + 2)]
    rules = []
    for r in m.rules:
        for f in range(k + 2):
            for c in range(k + 1):
                v = c + f
                if v > k:
                    continue
                if isinstance(r, TapeRule):
                    if c == 0 and r.read != blank:
                        continue  # a count of zero means a virgin (blank) cell
                    read = tok(r.read, c)
                    if r.move == "S":
                        write, f2 = tok(r.write, min(v + 1, k + 1)), 0
                    else:
                        write, f2 = tok(r.write, v), 1
                    rules.append(TapeRule(st(r.state, f), r.inp, read,
                                          st(r.new_state, f2), write, r.move))
                else:
                    if f + 1 > k + 1:
                        continue
                    rules.append(CounterRule(st(r.state, f), r.inp, r.index,
                                             r.zero, st(r.new_state, f + 1), r.delta))
                    break  # counter rules do not depend on c
    # acceptance check: the final configuration's cell must also be within bound
    for q in m.finals:
        for f in range(k + 2):
            for c in range(k + 1):
                if c + f > k:
                    continue
                for s in sorted(m.tape_alphabet):
                    if c == 0 and s != blank:
                        continue
                    rules.append(TapeRule(st(q, f), LAMBDA, tok(s, c), qf,
                                          tok(s, c), "S"))
    states = {st(q, f) for q in m.states for f in range(k + 2)} | {qf}
    return Machine(
        name=f"{m.name}-visit{k}",
        states=frozenset(states),
        input_alphabet=m.input_alphabet,
        tape_alphabet=tuple(tape),
        blank=blank,
        counter_count=m.counter_count,
        rules=tuple(rules),
        initial=st(m.initial, 1),
        finals=frozenset({qf}),
        declared_bound=("crossing", max(1, 2 * k)),
    )


def _crossing_filter(m: Machine, k: int) -> Machine:
    """Boundary counters live in interleaved tape cells: every worktape move of
    m becomes two moves passing over (and incrementing) the counter cell."""
    sep = _sep(m)
    blank = m.blank

    def ctok(n):
        return blank if n == 0 else f"c{sep}{n}"

    def mid(q, d):
        return f"{q}{sep}mid{d}"

    rules = []
    for r in m.rules:
        if isinstance(r, CounterRule):
            rules.append(r)
            continue
        if r.move == "S":
            rules.append(r)
            continue
        rules.append(TapeRule(r.state, r.inp, r.read,
                              mid(r.new_state, r.move), r.write, r.move))
    for q in sorted(m.states):
        for d in ("L", "R"):
            for n in range(k):
                rules.append(TapeRule(mid(q, d), LAMBDA, ctok(n), q,
                                      ctok(n + 1), d))
    states = set(m.states) | {mid(q, d) for q in m.states for d in ("L", "R")}
    tape = list(m.tape_alphabet) + [f"c{sep}{n}" for n in range(1, k + 1)]
    return Machine(
        name=f"{m.name}-crossing{k}",
        states=frozenset(states),
        input_alphabet=m.input_alphabet,
        tape_alphabet=tuple(tape),
        blank=blank,
        counter_count=m.counter_count,
        rules=tuple(rules),
        initial=m.initial,
        finals=m.finals,
        declared_bound=("crossing", 2 * k + 4),
    )


def exists_k_bounded(m: Machine, k: int, mode: str) -> bool:
    """Is there an input with a k-bounded accepting computation?"""
    if mode == "crossing":
        if k == 0:
            return _exists_zero_crossing(m)
        return not N.is_empty(store_nfa(m, k))
    if mode == "visit" and k == 0:
        return False  # the initial configuration already visits its cell
    filt = trim_machine(bound_filter(m, k, mode))
    return not N.is_empty(store_nfa(filt, filt.declared_bound[1]))


def _exists_zero_crossing(m: Machine, counter_cap: int = 64) -> bool:
    """Zero-crossing acceptance: the head never leaves the first cell, so the
    reachable space is finite (counters capped; exact for counter-free m)."""
    start = (m.initial, m.blank, False, (0,) * m.counter_count)
    seen = {start}
    stack = [start]
    while stack:
        state, sym, endf, counters = stack.pop()
        if endf and state in m.finals:
            return True
        for r in m.rules:
            if r.state != state:
                continue
            if r.inp is END:
                if endf:
                    continue
                endf2 = True
            else:
                if r.inp is not LAMBDA and endf:
                    continue
                endf2 = endf
            if isinstance(r, TapeRule):
                if r.read != sym or r.move != "S":
                    continue
                nxt = (r.new_state, r.write, endf2, counters)
            else:
                from .machine import apply_counter_rule

                counters2 = apply_counter_rule(counters, r)
                if counters2 is None or any(z > counter_cap for z in counters2):
                    continue
                nxt = (r.new_state, sym, endf2, counters2)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


# -- regular sets of store configurations -----------------------------------------


def config_set(m: Machine, configs) -> Nfa:
    """An Nfa over m's store alphabet accepting exactly the given StoreConfigs
    (or textual forms)."""
    alphabet = store_alphabet(m)
    out = N.empty_language(alphabet)
    for c in configs:
        if isinstance(c, str):
            c = parse_store_config(c, m)
        out = N.union(out, N.literal(alphabet, c.to_word()))
    return out


def _widen(a: Nfa, alphabet) -> Nfa:
    missing = set(sym for (_, sym) in a.transitions if sym is not None) - set(alphabet)
    if missing:
        raise N.AlphabetMismatchError(f"symbols {missing!r} not in target alphabet")
    return Nfa(a.state_count, tuple(alphabet), a.transitions, a.initial, a.final)


# -- loaded / unloaded machines ---------------------------------------------------


def _require_counter_free(m: Machine):
    if m.counter_count:
        raise ValueError("construction requires a counter-free machine")


def trim_machine(m: Machine) -> Machine:
    """Drops states (and their rules) that cannot lie on an initial-to-final
    path of the state graph.  The graph ignores tape and input guards, so this
    over-approximates reachability and never changes the language; on machines
    threading a DFA through their control (loaded/unloaded constructions) it
    removes the dead product states that would otherwise bloat the store
    construction."""
    fwd_edges: dict = {}
    bwd_edges: dict = {}
    for r in m.rules:
        fwd_edges.setdefault(r.state, set()).add(r.new_state)
        bwd_edges.setdefault(r.new_state, set()).add(r.state)

    def reach(start, edges):
        seen = set(start)
        stack = list(start)
        while stack:
            q = stack.pop()
            for q2 in edges.get(q, ()):
                if q2 not in seen:
                    seen.add(q2)
                    stack.append(q2)
        return seen

    rules = m.rules
    while True:
        fwd_edges.clear()
        bwd_edges.clear()
        for r in rules:
            fwd_edges.setdefault(r.state, set()).add(r.new_state)
            bwd_edges.setdefault(r.new_state, set()).add(r.state)
        useful = reach({m.initial}, fwd_edges) & reach(m.finals, bwd_edges)
        useful.add(m.initial)
        # a tape rule can only fire on symbols some live rule can write
        writable = {m.blank}
        while True:
            grown = {r.write for r in rules
                     if isinstance(r, TapeRule) and r.state in useful
                     and r.new_state in useful and r.read in writable}
            if grown <= writable:
                break
            writable |= grown
        kept = tuple(r for r in rules
                     if r.state in useful and r.new_state in useful
                     and (not isinstance(r, TapeRule) or r.read in writable))
        if len(kept) == len(rules):
            break
        rules = kept
    return Machine(
        name=m.name,
        states=frozenset(useful),
        input_alphabet=m.input_alphabet,
        tape_alphabet=m.tape_alphabet,
        blank=m.blank,
        counter_count=m.counter_count,
        rules=rules,
        initial=m.initial,
        finals=frozenset(set(m.finals) & useful),
        declared_bound=m.declared_bound,
    )


def loaded_machine(m: Machine, c: Nfa) -> Machine:
    """Machine over input c'·delim·x·delim: reads a store-config word c'
    (rejecting unless c' is in L(c)), writes the encoded tape, jumps to the
    encoded head cell and state, then simulates m on x.  Acceptance at the
    second delimiter is unconditional, so the store language captures every
    configuration reachable from L(c)."""
    _require_counter_free(m)
    alphabet = store_alphabet(m)
    if tuple(c.alphabet) != alphabet:
        raise N.AlphabetMismatchError("config set must be over m's store alphabet")
    sep = _sep(m)
    taken = set(m.states) | set(m.tape_alphabet) | set(m.input_alphabet) | {HEAD}
    delim = _fresh("$cfg", taken)
    d = N.determinize(c)

    def marked(sym):
        return f"{sym}{sep}h"

    def ld_x(q, i, seen):
        return f"%ldx{sep}{q}{sep}{i}{sep}{seen}"

    def ld_y0(q, i):
        return f"%ldy0{sep}{q}{sep}{i}"

    def ld_y(q, i):
        return f"%ldy{sep}{q}{sep}{i}"

    def rw(q):
        return f"%rw{sep}{q}"

    def go(q):
        return f"%go{sep}{q}"

    start, acc0, accf = f"%ld0{sep}", f"%acc0{sep}", f"%accF{sep}"
    blank = m.blank
    tape_syms = sorted(m.tape_alphabet)
    all_tape = tape_syms + [marked(s) for s in tape_syms]
    d0 = next(iter(d.initial))
    dfa_states = range(d.state_count)
    rules = []
    # load phase ---------------------------------------------------------------
    for q in sorted(m.states):
        rules.append(TapeRule(start, q, blank, ld_x(q, _dfa_step(d, d0, q), 0),
                              blank, "S"))
    for q in sorted(m.states):
        for i in dfa_states:
            for a in tape_syms:
                rules.append(TapeRule(ld_x(q, i, 0), a, blank,
                                      ld_x(q, _dfa_step(d, i, a), 1), a, "R"))
                rules.append(TapeRule(ld_x(q, i, 1), a, blank,
                                      ld_x(q, _dfa_step(d, i, a), 1), a, "R"))
            rules.append(TapeRule(ld_x(q, i, 1), HEAD, blank,
                                  ld_y0(q, _dfa_step(d, i, HEAD)), blank, "S"))
            for a in tape_syms:
                rules.append(TapeRule(ld_y0(q, i), a, blank,
                                      ld_y(q, _dfa_step(d, i, a)), marked(a), "R"))
                rules.append(TapeRule(ld_y(q, i), a, blank,
                                      ld_y(q, _dfa_step(d, i, a)), a, "R"))
            if i in d.final:
                rules.append(TapeRule(ld_y0(q, i), delim, blank, go(q), blank, "L"))
                rules.append(TapeRule(ld_y(q, i), delim, blank, rw(q), blank, "L"))
    for q in sorted(m.states):
        for a in tape_syms:
            rules.append(TapeRule(rw(q), LAMBDA, a, rw(q), a, "L"))
            rules.append(TapeRule(rw(q), LAMBDA, marked(a), go(q), a, "L"))
            rules.append(TapeRule(go(q), LAMBDA, a, q, a, "S"))
    # simulation phase: m's rules with the virtual end of input at the delimiter
    for r in m.rules:
        inp = delim if r.inp is END else r.inp
        rules.append(TapeRule(r.state, inp, r.read, r.new_state, r.write, r.move))
    # unconditional acceptance at the second delimiter
    for q in sorted(m.states):
        for a in all_tape:
            rules.append(TapeRule(q, delim, a, acc0, a, "S"))
            rules.append(TapeRule(q, END, a, accf, a, "S"))
    for a in all_tape:
        rules.append(TapeRule(acc0, END, a, accf, a, "S"))
    states = (set(m.states) | {start, acc0, accf}
              | {ld_x(q, i, s) for q in m.states for i in dfa_states for s in (0, 1)}
              | {ld_y0(q, i) for q in m.states for i in dfa_states}
              | {ld_y(q, i) for q in m.states for i in dfa_states}
              | {rw(q) for q in m.states} | {go(q) for q in m.states})
    inputs = tuple(dict.fromkeys(list(alphabet) + list(m.input_alphabet) + [delim]))
    bound = None
    if m.declared_bound and m.declared_bound[0] == "crossing":
        bound = ("crossing", m.declared_bound[1] + LOADED_OVERHEAD)
    return Machine(
        name=f"{m.name}-loaded",
        states=frozenset(states),
        input_alphabet=inputs,
        tape_alphabet=tuple(all_tape),
        blank=blank,
        counter_count=0,
        rules=tuple(rules),
        initial=start,
        finals=frozenset({accf}),
        declared_bound=bound,
    )


def post_star(m: Machine, r: int, c: Nfa) -> Nfa:
    """Store configurations reachable from L(c) under r-crossing semantics."""
    loaded = trim_machine(loaded_machine(m, c))
    raw = store_nfa(loaded, r + LOADED_OVERHEAD)
    return N.gsm_image(raw, _sim_projection_gsm(m, loaded))


def _sim_projection_gsm(m: Machine, big: Machine, state_map=None) -> Gsm:
    """Keeps only store words of simulation-phase configurations (state in m's
    Q, possibly tagged for edge tracking) and strips cell annotations, emitting
    words over m's store alphabet.  Edge-tagged blanks at the extremes are
    dropped unless they carry the head, mirroring m's tape normalization.
    state_map overrides the default big-state-token -> m-state mapping."""
    sep = _sep(m)
    blank = m.blank
    trans: dict = {}

    def add(src, sym, dst, out):
        trans.setdefault((src, sym), []).append((dst, tuple(out)))

    big_alpha = store_alphabet(big)
    if state_map is not None:
        state_tokens = dict(state_map)
    else:
        state_tokens = {}
        for q in m.states:
            state_tokens[q] = q
            state_tokens[f"{q}{sep}pL"] = q
            state_tokens[f"{q}{sep}pR"] = q
    for tok in big_alpha:
        q = state_tokens.get(tok)
        if q is not None and tok in big.states:
            add(0, tok, 1, (q,))
    for s in sorted(m.tape_alphabet):
        add(1, s, 1, (s,))
        ltag, rtag = f"{s}{sep}L", f"{s}{sep}R"
        if s == blank:
            add(1, ltag, 2, ())  # leading tagged blank: dropped unless head
            add(1, rtag, 3, ())  # trailing tagged blank: dropped unless head
        else:
            add(1, ltag, 1, (s,))
            add(1, rtag, 1, (s,))
    add(1, HEAD, 1, (HEAD,))
    add(2, HEAD, 1, (blank, HEAD))
    for s in sorted(m.tape_alphabet):
        add(2, s, 1, (s,))
        rtag = f"{s}{sep}R"
        if s == blank:
            add(2, rtag, 3, ())
        else:
            add(2, rtag, 1, (s,))
    add(3, HEAD, 4, (blank, HEAD))
    return Gsm(5, trans, 0, frozenset({1, 3, 4}), store_alphabet(m))


def unloaded_machine(m: Machine, c: Nfa) -> Machine:
    """Machine over input c'·delim·x·delim: loads an arbitrary store-config
    word (no membership check), simulates m on x while maintaining markers on
    the leftmost/rightmost visited cells, and at the second delimiter scans the
    worktape left-to-right checking the current store configuration against
    L(c) (tolerating trailing blanks)."""
    _require_counter_free(m)
    alphabet = store_alphabet(m)
    if tuple(c.alphabet) != alphabet:
        raise N.AlphabetMismatchError("config set must be over m's store alphabet")
    sep = _sep(m)
    taken = set(m.states) | set(m.tape_alphabet) | set(m.input_alphabet) | {HEAD}
    delim = _fresh("$cfg", taken)
    blank = m.blank
    pad = N.concat(c, N.star(N.literal(alphabet, (blank,))))
    d = N.determinize(pad)
    d0 = next(iter(d.initial))
    dfa_states = range(d.state_count)

    def tag(sym, t):
        return sym if t == "" else f"{sym}{sep}{t}"

    TAGS = ("", "L", "R", "h", "Lh", "Rh")
    tape_syms = sorted(m.tape_alphabet)
    all_tape = [tag(s, t) for s in tape_syms for t in TAGS]

    def sim(q, p):
        return q if p == "" else f"{q}{sep}p{p}"

    def ld_x(q, seen):
        return f"%ldx{sep}{q}{sep}{seen}"

    def ld_y0(q):
        return f"%ldy0{sep}{q}"

    def ld_y(q):
        return f"%ldy{sep}{q}"

    def rw(q):
        return f"%rw{sep}{q}"

    def go(q):
        return f"%go{sep}{q}"

    # e flags that m already consumed its virtual end of input (the second
    # delimiter) via an END-guarded rule before the scan started
    def seek(q, e):
        return f"%seek{sep}{q}{sep}{e}"

    def feed0(i, e):
        return f"%feed0{sep}{i}{sep}{e}"

    def feed(i, e):
        return f"%feed{sep}{i}{sep}{e}"

    start, fin, accf = f"%ul0{sep}", f"%fin{sep}", f"%accF{sep}"
    rules = []
    # load phase (no membership check; first cell gets the left-edge tag) ------
    for q in sorted(m.states):
        rules.append(TapeRule(start, q, blank, ld_x(q, 0), blank, "S"))
        for a in tape_syms:
            rules.append(TapeRule(ld_x(q, 0), a, blank, ld_x(q, 1), tag(a, "L"), "R"))
            rules.append(TapeRule(ld_x(q, 1), a, blank, ld_x(q, 1), a, "R"))
        rules.append(TapeRule(ld_x(q, 1), HEAD, blank, ld_y0(q), blank, "S"))
        for a in tape_syms:
            rules.append(TapeRule(ld_y0(q), a, blank, ld_y(q), tag(a, "h"), "R"))
            rules.append(TapeRule(ld_y(q), a, blank, ld_y(q), a, "R"))
        rules.append(TapeRule(ld_y0(q), delim, blank, go(q), tag(blank, "R"), "L"))
        rules.append(TapeRule(ld_y(q), delim, blank, rw(q), tag(blank, "R"), "L"))
        for a in tape_syms:
            rules.append(TapeRule(rw(q), LAMBDA, a, rw(q), a, "L"))
            rules.append(TapeRule(rw(q), LAMBDA, tag(a, "h"), go(q), a, "L"))
        for t in ("", "L", "R"):
            for a in tape_syms:
                rules.append(TapeRule(go(q), LAMBDA, tag(a, t), sim(q, ""),
                                      tag(a, t), "S"))
    # simulation phase: m's rules lifted over edge tags --------------------------
    for r in m.rules:
        inp = delim if r.inp is END else r.inp
        for t in ("", "L", "R"):
            src, dst, p2 = tag(r.read, t), tag(r.write, t), ""
            if (r.move, t) in (("L", "L"), ("R", "R")):
                dst, p2 = r.write, t  # the edge marker travels with the head
            rules.append(TapeRule(sim(r.state, ""), inp, src,
                                  sim(r.new_state, p2), dst, r.move))
        for p in ("L", "R"):
            if r.read != blank:
                continue  # a pending edge cell is always a virgin blank
            if r.move == ("L" if p == "L" else "R"):
                dst, p2 = r.write, p  # moving further out: marker stays pending
            else:
                dst, p2 = tag(r.write, p), ""
            rules.append(TapeRule(sim(r.state, p), inp, blank,
                                  sim(r.new_state, p2), dst, r.move))
    # scan phase: mark the head cell, walk to the left edge, feed the DFA.
    # Triggered by the second delimiter, or by END when m's own END-guarded
    # rule already consumed that delimiter.
    for q in sorted(m.states):
        for inp, e in ((delim, 0), (END, 1)):
            for t, ht in (("", "h"), ("L", "Lh"), ("R", "Rh")):
                for a in tape_syms:
                    rules.append(TapeRule(sim(q, ""), inp, tag(a, t), seek(q, e),
                                          tag(a, ht), "S"))
            for p, ht in (("L", "Lh"), ("R", "Rh")):
                rules.append(TapeRule(sim(q, p), inp, blank, seek(q, e),
                                      tag(blank, ht), "S"))
        i1 = _dfa_step(d, d0, q)
        for e in (0, 1):
            for a in tape_syms:
                for t in ("", "R", "h", "Rh"):
                    rules.append(TapeRule(seek(q, e), LAMBDA, tag(a, t),
                                          seek(q, e), tag(a, t), "L"))
                for t in ("L", "Lh"):
                    rules.append(TapeRule(seek(q, e), LAMBDA, tag(a, t),
                                          feed0(i1, e), tag(a, t), "S"))
    for i in dfa_states:
        for e in (0, 1):
            for a in tape_syms:
                for t in TAGS:
                    symtok = tag(a, t)
                    if a == blank and "h" not in t and t in ("", "L"):
                        # leading blanks that do not carry the head are skipped
                        rules.append(TapeRule(feed0(i, e), LAMBDA, symtok,
                                              feed0(i, e), symtok, "R"))
                    j = _dfa_step(d, i, a)
                    if "h" in t:
                        j = _dfa_step(d, j, HEAD)
                    if "R" in t:
                        if j in d.final:
                            dst = accf if e else fin
                            rules.append(TapeRule(feed0(i, e), LAMBDA, symtok,
                                                  dst, symtok, "S"))
                            rules.append(TapeRule(feed(i, e), LAMBDA, symtok,
                                                  dst, symtok, "S"))
                    else:
                        rules.append(TapeRule(feed0(i, e), LAMBDA, symtok,
                                              feed(j, e), symtok, "R"))
                        rules.append(TapeRule(feed(i, e), LAMBDA, symtok,
                                              feed(j, e), symtok, "R"))
    for a in all_tape:
        rules.append(TapeRule(fin, END, a, accf, a, "S"))
    states = ({start, fin, accf}
              | {sim(q, p) for q in m.states for p in ("", "L", "R")}
              | {ld_x(q, s) for q in m.states for s in (0, 1)}
              | {ld_y0(q) for q in m.states} | {ld_y(q) for q in m.states}
              | {rw(q) for q in m.states} | {go(q) for q in m.states}
              | {seek(q, e) for q in m.states for e in (0, 1)}
              | {feed0(i, e) for i in dfa_states for e in (0, 1)}
              | {feed(i, e) for i in dfa_states for e in (0, 1)})
    inputs = tuple(dict.fromkeys(list(alphabet) + list(m.input_alphabet) + [delim]))
    bound = None
    if m.declared_bound and m.declared_bound[0] == "crossing":
        bound = ("crossing", m.declared_bound[1] + UNLOADED_OVERHEAD)
    return Machine(
        name=f"{m.name}-unloaded",
        states=frozenset(states),
        input_alphabet=inputs,
        tape_alphabet=tuple(all_tape),
        blank=blank,
        counter_count=0,
        rules=tuple(rules),
        initial=start,
        finals=frozenset({accf}),
        declared_bound=bound,
    )


def _reverse_machine(m: Machine) -> Machine:
    """Machine whose step relation on store configurations is the reverse of
    m's.  A stationary rule reverses in place; a moving rule becomes a
    two-step gadget (walk back over the target cell, then restore the source
    cell), which crosses each boundary exactly as often as the forward step.
    Time reversal replays end-of-input steps first, so the control carries a
    phase tag: "a" (forward time after END) may step to "b" (before END)
    exactly once, and real input letters are only consumed in phase "b".
    Untagged states are entry points that pick a phase without moving."""
    _require_counter_free(m)
    sep = _sep(m)

    def ph(q, p):
        return f"{q}{sep}rev{p}"

    tape = sorted(m.tape_alphabet)
    states = set(m.states) | {ph(q, p) for q in m.states for p in ("a", "b")}
    rules = []
    for q in sorted(m.states):
        for t in tape:
            for p in ("a", "b"):
                rules.append(TapeRule(q, LAMBDA, t, ph(q, p), t, "S"))
    for idx, r in enumerate(m.rules):
        if r.inp is END:
            steps = [("a", "b", LAMBDA)]
        elif r.inp is LAMBDA:
            steps = [("a", "a", LAMBDA), ("b", "b", LAMBDA)]
        else:
            steps = [("b", "b", r.inp)]
        for p_from, p_to, inp in steps:
            src, dst = ph(r.new_state, p_from), ph(r.state, p_to)
            if r.move == "S":
                rules.append(TapeRule(src, inp, r.write, dst, r.read, "S"))
                continue
            g = f"%g{sep}{idx}{sep}{p_from}"
            states.add(g)
            back = "L" if r.move == "R" else "R"
            for t in tape:
                rules.append(TapeRule(src, inp, t, g, t, back))
            rules.append(TapeRule(g, LAMBDA, r.write, dst, r.read, "S"))
    return Machine(
        name=f"{m.name}-reversed",
        states=frozenset(states),
        input_alphabet=m.input_alphabet,
        tape_alphabet=m.tape_alphabet,
        blank=m.blank,
        counter_count=0,
        rules=tuple(rules),
        initial=m.initial,
        # acceptance of the reverse machine itself is never used; the loaded
        # wrapper accepts unconditionally
        finals=frozenset({ph(m.initial, "b")}),
        declared_bound=m.declared_bound,
    )


def pre_star(m: Machine, r: int, c: Nfa) -> Nfa:
    """Store configurations from which some input suffix drives m into L(c),
    under r-crossing semantics.  Computed as post* of the reversed machine:
    the edge normalization keeps configurations canonical, so gadget reversal
    inverts the step relation exactly and reverse runs from a loaded seed end
    precisely in the sought predecessors."""
    rev = _reverse_machine(m)
    sep = _sep(m)
    c2 = _widen(c, store_alphabet(rev))
    loaded = trim_machine(loaded_machine(rev, c2))
    raw = store_nfa(loaded, r + LOADED_OVERHEAD)
    state_map = {q: q for q in m.states}
    for q in m.states:
        for p in ("a", "b"):
            state_map[f"{q}{sep}rev{p}"] = q
    return N.gsm_image(raw, _sim_projection_gsm(m, loaded, state_map))


# -- common configurations ---------------------------------------------------------


@dataclass(frozen=True)
class CommonConfigsResult:
    answer: bool
    witness: Optional[tuple]  # a shortest shared non-initial store word


def common_configs(m1: Machine, r1: int, m2: Machine, r2: int) -> CommonConfigsResult:
    """Do the two machines share any non-initial store configuration?"""
    a1, a2 = store_alphabet(m1), store_alphabet(m2)
    union_alpha = tuple(sorted(set(a1) | set(a2)))
    n1 = _widen(store_nfa(m1, r1), union_alpha)
    n2 = _widen(store_nfa(m2, r2), union_alpha)
    initials = N.union(
        N.literal(union_alpha, (m1.initial, m1.blank, HEAD)),
        N.literal(union_alpha, (m2.initial, m2.blank, HEAD)),
    )
    shared = N.difference(N.intersect(n1, n2), initials)
    witness = N.shortest_word(shared)
    return CommonConfigsResult(witness is not None, witness)


# -- right quotient -----------------------------------------------------------------


def right_quotient_machine(m: Machine, rgx: Nfa) -> Machine:
    """A machine with L(result) = L(m)·L(rgx)^{-1}: it runs m normally, then
    nondeterministically switches to a ghost mode where m's remaining input
    letters are guessed while rgx advances on them in the control."""
    if not set(rgx.alphabet) <= set(m.input_alphabet):
        raise N.AlphabetMismatchError("quotient language must be over m's input alphabet")
    sep = _sep(m)
    d = N.determinize(rgx)
    d0 = next(iter(d.initial))

    def ghost(q, i):
        return f"{q}{sep}g{i}"

    rules = list(m.rules)
    for q in sorted(m.states):
        for a in sorted(m.tape_alphabet):
            rules.append(TapeRule(q, LAMBDA, a, ghost(q, d0), a, "S"))
    for r in m.rules:
        for i in range(d.state_count):
            if r.inp is LAMBDA or r.inp is END:
                inp, i2 = r.inp, i
            else:
                if r.inp not in d.alphabet:
                    continue  # a letter the quotient language never uses
                inp, i2 = LAMBDA, _dfa_step(d, i, r.inp)
            if isinstance(r, TapeRule):
                rules.append(TapeRule(ghost(r.state, i), inp, r.read,
                                      ghost(r.new_state, i2), r.write, r.move))
            else:
                rules.append(CounterRule(ghost(r.state, i), inp, r.index,
                                         r.zero, ghost(r.new_state, i2), r.delta))
    states = set(m.states) | {ghost(q, i) for q in m.states
                              for i in range(d.state_count)}
    finals = {ghost(q, i) for q in m.finals for i in d.final}
    return Machine(
        name=f"{m.name}-quotient",
        states=frozenset(states),
        input_alphabet=m.input_alphabet,
        tape_alphabet=m.tape_alphabet,
        blank=m.blank,
        counter_count=m.counter_count,
        rules=tuple(rules),
        initial=m.initial,
        finals=frozenset(finals),
        declared_bound=m.declared_bound,
    )
