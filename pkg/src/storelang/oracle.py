"""Brute-force ground truth.

Exhaustively enumerates accepting computations to realize the store language
by direct search, answers bounded store-configuration reachability queries,
and enumerates right-quotient witnesses.  Everything here is independent of
the automata-based constructions so it can serve as their cross-check.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

from .machine import (
    Computation,
    END,
    HEAD,
    LAMBDA,
    Machine,
    StoreConfig,
    TapeRule,
    apply_counter_rule,
    apply_tape_rule,
    metrics,
    simulate,
    store_configs_of,
)
from .nfa import Nfa


@dataclass(frozen=True)
class OracleEntry:
    min_turns: int
    min_visits: int
    min_crossings: int
    witness: Computation  # a replayable computation realizing min_crossings


@dataclass(frozen=True)
class OracleReport:
    input_bound: int
    step_bound: int
    entries: dict  # StoreConfig -> OracleEntry
    exhausted: bool


def all_inputs(alphabet, max_len):
    """Every word over `alphabet` of length <= max_len, shortest first."""
    for n in range(max_len + 1):
        yield from product(alphabet, repeat=n)


def enumerate_store(m: Machine, input_bound: int, step_bound: int,
                    max_tape: int = 64) -> OracleReport:
    """Every store configuration of every accepting computation on inputs of
    length <= input_bound, with per-config minima of each metric over all
    witnessing computations."""
    if input_bound < 1 or step_bound < 1:
        raise ValueError("bounds must be at least 1")
    entries: dict = {}
    exhausted = False
    for w in all_inputs(m.input_alphabet, input_bound):
        result = simulate(m, w, max_steps=step_bound, max_tape=max_tape)
        exhausted = exhausted or result.exhausted
        for comp in result.accepting:
            met = metrics(comp)
            for sc in set(store_configs_of(comp)):
                old = entries.get(sc)
                if old is None:
                    entries[sc] = OracleEntry(met.turns, met.max_visits,
                                              met.max_crossings, comp)
                else:
                    entries[sc] = OracleEntry(
                        min(old.min_turns, met.turns),
                        min(old.min_visits, met.max_visits),
                        min(old.min_crossings, met.max_crossings),
                        comp if met.max_crossings < old.min_crossings else old.witness,
                    )
    return OracleReport(input_bound, step_bound, entries, exhausted)


# -- reachability over store configurations -----------------------------------
#
# Input suffixes are existentially quantified, so the search runs over
# "abstract" configurations that track only how many input letters have been
# consumed and whether the end of input was seen, not the letters themselves.


def _core_of(sc: StoreConfig):
    head = sc.tape.index(HEAD)
    return sc.state, sc.tape[:head], sc.tape[head + 1:], sc.counters


def _store_of_core(core) -> StoreConfig:
    state, left, right, counters = core
    return StoreConfig(state, left + (HEAD,) + right, counters)


def oracle_reach(m: Machine, seeds, input_bound: int, step_bound: int,
                 direction: str = "forward", max_tape: int = 64,
                 tape_bound=None, counter_bound: int = 4) -> set:
    """Bounded reachability between store configurations.

    forward: store configs reachable from a seed in <= step_bound steps
    consuming <= input_bound input letters (any letters).  backward: store
    configs (over writable symbols, tape length <= tape_bound) from which some
    seed is forward-reachable under the same bounds.
    """
    seeds = set(seeds)
    for s in seeds:
        if HEAD not in s.tape or s.tape[0] == HEAD:
            raise ValueError(f"malformed seed {s!r}")
    if direction == "forward":
        return {_store_of_core(core)
                for core in _forward_cores(m, [_core_of(s) for s in seeds],
                                            input_bound, step_bound, max_tape)}
    if direction != "backward":
        raise ValueError(f"unknown direction {direction!r}")
    seed_cores = {_core_of(s) for s in seeds}
    if tape_bound is None:
        tape_bound = max((len(s.tape) - 1 for s in seeds), default=1) + 2
    out = set()
    for candidate in _candidate_cores(m, tape_bound, counter_bound):
        reached = _forward_cores(m, [candidate], input_bound, step_bound,
                                 max_tape, stop_at=seed_cores)
        if reached & seed_cores:
            out.add(_store_of_core(candidate))
    return out


def _forward_cores(m: Machine, start_cores, input_bound, step_bound, max_tape,
                   stop_at=None):
    """Cores reachable by the abstract-input search; breadth-first with a depth
    cap of step_bound."""
    seen = set()
    frontier = deque()
    for core in start_cores:
        node = (core, 0, False)
        seen.add(node)
        frontier.append((node, 0))
    cores = {core for core, _, _ in seen}
    while frontier:
        node, depth = frontier.popleft()
        if stop_at is not None and node[0] in stop_at:
            return cores
        if depth >= step_bound:
            continue
        (state, left, right, counters), used, endf = node
        for rule in m.rules:
            if rule.state != state:
                continue
            if rule.inp is LAMBDA:
                used2, endf2 = used, endf
            elif rule.inp is END:
                if endf:
                    continue
                used2, endf2 = used, True
            else:
                if endf or used >= input_bound:
                    continue
                used2, endf2 = used + 1, endf
            if isinstance(rule, TapeRule):
                if left[-1] != rule.read:
                    continue
                nl, nr = apply_tape_rule(m.blank, left, right, rule)
                if len(nl) + len(nr) > max_tape:
                    continue
                core2 = (rule.new_state, nl, nr, counters)
            else:
                counters2 = apply_counter_rule(counters, rule)
                if counters2 is None:
                    continue
                core2 = (rule.new_state, left, right, counters2)
            nxt = (core2, used2, endf2)
            if nxt not in seen:
                seen.add(nxt)
                cores.add(core2)
                frontier.append((nxt, depth + 1))
    return cores


def _candidate_cores(m: Machine, tape_bound: int, counter_bound: int):
    """Canonical cores only: the edge normalization keeps a blank at either
    tape edge exactly when the head sits on it, so other spellings of the same
    configuration never arise and would only duplicate results."""
    syms = tuple(sorted(m.writable_symbols()))
    counter_space = list(product(range(counter_bound + 1),
                                 repeat=m.counter_count))
    for n in range(1, tape_bound + 1):
        for tape in product(syms, repeat=n):
            for head in range(1, n + 1):  # head scans tape[head-1]
                if head > 1 and tape[0] == m.blank:
                    continue
                if head < n and tape[-1] == m.blank:
                    continue
                for counters in counter_space:
                    for q in sorted(m.states):
                        yield q, tape[:head], tape[head:], counters


# -- language enumeration and quotients ----------------------------------------


def accepted_words(m: Machine, max_len: int, max_tape: int = 64) -> set:
    """All accepted inputs of length <= max_len, by breadth-first search over
    (configuration core, consumed word, end-seen) nodes."""
    start = ((m.initial, (m.blank,), (), (0,) * m.counter_count), (), False)
    seen = {start}
    frontier = deque([start])
    out = set()
    while frontier:
        node = frontier.popleft()
        (state, left, right, counters), word, endf = node
        if endf and state in m.finals:
            out.add(word)
        for rule in m.rules:
            if rule.state != state:
                continue
            if rule.inp is LAMBDA:
                word2, endf2 = word, endf
            elif rule.inp is END:
                if endf:
                    continue
                word2, endf2 = word, True
            else:
                if endf or len(word) >= max_len:
                    continue
                word2, endf2 = word + (rule.inp,), endf
            if isinstance(rule, TapeRule):
                if left[-1] != rule.read:
                    continue
                nl, nr = apply_tape_rule(m.blank, left, right, rule)
                if len(nl) + len(nr) > max_tape:
                    continue
                core2 = (rule.new_state, nl, nr, counters)
            else:
                counters2 = apply_counter_rule(counters, rule)
                if counters2 is None:
                    continue
                core2 = (rule.new_state, left, right, counters2)
            nxt = (core2, word2, endf2)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return out


def oracle_quotient(m: Machine, rgx: Nfa, bound: int) -> set:
    """{ u : |u| <= bound, exists v with |v| <= bound, uv in L(m), v in L(rgx) }."""
    out = set()
    for w in accepted_words(m, 2 * bound):
        for i in range(len(w) + 1):
            u, v = w[:i], w[i:]
            if len(u) <= bound and len(v) <= bound and u not in out:
                if rgx.accepts(v):
                    out.add(u)
    return out
