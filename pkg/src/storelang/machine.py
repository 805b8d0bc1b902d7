"""One-way nondeterministic Turing machines with one worktape and t counters.

Exact small-step semantics for the four transition kinds (stay / left / right
on the worktape, counter updates with zero tests), bounded enumeration of
accepting computations, and turn/visit/crossing metrics.

Worktape representation: a configuration holds (tapeLeft, tapeRight) with the
head scanning the last symbol of tapeLeft.  The left and right rules perform
the blank trimming/extension edge normalization, so tapeLeft is always
nonempty and tapeRight never carries a trailing blank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

LAMBDA = None  # input component of a transition that consumes nothing


class _EndOfInput:
    __slots__ = ()

    def __repr__(self):
        return "$end"


END = _EndOfInput()

HEAD = "^"

MOVES = ("L", "S", "R")


class MachineFormatError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TapeRule(NamedTuple):
    state: str
    inp: object  # symbol, LAMBDA, or END
    read: str
    new_state: str
    write: str
    move: str


class CounterRule(NamedTuple):
    state: str
    inp: object
    index: int  # 1-based
    zero: int  # 0 iff the counter must be zero
    new_state: str
    delta: int


@dataclass(frozen=True)
class Machine:
    name: str
    states: frozenset
    input_alphabet: tuple
    tape_alphabet: tuple
    blank: str
    counter_count: int
    rules: tuple
    initial: str
    finals: frozenset
    declared_bound: Optional[tuple] = None  # (mode, k)

    def __post_init__(self):
        if self.blank not in self.tape_alphabet:
            raise ValueError("blank must be in the tape alphabet")
        if self.initial not in self.states:
            raise ValueError("initial state undeclared")
        if not self.finals <= self.states:
            raise ValueError("final state undeclared")
        inp = set(self.input_alphabet)
        tape = set(self.tape_alphabet)
        for r in self.rules:
            if r.state not in self.states or r.new_state not in self.states:
                raise ValueError(f"rule references undeclared state: {r}")
            if r.inp is not LAMBDA and r.inp is not END and r.inp not in inp:
                raise ValueError(f"rule references undeclared input symbol: {r}")
            if isinstance(r, TapeRule):
                if r.read not in tape or r.write not in tape:
                    raise ValueError(f"rule references undeclared tape symbol: {r}")
                if r.move not in MOVES:
                    raise ValueError(f"bad move in rule: {r}")
            else:
                if not (1 <= r.index <= self.counter_count):
                    raise ValueError(f"counter index out of range: {r}")
                if r.zero not in (0, 1) or r.delta not in (-1, 0, 1):
                    raise ValueError(f"bad counter rule: {r}")

    def writable_symbols(self):
        """Symbols that can ever appear on the tape: blank plus written symbols."""
        out = {self.blank}
        for r in self.rules:
            if isinstance(r, TapeRule):
                out.add(r.write)
        return out


class Config(NamedTuple):
    state: str
    input_rest: tuple  # suffix of w followed by END, or () once consumed
    tape_left: tuple  # nonempty; head scans the last symbol
    tape_right: tuple
    counters: tuple


def initial_config(m: Machine, w: Sequence[str]) -> Config:
    for sym in w:
        if sym not in set(m.input_alphabet):
            raise ValueError(f"input symbol {sym!r} not in input alphabet")
    return Config(m.initial, tuple(w) + (END,), (m.blank,), (), (0,) * m.counter_count)


def _input_after(c: Config, inp):
    """Remaining input after applying a rule with input component `inp`,
    or None when the rule's input guard fails."""
    if inp is LAMBDA:
        return c.input_rest
    if not c.input_rest:
        return None
    head = c.input_rest[0]
    if inp is END:
        return c.input_rest[1:] if head is END else None
    return c.input_rest[1:] if head == inp else None


def apply_tape_rule(blank, tape_left, tape_right, rule):
    """New (tape_left, tape_right) after a tape rule, with the blank
    trimming/extension edge normalization.  Assumes the read guard holds."""
    x, y, d = tape_left[:-1], tape_right, rule.write
    if rule.move == "S":
        return x + (d,), y
    if rule.move == "L":
        nl = x if x else (blank,)
        nr = y if (not y and d == blank) else (d,) + y
        return nl, nr
    c2, y2 = (blank, ()) if not y else (y[0], y[1:])
    nl = (c2,) if (not x and d == blank) else x + (d, c2)
    return nl, y2


def apply_counter_rule(counters, rule):
    """New counter vector, or None when the zero test or floor fails."""
    z = counters[rule.index - 1]
    if (0 if z == 0 else 1) != rule.zero:
        return None
    z2 = z + rule.delta
    if z2 < 0:
        return None
    return counters[: rule.index - 1] + (z2,) + counters[rule.index :]


def step(m: Machine, c: Config):
    """All (successor, rule) pairs licensed by the derivation rules, in rule order."""
    out = []
    blank = m.blank
    for rule in m.rules:
        if rule.state != c.state:
            continue
        rest = _input_after(c, rule.inp)
        if rest is None:
            continue
        if isinstance(rule, TapeRule):
            if c.tape_left[-1] != rule.read:
                continue
            nl, nr = apply_tape_rule(blank, c.tape_left, c.tape_right, rule)
            out.append((Config(rule.new_state, rest, nl, nr, c.counters), rule))
        else:
            counters = apply_counter_rule(c.counters, rule)
            if counters is None:
                continue
            out.append((Config(rule.new_state, rest, c.tape_left, c.tape_right, counters), rule))
    return out


# -- computations and metrics --------------------------------------------------


@dataclass(frozen=True)
class Computation:
    configs: tuple
    rules: tuple  # rules[i] takes configs[i] to configs[i+1]

    def addresses(self) -> tuple:
        addr = [1]
        for rule in self.rules:
            move = rule.move if isinstance(rule, TapeRule) else "S"
            addr.append(addr[-1] + {"L": -1, "S": 0, "R": 1}[move])
        return tuple(addr)

    def __len__(self):
        return len(self.rules)


@dataclass(frozen=True)
class ComputationMetrics:
    turns: int
    max_visits: int
    max_crossings: int
    counter_reversals: tuple


def metrics(c: Computation) -> ComputationMetrics:
    addrs = c.addresses()
    turns = 0
    last_dir = 0
    for prev, cur in zip(addrs, addrs[1:]):
        d = cur - prev
        if d == 0:
            continue
        if last_dir and d != last_dir:
            turns += 1
        last_dir = d
    visits: dict = {}
    for a in addrs:
        visits[a] = visits.get(a, 0) + 1
    crossings: dict = {}
    for prev, cur in zip(addrs, addrs[1:]):
        if cur != prev:
            b = min(prev, cur)  # boundary between cells b and b+1
            crossings[b] = crossings.get(b, 0) + 1
    reversals = []
    t = len(c.configs[0].counters)
    for i in range(t):
        values = [cfg.counters[i] for cfg in c.configs]
        last, flips = 0, 0
        for prev, cur in zip(values, values[1:]):
            d = cur - prev
            if d == 0:
                continue
            if last and d != last:
                flips += 1
            last = d
        reversals.append(flips)
    return ComputationMetrics(
        turns=turns,
        max_visits=max(visits.values()),
        max_crossings=max(crossings.values(), default=0),
        counter_reversals=tuple(reversals),
    )


@dataclass(frozen=True)
class SimulationResult:
    accepting: tuple
    exhausted: bool


def simulate(m: Machine, w: Sequence[str], max_steps: int = 200, max_tape: int = 64) -> SimulationResult:
    """Enumerate accepting computations on w by depth-first search over
    configuration-simple paths (no configuration repeats within a path;
    revisiting a configuration can only pump loops, which add no store
    configurations and cannot lower metrics).
    """
    if max_steps < 1 or max_tape < 1:
        raise ValueError("limits must be at least 1")
    accepting = []
    exhausted = [False]
    start = initial_config(m, w)

    def dfs(path_configs, path_rules, on_path):
        cfg = path_configs[-1]
        if cfg.state in m.finals and not cfg.input_rest:
            accepting.append(Computation(tuple(path_configs), tuple(path_rules)))
        if len(path_rules) >= max_steps:
            if step(m, cfg):
                exhausted[0] = True
            return
        for nxt, rule in step(m, cfg):
            if nxt in on_path:
                continue
            if len(nxt.tape_left) + len(nxt.tape_right) > max_tape:
                exhausted[0] = True
                continue
            on_path.add(nxt)
            path_configs.append(nxt)
            path_rules.append(rule)
            dfs(path_configs, path_rules, on_path)
            path_configs.pop()
            path_rules.pop()
            on_path.discard(nxt)

    dfs([start], [], {start})
    return SimulationResult(tuple(accepting), exhausted[0])


# -- store configurations -------------------------------------------------------


@dataclass(frozen=True)
class StoreConfig:
    state: str
    tape: tuple  # tape symbols with exactly one HEAD marker, never first
    counters: tuple

    def to_word(self) -> tuple:
        """Token sequence over the store alphabet (counters in unary)."""
        word = (self.state,) + self.tape
        for i, z in enumerate(self.counters, start=1):
            word += (f"C{i}",) * z
        return word

    def to_text(self) -> str:
        tape = "".join(self.tape)
        parts = [self.state, tape]
        parts.extend(str(z) for z in self.counters)
        return " ".join(parts)


def parse_store_config(text: str, m: Machine) -> StoreConfig:
    parts = text.split()
    if len(parts) < 2:
        raise ValueError("store config needs a state and a tape")
    state, tape_text = parts[0], parts[1]
    if state not in m.states:
        raise ValueError(f"unknown state {state!r}")
    counters = tuple(int(p) for p in parts[2:])
    if len(counters) != m.counter_count:
        raise ValueError(f"expected {m.counter_count} counter values")
    # longest-match tokenization over the tape alphabet plus the head marker
    tokens = sorted([*m.tape_alphabet, HEAD], key=len, reverse=True)
    tape = []
    i = 0
    while i < len(tape_text):
        for tok in tokens:
            if tape_text.startswith(tok, i):
                tape.append(tok)
                i += len(tok)
                break
        else:
            raise ValueError(f"cannot tokenize tape at offset {i} in {tape_text!r}")
    if tape.count(HEAD) != 1 or tape[0] == HEAD:
        raise ValueError("tape must contain exactly one ^ not in first position")
    return StoreConfig(state, tuple(tape), counters)


def store_config_of(c: Config) -> StoreConfig:
    return StoreConfig(c.state, c.tape_left + (HEAD,) + c.tape_right, c.counters)


def store_configs_of(c: Computation):
    return tuple(store_config_of(cfg) for cfg in c.configs)


def store_alphabet(m: Machine) -> tuple:
    """Canonical token alphabet for store-configuration words."""
    syms = list(sorted(m.states)) + list(sorted(m.tape_alphabet)) + [HEAD]
    syms += [f"C{i}" for i in range(1, m.counter_count + 1)]
    if len(set(syms)) != len(syms):
        raise ValueError("state/tape symbol tokens collide in the store alphabet")
    return tuple(syms)


# -- determinism check -----------------------------------------------------------


def _inputs_compatible(a, b):
    if a is LAMBDA or b is LAMBDA:
        return True
    return a is b or a == b


def is_deterministic(m: Machine) -> bool:
    """At most one transition per (state, scanned symbol, input letter or λ);
    counter rules clash with any co-enabled rule of the same state."""
    rules = list(m.rules)
    for i, a in enumerate(rules):
        for b in rules[i + 1 :]:
            if a.state != b.state or not _inputs_compatible(a.inp, b.inp):
                continue
            if isinstance(a, TapeRule) and isinstance(b, TapeRule):
                if a.read == b.read:
                    return False
            elif isinstance(a, CounterRule) and isinstance(b, CounterRule):
                if a.index != b.index or a.zero == b.zero:
                    return False
            else:
                return False  # a tape rule and a counter rule can be co-enabled
    return True


# -- textual format ---------------------------------------------------------------


def _inp_token(inp):
    if inp is LAMBDA:
        return "@"
    if inp is END:
        return "$end"
    return inp


def _parse_inp(tok, m_inputs, line):
    if tok == "@":
        return LAMBDA
    if tok == "$end":
        return END
    if tok not in m_inputs:
        raise MachineFormatError(f"undeclared input symbol {tok!r}", line)
    return tok


def serialize_machine(m: Machine) -> str:
    lines = [f"machine {m.name}", f"counters {m.counter_count}"]
    lines.append("input-alphabet " + " ".join(m.input_alphabet))
    lines.append("tape-alphabet " + " ".join(m.tape_alphabet))
    lines.append(f"blank {m.blank}")
    lines.append("states " + " ".join(sorted(m.states)))
    lines.append(f"initial {m.initial}")
    lines.append("final " + " ".join(sorted(m.finals)))
    if m.declared_bound:
        lines.append(f"declared-bound {m.declared_bound[0]} {m.declared_bound[1]}")
    for r in m.rules:
        if isinstance(r, TapeRule):
            lines.append(f"t {r.state} {_inp_token(r.inp)} {r.read} -> {r.new_state} {r.write} {r.move}")
        else:
            z = "z" if r.zero == 0 else "p"
            delta = {1: "+1", 0: "0", -1: "-1"}[r.delta]
            lines.append(f"c {r.state} {_inp_token(r.inp)} {r.index} {z} -> {r.new_state} {delta}")
    return "\n".join(lines) + "\n"


def parse_machine(text: str) -> Machine:
    name = "machine"
    counters = 0
    input_alphabet: tuple = ()
    tape_alphabet: tuple = ()
    blank = None
    states: set = set()
    initial = None
    finals: set = set()
    declared = None
    rules: list = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kw = parts[0]
        try:
            if kw == "machine":
                name = parts[1]
            elif kw == "counters":
                counters = int(parts[1])
            elif kw == "input-alphabet":
                input_alphabet = tuple(parts[1:])
            elif kw == "tape-alphabet":
                tape_alphabet = tuple(parts[1:])
            elif kw == "blank":
                blank = parts[1]
            elif kw == "states":
                states = set(parts[1:])
            elif kw == "initial":
                initial = parts[1]
            elif kw == "final":
                finals = set(parts[1:])
            elif kw == "declared-bound":
                if parts[1] not in ("turn", "visit", "crossing"):
                    raise MachineFormatError(f"bad bound mode {parts[1]!r}", ln)
                declared = (parts[1], int(parts[2]))
            elif kw == "t":
                if len(parts) != 8 or parts[4] != "->":
                    raise MachineFormatError("worktape rule needs: t q a read -> q' write move", ln)
                _, q, a, read, _, q2, write, move = parts
                rules.append(TapeRule(q, _parse_inp(a, set(input_alphabet), ln), read, q2, write, move))
            elif kw == "c":
                if len(parts) != 8 or parts[5] != "->":
                    raise MachineFormatError("counter rule needs: c q a i z|p -> q' delta", ln)
                _, q, a, idx, zp, _, q2, delta = parts
                if zp not in ("z", "p"):
                    raise MachineFormatError(f"zero flag must be z or p, got {zp!r}", ln)
                rules.append(CounterRule(q, _parse_inp(a, set(input_alphabet), ln), int(idx),
                                         0 if zp == "z" else 1, q2, int(delta)))
            else:
                raise MachineFormatError(f"unknown keyword {kw!r}", ln)
        except (ValueError, IndexError) as e:
            if isinstance(e, MachineFormatError):
                raise
            raise MachineFormatError(str(e), ln) from e
    if blank is None or initial is None:
        raise MachineFormatError("missing blank or initial declaration")
    try:
        return Machine(name, frozenset(states), input_alphabet, tape_alphabet, blank,
                       counters, tuple(rules), initial, frozenset(finals), declared)
    except ValueError as e:
        raise MachineFormatError(str(e)) from e
