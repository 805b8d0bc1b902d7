"""History words: per-cell sojourn columns, their verifying two-way automaton,
and the store-NFA pipeline built on top.

A history word encodes one accepting computation of a machine: one column per
tape cell (preceded by a state column), where tracks 1..k hold a doubly linked
list of the cell's sojourns (maximal stay-runs), and track 0 holds the tape
contents at one snapshot moment with the scanned cell marked.  The verifying
two-way automaton checks, in order:

  phase 1  (left-to-right sweep): track 0 is a state cell followed by the
           snapshot window (contiguous tape cells, exactly one marked) padded
           on both sides; globally one begin node, one end node, one mark.
  seek     (right-to-left): locate the column holding the begin node.
  walk     follow the linked list, replaying the machine's transitions against
           the recorded cell-leaving writes; stay-runs are tracked in control
           via a pending symbol; at a nondeterministic moment the snapshot is
           matched (state + marked pending symbol), after which only marked
           node symbols are accepted; accept at the end node once the machine
           accepts with the input fully consumed.
  finish   travel right and fall off the right endmarker.

Extracting track 0 with a transducer then yields exactly the store
configurations of r-crossing accepting computations.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from .machine import (
    Computation,
    END,
    HEAD,
    LAMBDA,
    Machine,
    TapeRule,
    store_alphabet,
)
from .nfa import EPSILON, Gsm, Nfa, gsm_image, make_nfa
from .twonfa import L, R, S, LEFT_END, RIGHT_END, SymbolSource, TwoNfa, two_nfa_to_nfa


class SojournOverflowError(ValueError):
    def __init__(self, cell):
        super().__init__(f"cell {cell} has more sojourns than tracks")
        self.cell = cell


class Node(NamedTuple):
    sym: str
    marked: bool
    s_d: Optional[str]  # successor direction: 'L', 'R', or None
    s_t: Optional[int]  # successor track
    p_d: Optional[str]
    p_t: Optional[int]


class ColumnSymbol(NamedTuple):
    """track0 is ('state', q), ('pad',), or ('cell', sym, mark) where mark is
    None for unmarked window cells and the snapshot state for the scanned cell
    (embedding the state lets both the sweep and the walk check it locally)."""

    track0: tuple
    nodes: tuple  # contiguous from track 1; nodes[i] is track i+1


def column_ok(m: Machine, col, k: int, max_cross=None, writable=None) -> bool:
    """Single-column checks: contiguity, link well-formedness, begin/end
    placement, marking monotonicity, the local part of the snapshot-match
    condition, and (optionally) the per-boundary crossing budget."""
    if not isinstance(col, ColumnSymbol):
        return False
    track0, nodes = col.track0, col.nodes
    if track0[0] == "state":
        return track0[1] in m.states and not nodes
    if track0[0] == "cell":
        if len(track0) != 3 or track0[1] not in set(m.tape_alphabet):
            return False
        if track0[2] is not None and track0[2] not in m.states:
            return False
    elif track0[0] != "pad":
        return False
    if len(nodes) > k:
        return False
    if writable is None:
        writable = m.writable_symbols()
    any_marked = False
    left = right = 0
    for i, nd in enumerate(nodes, start=1):
        if nd.sym not in writable:
            return False
        if (nd.s_d is None) != (nd.s_t is None) or (nd.p_d is None) != (nd.p_t is None):
            return False
        if nd.s_d not in (None, "L", "R") or nd.p_d not in (None, "L", "R"):
            return False
        if nd.s_t is not None and not 1 <= nd.s_t <= k:
            return False
        if nd.p_t is not None and not 1 <= nd.p_t <= k:
            return False
        if nd.p_d is None and i != 1:
            return False  # begin node only in track 1
        if nd.s_d is None and i != len(nodes):
            return False  # end node only in the bottom-most track
        if nd.s_d is None and not nd.marked:
            return False  # the final sojourn is always past the snapshot
        if any_marked and not nd.marked:
            return False  # unmarked (pre-snapshot) sojourns precede marked ones
        any_marked = any_marked or nd.marked
        left += (nd.s_d == "L") + (nd.p_d == "L")
        right += (nd.s_d == "R") + (nd.p_d == "R")
    if max_cross is not None and (left > max_cross or right > max_cross):
        return False
    # Per boundary, crossings are temporally ordered consistently with the
    # track order on both sides, so link targets on each side are increasing
    # down the column; a target repeats only when an arrival follows the
    # matching departure.  (Also rules out closed link cycles off the walk.)
    for side in ("L", "R"):
        last, can_eq = 0, False
        for nd in nodes:
            if nd.p_d == side:
                if nd.p_t < last or (nd.p_t == last and not can_eq):
                    return False
                last, can_eq = nd.p_t, False
            if nd.s_d == side:
                if nd.s_t <= last:
                    return False
                last, can_eq = nd.s_t, True
    unmarked = [nd.sym for nd in nodes if not nd.marked]
    bottom_unmarked = unmarked[-1] if unmarked else None
    if track0[0] == "cell" and track0[2] is None:
        expected = bottom_unmarked if bottom_unmarked is not None else m.blank
        if track0[1] != expected:
            return False
    if track0[0] == "pad":
        # a cell outside the snapshot window must hold a blank at the snapshot
        if bottom_unmarked is not None and bottom_unmarked != m.blank:
            return False
    return True


# -- computation -> history word ------------------------------------------------


def encode_history(c: Computation, snapshot_index: int, k: int) -> tuple:
    """History word of computation c with track 0 showing configuration
    `snapshot_index`.  A node is marked iff its sojourn departs at or after the
    snapshot; the final sojourn is always marked."""
    n = len(c.rules)
    if not 0 <= snapshot_index <= n:
        raise ValueError("snapshot index out of range")
    addrs = c.addresses()
    runs = []  # (cell, first config index, last config index)
    start = 0
    for j in range(1, n + 1):
        if addrs[j] != addrs[j - 1]:
            runs.append((addrs[j - 1], start, j - 1))
            start = j
    runs.append((addrs[n], start, n))

    track_of = {}
    per_cell: dict = {}
    for idx, (cell, _a, _b) in enumerate(runs):
        t = per_cell.get(cell, 0) + 1
        per_cell[cell] = t
        if t > k:
            raise SojournOverflowError(cell)
        track_of[idx] = t

    nodes_by_cell: dict = {}
    for idx, (cell, _a, b) in enumerate(runs):
        if idx == len(runs) - 1:
            sym = c.configs[-1].tape_left[-1]
            marked = True
        else:
            sym = c.rules[b].write  # the cell-leaving write
            marked = b >= snapshot_index
        s_d = s_t = p_d = p_t = None
        if idx + 1 < len(runs):
            s_d = "R" if runs[idx + 1][0] > cell else "L"
            s_t = track_of[idx + 1]
        if idx > 0:
            p_d = "R" if runs[idx - 1][0] > cell else "L"
            p_t = track_of[idx - 1]
        nodes_by_cell.setdefault(cell, []).append(Node(sym, marked, s_d, s_t, p_d, p_t))

    cfg = c.configs[snapshot_index]
    head = addrs[snapshot_index]
    window = {}
    cells = list(cfg.tape_left) + list(cfg.tape_right)
    first = head - len(cfg.tape_left) + 1
    for off, sym in enumerate(cells):
        window[first + off] = (sym, cfg.state if first + off == head else None)

    lo = min(min(addrs), first)
    hi = max(max(addrs), first + len(cells) - 1)
    cols = [ColumnSymbol(("state", cfg.state), ())]
    for cell in range(lo, hi + 1):
        if cell in window:
            t0 = ("cell", *window[cell])
        else:
            t0 = ("pad",)
        cols.append(ColumnSymbol(t0, tuple(nodes_by_cell.get(cell, ()))))
    return tuple(cols)


def format_column(col: ColumnSymbol) -> str:
    t0 = col.track0
    head = {"state": f"state:{t0[1] if len(t0) > 1 else ''}",
            "pad": "pad"}.get(t0[0])
    if head is None:
        head = f"cell:{t0[1]}" + (f"!{t0[2]}" if t0[2] is not None else "")
    cells = [head]
    for nd in col.nodes:
        s = f"{nd.sym}{'!' if nd.marked else ''},{nd.s_d or '.'}{nd.s_t or '.'},{nd.p_d or '.'}{nd.p_t or '.'}"
        cells.append(s)
    return "|".join(cells)


def link_needs(col: ColumnSymbol) -> frozenset:
    """Right-pointing link endpoints of a column: what the next column's
    left-pointing links must look like, as (track there, kind there, track here).
    A successor link demands a matching predecessor link and vice versa."""
    out = set()
    for a, nd in enumerate(col.nodes, 1):
        if nd.s_d == "R":
            out.add((nd.s_t, "P", a))
        if nd.p_d == "R":
            out.add((nd.p_t, "S", a))
    return frozenset(out)


def link_gives(col: ColumnSymbol) -> frozenset:
    """Left-pointing link endpoints of a column, in the same coordinates as
    link_needs of the previous column."""
    out = set()
    for b, nd in enumerate(col.nodes, 1):
        if nd.p_d == "L":
            out.add((b, "P", nd.p_t))
        if nd.s_d == "L":
            out.add((b, "S", nd.s_t))
    return frozenset(out)


def format_history(cols) -> str:
    return "\n".join(format_column(c) for c in cols) + "\n"


# -- the lazy column alphabet -----------------------------------------------------


class ColumnSource(SymbolSource):
    """All valid columns for (machine, k), enumerated lazily.

    Constraint-driven enumeration reads the crossing sequence at the left
    boundary of the candidate column: consumed crossing events pin node links
    and symbols, and only the genuinely free choices (links to/from the right
    neighbour) are enumerated.
    """

    finite = True

    def __init__(self, m: Machine, k: int, max_cross=None):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.m = m
        self.k = k
        self.max_cross = max_cross
        self.writable = tuple(sorted(m.writable_symbols()))
        self.states = tuple(sorted(m.states))
        # A node's symbol is the write of the rule departing the cell, and the
        # cell's content evolves from the previous node's symbol via stay
        # rules.  Tabulate, per arrival content, the symbols each departure
        # direction can leave behind (a state-blind over-approximation).
        tape_rules = [r for r in m.rules if isinstance(r, TapeRule)]
        stay_edges: dict = {}
        for r in tape_rules:
            if r.move == "S":
                stay_edges.setdefault(r.read, set()).add(r.write)
        closure: dict = {}
        for p in self.writable:
            seen = {p}
            stack = [p]
            while stack:
                s = stack.pop()
                for s2 in stay_edges.get(s, ()):
                    if s2 not in seen:
                        seen.add(s2)
                        stack.append(s2)
            closure[p] = seen
        self._stay_closure_syms = {p: tuple(sorted(v)) for p, v in closure.items()}
        self._depart_syms = {}
        for d in ("L", "R"):
            per = {}
            for p in self.writable:
                per[p] = tuple(sorted({r.write for r in tape_rules
                                       if r.move == d and r.read in closure[p]}))
            self._depart_syms[d] = per
        self._tape_rules = tuple(tape_rules)
        self._pair_cache: dict = {}
        # an arrival from the right neighbour is the target of a left move
        self._left_targets = tuple(sorted({r.new_state for r in tape_rules
                                           if r.move == "L"}))
        self._free_reach_cache: dict = {}
        # symbols an accepting stay-run can end on, per arrival content,
        # over all possible arrival states
        self._end_syms_blind = {}
        for p in self.writable:
            syms = set()
            for q0 in self.states:
                syms.update(s for q, s in self._pair_closure(q0, p) if q in m.finals)
            self._end_syms_blind[p] = tuple(sorted(syms))
        # the crossing budget caps how many sojourns a cell can have:
        # each boundary contributes at most ceil(budget/2) arrivals, plus one
        # for the begin sojourn
        if max_cross is not None:
            self.t_cap = min(k, 2 * ((max_cross + 1) // 2) + 1)
        else:
            self.t_cap = k
        self._cache: dict = {}
        self._ok_cache: dict = {}
        self._writable_set = set(self.writable)

    def _pair_closure(self, q0, p):
        """(state, content) pairs reachable from arrival (q0, p) via stay rules."""
        key = (q0, p)
        hit = self._pair_cache.get(key)
        if hit is None:
            seen = {key}
            stack = [key]
            while stack:
                q, s = stack.pop()
                for r in self._tape_rules:
                    if r.move == "S" and r.state == q and r.read == s:
                        nxt = (r.new_state, r.write)
                        if nxt not in seen:
                            seen.add(nxt)
                            stack.append(nxt)
            hit = frozenset(seen)
            self._pair_cache[key] = hit
        return hit

    def _free_reach(self, pending):
        """(state, content) pairs reachable in a sojourn entered from the right
        neighbour, over all states a left move can arrive in."""
        hit = self._free_reach_cache.get(pending)
        if hit is None:
            acc = set()
            for q in self._left_targets:
                acc |= self._pair_closure(q, pending)
            hit = frozenset(acc)
            self._free_reach_cache[pending] = hit
        return hit

    def __contains__(self, col):
        try:
            hit = self._ok_cache.get(col)
        except TypeError:
            return False  # unhashable, certainly not a column
        if hit is None:
            hit = column_ok(self.m, col, self.k, self.max_cross, self._writable_set)
            self._ok_cache[col] = hit
        return hit

    def members(self):
        yield from self._all_columns()

    def enumerate(self, constraint=None):
        if constraint is None:
            yield from self.members()
            return
        yield from self._for_sequence(constraint.sequence)

    # exhaustive enumeration (viable only for tiny machines; tests use it)
    def _all_columns(self):
        k, W = self.k, self.writable

        def nodes_rec(track, acc):
            yield tuple(acc)
            if track > k:
                return
            p_opts = [(None, None)] if track == 1 else []
            p_opts += [(d, t) for d in ("L", "R") for t in range(1, k + 1)]
            s_opts = [(None, None)] + [(d, t) for d in ("L", "R") for t in range(1, k + 1)]
            for sym in W:
                for marked in (False, True):
                    for p_d, p_t in p_opts:
                        for s_d, s_t in s_opts:
                            acc.append(Node(sym, marked, s_d, s_t, p_d, p_t))
                            yield from nodes_rec(track + 1, acc)
                            acc.pop()

        emitted = set()
        for nodes in nodes_rec(1, []):
            opts = self._track0_options(nodes)
            opts += [("cell", sym, q) for q in self.states for sym in W]
            for t0 in opts:
                col = ColumnSymbol(t0, nodes)
                if col not in emitted and col in self:
                    emitted.add(col)
                    yield col
        for q in self.states:
            yield ColumnSymbol(("state", q), ())

    def _track0_options(self, nodes, mark_states=()):
        opts = [("pad",)]
        unmarked = [nd.sym for nd in nodes if not nd.marked]
        opts.append(("cell", unmarked[-1] if unmarked else self.m.blank, None))
        if mark_states and nodes:
            # the snapshot fires while the walk sits in this column, so its
            # content is stay-reachable from some track's arrival content
            syms = set()
            for i in range(1, len(nodes) + 1):
                pending = self.m.blank if i == 1 else nodes[i - 2].sym
                syms.update(self._stay_closure_syms[pending])
            for q in mark_states:
                for sym in sorted(syms):
                    opts.append(("cell", sym, q))
        return opts

    # constraint-driven enumeration ------------------------------------------

    def _for_sequence(self, x_seq):
        if not x_seq:
            return
        first, first_dir = x_seq[0]
        if first_dir != R:
            return
        walk_evs = []
        seek_seen = False
        for st, d in x_seq:
            if st[0] == "cross":
                if (d == R) != (st[6] == "fromL"):
                    return
                walk_evs.append((st, d))
            elif st[0] == "seek":
                seek_seen = True
        if first[0] == "p1first":
            for q in self.states:
                yield ColumnSymbol(("state", q), ())
            return
        if first[0] == "p1":
            _, qs, b, mk, e, _block, _prev_bu, needs = first
            # left-pointing links are exactly the consumed crossings, so the
            # link pairing with the previous column is decided here
            gives = set()
            for st, d in walk_evs:
                if d == R:
                    gives.add((st[3], "P", st[4]))
                else:
                    gives.add((st[4], "S", st[3]))
            if gives != set(needs):
                return
            key = (tuple(walk_evs), b == 0, e == 0,
                   (qs,) if mk == 0 else ())
        elif first[0] == "scan":
            # phase-1 bookkeeping lives in a separate one-way automaton, so
            # begin/end/mark gating cannot use sweep flags here
            if not walk_evs and not seek_seen:
                for q in self.states:
                    yield ColumnSymbol(("state", q), ())
            key = (tuple(walk_evs), not seek_seen, True, self.states)
        else:
            return
        if key not in self._cache:
            self._cache[key] = tuple(self._build(*key))
        yield from self._cache[key]

    def _depart_writes(self, direction, new_state, pending, reach):
        if reach is not None:
            return sorted({r.write for r in self._tape_rules
                           if r.move == direction and r.new_state == new_state
                           and (r.state, r.read) in reach})
        closure = self._stay_closure_syms[pending]
        return sorted({r.write for r in self._tape_rules
                       if r.move == direction and r.new_state == new_state
                       and r.read in closure})

    def _free_right_writes(self, pending, reach):
        if reach is not None:
            return sorted({r.write for r in self._tape_rules
                           if r.move == "R" and (r.state, r.read) in reach})
        return self._depart_syms["R"][pending]

    def _end_syms(self, pending, reach):
        if reach is not None:
            return sorted({s for q, s in reach if q in self.m.finals})
        return self._end_syms_blind[pending]

    def _build(self, walk_evs, allow_begin, allow_end, mark_states):
        cap = self.t_cap
        budget = self.max_cross if self.max_cross is not None else 2 * self.k
        m = self.m
        blank = m.blank
        out = []  # (node tuple, per-track arrival state or None)

        # Right-pointing link targets follow the monotonicity discipline (see
        # column_ok); walking arrival states are threaded through so departure
        # writes come from actual stay-rule closures.
        def rec(track, j, nodes, arrqs, right_links, last_rt, can_eq, any_marked):
            if j == len(walk_evs):
                out.append((tuple(nodes), tuple(arrqs)))
            if track > cap:
                return
            arrivals = []
            if j < len(walk_evs):
                st, d = walk_evs[j]
                if d == R and st[3] == track:  # arrival pinned to this track
                    arrivals.append(("consume", "L", st[4], st[2]))
            if track == 1 and allow_begin and j == 0:
                arrivals.append(("begin", None, None, m.initial))
            if right_links < budget:
                lo = last_rt if can_eq else last_rt + 1
                for t in range(max(lo, 1), cap + 1):
                    arrivals.append(("free", "R", t, None))
            pending = nodes[-1].sym if nodes else blank
            for kind, p_d, p_t, q0 in arrivals:
                reach = (self._pair_closure(q0, pending) if q0 is not None
                         else self._free_reach(pending))
                j2 = j + 1 if kind == "consume" else j
                rl = right_links + (1 if kind == "free" else 0)
                if kind == "free":
                    rt, eq = p_t, False
                else:
                    rt, eq = last_rt, can_eq
                # departure consumed by the next event in the sequence
                if j2 < len(walk_evs):
                    st, d = walk_evs[j2]
                    if d == L and st[4] == track:
                        marked = st[1] == "post"
                        if not (any_marked and not marked):
                            for sym in self._depart_writes("L", st[2], pending, reach):
                                nodes.append(Node(sym, marked, "L", st[3], p_d, p_t))
                                arrqs.append(q0)
                                rec(track + 1, j2 + 1, nodes, arrqs, rl, rt, eq,
                                    any_marked or marked)
                                arrqs.pop()
                                nodes.pop()
                # end node (bottom of the column; everything must be consumed)
                if allow_end and j2 == len(walk_evs):
                    for sym in self._end_syms(pending, reach):
                        nodes.append(Node(sym, True, None, None, p_d, p_t))
                        arrqs.append(q0)
                        out.append((tuple(nodes), tuple(arrqs)))
                        arrqs.pop()
                        nodes.pop()
                # free departure to the right
                if rl < budget:
                    for t in range(max(rt + 1, 1), cap + 1):
                        for sym in self._free_right_writes(pending, reach):
                            marks = (True,) if any_marked else (False, True)
                            for marked in marks:
                                nodes.append(Node(sym, marked, "R", t, p_d, p_t))
                                arrqs.append(q0)
                                rec(track + 1, j2, nodes, arrqs, rl + 1, t, True,
                                    any_marked or marked)
                                arrqs.pop()
                                nodes.pop()

        rec(1, 0, [], [], 0, 0, False, False)
        cols = []
        seen = set()
        for nodes, arrqs in out:
            for t0 in self._track0_options(nodes):
                col = ColumnSymbol(t0, nodes)
                if col not in seen and col in self:
                    seen.add(col)
                    cols.append(col)
            for t0 in self._marked_options(nodes, arrqs, mark_states):
                col = ColumnSymbol(t0, nodes)
                if col not in seen and col in self:
                    seen.add(col)
                    cols.append(col)
        return cols

    def _marked_options(self, nodes, arrqs, mark_states):
        """Marked track-0 variants: the snapshot fires during the first marked
        sojourn, so the cell content and state must be stay-reachable from that
        sojourn's arrival."""
        if not mark_states or not nodes:
            return []
        first = next((i for i, nd in enumerate(nodes) if nd.marked), None)
        if first is None:
            return []
        pending = self.m.blank if first == 0 else nodes[first - 1].sym
        q0 = arrqs[first]
        opts = set()
        if q0 is not None:
            for q, s in self._pair_closure(q0, pending):
                if q in mark_states:
                    opts.add(("cell", s, q))
        else:
            for q, s in self._free_reach(pending):
                if q in mark_states:
                    opts.add(("cell", s, q))
        return sorted(opts)


# -- the verifying two-way automaton -----------------------------------------------


class HistoryTwoNfa(TwoNfa):
    """phase='full' runs the left-to-right structure sweep inside the two-way
    automaton (self-contained membership).  phase='walk' replaces the sweep by
    a free right scan, leaving the structure checks to phase1_nfa; this keeps
    sweep bookkeeping out of the crossing sequences, which shrinks the
    converted automaton by orders of magnitude."""

    def __init__(self, m: Machine, k: int, max_cross=None, phase="full"):
        if m.counter_count != 0:
            raise ValueError("history construction requires a counter-free machine")
        if k < 1:
            raise ValueError("k must be at least 1")
        if phase not in ("full", "walk"):
            raise ValueError("phase must be 'full' or 'walk'")
        self.m = m
        self.k = k
        self.phase = phase
        self.symbol_source = ColumnSource(m, k, max_cross)
        self.initial_state = ("p1start",) if phase == "full" else ("scan",)
        self._writable = tuple(sorted(m.writable_symbols()))
        self._states = tuple(sorted(m.states))
        # a crossing that enters a cell from the right carries the target
        # state of some left-moving rule; guessing any other state is futile
        self._left_targets = tuple(sorted({r.new_state for r in m.rules
                                           if isinstance(r, TapeRule)
                                           and r.move == "L"}))
        self._entrants_cache: dict = {}
        self._moves_cache: dict = {}
        # rules indexed by (state, pending content): the walk's hot lookup
        self._rules_by_key: dict = {}
        for r in m.rules:
            self._rules_by_key.setdefault((r.state, r.read), []).append(r)

    def is_final(self, state):
        return state == ("finishF",)

    def _col_ok(self, col):
        return col in self.symbol_source

    def moves(self, state, sym):
        # Walk moves depend only on the node at the state's track (plus a
        # snapshot-match bit); cross moves only on the node tuple.  Caching on
        # those keys shares results across the many columns differing in
        # track 0 or in other tracks.
        tag = state[0]
        if isinstance(sym, ColumnSymbol) and tag in ("walk", "cross"):
            if tag == "walk":
                track, q, pending = state[2], state[3], state[4]
                if len(sym.nodes) < track:
                    return ()
                key = (state, sym.nodes[track - 1],
                       sym.track0 == ("cell", pending, q))
            else:
                key = (state, sym.nodes)
            hit = self._moves_cache.get(key)
            if hit is None:
                hit = tuple(self._moves(state, sym))
                self._moves_cache[key] = hit
            return hit
        return self._moves(state, sym)

    def _moves(self, state, sym):
        tag = state[0]
        m = self.m
        if tag == "scan":
            if sym is RIGHT_END:
                return [(("seek",), L)]
            return [(("scan",), R)]
        if tag == "p1start":
            return [(("p1first",), R)] if sym is LEFT_END else []
        if tag == "p1first":
            if (isinstance(sym, ColumnSymbol) and sym.track0[0] == "state"
                    and not sym.nodes and self._col_ok(sym)):
                return [(("p1", sym.track0[1], 0, 0, 0, 0, False, frozenset()), R)]
            return []
        if tag == "p1":
            _, qs, b, mk, e, block, prev_bu, needs = state
            if sym is RIGHT_END:
                ok = (b == 1 and mk == 1 and e == 1 and block >= 1
                      and not (block == 1 and prev_bu) and not needs)
                return [(("seek", qs), L)] if ok else []
            if not isinstance(sym, ColumnSymbol) or not self._col_ok(sym):
                return []
            if link_gives(sym) != needs:
                return []  # links across the boundary must pair up exactly
            t0 = sym.track0
            if t0[0] == "state":
                return []
            has_begin = bool(sym.nodes) and sym.nodes[0].p_d is None
            has_end = bool(sym.nodes) and sym.nodes[-1].s_d is None
            b2, e2 = b + has_begin, e + has_end
            marked_here = t0[0] == "cell" and t0[2] is not None
            mk2 = mk + (1 if marked_here else 0)
            if b2 > 1 or e2 > 1 or mk2 > 1:
                return []
            qs2 = qs
            if marked_here:
                if t0[2] != qs:
                    return []  # scanned cell must carry the snapshot state
                qs2 = None  # the state has been checked; stop carrying it
            if t0[0] == "pad":
                if block == 1:
                    if prev_bu:
                        return []  # window may not end in an unmarked blank
                    block2, pb2 = 2, False
                else:
                    block2, pb2 = block, False
            else:
                if block == 2:
                    return []  # window must be contiguous
                if block == 0 and not marked_here and t0[1] == m.blank:
                    return []  # window may not start with an unmarked blank
                block2 = 1
                pb2 = (not marked_here) and t0[1] == m.blank
            return [(("p1", qs2, b2, mk2, e2, block2, pb2, link_needs(sym)), R)]
        if tag == "seek":
            if not isinstance(sym, ColumnSymbol) or sym.track0[0] == "state":
                return []
            if sym.nodes and sym.nodes[0].p_d is None:
                return [(("walk", "pre", 1, m.initial, m.blank, False), S)]
            return [(("seek",), L)]
        if tag == "walk":
            _, mode, track, q, pending, endf = state
            if not isinstance(sym, ColumnSymbol) or len(sym.nodes) < track:
                return []
            node = sym.nodes[track - 1]
            out = []
            if mode == "pre" and sym.track0 == ("cell", pending, q):
                out.append((("walk", "post", track, q, pending, endf), S))
            for rule in self._rules_by_key.get((q, pending), ()):
                endf2 = endf
                if rule.inp is END:
                    if endf:
                        continue
                    endf2 = True
                elif rule.inp is not LAMBDA and endf:
                    continue  # no input letters remain past the endmarker
                if rule.move == "S":
                    out.append((("walk", mode, track, rule.new_state, rule.write, endf2), S))
                else:
                    if (node.s_d == rule.move and node.sym == rule.write
                            and node.marked == (mode == "post")):
                        came = "fromL" if rule.move == "R" else "fromR"
                        out.append((("cross", mode, rule.new_state, node.s_t,
                                     track, endf2, came), rule.move))
            if (node.s_d is None and q in m.finals and endf and mode == "post"
                    and node.sym == pending):
                out.append((("finish",), R))
            return out
        if tag == "cross":
            _, mode, q, dst, src, endf, came = state
            if not isinstance(sym, ColumnSymbol) or len(sym.nodes) < dst:
                return []
            node = sym.nodes[dst - 1]
            back = "L" if came == "fromL" else "R"
            if node.p_d != back or node.p_t != src:
                return []
            # next-return discipline: scanning down from the arrival track, the
            # first link pointing back toward the source column must be a
            # departure into the source's next sojourn (track src+1)
            for t in range(dst, len(sym.nodes) + 1):
                nd = sym.nodes[t - 1]
                if t > dst and nd.p_d == back:
                    return []
                if nd.s_d == back:
                    if nd.s_t != src + 1:
                        return []
                    break
            pending = sym.nodes[dst - 2].sym if dst >= 2 else m.blank
            return [(("walk", mode, dst, q, pending, endf), S)]
        if tag == "finish":
            if sym is RIGHT_END:
                return [(("finishF",), R)]
            if isinstance(sym, ColumnSymbol):
                return [(("finish",), R)]
            return []
        return []

    def event_ok(self, y, ev):
        """Local admissibility of appending crossing event ev to boundary
        sequence y: a column is visited in sojourn (track) order, and between
        two consecutive crossings of a boundary the run stays on one side, so
        each crossing enters the sojourn right after the one it last left
        (track 1 for a first visit).  Mode and end-of-input are monotone."""
        st, _d = ev
        kind = st[0]
        if kind in ("scan", "p1", "p1first", "p1start"):
            return not y  # the structure sweep crosses each boundary first
        if not y:
            return False
        prev = y[-1][0]
        if prev[0] == "finish":
            return False  # the final sweep is the last crossing
        if kind == "seek":
            return len(y) == 1
        if kind == "finish":
            return True
        if kind != "cross":
            return True
        if prev[0] == "cross":
            if prev[1] == "post" and st[1] == "pre":
                return False
            if prev[5] and not st[5]:
                return False
            return st[3] == prev[4] + 1
        return st[3] == 1

    def entrants(self, sym):
        if not isinstance(sym, ColumnSymbol):
            return ()
        nodes = sym.nodes
        if nodes not in self._entrants_cache:
            out = [("seek",)]
            for dst, node in enumerate(nodes, start=1):
                if node.p_d != "R":
                    continue
                src = node.p_t
                for q in self._left_targets:
                    for mode in ("pre", "post"):
                        for endf in (False, True):
                            out.append(("cross", mode, q, dst, src, endf, "fromR"))
            self._entrants_cache[nodes] = tuple(out)
        return self._entrants_cache[nodes]


def build_history_two_nfa(m: Machine, k: int, max_cross=None, phase="full") -> HistoryTwoNfa:
    return HistoryTwoNfa(m, k, max_cross, phase)


_SWEEP_INIT = ("init",)


def _sweep_step(blank, state, col):
    """Deterministic successor of the structure sweep on one column (None if
    the sweep rejects): state column first, then a contiguous snapshot window
    (not starting or ending with an unmarked blank) padded on both sides;
    exactly one begin node, end node, and mark; the marked cell carries the
    state column's state."""
    t0 = col.track0
    if state is _SWEEP_INIT or len(state) == 1:
        if t0[0] != "state" or col.nodes:
            return None
        return (t0[1], 0, 0, 0, 0, False, frozenset())
    qs, b, mk, e, block, pb, needs = state
    if t0[0] == "state":
        return None
    if link_gives(col) != needs:
        return None  # links across the boundary must pair up exactly
    has_begin = bool(col.nodes) and col.nodes[0].p_d is None
    has_end = bool(col.nodes) and col.nodes[-1].s_d is None
    b2, e2 = b + has_begin, e + has_end
    marked_here = t0[0] == "cell" and t0[2] is not None
    mk2 = mk + (1 if marked_here else 0)
    if b2 > 1 or e2 > 1 or mk2 > 1:
        return None
    qs2 = qs
    if marked_here:
        if t0[2] != qs:
            return None
        qs2 = None
    if t0[0] == "pad":
        if block == 1:
            if pb:
                return None
            block2, pb2 = 2, False
        else:
            block2, pb2 = block, False
    else:
        if block == 2:
            return None
        if block == 0 and not marked_here and t0[1] == blank:
            return None
        block2 = 1
        pb2 = (not marked_here) and t0[1] == blank
    return (qs2, b2, mk2, e2, block2, pb2, link_needs(col))


def _sweep_accepts(state) -> bool:
    if state is _SWEEP_INIT or len(state) == 1:
        return False
    _qs, b, mk, e, block, pb, needs = state
    return (b == 1 and mk == 1 and e == 1 and block >= 1
            and not (block == 1 and pb) and not needs)


def phase1_nfa(m: Machine, columns, k: int, max_cross=None) -> Nfa:
    """One-way NFA over the given column alphabet implementing the structure
    sweep (see _sweep_step)."""
    source = ColumnSource(m, k, max_cross)
    columns = tuple(columns)
    valid = [col for col in columns
             if isinstance(col, ColumnSymbol) and col in source]
    index = {_SWEEP_INIT: 0}
    order = [_SWEEP_INIT]
    trans = {}
    pos = 0
    while pos < len(order):
        state = order[pos]
        src = pos
        pos += 1
        for col in valid:
            nxt = _sweep_step(m.blank, state, col)
            if nxt is None:
                continue
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            trans.setdefault((src, col), set()).add(index[nxt])
    final = {i for state, i in index.items() if _sweep_accepts(state)}
    return make_nfa(len(order), columns, trans, {0}, final)


def _intersect_with_sweep(m: Machine, a: Nfa) -> Nfa:
    """L(a) restricted to words the structure sweep accepts, as a reachable
    product; the sweep successor is computed per edge, so the sweep automaton
    is never materialized over the (often huge) column alphabet."""
    by_state: dict = {}
    for (p, sym), dsts in a.transitions.items():
        by_state.setdefault(p, []).append((sym, dsts))
    blank = m.blank
    index: dict = {}
    queue = []
    trans: dict = {}

    def sid(node):
        if node not in index:
            index[node] = len(index)
            queue.append(node)
        return index[node]

    for p in a.initial:
        sid((p, _SWEEP_INIT))
    initial = set(index.values())
    head = 0
    while head < len(queue):
        p, s = node = queue[head]
        head += 1
        src = index[node]
        for sym, dsts in by_state.get(p, ()):
            if sym is EPSILON:
                for p2 in dsts:
                    trans.setdefault((src, EPSILON), set()).add(sid((p2, s)))
                continue
            s2 = _sweep_step(blank, s, sym)
            if s2 is None:
                continue
            for p2 in dsts:
                trans.setdefault((src, sym), set()).add(sid((p2, s2)))
    final = {i for (p, s), i in index.items()
             if p in a.final and _sweep_accepts(s)}
    return make_nfa(max(len(index), 1), a.alphabet, trans, initial, final)


# -- extraction and the end-to-end constructor ---------------------------------------


class ExtractionGsm(Gsm):
    """Projects track 0: emits the state, copies window cells (head marker after
    the marked cell), erases pads."""

    def __init__(self, m: Machine):
        super().__init__(1, {}, 0, {0}, store_alphabet(m))

    def moves(self, state, sym):
        if not isinstance(sym, ColumnSymbol):
            return ()
        t0 = sym.track0
        if t0[0] == "state":
            return ((0, (t0[1],)),)
        if t0[0] == "pad":
            return ((0, ()),)
        if t0[2] is not None:
            return ((0, (t0[1], HEAD)),)
        return ((0, (t0[1],)),)


def extraction_gsm(m: Machine) -> ExtractionGsm:
    return ExtractionGsm(m)


def store_nfa(m: Machine, r: int) -> Nfa:
    """NFA for the store configurations occurring in r-crossing accepting
    computations of m.  Exactly S(m) when m is r-crossing.

    Track count is 2r + 1: an r-crossing computation gives each cell at most
    2r entering crossings, plus the start cell's first sojourn which is
    entered without one.
    """
    if r < 1:
        raise ValueError("crossing parameter must be at least 1")
    if m.counter_count != 0:
        raise ValueError("store construction requires a counter-free machine")
    k = 2 * r + 1
    walk = build_history_two_nfa(m, k, max_cross=r, phase="walk")
    walk_nfa = two_nfa_to_nfa(walk)
    raw = _intersect_with_sweep(m, walk_nfa)
    return gsm_image(raw, extraction_gsm(m))
