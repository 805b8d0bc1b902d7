"""Batch command-line front end (`slt`).

Subcommands map 1:1 to library operations; outputs are files and exit codes.
Exit codes: 0 success/decided-true, 1 decided-false, 2 usage error, 3 input
parse error, 4 resource-limit exhaustion.  Every run emits a manifest on the
diagnostic stream; the manifest is byte-stable for identical inputs and
parameters (wall-clock time is reported on a separate diagnostic line).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from . import nfa as N
from .history import encode_history, format_history, store_nfa
from .machine import (
    MachineFormatError,
    metrics,
    parse_machine,
    parse_store_config,
    serialize_machine,
    simulate,
    store_config_of,
)
from .oracle import enumerate_store
from . import verify as V

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_LIMIT = 4


class _CliParseError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise _CliParseError(f"cannot read {path}: {e}") from None


def _load_machine(path: str):
    try:
        return parse_machine(_read(path))
    except MachineFormatError as e:
        raise _CliParseError(f"{path}: {e}") from None


def _load_nfa(path: str):
    try:
        return N.parse_nfa(_read(path))
    except N.NfaFormatError as e:
        raise _CliParseError(f"{path}: {e}") from None


def _word(text: str) -> tuple:
    """An input word from the command line: whitespace-separated tokens if any
    whitespace is present, otherwise one symbol per character."""
    if text == "":
        return ()
    if any(ch.isspace() for ch in text):
        return tuple(text.split())
    return tuple(text)


def _config_word(text: str, alphabet) -> tuple:
    """A store-configuration word from its textual form, tokenized greedily
    against the given store alphabet (state, tape with ^, counter values)."""
    parts = text.split()
    if not parts:
        raise _CliParseError("empty store configuration")
    word = [parts[0]]
    tape_text = parts[1] if len(parts) > 1 else ""
    tokens = sorted(alphabet, key=len, reverse=True)
    i = 0
    while i < len(tape_text):
        for tok in tokens:
            if tape_text.startswith(tok, i):
                word.append(tok)
                i += len(tok)
                break
        else:
            raise _CliParseError(f"cannot tokenize tape at offset {i} in {tape_text!r}")
    for idx, z in enumerate(parts[2:], start=1):
        try:
            word.extend([f"C{idx}"] * int(z))
        except ValueError:
            raise _CliParseError(f"bad counter value {z!r}") from None
    return tuple(word)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    raw = os.environ.get("SLT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise _CliParseError(f"SLT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise _CliParseError("SLT_THREADS must be non-negative")
    return n


def _manifest(command: str, files, params):
    digests = {}
    for path in files:
        try:
            with open(path, "rb") as f:
                digests[path] = hashlib.sha256(f.read()).hexdigest()
        except OSError:
            digests[path] = None
    return json.dumps(
        {
            "command": command,
            "version": __version__,
            "inputs": digests,
            "params": {k: v for k, v in sorted(params.items())},
            "threads": _threads(),
        },
        sort_keys=True,
    )


def _diag(msg: str):
    print(msg, file=sys.stderr)


def _validate_config_set(c, m, samples=5):
    """Sampled accepted words of a ConfigSet must parse as store configs."""
    seen = 0
    work = c
    while seen < samples:
        w = N.shortest_word(work)
        if w is None:
            break
        sc_text = w[0] + " " + "".join(t for t in w[1:] if not t.startswith("C"))
        counters = [0] * m.counter_count
        for t in w[1:]:
            if t.startswith("C") and t[1:].isdigit() and t in c.alphabet:
                counters[int(t[1:]) - 1] += 1
        if counters:
            sc_text += " " + " ".join(str(z) for z in counters)
        try:
            parse_store_config(sc_text, m)
        except ValueError as e:
            raise _CliParseError(f"config set accepts non-config word {w!r}: {e}") from None
        work = N.difference(work, N.literal(c.alphabet, w))
        seen += 1


# -- subcommand bodies -------------------------------------------------------------


def _cmd_simulate(args):
    m = _load_machine(args.machine)
    res = simulate(m, _word(args.word), max_steps=args.max_steps, max_tape=args.max_tape)
    if res.accepting:
        comp = res.accepting[0]
        print(f"accept in {len(comp)} steps; {len(res.accepting)} accepting computation(s)")
        if args.dump_history:
            addrs = comp.addresses()
            per_cell: dict = {}
            prev = None
            for a in addrs:
                if a != prev:
                    per_cell[a] = per_cell.get(a, 0) + 1
                prev = a
            k = max(per_cell.values())
            snap = args.snapshot if args.snapshot is not None else 0
            sys.stdout.write(format_history(encode_history(comp, snap, k)))
        return EXIT_TRUE
    if res.exhausted:
        _diag("undecided: step or tape limit hit before acceptance")
        return EXIT_LIMIT
    print("reject")
    return EXIT_FALSE


def _cmd_analyze(args):
    m = _load_machine(args.machine)
    res = simulate(m, _word(args.word), max_steps=args.max_steps, max_tape=args.max_tape)
    if not res.accepting:
        if res.exhausted:
            _diag("undecided: step or tape limit hit before acceptance")
            return EXIT_LIMIT
        print("reject")
        return EXIT_FALSE
    mets = [metrics(c) for c in res.accepting]
    print(f"accepting computations: {len(mets)}")
    print(f"min turns: {min(x.turns for x in mets)}")
    print(f"min max-visits: {min(x.max_visits for x in mets)}")
    print(f"min max-crossings: {min(x.max_crossings for x in mets)}")
    return EXIT_TRUE


def _cmd_store_nfa(args):
    m = _load_machine(args.machine)
    _diag(f"building store NFA for {m.name} at r={args.r}")
    a = store_nfa(m, args.r)
    _diag(f"done: {a.state_count} states")
    _emit(N.serialize_nfa(a), args.output)
    return EXIT_TRUE


def _cmd_member(args):
    a = _load_nfa(args.nfa)
    if any(ch.isspace() for ch in args.word) and "^" in args.word:
        word = _config_word(args.word, a.alphabet)
    else:
        word = _word(args.word)
    try:
        ok = a.accepts(word)
    except N.UnknownSymbolError:
        ok = False
    print("member" if ok else "not a member")
    return EXIT_TRUE if ok else EXIT_FALSE


def _cmd_equiv(args):
    a, b = _load_nfa(args.left), _load_nfa(args.right)
    if set(a.alphabet) != set(b.alphabet):
        union = tuple(sorted(set(a.alphabet) | set(b.alphabet)))
        a = N.Nfa(a.state_count, union, a.transitions, a.initial, a.final)
        b = N.Nfa(b.state_count, union, b.transitions, b.initial, b.final)
    w = N.separating_word(a, b)
    if w is None:
        print("equivalent")
        return EXIT_TRUE
    print("different: " + " ".join(w))
    return EXIT_FALSE


def _cmd_empty(args):
    a = _load_nfa(args.nfa)
    if N.is_empty(a):
        print("empty")
        return EXIT_TRUE
    w = N.shortest_word(a)
    print("nonempty: " + " ".join(w))
    return EXIT_FALSE


def _cmd_filter(args):
    m = _load_machine(args.machine)
    out = V.bound_filter(m, args.k, args.mode)
    _emit(serialize_machine(out), args.output)
    return EXIT_TRUE


def _cmd_exists_k(args):
    m = _load_machine(args.machine)
    _diag(f"deciding {args.k}-bounded ({args.mode}) existence for {m.name}")
    ok = V.exists_k_bounded(m, args.k, args.mode)
    print("exists" if ok else "does not exist")
    return EXIT_TRUE if ok else EXIT_FALSE


def _star_command(args, op):
    m = _load_machine(args.machine)
    c = _load_nfa(args.config_set)
    try:
        _validate_config_set(c, m)
    except N.AlphabetMismatchError as e:
        raise _CliParseError(str(e)) from None
    _diag(f"computing {op.__name__} for {m.name} at r={args.r}")
    try:
        result = op(m, args.r, c)
    except N.AlphabetMismatchError as e:
        raise _CliParseError(str(e)) from None
    _diag(f"done: {result.state_count} states")
    _emit(N.serialize_nfa(result), args.output)
    return EXIT_TRUE


def _cmd_post_star(args):
    return _star_command(args, V.post_star)


def _cmd_pre_star(args):
    return _star_command(args, V.pre_star)


def _cmd_common(args):
    m1, m2 = _load_machine(args.left), _load_machine(args.right)
    r1, r2 = args.r if len(args.r) == 2 else (args.r[0], args.r[0])
    _diag(f"intersecting store NFAs of {m1.name} (r={r1}) and {m2.name} (r={r2})")
    res = V.common_configs(m1, r1, m2, r2)
    if res.answer:
        print("common configuration: " + " ".join(res.witness))
        return EXIT_TRUE
    print("no common configuration")
    return EXIT_FALSE


def _cmd_quotient(args):
    m = _load_machine(args.machine)
    rgx = _load_nfa(args.rgx)
    try:
        out = V.right_quotient_machine(m, rgx)
    except N.AlphabetMismatchError as e:
        raise _CliParseError(str(e)) from None
    _emit(serialize_machine(out), args.output)
    return EXIT_TRUE


def _cmd_oracle(args):
    m = _load_machine(args.machine)
    report = enumerate_store(m, args.max_input, args.max_steps, max_tape=args.max_tape)
    lines = []
    for sc, e in report.entries.items():
        lines.append(f"{sc.to_text()} {e.min_turns} {e.min_visits} {e.min_crossings}")
    out = "".join(line + "\n" for line in sorted(lines))
    _emit(out, args.output)
    if report.exhausted:
        _diag("warning: search hit step or tape limits; report may be incomplete")
    return EXIT_TRUE


# -- argument wiring ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="slt", description="Store-language toolkit for finite-crossing machines."
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        return sp

    def limits(sp):
        sp.add_argument("--max-steps", type=int, default=200)
        sp.add_argument("--max-tape", type=int, default=64)

    sp = add("simulate", _cmd_simulate, "run a machine on an input word")
    sp.add_argument("machine")
    sp.add_argument("word")
    limits(sp)
    sp.add_argument("--dump-history", action="store_true",
                    help="print the history word of the first accepting computation")
    sp.add_argument("--snapshot", type=int, default=None,
                    help="configuration index shown on track 0 of the dumped history")

    sp = add("analyze", _cmd_analyze, "metrics of accepting computations on a word")
    sp.add_argument("machine")
    sp.add_argument("word")
    limits(sp)

    sp = add("store-nfa", _cmd_store_nfa, "build the store-language NFA")
    sp.add_argument("machine")
    sp.add_argument("-r", type=int, required=True, help="crossing parameter")
    sp.add_argument("-o", "--output")

    sp = add("member", _cmd_member, "test NFA membership of a word or store config")
    sp.add_argument("nfa")
    sp.add_argument("word")

    sp = add("equiv", _cmd_equiv, "language equivalence of two NFA files")
    sp.add_argument("left")
    sp.add_argument("right")

    sp = add("empty", _cmd_empty, "language emptiness of an NFA file")
    sp.add_argument("nfa")

    sp = add("filter", _cmd_filter, "build the k-bounded filter machine")
    sp.add_argument("machine")
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--mode", choices=("turn", "visit", "crossing"), required=True)
    sp.add_argument("-o", "--output")

    sp = add("exists-k", _cmd_exists_k, "does a k-bounded accepting computation exist?")
    sp.add_argument("machine")
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--mode", choices=("turn", "visit", "crossing"), required=True)

    for name, fn in (("post-star", _cmd_post_star), ("pre-star", _cmd_pre_star)):
        sp = add(name, fn, f"{name.replace('-', '')} of a regular config set")
        sp.add_argument("machine")
        sp.add_argument("-r", type=int, required=True)
        sp.add_argument("-C", "--config-set", required=True,
                        help="NFA file over the machine's store alphabet")
        sp.add_argument("-o", "--output")

    sp = add("common", _cmd_common, "shared non-initial store configurations")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("-r", type=int, nargs="+", required=True,
                    help="crossing parameters (one per machine)")

    sp = add("quotient", _cmd_quotient, "right quotient machine by a regular language")
    sp.add_argument("machine")
    sp.add_argument("rgx", help="NFA file over the machine's input alphabet")
    sp.add_argument("-o", "--output")

    sp = add("oracle", _cmd_oracle, "brute-force store-language report")
    sp.add_argument("machine")
    sp.add_argument("--max-input", type=int, default=4)
    limits(sp)
    sp.add_argument("-o", "--output")

    return p


_FILE_ARGS = ("machine", "nfa", "left", "right", "config_set", "rgx")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    params = {k: v for k, v in vars(args).items()
              if k not in ("fn", "command") and not callable(v)}
    files = [v for k, v in params.items() if k in _FILE_ARGS and isinstance(v, str)]
    t0 = time.monotonic()
    try:
        _diag(_manifest(args.command, files, params))
        code = args.fn(args)
    except _CliParseError as e:
        _diag(f"error: {e}")
        return EXIT_PARSE
    except ValueError as e:
        _diag(f"error: {e}")
        return EXIT_USAGE
    _diag(f"wall-clock: {time.monotonic() - t0:.3f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
