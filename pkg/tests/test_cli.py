"""Command-line front end: exit codes, outputs, manifests, error handling."""

import json

import pytest

from storelang import fixtures
from storelang import nfa as N
from storelang.cli import main
from storelang.machine import parse_machine, serialize_machine, simulate


@pytest.fixture()
def copy_match_file(tmp_path):
    p = tmp_path / "copy_match.ntm"
    p.write_text(serialize_machine(fixtures.copy_match()))
    return str(p)


def test_simulate_accept_and_reject(copy_match_file, capsys):
    assert main(["simulate", copy_match_file, "a$a"]) == 0
    assert "accept" in capsys.readouterr().out
    assert main(["simulate", copy_match_file, "a$b"]) == 1
    assert "reject" in capsys.readouterr().out


def test_simulate_limit_exhaustion(copy_match_file, capsys):
    assert main(["simulate", copy_match_file, "ab$ab", "--max-steps", "3"]) == 4
    assert "undecided" in capsys.readouterr().err


def test_simulate_dump_history(copy_match_file, capsys):
    assert main(["simulate", copy_match_file, "a$a", "--dump-history"]) == 0
    out = capsys.readouterr().out
    assert "state:" in out and "cell:" in out


def test_analyze_reports_metrics(copy_match_file, capsys):
    assert main(["analyze", copy_match_file, "ab$ab"]) == 0
    out = capsys.readouterr().out
    assert "min turns: 2" in out
    assert "min max-crossings: 3" in out


def test_store_nfa_and_member(copy_match_file, tmp_path, capsys):
    out = tmp_path / "store.nfa"
    assert main(["store-nfa", copy_match_file, "-r", "3", "-o", str(out)]) == 0
    assert main(["member", str(out), "q0 _^"]) == 0
    assert "member" in capsys.readouterr().out
    assert main(["member", str(out), "q3 zz"]) == 1


def test_equiv_and_empty(tmp_path, capsys):
    a = tmp_path / "a.nfa"
    b = tmp_path / "b.nfa"
    e = tmp_path / "e.nfa"
    lang = N.literal(("x", "y"), ("x",))
    a.write_text(N.serialize_nfa(lang))
    b.write_text(N.serialize_nfa(N.union(lang, N.empty_language(("x", "y")))))
    e.write_text(N.serialize_nfa(N.empty_language(("x", "y"))))
    assert main(["equiv", str(a), str(b)]) == 0
    assert main(["equiv", str(a), str(e)]) == 1
    assert "different" in capsys.readouterr().out
    assert main(["empty", str(e)]) == 0
    assert main(["empty", str(a)]) == 1


def test_filter_emits_runnable_machine(copy_match_file, tmp_path):
    out = tmp_path / "filt.ntm"
    assert main(["filter", copy_match_file, "-k", "3", "--mode", "crossing",
                 "-o", str(out)]) == 0
    filt = parse_machine(out.read_text())
    assert simulate(filt, tuple("a$a"), max_steps=400).accepting


def test_exists_k_exit_codes(copy_match_file):
    assert main(["exists-k", copy_match_file, "-k", "3", "--mode", "crossing"]) == 0
    assert main(["exists-k", copy_match_file, "-k", "0", "--mode", "crossing"]) == 1


def test_quotient_emits_machine(copy_match_file, tmp_path):
    rgx = tmp_path / "rgx.nfa"
    rgx.write_text(N.serialize_nfa(N.literal(("a", "b", "$"), ("a",))))
    out = tmp_path / "quot.ntm"
    assert main(["quotient", copy_match_file, str(rgx), "-o", str(out)]) == 0
    qm = parse_machine(out.read_text())
    # tight bounds: the ghost phase guesses suffixes, so wide limits explode
    assert simulate(qm, tuple("a$"), max_steps=30, max_tape=6).accepting


def test_oracle_report_format(copy_match_file, tmp_path):
    out = tmp_path / "report.txt"
    assert main(["oracle", copy_match_file, "--max-input", "3",
                 "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines == sorted(lines)
    assert any(line.startswith("q0 _^ ") for line in lines)
    # every line ends with the three metric minima
    for line in lines:
        parts = line.rsplit(" ", 3)
        assert all(p.isdigit() for p in parts[1:])


def test_common_exit_codes(copy_match_file, tmp_path, capsys):
    assert main(["common", copy_match_file, copy_match_file, "-r", "3"]) == 0
    assert "common configuration" in capsys.readouterr().out


def test_manifest_is_byte_stable(copy_match_file, capsys):
    main(["analyze", copy_match_file, "a$a"])
    first = capsys.readouterr().err.splitlines()
    main(["analyze", copy_match_file, "a$a"])
    second = capsys.readouterr().err.splitlines()
    m1, m2 = json.loads(first[0]), json.loads(second[0])
    assert first[0] == second[0]
    assert m1["command"] == "analyze"
    assert list(m1["inputs"].values())[0]  # input digest recorded
    assert first[-1].startswith("wall-clock:")


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ntm"
    bad.write_text("this is not a machine\n")
    assert main(["simulate", str(bad), "a"]) == 3
    assert "error" in capsys.readouterr().err


def test_usage_error_exit_code(copy_match_file, capsys):
    assert main(["store-nfa", copy_match_file]) == 2  # missing -r
    capsys.readouterr()


def test_bad_thread_env_is_parse_error(copy_match_file, monkeypatch, capsys):
    monkeypatch.setenv("SLT_THREADS", "many")
    assert main(["analyze", copy_match_file, "a$a"]) == 3
    capsys.readouterr()
