import socket
import subprocess
import sys
import threading

import pytest

from corpus import VISU_PATTERNS
from tracerforge.cli import main
from tracerforge.driver import StreamChannel
from tracerforge.mediator import Mediator


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_figtrace_prints_default_trace(capsys):
    code, out, _ = run_cli(capsys, "run", "figtrace")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "1 newVariable v1=[0-268435455]"
    assert lines[3] == "4 reduce c1 v1=[1,2,3] delta=[0,4-268435455]"
    assert lines[11] == "12 reject c1"
    assert "solution i=1 a=2" in lines
    assert lines[-1].startswith("solutions: 1")


def test_run_with_pattern_file(capsys, tmp_path):
    pfile = tmp_path / "p.txt"
    pfile.write_text("s: when port=solution do current(chrono,node)\n")
    code, out, _ = run_cli(capsys, "run", "queens(4)", "--patterns", str(pfile))
    assert code == 0
    assert "messages: 2" in out
    assert "solutions: 2" in out


def test_run_model_file(capsys, tmp_path):
    mfile = tmp_path / "tiny.model"
    mfile.write_text(
        "# two-variable toy\n"
        "var x 1..3\n"
        "var y 1..3\n"
        "cons lt x y\n"
        "label input asc\n"
    )
    code, out, _ = run_cli(capsys, "run", str(mfile))
    assert code == 0
    assert "solution x=1 y=2" in out
    assert "solutions: 3" in out


def test_run_with_named_set_and_limit(capsys):
    code, out, _ = run_cli(capsys, "run", "queens(6)",
                           "--patterns-set", "8b", "--limit", "1")
    assert code == 0
    assert "solutions: 1" in out


def test_run_unknown_program(capsys):
    code, _, err = run_cli(capsys, "run", "mystery(9)")
    assert code == 2
    assert "error" in err


def test_parse_and_dump_automata(capsys, tmp_path):
    pfile = tmp_path / "v.txt"
    pfile.write_text(VISU_PATTERNS)
    code, out, _ = run_cli(capsys, "parse", str(pfile))
    assert code == 0
    assert out.splitlines()[0].startswith("visu_tree: when port in")

    code, out, _ = run_cli(capsys, "dump-automata", str(pfile))
    assert code == 0
    assert "visu_prop: entry=" in out
    assert "reduce" in out  # port table row


def test_parse_error_exit_code(capsys, tmp_path):
    pfile = tmp_path / "bad.txt"
    pfile.write_text("a: when port == reduce do call f\n")
    code, _, err = run_cli(capsys, "parse", str(pfile))
    assert code == 1
    assert "error" in err


def test_bench_smoke(capsys, tmp_path):
    report = tmp_path / "report.txt"
    code, out, _ = run_cli(
        capsys, "bench",
        "--programs", "queens(4);queens(5);figtrace",
        "--reps", "1",
        "--report", str(report),
    )
    assert code == 0
    assert "r_driver" in out
    assert "fit:" in out
    assert report.read_text().startswith("program")


def test_run_tcp_mediator_round_trip(capsys):
    # Full two-process shape in-process: the CLI connects over TCP to a
    # mediator thread that answers every freeze with go.
    server = socket.create_server(("127.0.0.1", 0))
    port = server.getsockname()[1]
    done = {}

    def mediate():
        conn, _addr = server.accept()
        channel = StreamChannel(conn.makefile("rb"), conn.makefile("wb"))
        mediator = Mediator(channel, console_input=lambda: None)
        mediator.serve()
        done["messages"] = len(mediator.messages)

    t = threading.Thread(target=mediate)
    t.start()
    code, out, _ = run_cli(capsys, "run", "figtrace",
                           "--mediator", f"tcp:{port}")
    t.join(timeout=10)
    assert code == 0
    assert not t.is_alive()
    assert done["messages"] == 23  # default trace: one message per event
    assert "events: 23" in out
