import json
import subprocess
import sys

import pytest

from symelim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_poly_with_trace_check(capsys, corpus_dir):
    code, out, _ = run(capsys, "analyze", str(corpus_dir / "fig1.loop"), "--poly",
                       "--max-degree", "3", "--trace-check", "100")
    assert code == 0
    assert "a - b - c = 0" in out and "6*s - 2*a^3 - 3*a^2 - a = 0" in out
    assert "trace check: all passed on 100 traces" in out


def test_fol_prints_array_invariant(capsys, corpus_dir):
    code, out, _ = run(capsys, "analyze", str(corpus_dir / "fig1.loop"), "--fol")
    assert code == 0
    assert "forall p. 0 <= p && p < b ==> B[p] > h(p)" in out


def test_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "no/such/file.loop")
    assert code == 2 and "no such file" in err


def test_syntax_error(capsys, tmp_path):
    bad = tmp_path / "bad.loop"
    bad.write_text("vars x; while (x < ) { x := 1; }")
    code, _, err = run(capsys, "parse", str(bad))
    assert code == 2 and "error" in err


def test_bad_flag_value(capsys, corpus_dir):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", str(corpus_dir / "fig1.loop"), "--format", "yaml"])
    assert exc.value.code == 2
    code, _, _ = run(capsys, "analyze", str(corpus_dir / "fig1.loop"), "--L-max", "0")
    assert code == 2


def test_resource_cap_exit(capsys, corpus_dir):
    code, out, _ = run(capsys, "analyze", str(corpus_dir / "fig1.loop"), "--fol",
                       "--max-generated", "100")
    assert code == 3 and "(partial)" in out


def test_possibly_incomplete_is_flagged(capsys, corpus_dir):
    code, out, _ = run(capsys, "analyze", str(corpus_dir / "fig1.loop"), "--L-max", "1")
    assert code == 3 and "possibly incomplete" in out


def test_structured_output_is_deterministic(capsys, corpus_dir):
    args = ("analyze", str(corpus_dir / "copy.loop"), "--fol", "--trace-check", "5",
            "--format", "structured", "--seed", "4")
    one = run(capsys, *args)
    two = run(capsys, *args)
    assert one == two and one[0] == 0
    doc = json.loads(one[1])
    assert doc["config"]["seed"] == 4
    assert "forall p. 0 <= p && p < i ==> A[p] == B[p]" in doc["fol"]["invariants"]


def test_tptp_export(capsys, corpus_dir, tmp_path):
    target = tmp_path / "copy.p"
    code, _, _ = run(capsys, "analyze", str(corpus_dir / "copy.loop"), "--fol",
                     "--tptp", str(target))
    assert code == 0
    lines = target.read_text().splitlines()
    assert lines and all(l.startswith("tff(") for l in lines)


def test_parse_round_trip(capsys, corpus_dir):
    code, out, _ = run(capsys, "parse", str(corpus_dir / "fig1.loop"))
    assert code == 0 and "while (a < n)" in out


def test_trace_with_given_inputs(capsys, corpus_dir):
    code, out, _ = run(capsys, "trace", str(corpus_dir / "fig1.loop"), "--param", "n=3",
                       "--array", "A=1,-2,3", "--uf", "zero")
    assert code == 0
    assert out.splitlines()[-1].endswith("B=[1, 3] C=[-2]")


def test_trace_bad_param(capsys, corpus_dir):
    code, _, err = run(capsys, "trace", str(corpus_dir / "fig1.loop"), "--param", "n")
    assert code == 2


def test_oracle_subcommand(capsys, corpus_dir):
    code, out, _ = run(capsys, "oracle", str(corpus_dir / "squares.loop"), "--degree", "2")
    assert code == 0 and "= 0" in out


def test_module_entry_point(corpus_dir):
    proc = subprocess.run([sys.executable, "-m", "symelim", "parse", str(corpus_dir / "copy.loop")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "B[i] := A[i];" in proc.stdout


def test_unsupported_recurrence(capsys, tmp_path):
    loop = tmp_path / "prod.loop"
    loop.write_text("vars x, y, i, n; x := 1; y := 1; i := 0;\n"
                    "while (i < n) { x := x*y; y := y + 1; i := i + 1; }")
    code, _, err = run(capsys, "analyze", str(loop))
    assert code == 2 and "unsupported loop" in err
