import importlib.resources

import pytest

from cfmbench.cli import EXIT_ALARM, EXIT_INPUT, EXIT_OK, EXIT_UNRESOLVED, main
from cfmbench.hlsim import format_fault_table, simulate
from cfmbench.isa import bundled_isa
from cfmbench.operands import exhaustive_pool
from cfmbench.patterns import TestPattern, TestSet, format_testset


def isa_path(name):
    return str(importlib.resources.files("cfmbench").joinpath("data", f"{name}.isa"))


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


def test_gen_example1(out):
    assert main(["gen", "--isa", isa_path("example1"), "--seed", "1", "--out", str(out)]) == EXIT_OK
    assert set(p.name for p in out.iterdir()) == {"test.txt", "program.txt", "faulttable.txt",
                                                  "coverage.txt"}
    cov = (out / "coverage.txt").read_text().splitlines()
    assert "adjusted 100.00" in cov and not any(l.startswith("uncovered") for l in cov)
    assert "[PATTERNS]" in (out / "program.txt").read_text()


def test_gen_is_byte_identical_per_seed(tmp_path):
    runs = []
    for d in ("a", "b", "c"):
        seed = "5" if d != "c" else "6"
        main(["gen", "--isa", isa_path("minimips"), "--seed", seed, "--out", str(tmp_path / d)])
        runs.append((tmp_path / d / "test.txt").read_bytes())
    assert runs[0] == runs[1] != runs[2]


def test_input_errors(tmp_path, out, capsys):
    assert main(["gen", "--isa", str(tmp_path / "missing.isa"), "--out", str(out)]) == EXIT_INPUT
    empty = tmp_path / "empty.isa"
    empty.write_text("width 8\ncontrol 2\nmode ops\n")
    assert main(["gen", "--isa", str(empty), "--out", str(out)]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err
    assert main(["gen", "--isa", isa_path("example1"), "--seed", "-1"]) == EXIT_INPUT
    assert main(["hlsim", "--isa", isa_path("example1")]) == EXIT_INPUT      # --test missing
    bad = tmp_path / "bad.txt"
    bad.write_text("test NOPE 0 0\n")
    assert main(["hlsim", "--isa", isa_path("example1"), "--test", str(bad),
                 "--out", str(out)]) == EXIT_INPUT


def test_run_exit_codes(tmp_path, capsys):
    assert main(["run", "--isa", isa_path("example1"), "--out", str(tmp_path / "ok")]) == EXIT_OK
    assert capsys.readouterr().out.strip() == \
        "RESULT hl=100.0 gate_detected=14 gate_redundant=2 unknown=0"
    assert (tmp_path / "ok" / "summary.txt").exists()

    hard = tmp_path / "hard.isa"
    hard.write_text("width 32\ncontrol 1\nmode ops\nfunc SLT code 0 op SLT\nfunc AND code 1 op AND\n")
    assert main(["run", "--isa", str(hard), "--out", str(tmp_path / "hard"),
                 "--prover-cap", "1024"]) == EXIT_UNRESOLVED
    assert "unresolved" in capsys.readouterr().err


def test_run_alarm_exit(tmp_path, monkeypatch):
    import cfmbench.pipeline as pipeline
    gap = TestSet((TestPattern(0, 1, 1), TestPattern(1, 1, 1), TestPattern(1, 1, 0)))

    def fake_generate(iset, cs, budget, seed):
        ft = simulate(iset, gap)
        return gap, ft, ft.unsatisfied(cs)

    monkeypatch.setattr(pipeline, "generate", fake_generate)
    isa = tmp_path / "orand.isa"
    isa.write_text("width 1\ncontrol 1\nmode ops\nfunc OR code 0 op OR\nfunc AND code 1 op AND\n")
    assert main(["run", "--isa", str(isa), "--no-distinct", "--out", str(tmp_path)]) == EXIT_ALARM


def test_hlsim_gatesim_prove(tmp_path):
    iset = bundled_isa("example1")
    test = tmp_path / "t.txt"
    test.write_text(format_testset(TestSet((TestPattern(0, 6, 0), TestPattern(1, 5, 0),
                                            TestPattern(2, 3, 0))), iset))
    common = ["--isa", isa_path("example1"), "--out", str(tmp_path), "--test", str(test)]
    assert main(["hlsim", *common, "--no-distinct"]) == EXIT_OK
    assert "adjusted 100.00" in (tmp_path / "coverage.txt").read_text()
    assert main(["gatesim", *common]) == EXIT_OK
    gate = (tmp_path / "gatereport.txt").read_text()
    assert "oracle=REDUNDANT" in gate and gate.rstrip().splitlines()[-1].startswith("coverage ")
    assert main(["prove", *common]) == EXIT_OK
    # only the DISTINCT constraints are left, each satisfiable in direct mode
    red = (tmp_path / "redundancy.txt").read_text().splitlines()
    assert red and all(" : SAT " in line for line in red)


def test_report_renders_fault_table(tmp_path, capsys):
    iset = bundled_isa("addsub")
    a, b = exhaustive_pool(iset)
    ts = TestSet(tuple(TestPattern(f, int(x), int(y)) for f in range(2) for x, y in zip(a, b)))
    (tmp_path / "faulttable.txt").write_text(format_fault_table(simulate(iset, ts), iset))
    assert main(["report", "--dir", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    rows = [line.split() for line in text.splitlines()]
    assert ["ADD", "-", "11111110"] in rows and ["SUB", "11111110", "-"] in rows


def test_report_on_empty_dir(tmp_path, capsys):
    assert main(["report", "--dir", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "== fault table ==" in text and "== redundancy proofs ==" in text


def test_report_after_run(tmp_path, capsys):
    main(["run", "--isa", isa_path("example1"), "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["report", "--dir", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "faults 16 detected 14 undetected 2" in text
    assert text.count(": REDUNDANT") == 2
