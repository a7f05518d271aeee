import json
import subprocess
import sys

import pytest

from gevreylab import cli, experiments
from gevreylab.cli import INVALID, NUMERICAL, OK, VERIFY_FAILED, main

GOOD = """\
equation.kind = mkdv
equation.mu = 1
grid.n = 64
grid.length = 8pi
initial.family = soliton
integrator.dt = 1e-3
integrator.t_end = 0.05
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text + f"output.dir = {tmp_path}/out\n")
    return str(p)


def test_simulate_ok(tmp_path, capsys):
    assert main(["simulate", write(tmp_path, GOOD)]) == OK
    assert (tmp_path / "out" / "diagnostics.csv").exists()
    assert "out" in capsys.readouterr().out


def test_validation_error(tmp_path, capsys):
    assert main(["simulate", write(tmp_path, GOOD + "grid.n = 32\n")]) == INVALID
    assert "run.cfg:8" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.cfg")]) == INVALID


def test_numerical_failure(tmp_path, capsys):
    text = GOOD.replace("soliton", "sech\ninitial.A = 30\ninitial.w = 0.3").replace(
        "dt = 1e-3", "dt = 0.5").replace("t_end = 0.05", "t_end = 50")
    with pytest.warns(RuntimeWarning):
        assert main(["simulate", write(tmp_path, text)]) == NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_continue_needs_continuation_keys(tmp_path):
    assert main(["continue", write(tmp_path, GOOD)]) == INVALID


def test_verify_pass_and_fail(tmp_path, capsys, monkeypatch):
    assert main(["verify", "exp_lemma", "--seed", "3", "--samples", "20000", "--out", str(tmp_path)]) == OK
    assert capsys.readouterr().out.startswith("PASS exp_lemma")
    assert json.loads((tmp_path / "verify_exp_lemma.json").read_text())["seed"] == 3

    real = experiments.run_verify

    def failing(*a, **kw):
        out = real(*a, **kw)
        out["passed"] = False
        out["checks"][0]["passed"] = False
        return out

    monkeypatch.setattr(experiments, "run_verify", failing)
    assert main(["verify", "ximed", "--samples", "20000"]) == VERIFY_FAILED
    assert "FAIL ximed" in capsys.readouterr().out
    assert main(["verify", "unknown"]) == INVALID


def test_fit(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("T,sigma,budget_counter\n" + "".join(f"{t},{t ** -1.5},{i}\n"
                                                     for i, t in enumerate([1, 2, 4, 8, 16, 32])))
    assert main(["fit", str(p)]) == OK
    assert json.loads(capsys.readouterr().out)["exponent"] == pytest.approx(-1.5)
    assert main(["fit", str(p), "--range", "4,1"]) == INVALID
    assert main(["fit", str(p), "--range", "bad"]) == INVALID


def test_sweep(tmp_path, capsys):
    write(tmp_path, GOOD, "one.cfg")
    assert main(["sweep", str(tmp_path / "*.cfg"), "--workers", "1"]) == OK
    assert main(["sweep", str(tmp_path / "*.nothing")]) == INVALID


def test_argparse_errors_are_validation():
    assert main([]) == INVALID
    assert main(["simulate"]) == INVALID
    assert main(["verify", "ximed", "--seed", "x"]) == INVALID


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "gevreylab.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
    assert cli.build_parser().prog == "gevreylab"
