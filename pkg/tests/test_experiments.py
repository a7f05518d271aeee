import csv
import json
import math

import numpy as np
import pytest

from gevreylab.config import ConfigError, parse_config
from gevreylab.equations import EquationSpec
from gevreylab.experiments import (
    csv_header,
    fit_power_law,
    read_schedule,
    run_continuation,
    run_simulate,
    run_sweep,
    run_verify,
)

SMALL = """\
equation.kind = tnls
equation.alpha = 1
equation.beta = 1
equation.gamma = 1
grid.n = 64
grid.length = 2pi
initial.family = plane_wave
initial.A = 1
initial.k = 1
integrator.dt = 1e-3
integrator.t_end = 0.2
integrator.sample_every = 50
diagnostics.sigmas = 0.05, 0.1
"""


def test_csv_header_golden():
    assert csv_header(EquationSpec.mkdv(), (0.05, 0.4)) == [
        "t", "mass", "energy", "momentum_re", "momentum_im", "sigma_hat",
        "E_sigma_0.05", "E_sigma_0.4", "trust_0.05", "trust_0.4"]
    assert csv_header(EquationSpec.tnls(), (0.1,))[6:] == ["M_sigma_0.1", "trust_0.1"]


def test_simulate_outputs(tmp_path):
    out = run_simulate(parse_config(SMALL), tmp_path / "a")
    rows = list(csv.reader(open(out / "diagnostics.csv")))
    assert rows[0] == csv_header(EquationSpec.tnls(), (0.05, 0.1))
    assert len(rows) == 1 + 5
    assert rows[1][2] == "nan"
    # 17 significant digits round-trip exactly
    assert float(rows[-1][1]).hex() == float(repr(float(rows[-1][1]))).hex()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exact_error"] < 1e-10
    assert summary["relative_drift"]["mass"] < 1e-12
    traj = np.load(out / "trajectory.npy")
    assert traj.shape == (5, 64)
    np.testing.assert_allclose(np.load(out / "times.npy"), [0, 0.05, 0.1, 0.15, 0.2])


def test_simulate_is_byte_reproducible(tmp_path):
    a = run_simulate(parse_config(SMALL), tmp_path / "a")
    b = run_simulate(parse_config(SMALL), tmp_path / "b")
    for name in ("diagnostics.csv", "summary.json", "trajectory.npy", "times.npy"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_continuation_outputs(tmp_path):
    text = """\
equation.kind = mkdv
equation.mu = -1
grid.n = 64
grid.length = 8pi
initial.family = sech
initial.w = 0.5
integrator.dt = 5e-3
continuation.sigma0 = 0.3
continuation.T = 1.0
continuation.c0 = 1.0
continuation.a = 1.1
continuation.C = 0.05
"""
    out = run_continuation(parse_config(text), tmp_path)
    sched = read_schedule(out / "schedule.csv")
    assert sched[-1][0] == 1.0
    assert all(b[1] <= a[1] for a, b in zip(sched, sched[1:]))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "completed" and summary["constant"] == 0.05


@pytest.mark.parametrize("p", [-4 / 3, -0.5, 2.0])
def test_fit_recovers_exact_power_law(p):
    T = np.geomspace(1, 100, 12)
    fit = fit_power_law(list(zip(T, 0.3 * T ** p)))
    assert fit.exponent == pytest.approx(p, abs=1e-12)
    assert fit.coefficient == pytest.approx(0.3, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_range_and_errors():
    T = np.geomspace(1, 100, 30)
    sig = np.where(T < 10, 0.5, 5 * T ** -1.0)
    fit = fit_power_law(list(zip(T, sig)), (10, 100))
    assert fit.exponent == pytest.approx(-1.0)
    assert fit.range[0] >= 10
    with pytest.raises(ValueError, match="at least 5"):
        fit_power_law([(1, 1), (2, 0.5)])


def test_read_schedule_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_schedule(bad)
    bad.write_text("T,sigma\n1,x\n")
    with pytest.raises(ValueError, match=":2:"):
        read_schedule(bad)


def test_verify_report(tmp_path):
    res = run_verify("ximed", seed=5, outdir=tmp_path, samples=20_000)
    data = json.loads((tmp_path / "verify_ximed.json").read_text())
    assert data == json.loads(json.dumps(res))
    chk = data["checks"][0]
    assert {"check", "parameters", "samples", "max_ratio", "violations", "seed"} <= set(chk)
    assert data["passed"] and chk["seed"] == 5
    with pytest.raises(ValueError, match="unknown suite"):
        run_verify("nope")


def test_verify_kernel_small():
    res = run_verify("kernel", seed=1, samples=50_000)
    det = res["checks"][0]["details"]
    assert det["doubled"]["samples_used"] == 100_000
    assert math.isfinite(det["sweep_spread"])


def test_sweep_rejects_shared_output(tmp_path):
    for name in ("a", "b"):
        (tmp_path / f"{name}.cfg").write_text(SMALL + f"output.dir = {tmp_path}/same\n")
    with pytest.raises(ConfigError, match="already used"):
        run_sweep(str(tmp_path / "*.cfg"))
    with pytest.raises(ValueError, match="no config"):
        run_sweep(str(tmp_path / "*.none"))


def test_sweep_runs_each(tmp_path):
    for name in ("a", "b"):
        (tmp_path / f"{name}.cfg").write_text(SMALL + f"output.dir = {tmp_path}/{name}\n")
    res = run_sweep(str(tmp_path / "*.cfg"), workers=1)
    assert [rc for _, rc in res] == [0, 0]
    assert (tmp_path / "b" / "summary.json").exists()
