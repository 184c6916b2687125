import csv
import json
import math
import subprocess
import sys

import pytest

from latspec.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main


@pytest.fixture()
def v3_file(tmp_path):
    path = tmp_path / "v3.json"
    path.write_text(json.dumps({"d": 3, "entries": [{"site": [0, 0, 0], "re": 3.0}]}))
    return str(path)


@pytest.fixture()
def mix_file(tmp_path):
    payload = {"d": 3, "entries": [
        {"site": [0, 0, 0], "re": 1.1, "im": 0.4},
        {"site": [1, 0, 0], "re": -0.3, "im": 0.2},
        {"site": [0, 1, 0], "re": 0.5, "im": -0.1},
    ]}
    path = tmp_path / "mix.json"
    path.write_text(json.dumps(payload))
    return str(path)


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def test_green_subcommand(tmp_path):
    out = tmp_path / "g.json"
    rc = main(["green", "--d", "3", "--lambda", "0.3,0.4", "--site", "1,0,0", "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert rep["command"] == "green"
    assert rep["value"]["re"] == pytest.approx(0.22349737477122522, rel=1e-10)
    assert "generated_at" in rep


def test_green_boundary_method(tmp_path):
    out = tmp_path / "g.json"
    rc = main(["green", "--d", "3", "--lambda", "3", "--site", "0,0,0",
               "--method", "boundary-plus", "-o", str(out)])
    assert rc == EXIT_OK
    assert _load(out)["value"]["re"] == pytest.approx(-0.5054620197, abs=1e-8)


def test_green_rejects_complex_boundary():
    rc = main(["green", "--d", "3", "--lambda", "1,0.5", "--site", "0,0,0",
               "--method", "boundary-plus"])
    assert rc == EXIT_VALIDATION


def test_det_eval_subcommand(v3_file, tmp_path):
    out = tmp_path / "d.json"
    rc = main(["det-eval", "-p", v3_file, "--z", "0.25,0.1", "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert rep["value"]["re"] == pytest.approx(0.5055177679837912, rel=1e-9)


def test_det_eval_outside_disc(v3_file):
    assert main(["det-eval", "-p", v3_file, "--z", "1.2,0"]) == EXIT_VALIDATION


def test_missing_potential_file(tmp_path):
    rc = main(["det-eval", "-p", str(tmp_path / "nope.json"), "--z", "0,0"])
    assert rc == EXIT_VALIDATION


def test_malformed_potential_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension": 3}')
    assert main(["eigs", "-p", str(bad)]) == EXIT_VALIDATION


def test_taylor_check_subcommand(v3_file, tmp_path):
    out = tmp_path / "t.json"
    rc = main(["taylor-check", "-p", v3_file, "--r", "0.03", "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert rep["winner"] == "B"
    assert rep["moments_max_diff"] < 1e-10
    assert rep["c"][0]["re"] == pytest.approx(2.0, abs=1e-8)


def test_eigs_subcommand(v3_file, tmp_path):
    out = tmp_path / "e.json"
    rc = main(["eigs", "-p", v3_file, "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert len(rep["zeros"]) == 1
    assert rep["zeros"][0]["lambda"]["re"] == pytest.approx(3.5519590504, abs=1e-8)


def test_trace_check_and_thread_determinism(v3_file, tmp_path):
    out1 = tmp_path / "t1.json"
    out8 = tmp_path / "t8.json"
    rc1 = main(["--threads", "1", "trace-check", "-p", v3_file, "-o", str(out1)])
    rc8 = main(["trace-check", "-p", v3_file, "--threads", "8", "-o", str(out8)])
    assert rc1 == rc8 == EXIT_OK
    a, b = _load(out1), _load(out8)
    a.pop("generated_at"), b.pop("generated_at")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["rho0"] >= -1e-6


def test_bounds_report_subcommand(v3_file, tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bounds-report", "-p", v3_file, "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert rep["exact_pass"] is True
    assert rep["real_case"]["n2"]["smaller"] == "half"


def test_bounds_report_complex_has_no_real_case(mix_file, tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bounds-report", "-p", mix_file, "-o", str(out)])
    assert rc == EXIT_OK
    assert "real_case" not in _load(out)


def test_bessel_check_subcommand(tmp_path):
    out = tmp_path / "bes.json"
    rc = main(["bessel-check", "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert rep["normalization_residual"] < 1e-12
    assert rep["integral_representation_worst"] < 1e-10
    assert rep["beta_d3"]["tail_bound"] <= 0.033
    assert math.isfinite(rep["uniform_bound"]["C_emp"])


def test_sweep_subcommand(v3_file, tmp_path):
    out = tmp_path / "s.csv"
    rc = main(["sweep", "-p", v3_file, "--scale-grid", "0.5:1.1:3", "-o", str(out)])
    assert rc == EXIT_OK
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert int(rows[0]["n_zeros"]) == 0  # 1.5 is below threshold
    assert int(rows[-1]["n_zeros"]) == 1
    assert main(["sweep", "-p", v3_file, "--scale-grid", "0.5:1.1:3"]) == EXIT_VALIDATION
    assert main(["sweep", "-p", v3_file, "--scale-grid", "junk", "-o", str(out)]) == EXIT_VALIDATION


def test_config_defaults_and_override(v3_file, tmp_path):
    # config fills option defaults; flags given explicitly win; required
    # arguments must still be spelled out on the command line
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"r": 0.05, "seed": 9, "n-max": 3}))
    out = tmp_path / "t.json"
    rc = main(["taylor-check", "-p", v3_file, "--r", "0.03", "--config", str(cfg), "-o", str(out)])
    assert rc == EXIT_OK
    rep = _load(out)
    assert rep["r"] == 0.03  # explicit flag beats the config value
    assert rep["seed"] == 9 and len(rep["c"]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"no-such": 1}))
    assert main(["taylor-check", "-p", v3_file, "--config", str(bad), "--r", "0.05"]) == EXIT_VALIDATION


def test_seed_position_agnostic(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    base = ["green", "--d", "3", "--lambda", "5", "--site", "0,0,0"]
    assert main(["--seed", "3"] + base + ["-o", str(out1)]) == EXIT_OK
    assert main(base + ["--seed", "3", "-o", str(out2)]) == EXIT_OK
    assert _load(out1)["seed"] == _load(out2)["seed"] == 3


def test_module_entry_point_runs(v3_file, tmp_path):
    # end-to-end through a real interpreter
    out = tmp_path / "m.json"
    proc = subprocess.run(
        [sys.executable, "-m", "latspec.cli", "eigs", "-p", v3_file, "-o", str(out)],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(_load(out)["zeros"]) == 1
