"""Command-line front end: verdicts, exit codes and deterministic JSON."""

import json
from pathlib import Path

import numpy as np

from poissonkit.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--quiet", "--json", "-")
    return code, json.loads(out)


def test_check_multiplier_pass(capsys):
    code, rep = run_json(capsys, "check", SPECS / "lv.json", "--multiplier", "x1*x2*x3")
    assert code == 0 and set(rep["verdicts"].values()) == {"true"}


def test_check_divfree_and_integral(capsys):
    assert run(capsys, "check", SPECS / "rotation.json", "--divfree")[0] == 0
    code, out, _ = run(capsys, "check", SPECS / "lv.json", "--integral", "x1")
    assert code == 1 and "FAIL" in out


def test_parse_error_exit_2(capsys):
    code, _, err = run(capsys, "check", SPECS / "lv.json", "--multiplier", "x1 +* x2")
    assert code == 2
    assert "position" in err


def test_missing_file_exit_2(capsys):
    assert run(capsys, "check", SPECS / "missing.json", "--divfree")[0] == 2


def test_reduce_example1(capsys):
    code, rep = run_json(capsys, "reduce", SPECS / "zero_hopf_1.json", "--integral", "x3 + c/2*x1^2", "--order", "4")
    assert code == 0
    assert rep["values"]["phi"] == "-(1/2)*x1^2*c + h"


def test_reduce_rejects_non_integral(capsys):
    # x3 is only a first integral when c = 0
    code, _, err = run(capsys, "reduce", SPECS / "zero_hopf_1.json", "--integral", "x3", "--order", "3")
    assert code == 2 and "first integral" in err


def test_focus_ej2_center_slice(capsys):
    code, rep = run_json(capsys, "focus", SPECS / "ej2.json", "--integral", "x3 - x1^2", "--k", "3",
                         "--subs", "B1=0")
    assert code == 0
    assert rep["values"]["g"] == {"g_1": "0", "g_2": "0", "g_3": "0"}


def test_focus_rotation(capsys):
    code, rep = run_json(capsys, "focus", SPECS / "rotation.json", "--k", "3")
    assert code == 0 and rep["values"]["g"]["g_3"] == "0"


def test_poisson_verify_catalog(capsys):
    code, rep = run_json(capsys, "poisson", "verify", SPECS / "lv.json", "--catalog", "lotka-volterra-3d")
    assert code == 0 and set(rep["verdicts"].values()) == {"true"}


def test_poisson_verify_tampered_h(capsys):
    code, rep = run_json(capsys, "poisson", "verify", SPECS / "lv.json", "--catalog", "lotka-volterra-3d",
                         "--H", "x1 + x2")
    assert code == 1 and rep["verdicts"]["field-match"] == "false"


def test_poisson_build_rotation(capsys):
    code, rep = run_json(capsys, "poisson", "build", "--h1", "x1^2+x2^2", "--h2", "x3", "--eta", "1/2")
    assert code == 0
    assert rep["values"]["field"] == ["-x2", "x1", "0"]


def test_measure_t0_and_rotation(capsys):
    code, rep = run_json(capsys, "measure", SPECS / "rotation.json", "--multiplier", "1", "--box", "-1,1;-1,1",
                         "--t", "0", "--samples", "500")
    assert code == 0 and rep["values"]["drift"] == 0.0
    code, rep = run_json(capsys, "measure", SPECS / "rotation.json", "--multiplier", "1", "--box=-1,1;-1,1",
                         "--samples", "500", "--threshold", "1e-9")
    assert code == 0


def test_weak_negative_control_fails(capsys):
    code, rep = run_json(capsys, "weak", SPECS / "rotation_control.json", "--W-plus", "1", "--W-minus", "2",
                         "--gamma", "x", "--bumps", "10")
    assert code == 1 and rep["values"]["max_residual"] > 1e-4


def test_weak_smooth_multiplier_passes(capsys):
    code, rep = run_json(capsys, "weak", SPECS / "isochronous.json", "--W",
                         "(3 - 16*x2)*(9 - 24*x2 + 32*x1^2)", "--bumps", "2")
    assert code == 0


def test_simulate_and_dump(capsys, tmp_path):
    dump = tmp_path / "traj.json"
    code, rep = run_json(capsys, "simulate", SPECS / "rotation.json", "--x0", "1,0", "--t", "6.283185307179586",
                         "--dump", dump)
    assert code == 0
    assert abs(rep["values"]["final"][0] - 1) < 1e-8
    data = np.loadtxt(dump)
    assert data.shape[1] == 3 and data[0, 0] == 0.0


def test_catalog_list_and_show(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0 and "lotka-volterra-3d" in out
    code, rep = run_json(capsys, "catalog", "show", "berrone-giacomini-3d", "--verify")
    assert code == 0


def test_json_is_deterministic(capsys, tmp_path):
    args = ["measure", SPECS / "lv_numeric.json", "--multiplier", "x1*x2*x3", "--box", "1,2;1,2;1,2",
            "--samples", "300", "--seed", "7"]
    outs = []
    for k in range(2):
        f = tmp_path / f"r{k}.json"
        assert main([str(a) for a in args] + ["--quiet", "--json", str(f)]) == 0
        rep = json.loads(f.read_text())
        rep.pop("timing")
        rep["command"] = [c for c in rep["command"] if not c.endswith(f"r{k}.json")]
        outs.append(json.dumps(rep, sort_keys=True))
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["seed"] == 7
