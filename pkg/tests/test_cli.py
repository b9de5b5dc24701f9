import json
import subprocess
import sys

import pytest

from sepvar.cli import dumps, main, parse_matrix, parse_params, InputError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_null_w_example(capsys):
    code, out, _ = run(capsys, "classify", "--space", "E2_1", "--A", "0", "--w", "1,1", "--m", "0")
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == 1
    assert rep["class"]["tag"] == "DegenerateNullAxial"


def test_classify_null_parabolic(capsys):
    code, out, _ = run(capsys, "classify", "--space", "E2_1", "--A", "0.5,0.5;0.5,0.5", "--w", "0.7071067811865476,-0.7071067811865476")
    rep = json.loads(out)
    assert code == 0 and rep["class"]["tag"] == "NullAxial" and rep["class"]["index"] == 2


def test_classify_central(capsys):
    code, out, _ = run(capsys, "classify", "--space", "E2", "--m", "1")
    assert code == 0 and json.loads(out)["class"]["tag"] == "Central"


@pytest.mark.parametrize("argv", [
    ["classify", "--space", "E2", "--A", "1,x"],
    ["classify", "--space", "E2", "--A", "1,2,3"],
    ["classify", "--space", "E2", "--A", "1,2;3,4"],
    ["classify", "--space", "Q5"],
    ["solve-kbd", "--potential", "q1^", "--space", "E2"],
    ["solve-kbd", "--potential", "q1", "--space", "E2", "--svd-tol", "0.5"],
    ["web", "verify", "--space", "dS2", "--case", "1", "--params", "a"],
    ["nonsense"],
])
def test_bad_input_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1


def test_solve_kbd_calogero(capsys):
    code, out, _ = run(capsys, "solve-kbd", "--potential", "calogero-moser")
    rep = json.loads(out)
    assert code == 0 and rep["dim"] == 4 and rep["includes_trivial"]


def test_separate_generic_fails(capsys):
    code, out, _ = run(capsys, "separate", "--potential", "q1^2*q2", "--space", "E2")
    rep = json.loads(out)
    assert code == 3 and rep["charts"] == [] and rep["trees"][0]["kind"] == "Fail"


def test_separate_calogero_exhaustive(capsys, tmp_path):
    dot = tmp_path / "cm.dot"
    code, out, err = run(capsys, "separate", "--potential", "calogero-moser", "--space", "E3", "--exhaustive",
                         "--dot", str(dot))
    rep = json.loads(out)
    assert code == 0 and len(rep["charts"]) == 5
    assert all(g["pass"] for g in rep["gates"])
    assert "spherical" in err and dot.read_text().count("digraph") == 5


def test_separate_morosi(capsys):
    code, out, _ = run(capsys, "separate", "--potential", "morosi-tondo", "--space", "E3_1", "--quiet")
    rep = json.loads(out)
    assert code == 0 and len(rep["charts"]) == 1 and rep["trees"][0]["class"] == "NullAxial"


def test_web_verify_ds2_case1(capsys):
    code, out, _ = run(capsys, "web", "verify", "--space", "dS2", "--case", "1", "--params", "a=0.6")
    rep = json.loads(out)
    assert code == 0 and max(r["pullback"] for r in rep["records"]) < 1e-6


def test_web_plot_groups(capsys, tmp_path):
    f = tmp_path / "case4.svg"
    code, _, _ = run(capsys, "web", "plot", "--space", "E2_1", "--case", "4", "-o", str(f))
    assert code == 0 and f.read_text().count('class="region"') == 5


def test_web_list_ads2(capsys):
    code, out, _ = run(capsys, "web", "list", "--space", "AdS2")
    assert code == 0 and len(json.loads(out)["cases"]) == 9


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("SEPVAR_SEED", "5")
    _, out, _ = run(capsys, "solve-kbd", "--potential", "calogero-moser")
    assert json.loads(out)["seed"] == 5
    monkeypatch.setenv("SEPVAR_SEED", "five")
    code, _, _ = run(capsys, "solve-kbd", "--potential", "calogero-moser")
    assert code == 1


def test_dumps_fixed_format():
    assert dumps({"a": 0.1, "b": [1, 2.0], "c": float("nan"), "d": True}) == \
        '{"a": 0.10000000000000001, "b": [1, 2.0], "c": null, "d": true}\n'


def test_parse_helpers():
    assert parse_matrix("2", 2).tolist() == [[2, 0], [0, 2]]
    assert parse_matrix("1,3", 2).tolist() == [[1, 0], [0, 3]]
    assert parse_params(["a=0.6,b=0.8"]) == {"a": 0.6, "b": 0.8}
    with pytest.raises(InputError):
        parse_params(["a"])


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "sepvar.cli", "web", "list", "--space", "E2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["space"] == "E2"


def test_verify_integrals_calogero(capsys, tmp_path):
    csv = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "verify-integrals", "--system", "calogero-moser", "--trajectories", "2",
                       "--T", "1", "--csv", str(csv))
    rep = json.loads(out)
    assert code == 0 and rep["brackets_max"] < 1e-6 and len(rep["drifts"]) == 2
    assert csv.read_text().startswith("t,q1,q2,q3,p1,p2,p3")
