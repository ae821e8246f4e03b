import csv
import io
import json
import subprocess
import sys

import pytest

from so2deg.cli import InputError, load_problem, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_spectrum_disc_two_lines():
    code, text = call("spectrum", "--domain", "disc", "--max", "5")
    assert code == 0
    assert text.count("R[1,") == 2


def test_spectrum_csv_and_json():
    code, text = call("spectrum", "--domain", "cylinder", "--max", "20", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and rows[1]["rep"] == "R[1,1]" and rows[1]["dimension"] == "2"
    code, text = call("spectrum", "--domain", "interval", "--length", "2", "--max", "10", "--format", "json")
    assert [round(d["eigenvalue"], 6) for d in json.loads(text)] == [0.0, 2.467401, 9.869604]


def test_check_certificate_names_theorem_and_witness(fixture_path):
    code, text = call("check", fixture_path("example51.json"))
    assert code == 0
    first = text.splitlines()[0]
    assert first.startswith("Theorem SO2-existence-2 applies; witness")
    assert "z0_slope=70" in first and first.endswith("grad_total != Theta")


def test_check_empty_zeros(fixture_path):
    code, text = call("check", fixture_path("empty_zeros.json"))
    assert code == 0 and text.startswith("no theorem applies")


def test_check_json(fixture_path):
    code, text = call("check", fixture_path("lsgd_disc.json"), "--format", "json")
    doc = json.loads(text)
    applies = {v["theorem"] for v in doc["verdicts"] if v["applies"]}
    assert "SO2-existence-1" in applies and "LS-existence" not in applies
    assert doc["index"]["ls_total"] == 0
    assert doc["index"]["grad_total"]["text"] == "(0; 1:1)"


def test_check_resonant_input_degrades(tmp_path):
    f = tmp_path / "res.json"
    f.write_text(json.dumps({"domain": {"type": "interval"}, "zeros": [{"value": 0, "slope": 9.869604401089358}], "slope_at_infinity": -1}))
    code, text = call("check", str(f))
    assert code == 0 and "?" in text


def test_index_table_and_json(fixture_path):
    code, text = call("index", fixture_path("tanh_interval.json"))
    assert code == 0 and "total" in text and "-2" in text
    code, text = call("index", fixture_path("tanh_interval.json"), "--format", "json")
    doc = json.loads(text)
    assert doc["ls_total"] == -2
    assert doc["grad_total"]["coordinates"][0] == {"subgroup": "SO(2)", "status": "known", "value": -2}


def test_bif(fixture_path):
    code, text = call("bif", fixture_path("example54_interval.json"))
    assert code == 0 and "BIF = (2;) (nontrivial)" in text and "bif-meets applies" in text
    code, text = call("bif", fixture_path("example54_disc.json"), "--format", "json")
    doc = json.loads(text)
    assert doc["nonzero"] and doc["criterion"]["nontrivial_line"] is not None


def test_bif_needs_section(fixture_path):
    code, _ = call("bif", fixture_path("tanh_interval.json"))
    assert code == 2


def test_solve_interval(fixture_path):
    code, text = call("solve", fixture_path("tanh_interval.json"), "--format", "json")
    sols = json.loads(text)
    assert code == 0 and sols and all(s["residual_inf"] <= 1e-8 for s in sols)


def test_solve_disc_seed_mode(fixture_path):
    code, text = call("solve", fixture_path("lsgd_disc.json"), "--seed-mode", "1", "--eps", "0.1", "--format", "json")
    sols = json.loads(text)
    assert code == 0 and sols[0]["angular_content"]["1"] > 0.1


def test_continue_writes_stable_csv(fixture_path, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"b{i}.csv"
        code, _ = call(
            "continue", fixture_path("example54_interval.json"),
            "--from", "10.8696", "--to", "10.0", "--step", "0.5", "--amplitude", "7", "--output", str(path), "--coeffs",
        )
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.reader(io.StringIO(outs[0].decode())))
    assert rows[0][:5] == ["lambda", "l2_norm", "h1_norm", "residual_inf", "newton_iters"]
    assert rows[0][5] == "c0" and len(rows) > 2


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ({"domain": {"type": "disc"}, "expr": "u", "slope_at_infinity": 1, "foo": 1}, "foo"),
        ({"domain": {"type": "disc"}, "expr": "u"}, None),
        ({"domain": {"type": "disc"}, "expr": "u", "slope_at_infinity": 1, "slope_at_infinity_expr": "lambda"}, None),
        ({"domain": {"type": "torus"}, "expr": "u", "slope_at_infinity": 1}, None),
        ({"domain": {"type": "interval", "length": -1}, "expr": "u", "slope_at_infinity": 1}, None),
        ({"domain": {"type": "disc"}, "expr": "u +", "slope_at_infinity": 1}, "offset 3"),
        ({"domain": {"type": "disc"}, "slope_at_infinity": 1}, None),
        ({"domain": {"type": "custom", "lines": [{"eigenvalue": 1, "rep": {"0": 1}}, {"eigenvalue": 1, "rep": {"1": 1}}]}, "zeros": [{"value": 0, "slope": -1}], "slope_at_infinity": 1}, None),
    ],
)
def test_invalid_problem_files(tmp_path, capsys, doc, fragment):
    f = tmp_path / "p.json"
    f.write_text(json.dumps(doc))
    code, _ = call("check", str(f))
    assert code == 2
    if fragment:
        assert fragment in capsys.readouterr().err
    with pytest.raises(InputError):
        load_problem(doc)


def test_unreadable_and_malformed(tmp_path):
    assert call("check", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call("check", str(bad))[0] == 2
    assert call("nonsense")[0] == 2


def test_supplied_zero_sanity_note():
    lp = load_problem({"domain": {"type": "disc"}, "expr": "u", "zeros": [{"value": 0.5}], "slope_at_infinity": 1})
    assert any("0.5" in n for n in lp.notes)
    assert lp.spec.zeros[0].slope == 1.0


def test_auto_zeros_and_slope_expr():
    lp = load_problem({"domain": {"type": "interval"}, "expr": "21*tanh(u) - u", "slope_at_infinity_expr": "lambda - 1"})
    assert lp.spec.slope_inf == -1.0
    assert [round(z.slope, 6) for z in lp.spec.zeros][1] == 20.0


def test_numerical_failure_exit_code(tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"domain": {"type": "interval"}, "expr": "u^2 + 1 + lambda", "slope_at_infinity": 1, "zeros": [], "solver": {"modes": 4}}))
    code, _ = call("continue", str(f), "--from", "0", "--to", "1", "--step", "0.1")
    assert code == 3


def test_module_entry_point(fixture_path):
    proc = subprocess.run(
        [sys.executable, "-m", "so2deg", "spectrum", "--domain", "disc", "--max", "5", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.splitlines()[0] == "eigenvalue,dimension,rep,labels"
