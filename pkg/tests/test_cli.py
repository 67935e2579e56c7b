import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from pke_lab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


# classify ------------------------------------------------------------------------------

def test_classify_irc(capsys):
    code, rec = run_json(capsys, "classify", "--coeffs", "1,0,0,0,-1")
    assert code == 0
    assert rec["tag"] == "I_rc" and rec["D"] == -1
    assert list(rec) == list(cli.CLASSIFY_KEYS)
    assert rec["oracle_pattern"] == "I_rc[1,1,1,1]"


def test_classify_ir(capsys):
    code, rec = run_json(capsys, "classify", "--coeffs", "1,0,-0.8333333333,0,4")
    assert code == 0 and rec["tag"] == "I_r"


def test_classify_degenerate(capsys):
    code, rec = run_json(capsys, "classify", "--coeffs", "1,0,0,0,0")
    assert code == 0 and rec["tag"] == "Degenerate"
    assert rec["oracle_pattern"] == "Degenerate[4]"


def test_classify_zero_quartic(capsys):
    code, rec = run_json(capsys, "classify", "--coeffs", "0,0,0,0,0")
    assert code == 0 and rec["oracle_pattern"] == "undefined"


def test_classify_csv(capsys):
    code, out, _ = run(capsys, "classify", "--coeffs", "1,0,0,0,-1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["tag"] == "I_rc"
    assert list(rows[0]) == list(cli.CLASSIFY_KEYS)


def test_classify_from_case_seed(capsys):
    code, rec = run_json(capsys, "classify", "--case", "a32", "--seed", "F=0.1,w=0.4")
    assert code == 0 and rec["tag"] in ("I_r", "I_c", "I_rc")


@pytest.mark.parametrize("argv", [
    ["classify", "--coeffs", "1,2,3"],
    ["classify", "--coeffs", "1,a,0,0,0"],
    ["classify"],
    ["classify", "--case", "a32"],
    ["classify", "--coeffs", "1,0,0,0,0", "--format", "xml"],
    ["frobnicate"],
    ["integrate", "--case", "a35"],
    ["integrate", "--case", "a32", "--lambda", "0"],
    ["scan", "--case", "a33", "--F0", "1"],
    ["verify-example", "--lambda", "1"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


# integrate ---------------------------------------------------------------------------------

def test_integrate_a32_auto(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, summary = run_json(capsys, "integrate", "--case", "a32", "--seed", "auto", "--format", "csv",
                             "--out", str(out))
    assert code == 0 and summary["ok"]
    assert summary["max_hh_residual"] <= 1e-8
    assert summary["max_D_rel_err"] <= 1e-6
    assert "certificate" in summary and "events" in summary
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == list(cli.PL.TRAJECTORY_COLUMNS)
    assert len(rows) >= 50


def test_integrate_a35half_sigma_constant(capsys, tmp_path):
    out = tmp_path / "traj.json"
    code, summary = run_json(capsys, "integrate", "--case", "a35half", "--zeta0", "0", "--out", str(out))
    assert code == 0
    rows = json.loads(out.read_text())
    sigma = [r["Sigma"] for r in rows]
    assert np.ptp(sigma) <= 1e-10 * max(1.0, abs(sigma[0]))


def test_integrate_a34_a36_same_sigma(capsys, tmp_path):
    cols = []
    for case in ("a34", "a36"):
        out = tmp_path / f"{case}.json"
        code, _ = run_json(capsys, "integrate", "--case", case, "--seed", "g=0.3,Q=0.5", "--out", str(out))
        assert code == 0
        cols.append([r["Sigma"] for r in json.loads(out.read_text())])
    assert cols[0] == cols[1]


def test_integrate_singular_seed_exit_1(capsys):
    code, rec = run_json(capsys, "integrate", "--case", "a32", "--seed", "F=0.1,w=-0.3")
    assert code == 1 and rec["ok"] is False and "failure" in rec


def test_integrate_a33_exit_1(capsys):
    code, rec = run_json(capsys, "integrate", "--case", "a33", "--F0", "1")
    assert code == 1 and rec["failure"]["type"] == "DomainError"


def test_integrate_from_document(capsys, tmp_path):
    doc = tmp_path / "case.json"
    doc.write_text(json.dumps({"case": "a35", "lambda": 1.0, "m0": 0.25, "seed": "auto"}))
    code, summary = run_json(capsys, "integrate", "--doc", str(doc), "--samples", "10")
    assert code == 0 and summary["case"] == "A35"


# scan ------------------------------------------------------------------------------------------

def test_scan_a32_zero_line(capsys, tmp_path):
    out = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "scan", "--case", "a32", "--box", "F=-1:1,w=-1:1", "--grid", "21",
                     "--format", "csv", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 21 * 21
    assert list(rows[0]) == list(cli.PL.SCAN_COLUMNS)
    on_line = [r for r in rows if not r["error"] and abs(3 * json.loads(r["seed"])["F"] + json.loads(r["seed"])["w"]) < 1e-12]
    assert on_line
    for r in on_line:
        assert abs(float(r["D"])) <= 1e-12


def test_scan_a35_groups(capsys):
    code, rows = run_json(capsys, "scan", "--case", "a35", "--m0", "0.25,-0.25,0.75,-0.75", "--grid", "3")
    assert code == 0
    assert sorted({r["m0"] for r in rows}) == [-0.75, -0.25, 0.25, 0.75]
    assert len(rows) == 4 * 9
    assert [r["index"] for r in rows] == list(range(len(rows)))


def test_scan_parallel_is_order_stable(capsys):
    _, serial = run_json(capsys, "scan", "--case", "a34", "--grid", "5")
    _, parallel = run_json(capsys, "scan", "--case", "a34", "--grid", "5", "--jobs", "2")
    assert serial == parallel


def test_scan_example_transitions(capsys):
    code, rows = run_json(capsys, "scan", "--case", "example", "--z0", "1", "--grid", "600")
    assert code == 0
    trans = cli.PL.tag_transitions(rows)
    d2, d1 = 24.5 - 10 * 6**0.5, 24.5 + 10 * 6**0.5
    # the lower D root lies below the default span start
    assert rows[0]["seed"]["w"] > d2
    assert len(trans) == 1
    a, b, ta, tb = trans[0]
    assert {ta, tb} == {"I_c", "I_rc"} and a <= d1 <= b


# verify-example -----------------------------------------------------------------------------------

def test_verify_example_small(capsys):
    code, rep = run_json(capsys, "verify-example", "--lambda", "1", "--z0", "1", "--samples", "4",
                         "--type-samples", "60")
    assert code == 0 and rep["ok"]
    assert set(rep["checks"]) == {"landmarks", "type_intervals", "einstein", "killing"}
    assert rep["landmarks"]["D_roots"][0]["computed"] == pytest.approx(48.9949, abs=1e-4)
    assert rep["per_sample_types"]


def test_verify_example_strict_landmarks_fail(capsys):
    code, rep = run_json(capsys, "verify-example", "--lambda", "1", "--z0", "1", "--samples", "2",
                         "--type-samples", "20", "--strict-landmarks")
    assert code == 1 and not rep["checks"]["landmarks"]


def test_verify_example_csv(capsys, tmp_path):
    out = tmp_path / "pts.csv"
    code, _, _ = run(capsys, "verify-example", "--lambda", "-1", "--z0", "2", "--samples", "3",
                     "--type-samples", "40", "--format", "csv", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert code == 0 and len(rows) == 3
    assert list(rows[0]) == list(cli.POINT_COLUMNS)


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "pke_lab", "classify", "--coeffs", "1,0,0,0,-1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["tag"] == "I_rc"
    res = subprocess.run([sys.executable, "-m", "pke_lab", "classify", "--coeffs", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 2
