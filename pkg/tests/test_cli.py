import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from pairforge import cli, materials
from pairforge.nonlinear import ShgParams, shg_spectrum, write_spectrum_csv


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_fidelity(capsys):
    code, out, _ = run(["fidelity", "--snr", "13.5"], capsys)
    assert code == 0
    assert "P = 0.87097" in out and "F = 0.90323" in out


def test_fidelity_json(capsys):
    code, out, _ = run(["fidelity", "--snr", "0", "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["fidelity"] == 0.25


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(["fidelity", "--snr", "1", "--bogus"], capsys)
    assert code == 2
    assert err.startswith("pairforge: error code=2")


def test_missing_command(capsys):
    assert run([], capsys)[0] == 2


def test_bad_threads(capsys):
    assert run(["fidelity", "--snr", "1", "--threads", "0"], capsys)[0] == 2


def test_negative_snr_is_input_error(capsys):
    code, _, err = run(["fidelity", "--snr", "-1"], capsys)
    assert code == 3 and "kind=ValueError" in err


def test_schema_error_exit_code(tmp_path, capsys):
    doc = json.loads(open(materials.data_path("paper_device.json")).read())
    doc["layers"][1]["thickness_nm"] = -1
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, _, err = run(["modes", "--device", str(p)], capsys)
    assert code == 3 and "kind=SchemaError" in err and "core_lower" in err


def test_missing_file_exit_code(capsys):
    assert run(["analyze", "--histogram", "/nonexistent.csv"], capsys)[0] == 3


def test_solver_error_exit_code(tmp_path, capsys):
    p = tmp_path / "flat.csv"
    p.write_text("lambda_nm,intensity\n" + "".join(f"{1565 + i * 0.001:.4f},1.0\n" for i in range(500)))
    code, _, err = run(["loss", "--spectrum", str(p)], capsys)
    assert code == 4 and "kind=LossExtractionError" in err


def test_modes_csv(capsys):
    code, out, _ = run(["modes", "--wavelength", "785", "--pol", "TE"], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert any(r["family"] == "bragg" for r in rows)


def test_modes_json_profiles(tmp_path, capsys):
    out = tmp_path / "modes.json"
    code, _, _ = run(["modes", "--wavelength", "1570", "--format", "json", "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert {m["polarization"] for m in doc} == {"TE", "TM"}
    man = json.loads((tmp_path / "modes.json.manifest.json").read_text())
    assert man["command"] == "modes" and man["input_hashes"]


def test_tune_degeneracy_row(tmp_path, capsys):
    out = tmp_path / "curves.csv"
    code, _, err = run(["tune", "--temp-C", "20", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    deg = [r for r in rows if r["branch"] == "degenerate"]
    assert len(deg) == 1
    lp, ls, li = (float(deg[0][k]) for k in ("lambda_p_nm", "lambda_s_nm", "lambda_i_nm"))
    assert ls == pytest.approx(2 * lp, abs=1e-6) and li == pytest.approx(2 * lp, abs=1e-6)
    assert all(abs(float(r["delta_k_rad_per_cm"])) < 1e-4 for r in rows)
    assert "degenerate pair wavelength" in err


def test_loss_synthesize_then_extract(tmp_path, capsys):
    spec = tmp_path / "fp.csv"
    assert run(["loss", "--synthesize", "2.0", "--out", str(spec)], capsys)[0] == 0
    code, out, _ = run(["loss", "--spectrum", str(spec)], capsys)
    assert code == 0 and json.loads(out)["alpha_cm1"] == pytest.approx(2.0, abs=0.02)


def test_fitshg(tmp_path, capsys):
    lam = np.arange(1568.0, 1572.0, 0.002)
    p = tmp_path / "shg.csv"
    write_spectrum_csv(p, lam, shg_spectrum(ShgParams(phases=(0.3, 0.9, 1.7)), lam))
    code, out, _ = run(["fitshg", "--spectrum", str(p)], capsys)
    assert code == 0
    doc = json.loads(out)
    # the CSV stores the normalized spectrum in its second column
    assert doc["center_nm"] == pytest.approx(1570.0, abs=1e-3)
    assert doc["fwhm_nm"] == pytest.approx(0.6, rel=0.01)


def test_shg_writes_summary(tmp_path, capsys):
    out = tmp_path / "shg.csv"
    code, _, _ = run(["shg", "--out", str(out), "--step", "0.01"], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "shg.csv.summary.json").read_text())
    assert 0.3 <= summary["fwhm_nm"] <= 0.9


def test_coincide_analyze(tmp_path, capsys):
    out = tmp_path / "h.csv"
    code, _, _ = run(["coincide", "--seed", "7", "--gates", "200000", "--out", str(out)], capsys)
    assert code == 0 and (tmp_path / "h.csv.json").exists()
    code, text, _ = run(["analyze", "--histogram", str(out)], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["snr"] > 0 and doc["werner"]["fidelity"] > 0.25


def test_coincide_prints_chosen_seed(tmp_path, capsys):
    code, _, err = run(["coincide", "--gates", "1000", "--out", str(tmp_path / "h.csv")], capsys)
    assert code == 0 and err.startswith("seed=")
    man = json.loads((tmp_path / "h.csv.manifest.json").read_text())
    assert man["seed"] == int(err.strip().split("=")[1])


def test_coincide_needs_out(capsys):
    assert run(["coincide", "--seed", "1", "--gates", "10"], capsys)[0] == 3


@pytest.mark.parametrize("threads", ["1", "4"])
def test_coincide_byte_identical(tmp_path, capsys, threads):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["coincide", "--seed", "7", "--gates", "400000", "--out", str(a)], capsys)[0] == 0
    assert run(["coincide", "--seed", "7", "--gates", "400000", "--threads", threads, "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.json").read_bytes() == (tmp_path / "b.csv.json").read_bytes()


def test_console_script(tmp_path):
    exe = shutil.which("pairforge")
    cmd = [exe] if exe else [sys.executable, "-m", "pairforge.cli"]
    r = subprocess.run(cmd + ["fidelity", "--snr", "13.5"], capture_output=True, text=True, check=True)
    assert "F = 0.90323" in r.stdout
