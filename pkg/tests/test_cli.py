import json
import subprocess
import sys
from importlib import resources

import pytest

from brhbc.cli import main

REF = "reference_body.cfg"


def ref_text():
    return resources.files("brhbc.data").joinpath(REF).read_text()


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sweep_writes_csv_and_json(tmp_path, capsys):
    out = tmp_path / "gain.csv"
    code, _, err = run(capsys, "sweep", "--config", REF, "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "frequency_hz,gain_db,phase_rad,v_rx_volts"
    assert len(lines) == 1 + 1024
    doc = json.loads(out.with_suffix(".json").read_text())
    dom = doc["dominant_peaks"]
    assert len(dom) == 1 and 50e6 <= dom[0]["f_c_hz"] <= 150e6
    assert doc["config"]["model"]["n_segments"] == 512
    assert "dominant peaks: 1" in err


def test_sweep_is_byte_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "sweep", "--config", REF, "--out", str(a))[0] == 0
    assert run(capsys, "sweep", "--config", REF, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()


def test_sparse_sweep_skips_features(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code, _, err = run(capsys, "sweep", "--config", REF, "--points", "16", "--out", str(out))
    assert code == 0 and "warning" in err
    assert len(out.read_text().splitlines()) == 17
    assert json.loads(out.with_suffix(".json").read_text())["features"] is None


def test_sweep_band_and_segments(capsys):
    code, out, _ = run(capsys, "sweep", "--config", REF, "--band", "1e6,2e6", "--points", "3",
                       "--segments", "64")
    assert code == 0
    rows = out.splitlines()[1:]
    assert [float(r.split(",")[0]) for r in rows] == [1e6, pytest.approx(1.4142135e6), 2e6]


def test_missing_config_leaves_no_output(tmp_path, capsys):
    out = tmp_path / "gain.csv"
    code, _, err = run(capsys, "sweep", "--config", str(tmp_path / "nope.cfg"), "--out", str(out))
    assert code != 0 and "error" in err
    assert not out.exists() and not out.with_suffix(".json").exists()


def test_unknown_key_is_named(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(ref_text().replace("c_load = 2.3e-12", "c_load = 2.3e-12\nr_lod = 50"))
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 2 and "[termination] r_lod" in err


def test_invalid_value_is_named(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(ref_text().replace("skin_thickness = 0.004", "skin_thickness = 0.4", 1))
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 2 and "skin" in err


def test_capacity(capsys):
    code, out, err = run(capsys, "capacity", "--config", REF)
    assert code == 0
    doc = json.loads(out)
    assert doc["capacity"]["comparison_ratio"] >= 10
    assert doc["energy_per_bit_j"] > 0
    assert doc["capacity"]["noise"]["temperature_k"] == 290


def test_capacity_empty_band(capsys):
    code, _, err = run(capsys, "capacity", "--config", REF, "--band", "5e7,5e7")
    assert code != 0 and "empty band" in err


def test_safety(capsys):
    code, out, err = run(capsys, "safety", "--config", REF)
    doc = json.loads(out)
    assert code == 0 and doc["exposure"]["safe"]
    m = doc["exposure"]["margins"]
    assert m["e"] >= 10 and m["h"] >= 10 and m["sar"] >= 100


def test_leakage(tmp_path, capsys):
    out = tmp_path / "leak.csv"
    code, _, err = run(capsys, "leakage", "--config", REF, "--out", str(out))
    assert code == 0 and "0.5 m" in err
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    ratio = {float(d): float(q) for d, _, q in rows}
    assert ratio[0.5] < 0.1


def test_calibrate_fixture(capsys):
    code, out, _ = run(capsys, "calibrate", "--config", REF)
    assert code == 0
    c_b = float(out.split("C_B = ")[1].split(" pF")[0])
    assert abs(c_b / 150 - 1) < 0.10


def test_calibrate_missing_measurement(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(ref_text())
    code, _, err = run(capsys, "calibrate", "--config", str(cfg))
    assert code == 2 and "[calibration] measurement" in err


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle")
    assert code == 0
    assert out.count("PASS") == len(out.splitlines()) >= 9


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "brhbc", "oracle"], capture_output=True, text=True)
    assert r.returncode == 0 and "FAIL" not in r.stdout
