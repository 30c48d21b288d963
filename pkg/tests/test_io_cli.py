import json
import subprocess
import sys

import numpy as np
import pytest

from ballnorm.cli import main
from ballnorm.io import field_from_csv, field_to_csv, load_field, save_field
from ballnorm.torus import GridSpec, SampledField


@pytest.mark.parametrize("complex_", [False, True])
def test_field_csv_round_trip(complex_, rng):
    g = GridSpec(2, 8)
    v = rng.standard_normal(g.shape)
    if complex_:
        v = v + 1j * rng.standard_normal(g.shape)
    f = SampledField(g, v)
    text = field_to_csv(f)
    assert text.startswith("# dim=2,n_samples=8,kind=")
    back = field_from_csv(text)
    assert back.grid == g and np.array_equal(back.values, f.values)


@pytest.mark.parametrize("suffix", [".csv", ".npz"])
def test_field_file_round_trip(tmp_path, suffix, rng):
    f = SampledField(GridSpec(1, 16), rng.standard_normal(16))
    path = save_field(tmp_path / f"f{suffix}", f)
    assert np.array_equal(load_field(path).values, f.values)


def test_field_csv_needs_header():
    with pytest.raises(ValueError):
        field_from_csv("value\n1.0\n")


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def test_verify_identities_passes(tmp_path):
    code, out = run(tmp_path, "verify-identities", "--ell", "2", "--dim", "1")
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    names = {c["name"]: c for c in rep["checks"]}
    assert set(names) == {"multiplier_identity", "trig_identity", "central_difference_identity"}
    assert all(c["passed"] and c["value"] <= c["tolerance"] for c in names.values())
    assert rep["config"]["ell"] == 2


def test_slope_command(tmp_path):
    code, out = run(tmp_path, "slope", "--family", "weierstrass", "--alpha", "0.5", "--ell", "1", "--p", "inf")
    assert code == 0
    rows = (out / "slope.csv").read_text().splitlines()
    assert rows[0] == "k,magnitude" and len(rows) == 6
    rep = json.loads((out / "report.json").read_text())
    assert rep["result"]["slope"] == pytest.approx(-0.5, abs=0.1)


@pytest.mark.parametrize("args,table", [
    (["multiplier-table", "--kind", "A_ell", "--ell", "2"], "multiplier_table.csv"),
    (["norm", "--space", "tl", "--p", "inf", "--method", "ball", "--ell", "2"], "norm_scales.csv"),
    (["equivalence", "--alpha", "1.9", "--grid-sizes", "256,512"], "ratios.csv"),
    (["refine", "--grid-sizes", "128 256"], "refine.csv"),
])
def test_commands_are_reproducible(tmp_path, args, table):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert main([*args, "--out", str(out)]) == 0
        outs.append((out / table).read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("ell: 3\nsamples: 2000\nfields: 2\n")
    code, out = run(tmp_path, "verify-identities", "--config", str(cfg), "--ell", "1")
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["ell"] == 1 and rep["config"]["samples"] == 2000


def test_json_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "norm", "alpha": 0.5, "p": "inf", "q": "inf"}))
    code, out = run(tmp_path, "norm", "--config", str(cfg))
    assert code == 0
    assert json.loads((out / "report.json").read_text())["result"]["params"]["p"] == "inf"


@pytest.mark.parametrize("text", ["", "ell: [1, 2", "- 1\n- 2\n", "ell: 2\nbogus: 1\n", "command: slope\n"])
def test_bad_config_leaves_no_files(tmp_path, text):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(text)
    code, out = run(tmp_path, "verify-identities", "--config", str(cfg))
    assert code == 2
    assert not out.exists()


@pytest.mark.parametrize("args", [
    [], ["norm", "--p", "1"], ["norm", "--space", "tl", "--q", "1"], ["slope", "--window", "2,3"],
    ["norm", "--alpha", "x"], ["bogus"], ["norm", "--input", "missing.csv"],
])
def test_usage_errors(tmp_path, args):
    code, out = run(tmp_path, *args) if args else (main([]), tmp_path / "out")
    assert code == 2
    assert not out.exists()


def test_failed_check_exit_status(tmp_path):
    code, out = run(tmp_path, "slope", "--alpha", "0.5", "--tolerance", "1e-6")
    assert code == 1
    rep = json.loads((out / "report.json").read_text())
    assert rep["passed"] is False and rep["checks"][0]["passed"] is False


def test_io_error_exit_status(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["multiplier-table", "--out", str(blocker / "sub")]) == 3


def test_norm_of_input_field(tmp_path):
    g = GridSpec(1, 256)
    path = save_field(tmp_path / "f.csv", SampledField.from_function(g, lambda x: np.cos(16 * x)))
    code, out = run(tmp_path, "norm", "--input", str(path), "--p", "inf", "--q", "inf", "--alpha", "1")
    assert code == 0
    assert json.loads((out / "report.json").read_text())["result"]["aggregate"] == pytest.approx(16.0)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ballnorm", "multiplier-table", "--out", str(tmp_path / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
