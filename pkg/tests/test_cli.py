import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from etpa import cli
from etpa.sweep import CSV_COLUMNS, SweepRow


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- argument handling ------------------------------------------------------------

def test_value_range_forms():
    assert cli.value_range("2") == [2.0]
    assert cli.value_range("1,2.5") == [1.0, 2.5]
    assert cli.value_range("0:1:3") == [0.0, 0.5, 1.0]
    assert cli.value_range("1:100:3:log") == pytest.approx([1.0, 10.0, 100.0])
    for bad in ("1:2", "a", "1:2:0", "0:1:3:log", "1:2:3:lin", ","):
        with pytest.raises(Exception):
            cli.value_range(bad)


def test_unknown_flag_and_malformed_range_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["conventions", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["bounds", "--omega-cap", "1:2", "--gamma-fg", "1", "--psi-n-width", "1"])
    assert exc.value.code == 2


def test_nonpositive_range_exit_2(capsys):
    code, _, err = run(capsys, "bounds", "--omega-cap", "-1", "--gamma-fg", "1",
                       "--psi-n-width", "0.1")
    assert code == 2 and "omega-cap" in err


# -- bounds ---------------------------------------------------------------------------

def test_bounds_single_optimal_point(capsys):
    code, out, _ = run(capsys, "bounds", "--omega-cap", "1", "--gamma-fg", "1000",
                       "--psi-n-width", "0.01")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    (row,) = parse_csv(out)
    assert float(row["eta"]) == pytest.approx(2 / math.pi, rel=1e-3)
    assert float(row["f_EPP"]) == pytest.approx(2.0, abs=1e-3)
    assert row["bound_satisfied"] == "true"
    # nine significant digits in scientific notation
    assert lines[1].split(",")[3] == f"{float(row['eta']):.8e}"


def test_bounds_grid_has_one_row_per_point_in_order(capsys):
    code, out, _ = run(capsys, "bounds", "--omega-cap", "1:10:10", "--gamma-fg", "0.1:100:10:log",
                       "--psi-n-width", "0.05", "--method", "factors")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 100
    omegas = [float(r["omega_cap_rad_s"]) for r in rows]
    gammas = [float(r["gamma_fg_rad_s"]) for r in rows]
    assert omegas == sorted(omegas)
    assert gammas[:10] == sorted(gammas[:10])
    assert all(r["bound_satisfied"] == "true" for r in rows)


def test_bounds_parallel_output_matches_serial(capsys):
    args = ["bounds", "--omega-cap", "0.5,1", "--gamma-fg", "0.1,10", "--psi-n-width",
            "0.02", "--format", "json"]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--jobs", "3")
    assert serial == parallel


def test_bounds_random_checks_are_seeded(capsys):
    args = ["bounds", "--omega-cap", "1", "--gamma-fg", "0.5,5", "--psi-n-width", "0.05",
            "--random-checks", "20", "--format", "json"]
    code, a, _ = run(capsys, *args, "--seed", "5")
    _, b, _ = run(capsys, *args, "--seed", "5")
    _, c, _ = run(capsys, *args, "--seed", "6")
    assert code == 0 and a == b and a != c
    check = json.loads(a)["random_checks"][0]
    assert check["bound_satisfied"] and check["max_eta_B_over_bound"] <= 1 + 1e-9


def test_bounds_violation_exits_1(capsys, monkeypatch):
    bad = SweepRow(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.6, 1.0, 1.0, False)
    monkeypatch.setattr(cli, "bound_sweep", lambda *a, **k: [bad])
    code, out, err = run(capsys, "bounds", "--omega-cap", "1", "--gamma-fg", "1",
                         "--psi-n-width", "1")
    assert code == 1 and "violate" in err and "false" in out


def test_runtime_failure_exits_1(capsys, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("solver blew up")
    monkeypatch.setattr(cli, "bound_sweep", boom)
    code, _, err = run(capsys, "bounds", "--omega-cap", "1", "--gamma-fg", "1",
                       "--psi-n-width", "1")
    assert code == 1 and "solver blew up" in err


# -- feasibility ------------------------------------------------------------------------

def report(capsys, *argv):
    code, out, _ = run(capsys, "feasibility", *argv, "--format", "json")
    assert code == 0
    return json.loads(out)["report"]


def test_feasibility_golden(capsys):
    assert report(capsys, "--golden-r6g", "--source", "cw")["event_rate_per_s"] == \
        pytest.approx(11, rel=0.15)
    assert report(capsys, "--golden-r6g", "--source", "pulsed")["event_rate_per_s"] == \
        pytest.approx(8.8e-6, rel=0.15)


def test_feasibility_table(capsys):
    code, out, _ = run(capsys, "feasibility", "--golden-r6g")
    assert code == 0 and "event_rate_per_s" in out and "detectable" in out


def test_feasibility_config_file(capsys, tmp_path):
    path = tmp_path / "s.json"
    data = {"center_wavelength_nm": 1064, "marginal_bandwidth_nm": 40, "waist_radius": 5e-6,
            "cuvette_length": 0.01, "concentration_mmol": 100, "sigma2_gm": 9,
            "source": {"kind": "cw", "pair_rate": 1e13}}
    path.write_text(json.dumps(data))
    assert report(capsys, str(path))["event_rate_per_s"] == pytest.approx(10.79, rel=1e-3)
    code, _, err = run(capsys, "feasibility", str(path), "--source", "pulsed")
    assert code == 2


def test_feasibility_negative_waist(capsys, tmp_path):
    data = json.loads(json.dumps({**{k: v for k, v in cli.golden_r6g().to_dict().items()},
                                  "waist_radius": -5e-6}))
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "feasibility", str(path))
    assert code == 2 and "waist_radius" in err


def test_feasibility_missing_or_invalid_file(capsys, tmp_path):
    missing = tmp_path / "nope.json"
    code, _, err = run(capsys, "feasibility", str(missing))
    assert code == 2 and str(missing) in err
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    code, _, err = run(capsys, "feasibility", str(broken))
    assert code == 2 and str(broken) in err
    code, _, _ = run(capsys, "feasibility")
    assert code == 2


# -- conventions ---------------------------------------------------------------------------

def test_conventions_json(capsys):
    code, out, _ = run(capsys, "conventions", "--format", "json")
    assert code == 0
    rows = {r["function"]: r for r in json.loads(out)}
    assert set(rows) == {"box", "gaussian", "sinc2", "lorentzian"}
    assert rows["gaussian"]["duration_numeric"] == pytest.approx(2.5066, abs=1e-4)
    assert rows["box"]["duration_numeric"] == pytest.approx(1.0, rel=1e-12)
    assert all(r["rel_error"] < 1e-2 for r in rows.values())


@pytest.mark.parametrize("fmt", ["table", "csv"])
def test_conventions_other_formats(capsys, fmt):
    code, out, _ = run(capsys, "conventions", "--format", fmt)
    assert code == 0
    assert "duration_analytic" in out and "rel_error" in out and "lorentzian" in out


# -- qef ---------------------------------------------------------------------------------------

def qef_out(capsys, *argv):
    code, out, _ = run(capsys, "qef", *argv)
    assert code == 0
    return json.loads(out)


def test_qef_example(capsys):
    data = qef_out(capsys, "--n", "0.1", "--t-c", "1e-11", "--t-e", "1e-14")
    assert data["rows"][0]["qef"] == pytest.approx(1e4, rel=1e-12)
    assert "reduction" in data["note"] or "drops" in data["note"]


def test_qef_sweep_doubles(capsys):
    data = qef_out(capsys, "--n", "0.5,0.25", "--t-c", "1e-12", "--t-e", "1e-14")
    a, b = data["rows"]
    assert b["qef"] / a["qef"] == pytest.approx(2.0, rel=1e-12)
    assert b["p_f_epp"] / a["p_f_epp"] == pytest.approx(0.5, rel=1e-12)
    assert data["monotone"]


def test_qef_identity(capsys):
    data = qef_out(capsys, "--n", "1", "--t-c", "1e-13", "--t-e", "1e-13")
    assert data["rows"][0]["qef"] == 1.0


def test_qef_validation(capsys):
    code, _, _ = run(capsys, "qef", "--n", "2", "--t-c", "1e-13", "--t-e", "1e-13")
    assert code == 2
    code, _, _ = run(capsys, "qef", "--n", "0.5", "--t-c", "-1", "--t-e", "1e-13")
    assert code == 2


def test_qef_table(capsys):
    code, out, _ = run(capsys, "qef", "--n", "0.5", "--t-c", "1e-13", "--t-e", "1e-14",
                       "--format", "table")
    assert code == 0 and "p_f_epp" in out and "signal" in out


# -- jsa -----------------------------------------------------------------------------------------

def test_jsa_export_format(capsys, tmp_path):
    prefix = tmp_path / "j"
    code, out, _ = run(capsys, "jsa", "export", "--n-points", "101", "-o", str(prefix))
    assert code == 0
    info = json.loads(out)
    lines = (tmp_path / "j.csv").read_text().splitlines()
    assert lines[0] == "omega,omega_tilde,re,im"
    assert len(lines) == 101 * 101 + 1 == info["rows"] + 1
    meta = json.loads((tmp_path / "j.json").read_text())
    assert meta["n_points"] == 101 and meta["omega_cap_rad_s"] == 1.0


def test_jsa_marginal_follows_broad_factor(capsys, tmp_path):
    prefix = tmp_path / "m"
    code, _, _ = run(capsys, "jsa", "export", "--psi-n-width", "0.005", "--psi-b-shape",
                     "gaussian", "--n-points", "801", "--marginal", "-o", str(prefix))
    assert code == 0
    data = np.loadtxt(tmp_path / "m_marginal.csv", delimiter=",", skiprows=1)
    omega, m, target = data.T
    h = omega[1] - omega[0]
    l1 = np.sum(np.abs(m - target)) * h / (2 * math.pi)
    assert l1 < 0.02


def test_jsa_eta_round_trip(capsys, tmp_path):
    prefix = tmp_path / "r"
    run(capsys, "jsa", "export", "--psi-b-shape", "gaussian", "--n-points", "301",
        "-o", str(prefix))
    jsa = cli.build_export_jsa(cli.build_parser().parse_args(
        ["jsa", "export", "--psi-b-shape", "gaussian", "--n-points", "301", "-o", "x"]))
    direct = cli.spectral_overlap_eta(jsa, cli.LorentzianLine.resonant(0.0, 2.0)).eta
    code, out, _ = run(capsys, "jsa", "eta", "-i", str(prefix), "--gamma-fg", "2")
    assert code == 0
    data = json.loads(out)
    assert abs(data["eta"] / direct - 1) < 1e-9
    assert data["eta_max"] == pytest.approx(2 / math.pi)
    assert data["bound_satisfied"]


def test_jsa_spdc_export(capsys, tmp_path):
    code, out, _ = run(capsys, "jsa", "export", "--model", "spdc", "--pm-shape", "sinc",
                       "--n-points", "61", "-o", str(tmp_path / "s"))
    assert code == 0
    meta = json.loads((tmp_path / "s.json").read_text())
    assert meta["entanglement_ratio"] == pytest.approx(20.0)


def test_jsa_oversized_grid_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "jsa", "export", "--n-points", str(2 ** 14 + 1),
                       "-o", str(tmp_path / "big"))
    assert code == 2 and "16384" in err
    assert not (tmp_path / "big.csv").exists()


def test_jsa_eta_missing_input_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "jsa", "eta", "-i", str(tmp_path / "none"), "--gamma-fg", "1")
    assert code != 0


# -- determinism and entry point --------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["bounds", "--omega-cap", "1,2", "--gamma-fg", "1", "--psi-n-width", "0.05"],
    ["feasibility", "--golden-r6g", "--format", "json"],
    ["conventions", "--format", "csv"],
    ["qef", "--n", "0.1,0.2", "--t-c", "1e-13", "--t-e", "1e-14"],
])
def test_outputs_are_byte_identical(capsys, tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(argv + ["--output", str(a)]) == 0
    assert cli.main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "etpa.cli", "conventions", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)) == 4
