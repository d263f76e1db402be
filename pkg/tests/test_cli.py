import csv
import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from pngdet import cli


def run(argv, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def read_csv(path):
    with open(path) as fh:
        head = fh.readline()
        assert head.startswith("# manifest: ")
        man = json.loads(head[len("# manifest: "):])
        rows = list(csv.DictReader(fh))
    return man, rows


def test_verify_quick():
    code, out, _ = run(["verify", "--quick"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 6 and all(l.startswith("PASS") for l in lines)


def test_tw_dist_monotone(tmp_path):
    path = str(tmp_path / "tw.csv")
    code, _, _ = run(["tw-dist", "--xi-min", "-5", "--xi-max", "2", "--step", "0.1", "--out", path])
    assert code == 0
    man, rows = read_csv(path)
    assert man["subcommand"] == "tw-dist"
    F1 = np.array([float(r["F1"]) for r in rows])
    F2 = np.array([float(r["F2"]) for r in rows])
    assert len(rows) == 71
    assert np.all(np.diff(F1) >= 0) and np.all(np.diff(F2) >= 0)
    assert np.all(F1 ** 2 <= F2 + 1e-15)
    side = json.loads(open(path + ".run.json").read())
    assert "start" in side and "end" in side


def test_unknown_flag_is_json_error():
    code, out, err = run(["tw-dist", "--bogus", "1"])
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "usage"


def test_unknown_subcommand():
    code, _, err = run(["nope"])
    assert code == 2 and "error" in json.loads(err)


def test_invalid_input_exit_code():
    code, _, err = run(["circle-walk", "--n", "2"])
    assert code == 1 and json.loads(err)["message"]
    code, _, err = run(["airy-fdd", "--taus", "0,1", "--xis", "0"])
    assert code == 1 and json.loads(err)["error"] == "invalid"


def test_unknown_config_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"xi_min": -1, "colour": "red"}))
    code, _, err = run(["tw-dist", "--config", str(p)])
    assert code == 1 and "colour" in json.loads(err)["message"]


def test_help_documents_every_flag(capsys):
    for name, spec in cli.SPECS.items():
        code = cli.main([name, "--help"])
        assert code == 0
        text = capsys.readouterr().out
        for key in spec:
            assert "--" + key.replace("_", "-") in text


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    path = str(tmp_path / "sim.json")
    code, _, _ = run(["simulate-png", "--N", "16", "--q", "0.25", "--samples", "500", "--seed", "7",
                      "--observable", "gpl", "--ref", "tw1", "--out", path])
    assert code == 0
    first = open(path, "rb").read()
    rep = json.loads(first)
    assert "ks" in rep and rep["manifest"]["seed"] == 7
    shutil.copy(path, tmp_path / "manifest.json")
    code, _, _ = run(["simulate-png", "--config", str(tmp_path / "manifest.json")])
    assert code == 0
    assert open(path, "rb").read() == first


def test_csv_rerun_from_manifest(tmp_path):
    path = str(tmp_path / "k.csv")
    code, _, _ = run(["kernel-eval", "--N", "6", "--u", "0", "--v", "1", "--out", path])
    assert code == 0
    first = open(path, "rb").read()
    man, rows = read_csv(path)
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps(man))
    assert run(["kernel-eval", "--config", str(cfgfile)])[0] == 0
    assert open(path, "rb").read() == first


def test_seed_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("PNG_DET_SEED", "99")
    code, out, _ = run(["lpp", "--M", "3", "--N", "3"])
    man = json.loads(out.splitlines()[0][len("# manifest: "):])
    assert man["seed"] == 99
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"seed": 5}))
    code, out, _ = run(["lpp", "--M", "3", "--N", "3", "--config", str(cfgfile)])
    assert json.loads(out.splitlines()[0][len("# manifest: "):])["seed"] == 5
    code, out, _ = run(["lpp", "--M", "3", "--N", "3", "--config", str(cfgfile), "--seed", "6"])
    assert json.loads(out.splitlines()[0][len("# manifest: "):])["seed"] == 6
    monkeypatch.delenv("PNG_DET_SEED")
    code, out, _ = run(["lpp", "--M", "3", "--N", "3"])
    assert json.loads(out.splitlines()[0][len("# manifest: "):])["seed"] == cli.DEFAULT_SEED


def test_lpp_from_weights(tmp_path):
    from pngdet.lattice import WeightField
    WeightField(np.array([[1, 2], [3, 4]])).to_csv(tmp_path / "w.csv")
    code, out, _ = run(["lpp", "--weights", str(tmp_path / "w.csv")])
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert rows[-1] == {"i": "2", "j": "2", "w": "4", "G": "8"}


def test_fredholm_and_convergence():
    code, out, _ = run(["fredholm", "--N", "1", "--q", "0.3", "--levels", "0,1,2"])
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert [float(r["probability"]) for r in rows] == pytest.approx([1 - 0.3 ** k for k in (1, 2, 3)], abs=1e-12)
    code, out, _ = run(["fredholm", "--N", "6", "--levels", "10", "--u2", "1", "--level2", "12"])
    assert code == 0
    code, out, _ = run(["fredholm", "--N", "6", "--u2", "1"])
    assert code == 1
    code, out, _ = run(["convergence", "--Ns", "25,100"])
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert code == 0 and len(rows) == 2
    assert float(rows[1]["abs_diff_lattice"]) < float(rows[0]["abs_diff_lattice"])


def test_circle_walk_output():
    code, out, _ = run(["circle-walk", "--N-sites", "5", "--n", "3", "--times", "0"])
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert code == 0 and len(rows) == 26
    assert float(rows[-1]["re"]) < 1e-10
    code, _, err = run(["circle-walk", "--N-sites", "6", "--n", "3", "--p-step", "0.5"])
    assert code == 1


def test_airy_fdd_json():
    code, out, _ = run(["airy-fdd", "--taus", "0", "--xis", "0"])
    rep = json.loads(out)
    assert code == 0 and rep["probability"] == pytest.approx(0.96937, abs=1e-4)


def test_transversal_and_two_time():
    code, out, _ = run(["transversal", "--N", "16", "--samples", "400", "--seed", "1"])
    rep = json.loads(out)
    assert code == 0 and set(rep["tails"]) == {"0.5", "1.0", "1.5", "2.0"}
    code, out, _ = run(["simulate-png", "--N", "16", "--samples", "400", "--observable", "two_time",
                        "--ref", "airy", "--tau", "0.5"])
    rep = json.loads(out)
    assert code == 0 and "exact" in rep and "gap_sigma" in rep


def test_simulate_bad_reference():
    assert run(["simulate-png", "--samples", "200", "--N", "8", "--ref", "tw1"])[0] == 1


def test_console_script():
    exe = shutil.which("pngdet")
    cmd = [exe] if exe else [sys.executable, "-m", "pngdet.cli"]
    res = subprocess.run(cmd + ["airy-fdd", "--taus", "0,1", "--xis", "0,0"], capture_output=True, text=True)
    assert res.returncode == 0 and 0 < json.loads(res.stdout)["probability"] < 1
