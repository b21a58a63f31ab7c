import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from conecontact.band_forms import BandForm, exterior_d, random_band_form
from conecontact.cli import main
from conecontact.contact import alpha_std
from conecontact.multilinear import pfaffian_batch
from conecontact.torus import TorusModel, grid_points

T1_GENERATORS = [{"point": [0, 0], "bivector": [1]}, {"point": [0, np.pi], "bivector": [-1]}]


def write_config(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, command, data, capsys=None, name="config.json"):
    code = main([command, "--config", write_config(tmp_path, name, data)])
    out = capsys.readouterr().out if capsys else ""
    return code, (json.loads(out) if out.strip() else None)


# -- verify-contact -------------------------------------------------------


def test_verify_contact_alpha_std(tmp_path, capsys):
    code, rep = run(tmp_path, "verify-contact", {"form": {"preset": "alpha_std"}, "grid": 5,
                                                 "outputs": {"csv": "density.csv"}}, capsys)
    assert code == 0
    assert rep["integral"] == pytest.approx(-(2 * np.pi) ** 3)
    lines = (tmp_path / "density.csv").read_text().splitlines()
    assert lines[0] == "# x0,x1,x2,density,pfaffian"
    assert len(lines) == 126
    assert [float(v) for v in lines[1].split(",")[-2:]] == pytest.approx([-1.0, -1.0])


def test_verify_contact_dz_fails(tmp_path, capsys):
    code, rep = run(tmp_path, "verify-contact", {"form": {"preset": "dz"}, "grid": 5}, capsys)
    assert code == 1 and rep["min_abs_density"] == 0.0


def test_verify_contact_form_file(tmp_path, capsys):
    (tmp_path / "a.form").write_text(alpha_std().to_text())
    code, _ = run(tmp_path, "verify-contact", {"form": {"path": "a.form"}}, capsys)
    assert code == 0


def test_malformed_form_exit_2(tmp_path, capsys):
    (tmp_path / "bad.form").write_text("dim 3\nband 1\ndegree 1\n0,0,1 | 0 | nope\n")
    code = main(["verify-contact", "--config", write_config(tmp_path, "c.json", {"form": {"path": "bad.form"}})])
    assert code == 2
    assert "cannot parse" in capsys.readouterr().err


@pytest.mark.parametrize("data", [
    {"form": {"preset": "alpha_std"}, "grid": 2},
    {"form": {"preset": "nope"}},
    {"grid": 5},
    {"form": {"path": "missing.form"}},
])
def test_config_errors_exit_2(tmp_path, data):
    assert run(tmp_path, "verify-contact", data)[0] == 2


def test_unreadable_config_exit_2(tmp_path):
    (tmp_path / "c.json").write_text("{not json")
    assert main(["verify-contact", "--config", str(tmp_path / "c.json")]) == 2


# -- symplectize, build-cone, check-ample --------------------------------


def test_symplectize(tmp_path, capsys):
    code, rep = run(tmp_path, "symplectize", {"form": {"preset": "alpha_std"}, "grid": 3}, capsys)
    assert code == 0 and rep["min_abs_pfaffian"] == pytest.approx(1.0)
    beta = BandForm.from_text((tmp_path / "symplectization.form").read_text())
    assert beta.degree == 2 and beta.model.t_axis == 0


def test_build_cone(tmp_path, capsys):
    code, rep = run(tmp_path, "build-cone", {"form": {"preset": "alpha_std"}, "grid": 3,
                                             "cone": {"probes": "frame"}}, capsys)
    assert code == 0 and rep["sites"] == 81 and rep["generators"] == 324
    assert (tmp_path / "cone.txt").read_text().startswith("# conecontact cone structure")


def test_check_ample(tmp_path, capsys):
    code, rep = run(tmp_path, "check-ample", {"form": {"preset": "alpha_std"}, "grid": 3,
                                              "ample": {"taus": 3, "max_sites": 2, "resolution": 90}}, capsys)
    assert code == 0 and rep["misses"] == []


# -- separate -------------------------------------------------------------


def test_separate_t1_exact_current(tmp_path, capsys):
    cfg = {"model": {"dim": 2, "band": 0, "t_axis": 0}, "band": 0, "generators": T1_GENERATORS}
    code, rep = run(tmp_path, "separate", cfg, capsys)
    assert code == 0 and rep["variant"] == "ExactCurrent"
    doc = json.loads((tmp_path / "certificate.json").read_text())
    assert doc["payload"]["weights"] == pytest.approx([0.5, 0.5])


def test_separate_empty_generators(tmp_path):
    cfg = {"model": {"dim": 2, "band": 0, "t_axis": 0}, "band": 0, "generators": []}
    assert run(tmp_path, "separate", cfg)[0] == 2


def test_separate_symplectic_mode(tmp_path, capsys):
    cfg = {"model": {"dim": 4, "band": 1}, "cone": {"from_acs": "standard", "probes": "frame+random"},
           "theta": "zero", "band": 1, "grid": 3}
    code, rep = run(tmp_path, "separate", cfg, capsys)
    assert code == 0 and rep["variant"] == "PositiveForm"
    doc = json.loads((tmp_path / "certificate.json").read_text())
    omega = BandForm.from_text(doc["payload"]["omega"])
    assert exterior_d(omega).max_abs() <= 1e-10
    assert pfaffian_batch(omega.matrices(grid_points(4, 3))).min() > 0


def test_separate_lcs_random_cone(tmp_path, capsys):
    rng = np.random.default_rng(5)
    gens = [{"point": list(rng.uniform(0, 6, 4)), "bivector": list(rng.normal(size=6))} for _ in range(12)]
    cfg = {"model": {"dim": 4, "band": 1}, "theta": [0.7, 0, 0, 0], "band": 1, "generators": gens}
    code, rep = run(tmp_path, "separate", cfg, capsys)
    assert code == 0 and rep["variant"] in ("PositiveForm", "ExactCurrent")
    assert main(["verify", "--config", write_config(tmp_path, "v.json", {"certificate": "certificate.json"})]) == 0


def test_separate_byte_identical(tmp_path, capsys):
    cfg = {"form": {"preset": "alpha_std"}, "grid": 3, "band": 1}
    texts = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        assert run(d, "separate", cfg, capsys)[0] == 0
        texts.append((d / "certificate.json").read_bytes())
        assert (d / "cone.txt").exists()
    assert texts[0] == texts[1]


# -- roundtrip and verify -------------------------------------------------


def test_roundtrip_and_verify(tmp_path, capsys):
    cfg = {"form": {"preset": "alpha_std"}, "grid": 3, "band": 1}
    code, rep = run(tmp_path, "roundtrip", cfg, capsys)
    assert code == 0 and rep["contact"] and rep["extracted_min_density"] > 0
    for name in ("certificate.json", "cone.txt", "extracted.form", "density.csv"):
        assert (tmp_path / name).exists()
    vcfg = write_config(tmp_path, "v.json", {"certificate": "certificate.json"})
    assert main(["verify", "--config", vcfg]) == 0

    # tampering with the cone is caught by the hash
    cone = tmp_path / "cone.txt"
    cone.write_text(cone.read_text() + "\n")
    assert main(["verify", "--config", vcfg]) == 4


def test_verify_detects_bad_certificate(tmp_path, capsys):
    cfg = {"form": {"preset": "alpha_std"}, "grid": 3, "band": 1}
    assert run(tmp_path, "separate", cfg, capsys)[0] == 0
    cert = tmp_path / "certificate.json"
    doc = json.loads(cert.read_text())
    doc["payload"]["margin"] = 10.0
    cert.write_text(json.dumps(doc))
    vcfg = write_config(tmp_path, "v.json", {"certificate": "certificate.json"})
    assert main(["verify", "--config", vcfg]) == 4
    assert main(["verify", "--config", write_config(tmp_path, "w.json", {"certificate": "nope.json"})]) == 2


def test_roundtrip_skew(tmp_path, capsys):
    cfg = {"form": {"preset": "alpha_std"}, "grid": [3, 3, 3, 4], "band": 1,
           "symmetries": [{"preset": "z+pi", "sign": -1}]}
    code, rep = run(tmp_path, "roundtrip", cfg, capsys)
    assert code == 0
    assert all(r <= 1e-9 for r in rep["skew_residuals"].values()) and rep["skew_residuals"]


def test_console_script(tmp_path):
    exe = shutil.which("conecontact")
    cmd = [exe] if exe else [sys.executable, "-m", "conecontact.cli"]
    path = write_config(tmp_path, "c.json", {"form": {"preset": "dz"}, "grid": 3})
    proc = subprocess.run(cmd + ["verify-contact", "--config", path], capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["contact"] is False
