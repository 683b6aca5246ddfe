import json
import os

import numpy as np
import pytest

from jacscat import io
from jacscat.cli import main
from jacscat.errors import ValidationError
from jacscat.harmonic import CircleGrid
from jacscat.jacobi import JacobiOperator


def run(argv):
    return main(argv)


def test_forward_free(tmp_path):
    jac = tmp_path / "jac.json"
    io.save_jacobi(JacobiOperator.free(), str(jac))
    out = tmp_path / "out"
    code = run(["forward", str(jac), "--out", str(out), "--grid", "512"])
    assert code == 0
    scat = json.load(open(out / "scattering.json"))
    assert scat["grid_size"] == 512
    vals = [abs(v) for _, v in scat["coeffs_s_plus"]]
    assert not vals or max(vals) <= 1e-12
    report = json.load(open(out / "forward_report.json"))
    assert report["passed"]
    assert (out / "density.csv").exists()


def test_forward_rejects_bad_p(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_min": 0, "p": [0.0], "q": [0.1]}')
    code = run(["forward", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2


def test_forward_rejects_corrupt_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["forward", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert run(["diagnose", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_inverse_zero_reflection(tmp_path):
    scat = tmp_path / "scat.json"
    scat.write_text('{"grid_size": 512, "coeffs_s_plus": []}')
    out = tmp_path / "out"
    code = run(["inverse", str(scat), "--out", str(out), "--grid", "512",
                "--trunc", "64", "--half-width", "2"])
    assert code == 0
    rec = io.load_jacobi(str(out / "jacobi_recovered.json"))
    assert np.max(np.abs(rec.p - 1.0)) < 1e-9
    assert np.max(np.abs(rec.q)) < 1e-9
    rep = json.load(open(out / "inverse_report.json"))
    assert rep["unique"]


def test_roundtrip_single_site(tmp_path):
    out_g = tmp_path / "g"
    assert run(["gallery", "single-site", "--coupling", "0.7",
                "--out", str(out_g)]) == 0
    out_r = tmp_path / "r"
    code = run(["roundtrip", str(out_g / "jacobi_single_site.json"),
                "--out", str(out_r), "--grid", "1024", "--trunc", "128"])
    assert code == 0
    rep = json.load(open(out_r / "roundtrip_report.json"))
    assert rep["roundtrip_error"] <= 1e-6
    assert rep["passed"]


def test_gallery_example_flags_small_transmission(tmp_path):
    out = tmp_path / "g"
    code = run(["gallery", "example-nonunique", "--out", str(out)])
    assert code == 0
    rep = json.load(open(out / "gallery_report.json"))
    assert rep["min_abs_s"] < 1e-3
    assert rep["passed"]


def test_gallery_example_then_inverse_flags_nonuniqueness(tmp_path):
    out = tmp_path / "g"
    run(["gallery", "example-nonunique", "--out", str(out)])
    out_i = tmp_path / "i"
    code = run(["inverse", str(out / "scattering_example.json"),
                "--out", str(out_i), "--half-width", "3"])
    assert code == 0
    rep = json.load(open(out_i / "inverse_report.json"))
    assert not rep["unique"]
    assert rep["defect_plus"] > 1e-3


def test_diagnose_free(tmp_path):
    jac = tmp_path / "jac.json"
    io.save_jacobi(JacobiOperator.free(), str(jac))
    out = tmp_path / "d"
    code = run(["diagnose", str(jac), "--out", str(out), "--grid", "512"])
    assert code == 0
    panel = json.load(open(out / "panel.json"))
    assert panel["coherent"] and not panel["a2_divergent"]
    assert (out / "a2_trend.csv").exists()


def test_outputs_deterministic(tmp_path):
    jac = tmp_path / "jac.json"
    io.save_jacobi(JacobiOperator(0, [0.8], [0.0]), str(jac))
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert run(["forward", str(jac), "--out", str(out), "--grid", "512"]) == 0
        outs.append(out)
    for name in ("scattering.json", "density.csv", "forward_report.json"):
        a = (outs[0] / name).read_bytes()
        b = (outs[1] / name).read_bytes()
        assert a == b, f"{name} differs between runs"


def test_scattering_loader_validation(tmp_path):
    bad = tmp_path / "s.json"
    bad.write_text('{"grid_size": 512, "coeffs_s_plus": [[0, 0.1, 3]]}')
    with pytest.raises(ValidationError):
        io.load_scattering(str(bad))
