import json
import math

import pytest

gwq = pytest.importorskip("gwq")


def test_version():
    assert gwq.__version__ == "0.1.0"


def test_list_examples():
    names = gwq.list_examples()
    assert "pair-flat-line" in names
    assert "group-u1" in names
    assert len(names) == 6


def test_example_info():
    info = gwq.example_info("pair-flat-line")
    assert info["family"] == "pair"
    assert info["base_points"] > 0
    assert math.isinf(info["injectivity_radius"])
    with pytest.raises(Exception):
        gwq.example_info("no-such-model")


def test_defects_row():
    row = gwq.defects("group-u1", "gauss-a", "moll-a", 0.2)
    assert row["example"] == "group-u1"
    assert row["hbar"] == 0.2
    # abelian model: commutator defect collapses, adjoint defect is exact
    assert row["dirac_defect"] < 1e-12
    assert row["sa_defect"] < 1e-12
    assert row["reduced_norm"] > 0


def test_norm_scan_includes_classical_endpoint():
    scan = gwq.norm_scan("group-u1", "gauss-a", [0.2, 0.1, 0.0])
    assert len(scan) == 3
    assert scan[-1][0] == 0.0
    assert scan[-1][1] > 0


def test_order_fit():
    hb = [0.4, 0.2, 0.1]
    fit = gwq.order_fit(hb, [h * h for h in hb])
    assert abs(fit["order"] - 2.0) < 1e-10
    assert not fit["all_zero"]


def test_run_experiment(tmp_path):
    cfg = {
        "example": "pair-flat-line",
        "observables": ["gauss-a", "moll-a"],
        "ladder": [0.4, 0.2],
        "resolution": {"base_points": 128, "fiber_points": 128},
        "seed": 3,
        "timing": "none",
        "out_dir": str(tmp_path / "out"),
    }
    rows = gwq.run_experiment(json.dumps(cfg), str(tmp_path / "out"))
    assert len(rows) == 4  # 2 ordered pairs x 2 rungs
    assert (tmp_path / "out" / "records.csv").exists()
    assert (tmp_path / "out" / "manifest.json").exists()
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["seed"] == 3
    header = (tmp_path / "out" / "records.csv").read_text().splitlines()[0]
    assert header == (
        "example,f_id,g_id,sign,hbar,dirac_defect,vn_defect,sa_defect,"
        "reduced_norm,classical_norm,trunc_mass,wall_ms"
    )


def test_rejects_unknown_config_keys(tmp_path):
    cfg = {
        "example": "pair-flat-line",
        "observables": ["gauss-a"],
        "ladder": [0.2],
        "frobnicate": True,
    }
    with pytest.raises(Exception):
        gwq.run_experiment(json.dumps(cfg), str(tmp_path / "out"))
