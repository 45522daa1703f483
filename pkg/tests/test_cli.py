"""End-to-end tests for the config-driven command line front end."""

import csv
import json
import os
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from smrlab import load_trajectory, lq_norm
from smrlab.cli import main

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(REPO, "configs")


def run_cfg(tmp_path, cfg, *flags):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    return main(["--config", str(path), "--out-dir", str(out), *flags]), out


def small_recipe(a=1.0, b=0.5, K=8):
    return {
        "lattice": {"d": 1, "K": K},
        "m": 1,
        "n_noise": 1,
        "alpha": 2.2,
        "beta": 2.2,
        "a": [{"i": 0, "j": 0, "constant": a}],
        "b": [{"j": 0, "k": 0, "n": 0, "constant": b}],
    }


def smr_cfg(**overrides):
    cfg = {
        "subcommand": "smr-experiment",
        "experiment_id": "t",
        "spec": {"p": 2, "q": 2, "sigma": 0.0, "kappa": 0.0},
        "grid": {"T": 0.5, "M": 16},
        "n_paths": 4,
        "base_seed": 1,
        "data": {"seed": 2},
        "coefficients": small_recipe(),
    }
    cfg.update(overrides)
    return cfg


# -- happy paths ------------------------------------------------------------


def test_check_parabolicity_identity(tmp_path, capsys):
    code = main(
        [
            "--config",
            os.path.join(CONFIGS, "parabolicity.json"),
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    doc = json.loads((tmp_path / "parabolicity.json").read_text())
    assert doc["schema_version"] == "1"
    assert abs(doc["margin"] - 1.0) < 1e-10
    assert doc["passed"] is True
    assert "margin=1" in capsys.readouterr().out


def test_norms_resolves_field_relative_to_config(tmp_path, capsys):
    code = main(
        ["--config", os.path.join(CONFIGS, "norms.json"), "--out-dir", str(tmp_path)]
    )
    assert code == 0
    doc = json.loads((tmp_path / "norms.json").read_text())
    assert doc["schema_version"] == "1"
    assert doc["d"] == 1 and doc["K"] == 32
    assert len(doc["norms"]) == 6
    assert all(np.isfinite(e["value"]) and e["value"] >= 0 for e in doc["norms"])
    out = capsys.readouterr().out
    assert out.count("norm ") == 6


def test_norms_value_matches_library(tmp_path):
    from smrlab import Lattice, SpectralField

    arr = np.load(os.path.join(CONFIGS, "norms_field.npy"))
    field = SpectralField(Lattice(1, arr.shape[-1] // 2), arr, 0)
    main(["--config", os.path.join(CONFIGS, "norms.json"), "--out-dir", str(tmp_path)])
    doc = json.loads((tmp_path / "norms.json").read_text())
    l2 = next(e for e in doc["norms"] if e["kind"] == "lq" and e["q"] == 2)
    assert l2["value"] == lq_norm(field, 2)


def test_verify_multiplication(tmp_path, capsys):
    cfg = {
        "subcommand": "verify-multiplication",
        "lattice": {"d": 1, "K": 8},
        "n_pairs": 3,
        "seed": 1,
        "cases": [
            {"case": "P1", "params": {"s": 0.5, "q": 2}},
            {"case": "COR", "params": {"s": 0.5, "q": 2, "xi": 2, "eta": 1.1}},
        ],
    }
    code, out = run_cfg(tmp_path, cfg)
    assert code == 0
    doc = json.loads((out / "multiplication.json").read_text())
    assert doc["schema_version"] == "1"
    assert [c["case"] for c in doc["cases"]] == ["P1", "COR"]
    for entry in doc["cases"]:
        assert np.isfinite(entry["max_ratio"]) and entry["max_ratio"] > 0
        assert entry["n_pairs"] == 3
    assert capsys.readouterr().out.count("multiplication case=") == 2


def test_solve_writes_trajectory(tmp_path, capsys):
    cfg = {
        "subcommand": "solve",
        "grid": {"T": 0.5, "M": 16},
        "base_seed": 3,
        "path_index": 2,
        "data": {"seed": 9},
        "coefficients": small_recipe(),
    }
    code, out = run_cfg(tmp_path, cfg)
    assert code == 0
    doc = json.loads((out / "solve.json").read_text())
    assert doc["M"] == 16 and doc["path_index"] == 2
    assert doc["final_l2"] > 0 and np.isfinite(doc["final_linf"])
    with open(out / "trajectory.bin", "rb") as fh:
        lat, nodes, traj, n_noise = load_trajectory(fh)
    assert lat.K == 8 and n_noise == 1
    assert nodes.shape == (17,) and nodes[-1] == 0.5
    assert traj.shape == (17, 1) + lat.shape
    from smrlab import SpectralField

    final = SpectralField(lat, traj[-1][:, None], 0)
    assert abs(lq_norm(final, 2) - doc["final_l2"]) < 1e-15
    assert "solve M=16" in capsys.readouterr().out


def test_solve_coefficients_from_file(tmp_path):
    recipe_path = tmp_path / "coeffs.json"
    recipe_path.write_text(json.dumps(small_recipe()))
    cfg = {
        "subcommand": "solve",
        "grid": {"T": 0.25, "M": 8},
        "data": {"seed": 1},
        "coefficients": "coeffs.json",
    }
    code, out = run_cfg(tmp_path, cfg)
    assert code == 0
    assert (out / "trajectory.bin").exists()


def test_smr_experiment_artifacts(tmp_path, capsys):
    code, out = run_cfg(tmp_path, smr_cfg(refinement_levels=2))
    assert code == 0
    with open(out / "smr_report.csv") as fh:
        first = fh.readline()
        assert first.startswith("# generated ")  # timestamp on by default
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    ids = {r["experiment_id"] for r in rows}
    assert ids == {"t-K8-M16", "t-K16-M32"}
    assert all(float(r["ratio"]) >= 0 for r in rows)
    doc = json.loads((out / "smr_summary.json").read_text())
    assert doc["schema_version"] == "1"
    assert len(doc["experiments"]) == 2
    assert doc["experiments"][0]["compliant"] is True  # margin 0.875 >= 0.5
    root = ET.fromstring((out / "smr_ratio.svg").read_text())
    assert root.tag.endswith("svg")
    assert capsys.readouterr().out.count("smr level=") == 2


def test_smr_reproducible_byte_identical(tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(smr_cfg()))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(
            ["--config", str(cfg_path), "--out-dir", str(out), "--reproducible"]
        )
        assert code == 0
        outs.append((out / "smr_report.csv").read_bytes())
    assert outs[0] == outs[1]
    assert not outs[0].startswith(b"#")


def test_smr_threads_do_not_change_output(tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(smr_cfg()))
    blobs = []
    for threads, name in ((1, "a"), (4, "b")):
        out = tmp_path / name
        code = main(
            [
                "--config",
                str(cfg_path),
                "--out-dir",
                str(out),
                "--reproducible",
                "--threads",
                str(threads),
            ]
        )
        assert code == 0
        blobs.append((out / "smr_report.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_perturbation_budget(tmp_path, capsys):
    code = main(
        ["--config", os.path.join(CONFIGS, "budget.json"), "--out-dir", str(tmp_path)]
    )
    assert code == 0
    doc = json.loads((tmp_path / "budget.json").read_text())
    assert doc["pass"] is True and abs(doc["eta"] - 0.5) < 1e-15
    assert "budget pass=True" in capsys.readouterr().out


def test_budget_boundary_reports_failure(tmp_path):
    cfg = {
        "subcommand": "perturbation-budget",
        "C_det": 2.0,
        "C_sto": 1.0,
        "C_A": 0.2,
        "C_B": 0.1,
        "eps": 0.5,
    }
    code, out = run_cfg(tmp_path, cfg)
    assert code == 0  # a failed estimate is still a successful run
    assert json.loads((out / "budget.json").read_text())["pass"] is False


# -- failure modes ----------------------------------------------------------


def test_kappa_constraint_named_in_error(tmp_path, capsys):
    cfg = smr_cfg(spec={"p": 2, "q": 2, "sigma": 0.0, "kappa": 0.1})
    code, _ = run_cfg(tmp_path, cfg)
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error: validation:")
    assert "kappa" in err


def test_unknown_subcommand(tmp_path, capsys):
    code, _ = run_cfg(tmp_path, {"subcommand": "frobnicate"})
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error: validation: unknown subcommand 'frobnicate'")
    assert "check-parabolicity" in err


def test_malformed_config_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["--config", str(path)]) == 2
    assert capsys.readouterr().err.startswith("error: config-parse:")


def test_missing_config_file(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.json")]) == 2
    assert capsys.readouterr().err.startswith("error: config-io:")


def test_missing_required_key(tmp_path, capsys):
    cfg = smr_cfg()
    del cfg["n_paths"]
    code, _ = run_cfg(tmp_path, cfg)
    assert code == 2
    assert "n_paths" in capsys.readouterr().err


def test_bad_norm_field_shape(tmp_path, capsys):
    field = tmp_path / "field.npy"
    np.save(field, np.zeros((1, 1, 7), dtype=np.complex128))
    cfg = {"subcommand": "norms", "field": "field.npy", "norms": [{"kind": "lq", "q": 2}]}
    code, _ = run_cfg(tmp_path, cfg)
    assert code == 2
    assert capsys.readouterr().err.startswith("error: validation:")


def test_blow_up_exit_code(tmp_path, capsys):
    cfg = {
        "subcommand": "solve",
        "grid": {"T": 4.0, "M": 256},
        "data": {"seed": 1},
        "coefficients": {
            "lattice": {"d": 1, "K": 32},
            "m": 1,
            "n_noise": 1,
            "alpha": 2.2,
            "beta": 2.2,
            "a": [{"i": 0, "j": 0, "constant": -1.0}],
            "b": [{"j": 0, "k": 0, "n": 0, "constant": 0.0}],
        },
    }
    code, _ = run_cfg(tmp_path, cfg)
    assert code == 3
    assert capsys.readouterr().err.startswith("error: blow-up:")


def test_bad_form_name(tmp_path, capsys):
    cfg = smr_cfg(form="sideways")
    code, _ = run_cfg(tmp_path, cfg)
    assert code == 2
    assert "form must be" in capsys.readouterr().err


def test_unknown_data_key(tmp_path, capsys):
    cfg = smr_cfg(data={"seed": 1, "color": "red"})
    code, _ = run_cfg(tmp_path, cfg)
    assert code == 2
    assert "unknown data key 'color'" in capsys.readouterr().err
