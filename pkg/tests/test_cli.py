import json
import math
import os
import warnings

import numpy as np
import pytest

import apkit as ak
from apkit.cli import main


def run(capsys, *argv) -> tuple[int, dict | None]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write_config(tmp_path, doc, name="cfg.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def write_set(tmp_path, S, name) -> str:
    path = str(tmp_path / name)
    ak.write_pointset_csv(S, path)
    return path


# ---------------------------------------------------------------------------
# generate


def test_generate_lattice_preset(tmp_path, capsys):
    code, doc = run(capsys, "generate", "--preset", "lattice-z",
                    "--radius", "10", "--out", str(tmp_path))
    assert code == 0
    assert doc["n_points"] == 21
    assert doc["kind"] == "lattice-z"
    assert doc["dim"] == 1
    S = ak.read_pointset_csv(str(tmp_path / "points.csv"))
    assert np.array_equal(S.points[:, 0], np.arange(-10.0, 11.0))
    assert json.loads((tmp_path / "generate.json").read_text()) == doc


@pytest.mark.filterwarnings("ignore:.*window boundary.*")
def test_generate_fibonacci_preset_has_two_gaps(tmp_path, capsys):
    code, doc = run(capsys, "generate", "--preset", "fibonacci",
                    "--radius", "100", "--out", str(tmp_path))
    assert code == 0
    S = ak.read_pointset_csv(str(tmp_path / "points.csv"))
    assert doc["n_points"] == len(S)
    gaps = np.round(np.diff(S.points[:, 0]), 9)
    assert len(set(gaps)) == 2
    assert doc["measured_hardcore_radius"] == pytest.approx(
        ak.FIBONACCI_MIN_GAP, rel=1e-9)


@pytest.mark.filterwarnings("ignore:.*window boundary.*")
def test_generate_deformed_fibonacci(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "deformation": {"kind": "sinusoidal", "amplitude": [0.02],
                        "frequency": [0.5], "phase": 0.7}})
    code, doc = run(capsys, "generate", "--preset", "fibonacci",
                    "--radius", "100", "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    S = ak.read_pointset_csv(str(tmp_path / "points.csv"))
    gaps = np.round(np.diff(S.points[:, 0]), 9)
    assert len(set(gaps)) > 2


def test_generate_custom_lattice_config(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "lattice": {"basis": [[2.0]], "window_radius": 10.0}})
    code, doc = run(capsys, "generate", "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["n_points"] == 11


def test_generate_sampler_with_seed_override(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "sampler": {"kind": "matern_II", "seed": 1, "window_radius": 15.0,
                    "intensity": 1.0, "hardcore": 0.5}})
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    out_c = tmp_path / "c"
    code, doc_a = run(capsys, "generate", "--config", cfg, "--seed", "7",
                      "--out", str(out_a))
    assert code == 0 and doc_a["seed"] == 7
    run(capsys, "generate", "--config", cfg, "--seed", "7",
        "--out", str(out_b))
    run(capsys, "generate", "--config", cfg, "--seed", "8",
        "--out", str(out_c))
    same = (out_a / "points.csv").read_bytes()
    assert same == (out_b / "points.csv").read_bytes()
    assert same != (out_c / "points.csv").read_bytes()


def test_generate_sampler_index_selects_samples(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "sampler": {"kind": "matern_II", "seed": 3, "window_radius": 15.0,
                    "intensity": 1.0, "hardcore": 0.5}})
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run(capsys, "generate", "--config", cfg, "--index", "0", "--out", str(out_a))
    run(capsys, "generate", "--config", cfg, "--index", "1", "--out", str(out_b))
    assert (out_a / "points.csv").read_bytes() != \
        (out_b / "points.csv").read_bytes()


def test_generate_requires_exactly_one_source(tmp_path, capsys):
    code, _ = run(capsys, "generate", "--out", str(tmp_path))
    assert code == 2
    cfg = write_config(tmp_path, {
        "lattice": {"basis": [[1.0]], "window_radius": 5.0}})
    code, _ = run(capsys, "generate", "--preset", "lattice-z", "--radius",
                  "5", "--config", cfg, "--out", str(tmp_path))
    assert code == 2


def test_malformed_config_is_a_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = run(capsys, "generate", "--config", str(bad),
                  "--out", str(tmp_path))
    err = capsys.readouterr().err
    assert code == 2


def test_unknown_config_key_rejected_by_schema(tmp_path, capsys):
    cfg = write_config(tmp_path, {"radius": 5.0, "bogus_key": 1})
    code, _ = run(capsys, "generate", "--preset", "lattice-z",
                  "--radius", "5", "--config", cfg, "--out", str(tmp_path))
    assert code == 2


def test_unknown_preset_rejected(tmp_path, capsys):
    code, _ = run(capsys, "generate", "--preset", "penrose",
                  "--radius", "5", "--out", str(tmp_path))
    assert code == 2


# ---------------------------------------------------------------------------
# metric


@pytest.fixture
def lattice_files(tmp_path):
    S = ak.make_lattice([[1.0]], 131.0)
    T = ak.translate(S, [0.1])
    a = write_set(tmp_path, S, "a.csv")
    b = write_set(tmp_path, T, "b.csv")
    return a, b


def test_metric_d_identical_hits_tolerance_floor(tmp_path, capsys, lattice_files):
    a, _ = lattice_files
    cfg = write_config(tmp_path, {"tol": 0.1})
    code, doc = run(capsys, "metric", a, a, "--which", "d",
                    "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["value"] == pytest.approx(0.1)


def test_metric_dbar_tracks_shift(tmp_path, capsys, lattice_files):
    a, b = lattice_files
    cfg = write_config(tmp_path, {"radii": [40.0, 60.0, 80.0]})
    code, doc = run(capsys, "metric", a, b, "--which", "dbar",
                    "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["value"] == pytest.approx(0.1, abs=0.01)
    assert json.loads((tmp_path / "metric.json").read_text()) == doc


def test_metric_dbarc_report(tmp_path, capsys, lattice_files):
    a, b = lattice_files
    cfg = write_config(tmp_path, {"R": 24.0})
    code, doc = run(capsys, "metric", a, b, "--which", "dbarc",
                    "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["value"] == pytest.approx(0.1, abs=0.02)
    assert doc["converged"] is True


def test_metric_dbarf_identical_is_zero(tmp_path, capsys, lattice_files):
    a, _ = lattice_files
    cfg = write_config(tmp_path, {
        "radii": [40.0, 60.0, 80.0],
        "f": {"shape": "triangle_bump", "support_radius": 0.09,
              "amplitude": 1.0}})
    code, doc = run(capsys, "metric", a, a, "--which", "dbarf",
                    "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["value"] == 0.0


def test_metric_dtilde_detects_offset(tmp_path, capsys, lattice_files):
    a, b = lattice_files
    cfg = write_config(tmp_path, {"radii": [40.0, 60.0, 80.0]})
    code, doc = run(capsys, "metric", a, b, "--which", "dtilde",
                    "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["value"] == pytest.approx(2.0, abs=0.05)
    code, doc = run(capsys, "metric", a, a, "--which", "dtilde",
                    "--config", cfg, "--out", str(tmp_path))
    assert doc["value"] == 0.0


def test_metric_missing_required_key(tmp_path, capsys, lattice_files):
    a, b = lattice_files
    code, _ = run(capsys, "metric", a, b, "--which", "dbar",
                  "--out", str(tmp_path))
    assert code == 2


def test_metric_dimension_mismatch_exit_code(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 10.0), "a1.csv")
    b = write_set(tmp_path,
                  ak.make_lattice([[1.0, 0.0], [0.0, 1.0]], 10.0), "b2.csv")
    cfg = write_config(tmp_path, {"radii": [5.0]})
    code, _ = run(capsys, "metric", a, b, "--which", "dtilde",
                  "--config", cfg, "--out", str(tmp_path))
    assert code == 4


def test_metric_missing_file_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, {"radii": [5.0]})
    code, _ = run(capsys, "metric", str(tmp_path / "nope.csv"),
                  str(tmp_path / "nope.csv"), "--which", "dtilde",
                  "--config", cfg, "--out", str(tmp_path))
    assert code == 2


# ---------------------------------------------------------------------------
# autocorr


def test_autocorr_single_radius(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 100.0), "a.csv")
    cfg = write_config(tmp_path, {"radii": [100.0], "diff_cutoff": 10.0})
    code, doc = run(capsys, "autocorr", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["converged"] is None
    assert doc["mass_at_zero"] == pytest.approx(201.0 / 200.0, rel=1e-12)
    mu = ak.read_measure_csv(str(tmp_path / "autocorr.csv"))
    assert len(mu) == doc["n_atoms"] == 21


def test_autocorr_schedule_with_debias(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 320.0), "a.csv")
    cfg = write_config(tmp_path, {
        "radii": [240.0, 280.0, 320.0], "diff_cutoff": 10.0, "debias": True})
    code, doc = run(capsys, "autocorr", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["converged"] is True
    mu = ak.read_measure_csv(str(tmp_path / "autocorr.csv"))
    for m in range(-10, 11):
        want = (641.0 - abs(m)) / (640.0 - abs(m))
        assert mu.mass_at([float(m)]) == pytest.approx(want, rel=1e-12)


def test_autocorr_radius_beyond_window_exit_code(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 10.0), "a.csv")
    cfg = write_config(tmp_path, {"radii": [40.0]})
    code, _ = run(capsys, "autocorr", a, "--config", cfg,
                  "--out", str(tmp_path))
    assert code == 4


def test_autocorr_requires_radii(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 10.0), "a.csv")
    code, _ = run(capsys, "autocorr", a, "--out", str(tmp_path))
    assert code == 2


# ---------------------------------------------------------------------------
# diffract


def test_diffract_lattice_finds_integer_peaks(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 300.0), "a.csv")
    cfg = write_config(tmp_path, {
        "radii": [200.0, 250.0, 300.0],
        "k_lo": [-2.2], "k_hi": [2.2], "k_step": 1.0 / 1200.0})
    code, doc = run(capsys, "diffract", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["n_peaks"] == 5
    locs = sorted(p["location"][0] for p in doc["peaks"])
    assert np.allclose(locs, [-2, -1, 0, 1, 2], atol=1e-4)
    peaks_doc = json.loads((tmp_path / "peaks.json").read_text())
    assert peaks_doc["peaks"] == doc["peaks"]
    assert (tmp_path / "periodogram.csv").exists()


def test_diffract_criteria_block(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 300.0), "a.csv")
    cfg = write_config(tmp_path, {
        "radii": [240.0, 270.0, 300.0],
        "k_lo": [-1.1], "k_hi": [1.1], "k_step": 1.0 / 1200.0,
        "criteria": {"eps": 0.1, "ball_radius": 0.1, "search_radius": 5.5}})
    code, doc = run(capsys, "diffract", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    crit = doc["criteria"]
    assert crit["C3_gamma_concentration"]["verdict"] == "pass"
    assert crit["ATOM_concentration"]["verdict"] == "pass"


def test_diffract_empty_input(tmp_path, capsys):
    empty = ak.PointSet(np.zeros((0, 1)), 50.0, 1.0)
    a = write_set(tmp_path, empty, "a.csv")
    cfg = write_config(tmp_path, {
        "radii": [40.0, 50.0],
        "k_lo": [-1.0], "k_hi": [1.0], "k_step": 1.0 / 256.0})
    code, doc = run(capsys, "diffract", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["n_peaks"] == 0 and doc["n_points"] == 0


# ---------------------------------------------------------------------------
# appd


def test_appd_grid_candidates(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 131.0), "a.csv")
    cfg = write_config(tmp_path, {
        "eps": 0.1, "radii": [40.0, 60.0, 80.0], "span": 3.0, "pitch": 1.0})
    code, doc = run(capsys, "appd", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["verdict"] == "pass"
    got = sorted(t[0] for t in doc["almost_period_set"])
    assert np.allclose(got, np.arange(-3.0, 4.0))


def test_appd_explicit_candidates(tmp_path, capsys):
    a = write_set(tmp_path, ak.make_lattice([[1.0]], 131.0), "a.csv")
    cfg = write_config(tmp_path, {
        "eps": 0.1, "radii": [40.0, 60.0, 80.0],
        "candidates": [[1.0], [0.5]], "gap_bound": 20.0})
    code, doc = run(capsys, "appd", a, "--config", cfg,
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["almost_period_set"] == [[1.0]]


# ---------------------------------------------------------------------------
# palm


def test_palm_intensity_mode(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "sampler": {"kind": "randomized_lattice", "seed": 2,
                    "window_radius": 30.0, "basis": [[1.0]]},
        "region": {"kind": "ball", "center": [1.0], "radius": 0.25},
        "n_samples": 30})
    code, doc = run(capsys, "palm", "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["mode"] == "intensity"
    assert doc["value"] == pytest.approx(1.0, abs=1e-12)


def test_palm_acpalm_mode(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "sampler": {"kind": "randomized_lattice", "seed": 2,
                    "window_radius": 110.0, "basis": [[1.0]]},
        "region": {"kind": "ball", "center": [1.0], "radius": 0.25},
        "acpalm": {"radii": [60.0, 80.0, 100.0], "n_seeds": 5,
                   "n_palm_samples": 40}})
    code, doc = run(capsys, "palm", "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert doc["mode"] == "acpalm"
    assert doc["max_abs_deviation"] <= 0.05
    assert len(doc["per_seed_final"]) == 5


def test_palm_window_too_small_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "sampler": {"kind": "randomized_lattice", "seed": 2,
                    "window_radius": 1.0, "basis": [[1.0]]},
        "region": {"kind": "ball", "center": [0.0], "radius": 2.0}})
    code, _ = run(capsys, "palm", "--config", cfg, "--out", str(tmp_path))
    assert code == 4


# ---------------------------------------------------------------------------
# verify


def test_verify_single_check(tmp_path, capsys):
    code, doc = run(capsys, "verify", "--only", "fibonacci",
                    "--out", str(tmp_path))
    assert code == 0
    assert doc["all_passed"] is True
    assert len(doc["checks"]) == 1
    assert doc["checks"][0]["tag"] == "fibonacci"
    assert doc["checks"][0]["passed"] is True


def test_verify_unknown_tag(tmp_path, capsys):
    code, _ = run(capsys, "verify", "--only", "bogus", "--out", str(tmp_path))
    assert code == 2


def test_verify_misconfigured_threshold_fails_honestly(tmp_path, capsys):
    # a much larger peak threshold hides the lattice peaks; the coherence
    # check must then fail and the command must exit nonzero
    cfg = write_config(tmp_path, {"peak_threshold_scale": 10.0})
    code, doc = run(capsys, "verify", "--only", "criterion_coherence",
                    "--config", cfg, "--out", str(tmp_path))
    assert code == 1
    assert doc["all_passed"] is False


def test_verify_rerun_is_byte_identical(tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    code_a, _ = run(capsys, "verify", "--only", "fibonacci", "--seed", "0",
                    "--out", str(out_a))
    code_b, _ = run(capsys, "verify", "--only", "fibonacci", "--seed", "0",
                    "--out", str(out_b))
    assert code_a == code_b == 0
    assert (out_a / "verify.json").read_bytes() == \
        (out_b / "verify.json").read_bytes()


# ---------------------------------------------------------------------------
# output handling


def test_outputs_are_sorted_pretty_json(tmp_path, capsys):
    run(capsys, "generate", "--preset", "lattice-z", "--radius", "5",
        "--out", str(tmp_path))
    text = (tmp_path / "generate.json").read_text()
    keys = [line.split('"')[1] for line in text.splitlines()
            if line.startswith('  "')]
    assert keys == sorted(keys)


def test_out_directory_is_created(tmp_path, capsys):
    nested = tmp_path / "deep" / "dir"
    code, _ = run(capsys, "generate", "--preset", "lattice-z", "--radius",
                  "5", "--out", str(nested))
    assert code == 0
    assert (nested / "points.csv").exists()
