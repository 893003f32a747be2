import math
import warnings

import numpy as np
import pytest

import apkit as ak
import oracles

TAU = ak.GOLDEN_RATIO
C = math.sqrt(2.0 + TAU)


def fib_points(radius: float, **kw) -> ak.PointSet:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return ak.cut_and_project(ak.fibonacci_config(radius, **kw))


# ---------------------------------------------------------------------------
# lattices


def test_lattice_point_counts():
    assert len(ak.make_lattice([[1.0]], 10.0)) == 21
    assert len(ak.make_lattice([[2.0]], 10.0)) == 11
    S = ak.make_lattice([[1.0, 0.0], [0.0, 1.0]], 5.0)
    assert len(S) == oracles.gauss_disc_count(5.0)


def test_lattice_hardcore_is_shortest_vector():
    S = ak.make_lattice([[2.0, 0.0], [1.0, 1.0]], 6.0)
    small = [(i, j) for i in range(-4, 5) for j in range(-4, 5)
             if (i, j) != (0, 0)]
    want = min(math.hypot(2 * i + j, j) for i, j in small)
    assert S.hardcore_radius == pytest.approx(want)


def test_lattice_rejects_singular_basis():
    with pytest.raises(ak.SingularBasis):
        ak.make_lattice([[1.0, 1.0], [1.0, 1.0]], 5.0)
    with pytest.raises(ak.SingularBasis):
        ak.make_lattice([[1.0, 0.0]], 5.0)


def test_lattice_covolume():
    assert ak.lattice_covolume([[2.0, 0.0], [0.0, 3.0]]) == pytest.approx(6.0)


# ---------------------------------------------------------------------------
# rationality heuristic


def test_rationality_report_flags_rational_ratio():
    findings = ak.rationality_report([2.0, 4.0])
    assert len(findings) == 1 and "1/2" in findings[0]


def test_rationality_report_passes_golden_ratio():
    assert ak.rationality_report([TAU, 1.0]) == []


def test_rationality_report_flags_zero_coordinate():
    findings = ak.rationality_report([0.5, 0.0])
    assert any("zero" in f for f in findings)


# ---------------------------------------------------------------------------
# deformations


def test_deformation_bound_is_amplitude_norm():
    d = ak.SinusoidalDeformation([3.0, 4.0], [0.5], 0.7)
    assert d.bound() == pytest.approx(5.0)


def test_deformation_values_match_formula():
    d = ak.SinusoidalDeformation([0.3], [0.5], 0.7)
    w = np.array([[0.2], [-1.1]])
    got = d(w)
    want = 0.3 * np.sin(2 * np.pi * 0.5 * w + 0.7)
    assert np.allclose(got, want, atol=1e-15)


def test_deformation_json_round_trip():
    d = ak.SinusoidalDeformation([0.3], [0.5], 0.7)
    doc = d.to_json()
    assert doc["kind"] == "sinusoidal"
    back = ak.generators._deformation_from_json(doc)
    assert np.array_equal(back.amplitude, d.amplitude)
    assert np.array_equal(back.frequency, d.frequency)
    assert back.phase == d.phase
    assert ak.generators._deformation_from_json({"kind": "zero"}) is None
    assert ak.generators._deformation_from_json(None) is None
    with pytest.raises(ak.ConfigError):
        ak.generators._deformation_from_json({"kind": "wobble"})


# ---------------------------------------------------------------------------
# cut and project


def test_fibonacci_config_geometry():
    cfg = ak.fibonacci_config(100.0)
    assert np.allclose(cfg.E_basis, [[TAU / C, 1.0 / C]])
    assert np.allclose(cfg.F_basis, [[-1.0 / C, TAU / C]])
    assert cfg.window.kind == "box"
    assert cfg.window.lo[0] == pytest.approx(-1.0 / C)
    assert cfg.window.hi[0] == pytest.approx(TAU / C)


def test_fibonacci_has_two_gaps_in_golden_ratio():
    S = fib_points(500.0)
    assert len(S) == 1377
    gaps = np.sort(np.diff(S.points[:, 0]))
    splits = np.nonzero(np.diff(gaps) > 1e-6)[0]
    assert len(splits) == 1
    short = float(np.mean(gaps[:splits[0] + 1]))
    long = float(np.mean(gaps[splits[0] + 1:]))
    assert long / short == pytest.approx(TAU, rel=1e-9)
    assert short == pytest.approx(ak.FIBONACCI_MIN_GAP, rel=1e-9)
    assert S.hardcore_radius == pytest.approx(ak.FIBONACCI_MIN_GAP, rel=1e-9)


def test_fibonacci_density():
    S = fib_points(500.0)
    assert len(S) / 1000.0 == pytest.approx(ak.FIBONACCI_DENSITY, rel=1e-2)


def test_fibonacci_boundary_graze_warns():
    with pytest.warns(UserWarning, match="window boundary"):
        ak.cut_and_project(ak.fibonacci_config(50.0))


def test_cut_and_project_is_faithful_under_enlargement():
    small = fib_points(80.0)
    large = fib_points(130.0)
    inside = large.points[np.abs(large.points[:, 0]) <= 80.0]
    assert np.array_equal(small.points, inside)


def test_cut_and_project_offset_moves_pattern():
    a = fib_points(80.0)
    b = fib_points(80.0, torus_offset=(0.37, 0.21))
    assert len(b) > 0
    assert not np.array_equal(a.points, b.points)


def test_deformed_fibonacci_keeps_point_count():
    d = ak.SinusoidalDeformation([0.05 / C], [0.5], 0.7)
    S = fib_points(300.0, deformation=d)
    U = fib_points(300.0 + 0.1)
    # same lattice translates selected; only positions move
    assert abs(len(S) - len(U)) <= 2


def test_cut_and_project_empty_window():
    cfg = ak.CutProjectConfig(
        n=2, E_basis=[[TAU / C, 1.0 / C]], F_basis=[[-1.0 / C, TAU / C]],
        window=ak.RegionSpec.box([2.0], [2.0 + 1e-9]), output_radius=20.0)
    S = ak.cut_and_project(cfg)
    assert len(S) == 0


def test_cut_and_project_collision_raises():
    # both strip layers project onto the integers: exact duplicates
    cfg = ak.CutProjectConfig(
        n=2, E_basis=[[0.0, 1.0]], F_basis=[[1.0, 0.0]],
        window=ak.RegionSpec.box([-0.25], [1.25]), output_radius=10.0)
    with pytest.warns(UserWarning):
        with pytest.raises(ak.NotUniformlyDiscrete):
            ak.cut_and_project(cfg)


def test_cut_project_config_validation():
    with pytest.raises(ak.ConfigError):
        ak.CutProjectConfig(n=2, E_basis=[[1.0, 1.0]],
                            F_basis=[[-1.0 / C, TAU / C]],
                            window=ak.RegionSpec.box([-0.5], [0.5]),
                            output_radius=10.0)
    with pytest.raises(ak.ConfigError):
        ak.CutProjectConfig(n=2, E_basis=[[TAU / C, 1.0 / C]],
                            F_basis=[[-1.0 / C, TAU / C]],
                            window=ak.RegionSpec.box([-0.5, -0.5], [0.5, 0.5]),
                            output_radius=10.0)


def test_cut_project_config_json_round_trip():
    d = ak.SinusoidalDeformation([0.02], [0.5], 0.7)
    cfg = ak.fibonacci_config(60.0, torus_offset=(0.1, 0.2), deformation=d)
    back = ak.CutProjectConfig.from_json(cfg.to_json())
    assert back.n == 2
    assert np.allclose(back.E_basis, cfg.E_basis)
    assert np.allclose(back.torus_offset, [0.1, 0.2])
    assert back.deformation.phase == 0.7
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        assert np.array_equal(ak.cut_and_project(back).points,
                              ak.cut_and_project(cfg).points)


# ---------------------------------------------------------------------------
# samplers


def lattice_sampler(seed: int, window: float = 30.0) -> ak.ProcessSampler:
    return ak.ProcessSampler("randomized_lattice", seed, window, basis=[[1.0]])


def matern_sampler(seed: int, window: float = 25.0) -> ak.ProcessSampler:
    return ak.ProcessSampler("matern_II", seed, window, intensity=1.0,
                             hardcore=0.5)


def test_sampler_rejects_unknown_kind():
    with pytest.raises(ak.ConfigError):
        ak.ProcessSampler("bogus", 0, 10.0)


def test_sampler_requires_kind_parameters():
    with pytest.raises(ak.ConfigError):
        ak.ProcessSampler("randomized_lattice", 0, 10.0)
    with pytest.raises(ak.ConfigError):
        ak.ProcessSampler("matern_II", 0, 10.0, intensity=1.0)
    with pytest.raises(ak.ConfigError):
        ak.ProcessSampler("perturbed_lattice", 0, 10.0, basis=[[1.0]])
    with pytest.raises(ak.ConfigError):
        ak.ProcessSampler("randomized_model_set", 0, 10.0)


@pytest.mark.parametrize("make", [
    lambda: lattice_sampler(7),
    lambda: matern_sampler(7),
    lambda: ak.ProcessSampler("perturbed_lattice", 7, 20.0, basis=[[1.0]],
                              noise_bound=0.2),
    lambda: ak.ProcessSampler("randomized_model_set", 7, 20.0,
                              cut_project=ak.fibonacci_config(20.0)),
])
def test_sampler_reproducible_and_index_dependent(make):
    p = make()
    a = ak.sample(p, 3)
    b = ak.sample(make(), 3)
    c = ak.sample(p, 4)
    assert np.array_equal(a.points, b.points)
    assert a.window_radius == b.window_radius
    assert not (len(a) == len(c) and np.array_equal(a.points, c.points))


def test_randomized_lattice_keeps_unit_gaps():
    chi = ak.sample(lattice_sampler(11), 0)
    gaps = np.diff(chi.points[:, 0])
    assert np.allclose(gaps, 1.0, atol=1e-9)
    assert chi.hardcore_radius == pytest.approx(1.0)


def test_matern_respects_hardcore():
    for i in range(5):
        chi = ak.sample(matern_sampler(13), i)
        d = oracles.brute_min_pair_distance(chi.points)
        assert d >= 0.5 * (1.0 - 1e-12)


def test_matern_effective_intensity_formula():
    p = matern_sampler(0)
    # 1D ball of radius 0.5 has volume 1, so the closed form is 1 - e^-1
    assert ak.matern_effective_intensity(p) == pytest.approx(1.0 - math.exp(-1.0))
    zero = ak.ProcessSampler("matern_II", 0, 10.0, intensity=0.0, hardcore=0.5)
    assert ak.matern_effective_intensity(zero) == 0.0


def test_matern_empirical_intensity_matches_formula():
    p = matern_sampler(29)
    eff = ak.matern_effective_intensity(p)
    counts = np.array([len(ak.sample(p, i)) for i in range(60)], dtype=float)
    dens = counts / 50.0
    sem = np.std(dens, ddof=1) / math.sqrt(len(dens))
    assert abs(float(np.mean(dens)) - eff) <= 4.0 * sem + 0.01


def test_perturbed_lattice_noise_bound_guard():
    p = ak.ProcessSampler("perturbed_lattice", 0, 10.0, basis=[[1.0]],
                          noise_bound=0.6)
    with pytest.raises(ak.ConfigError):
        ak.sample(p, 0)


def test_perturbed_lattice_stays_near_grid():
    p = ak.ProcessSampler("perturbed_lattice", 3, 20.0, basis=[[1.0]],
                          noise_bound=0.2)
    chi = ak.sample(p, 0)
    gaps = np.diff(chi.points[:, 0])
    assert np.all(gaps >= 1.0 - 0.4 - 1e-9)
    assert np.all(gaps <= 1.0 + 0.4 + 1e-9)
    assert chi.hardcore_radius == pytest.approx(0.6)


def test_sampler_json_round_trip_keeps_dim():
    p = ak.ProcessSampler("matern_II", 5, 12.0, intensity=0.8, hardcore=0.3,
                          dim=2)
    doc = p.to_json()
    assert doc["dim"] == 2
    back = ak.ProcessSampler.from_json(doc)
    assert back == p
    a, b = ak.sample(p, 1), ak.sample(back, 1)
    assert a.dim == 2
    assert np.array_equal(a.points, b.points)


def test_lattice_sampler_json_round_trip():
    p = ak.ProcessSampler("perturbed_lattice", 9, 15.0, basis=[[2.0]],
                          noise_bound=0.3)
    back = ak.ProcessSampler.from_json(p.to_json())
    assert np.array_equal(ak.sample(p, 2).points, ak.sample(back, 2).points)


def test_model_set_sampler_json_round_trip():
    p = ak.ProcessSampler("randomized_model_set", 9, 25.0,
                          cut_project=ak.fibonacci_config(25.0))
    back = ak.ProcessSampler.from_json(p.to_json())
    assert np.array_equal(ak.sample(p, 0).points, ak.sample(back, 0).points)


def test_sampler_distribution_is_stationary():
    # mean count in a fixed box equals intensity * volume across seeds
    p = lattice_sampler(41, window=12.0)
    box = ak.RegionSpec.box([2.3], [7.3])
    counts = [ak.count_in_region(ak.sample(p, i), box) for i in range(80)]
    assert float(np.mean(counts)) == pytest.approx(5.0, abs=0.2)


# ---------------------------------------------------------------------------
# Palm calculus


def test_palm_intensity_lattice_neighbor_is_one():
    p = lattice_sampler(1)
    est = ak.palm_intensity(p, ak.RegionSpec.ball([1.0], 0.25), n_samples=50)
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-12)


def test_palm_intensity_lattice_has_no_half_neighbors():
    p = lattice_sampler(1)
    est = ak.palm_intensity(p, ak.RegionSpec.ball([0.5], 0.1), n_samples=50)
    assert est.value == 0.0


def test_palm_intensity_base_region_free():
    p = lattice_sampler(17)
    A = ak.RegionSpec.ball([1.0], 0.25)
    cube = ak.palm_intensity(p, A, n_samples=40)
    ball = ak.palm_intensity(p, A, B=ak.RegionSpec.ball([0.0], 2.0),
                             n_samples=40)
    sigma = math.sqrt(cube.stderr ** 2 + ball.stderr ** 2)
    assert abs(cube.value - ball.value) <= max(3.0 * sigma, 1e-12)


def test_palm_intensity_window_guard():
    p = lattice_sampler(1, window=1.2)
    with pytest.raises(ak.WindowTooSmall):
        ak.palm_intensity(p, ak.RegionSpec.ball([0.0], 2.0), n_samples=5)


def test_palm_estimate_json_fields():
    p = lattice_sampler(1)
    est = ak.palm_intensity(p, ak.RegionSpec.ball([1.0], 0.25), n_samples=10)
    doc = est.to_json()
    assert set(doc) == {"region", "value", "stderr", "samples", "B_used"}
    assert doc["samples"] == 10


def test_acpalm_lattice_mass_matches_palm():
    p = lattice_sampler(21, window=110.0)
    rep = ak.verify_acpalm(p, ak.RegionSpec.ball([1.0], 0.25),
                           [60.0, 80.0, 100.0], n_seeds=10,
                           n_palm_samples=100)
    assert rep["palm_value"] == pytest.approx(1.0, abs=1e-12)
    assert rep["max_abs_deviation"] <= 0.05
    assert len(rep["per_seed_mass"]) == 10


def test_acpalm_zero_intensity_process():
    p = ak.ProcessSampler("matern_II", 0, 40.0, intensity=0.0, hardcore=0.5)
    rep = ak.verify_acpalm(p, ak.RegionSpec.ball([0.5], 0.1),
                           [20.0, 30.0], n_seeds=5, n_palm_samples=20)
    assert rep["palm_value"] == 0.0
    assert rep["per_seed_final"] == [0.0] * 5


# ---------------------------------------------------------------------------
# occupancy-event almost periods


def test_event_periods_lattice_integers_are_exact():
    p = lattice_sampler(33, window=12.0)
    cands = [[-2.0], [-1.0], [1.0], [2.0], [0.5]]
    rep = ak.event_almost_periods(p, 0.2, 0.1, cands, n_samples=200,
                                  gap_bound=4.0)
    rates = dict(zip([tuple(c) for c in cands], rep.details["event_rate"]))
    for m in (-2.0, -1.0, 1.0, 2.0):
        assert rates[(m,)] == 0.0
    assert rates[(0.5,)] == pytest.approx(0.8, abs=0.1)
    got = sorted(rep.almost_period_set[:, 0])
    assert got == [-2.0, -1.0, 1.0, 2.0]
    assert rep.verdict == "pass"
    wilson = rep.details["wilson_upper95"]
    assert all(w >= r for w, r in zip(wilson, rep.details["event_rate"]))


def test_event_periods_window_guard():
    p = lattice_sampler(1, window=5.0)
    with pytest.raises(ak.WindowTooSmall):
        ak.event_almost_periods(p, 0.2, 0.1, [[6.0]], n_samples=10,
                                gap_bound=4.0)
