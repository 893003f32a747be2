"""Diffraction estimation and the executable pure-point criteria.

The frequency side of the pair-correlation analysis: windowed Fourier sums,
periodograms, consistent atom-mass estimation, Bragg peak detection, and the
four criterion checks whose verdicts are expected to agree on sets with
purely atomic diffraction (plus an explicit gap bound making "relatively
dense" a finite-scale certificate).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .autocorr import WeightedAtomMeasure
from .errors import (
    DimensionMismatch,
    EmptyCandidateSet,
    NoAtomAtZero,
    RadiusExceedsWindow,
    TranslationExceedsWindow,
)
from .gridindex import GridIndex
from .pointset import (
    PointSet,
    RegionSpec,
    ball_volume,
    mean_nn_spacing,
    relative_density_gap,
    translate,
    upper_density,
)
from .pseudometrics import asymmetric_mismatch
from .testfunc import TestFunction
from .util import fmt_float, relative_spread, tail_mean

CRITERION_IDS = (
    "C3_gamma_concentration",
    "C5_almost_periods",
    "ATOM_concentration",
    "BOHR_mu_conv_f",
    "EVENT_almost_periods",
)

VERDICTS = ("pass", "fail", "inconclusive")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class KGrid:
    """Regular frequency grid: per-axis closed range with a common step."""

    lo: np.ndarray
    hi: np.ndarray
    step: float

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).reshape(-1))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).reshape(-1))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi lengths differ")
        if not (self.step > 0):
            raise ValueError("step must be positive")
        if np.any(self.hi < self.lo):
            raise ValueError("hi must be >= lo")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def axis(self, d: int) -> np.ndarray:
        n = int(math.floor((self.hi[d] - self.lo[d]) / self.step + 1e-9)) + 1
        return self.lo[d] + self.step * np.arange(n)

    def shape(self) -> tuple:
        return tuple(len(self.axis(d)) for d in range(self.dim))

    def nodes(self) -> np.ndarray:
        axes = [self.axis(d) for d in range(self.dim)]
        if self.dim == 1:
            return axes[0].reshape(-1, 1)
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)

    def to_json(self) -> dict:
        return {"lo": [float(v) for v in self.lo],
                "hi": [float(v) for v in self.hi],
                "step": float(self.step)}

    @staticmethod
    def from_json(doc: dict) -> "KGrid":
        return KGrid(doc["lo"], doc["hi"], doc["step"])


def _ball_points(S: PointSet, R: float) -> np.ndarray:
    if R > S.window_radius * (1.0 + 1e-9):
        raise RadiusExceedsWindow(
            f"R={R:g} exceeds window radius {S.window_radius:g}")
    if len(S) == 0:
        return S.points
    return S.points[RegionSpec.ball(np.zeros(S.dim), R).contains(S.points)]


def _fourier_sums(P: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Complex sums over points for a batch of frequencies, chunked."""
    out = np.zeros(len(K), dtype=complex)
    if len(P) == 0:
        return out
    chunk = max(1, int(4_000_000 // max(len(P), 1)))
    for s in range(0, len(K), chunk):
        block = K[s:s + chunk]
        phases = block @ P.T
        out[s:s + chunk] = np.sum(np.exp(-2j * np.pi * phases), axis=1)
    return out


def fourier_sum(S: PointSet, R: float, k) -> complex:
    """Sum of exp(-2 pi i k.x) over the points of S in the closed R-ball."""
    k = np.asarray(k, dtype=float).reshape(1, -1)
    if k.shape[1] != S.dim:
        raise DimensionMismatch("frequency dimension differs from the set")
    P = _ball_points(S, R)
    return complex(_fourier_sums(P, k)[0])


@dataclass
class Periodogram:
    """Squared-modulus Fourier sums on a frequency grid.

    normalization "per-volume" is |sum|^2 / |B_R| (diverges linearly in R at
    a true atom); "atom-mass" is |sum|^2 / |B_R|^2 (converges to the atom
    mass).
    """

    dim: int
    k_grid: KGrid
    values: np.ndarray
    radius_used: float
    normalization: str = "per-volume"

    def to_json(self) -> dict:
        return {"dim": self.dim, "k_grid": self.k_grid.to_json(),
                "radius_used": self.radius_used,
                "normalization": self.normalization,
                "values": [float(v) for v in self.values]}


def periodogram(S: PointSet, R: float, k_grid: KGrid,
                normalization: str = "per-volume") -> Periodogram:
    """|fourier_sum|^2 over the grid, per-volume normalized by default.

    Warns when the grid step exceeds 1/(4R): peaks of the windowed transform
    have width about 1/R and a coarser grid can miss them entirely.
    """
    if k_grid.dim != S.dim:
        raise DimensionMismatch("frequency grid dimension differs from the set")
    if normalization not in ("per-volume", "atom-mass"):
        raise ValueError("normalization must be 'per-volume' or 'atom-mass'")
    if k_grid.step > 1.0 / (4.0 * R) * (1.0 + 1e-9):
        warnings.warn(
            f"k-grid step {k_grid.step:g} exceeds 1/(4R)={1.0 / (4.0 * R):g}; "
            "peaks may fall between nodes", stacklevel=2)
    P = _ball_points(S, R)
    vol = ball_volume(S.dim, R)
    power = np.abs(_fourier_sums(P, k_grid.nodes())) ** 2
    values = power / vol if normalization == "per-volume" else power / vol ** 2
    return Periodogram(S.dim, k_grid, values, float(R), normalization)


def atom_mass(S: PointSet, k, radii) -> tuple[float, float]:
    """Estimated diffraction atom mass at frequency k, with stability.

    m_R(k) = |fourier_sum(S, R, k)|^2 / |B_R|^2 along the schedule; returns
    (tail mean, tail relative spread). The spread is the convergence
    diagnostic: near zero for a true atom, order one for continuous spectrum.
    """
    k = np.asarray(k, dtype=float).reshape(1, -1)
    if k.shape[1] != S.dim:
        raise DimensionMismatch("frequency dimension differs from the set")
    radii = np.sort(np.asarray(radii, dtype=float))
    series = np.empty(len(radii))
    for i, R in enumerate(radii):
        P = _ball_points(S, float(R))
        vol = ball_volume(S.dim, float(R))
        series[i] = float(np.abs(_fourier_sums(P, k)[0]) ** 2) / vol ** 2
    half = max(1, len(series) // 2)
    return tail_mean(series, 0.5), relative_spread(series[-half:])


@dataclass
class BraggPeak:
    """A stable detected atom of the diffraction estimate."""

    location: np.ndarray
    mass: float
    stability: float

    def to_json(self) -> dict:
        return {"location": [float(v) for v in np.atleast_1d(self.location)],
                "mass": self.mass, "stability": self.stability}


def _golden_max(fun, lo: float, hi: float, tol: float) -> float:
    """Location of the maximum of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(200):
        if b - a <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return (a + b) / 2.0


def _grid_local_maxima(values: np.ndarray, shape: tuple) -> np.ndarray:
    """Flat indices of nodes no smaller than any axis neighbor."""
    v = values.reshape(shape)
    ok = np.ones(shape, dtype=bool)
    for ax in range(len(shape)):
        lead = [slice(None)] * len(shape)
        lag = [slice(None)] * len(shape)
        lead[ax] = slice(1, None)
        lag[ax] = slice(None, -1)
        ok[tuple(lead)] &= v[tuple(lead)] >= v[tuple(lag)]
        ok[tuple(lag)] &= v[tuple(lag)] >= v[tuple(lead)]
    return np.nonzero(ok.reshape(-1))[0]


def detect_bragg_peaks(S: PointSet, radii, k_grid: KGrid,
                       threshold: float | None = None,
                       stability_bound: float = 0.2) -> list[BraggPeak]:
    """Stable atoms of the diffraction estimate over a frequency grid.

    Grid local maxima of the largest-radius periodogram above
    threshold * |B_R| are refined by per-axis golden-section search on the
    squared Fourier modulus, then scored by atom_mass along the schedule;
    peaks below threshold mass or above the stability bound are dropped.
    The default threshold is 0.05 times the squared counting density.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    R = float(radii[-1])
    if len(S) == 0:
        return []
    if threshold is None:
        dens = len(_ball_points(S, R)) / ball_volume(S.dim, R)
        threshold = 0.05 * dens * dens
    per = periodogram(S, R, k_grid)
    vol = ball_volume(S.dim, R)
    shape = per.k_grid.shape()
    cand = _grid_local_maxima(per.values, shape)
    cand = cand[per.values[cand] >= threshold * vol]
    nodes = per.k_grid.nodes()
    P = _ball_points(S, R)

    def power(k: np.ndarray) -> float:
        return float(np.abs(_fourier_sums(P, k.reshape(1, -1))[0]) ** 2)

    peaks: list[BraggPeak] = []
    step = k_grid.step
    for idx in cand:
        k = nodes[idx].copy()
        for _ in range(2 if S.dim > 1 else 1):
            for ax in range(S.dim):
                def along(v: float, ax=ax, k=k) -> float:
                    probe = k.copy()
                    probe[ax] = v
                    return power(probe)
                k[ax] = _golden_max(along, k[ax] - step, k[ax] + step,
                                    step * 1e-4)
        mass, stability = atom_mass(S, k, radii)
        if mass > threshold and stability < stability_bound:
            peaks.append(BraggPeak(k, mass, stability))
    # merge refinements that converged to the same frequency
    peaks.sort(key=lambda p: tuple(p.location))
    kept: list[BraggPeak] = []
    for p in peaks:
        if kept and np.linalg.norm(p.location - kept[-1].location) < step / 2.0:
            if p.mass > kept[-1].mass:
                kept[-1] = p
            continue
        kept.append(p)
    return kept


def peak_span_gap(peaks: list[BraggPeak], search_radius: float) -> float:
    """Relative-density gap of the detected peak locations in k-space."""
    if not peaks:
        return math.inf
    locs = np.stack([p.location for p in peaks])
    return relative_density_gap(locs, search_radius)


# ---------------------------------------------------------------------------
# Criterion checks


@dataclass
class CriterionReport:
    """Outcome of one executable almost-periodicity criterion.

    verdict "pass" means the accepted translation set has relative-density
    gap at most gap_bound inside the searched ball; "inconclusive" flags an
    unconverged underlying estimate.
    """

    criterion_id: str
    epsilon: float
    almost_period_set: np.ndarray
    gap: float
    verdict: str
    gap_bound: float
    search_radius: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        pts = np.atleast_2d(self.almost_period_set) \
            if np.size(self.almost_period_set) else np.empty((0, 1))
        return {
            "criterion_id": self.criterion_id,
            "epsilon": self.epsilon,
            "almost_period_set": [[float(v) for v in row] for row in pts],
            "gap": self.gap if math.isfinite(self.gap) else None,
            "verdict": self.verdict,
            "gap_bound": self.gap_bound,
            "search_radius": self.search_radius,
            "details": self.details,
        }


def default_gap_bound(S: PointSet, eps: float) -> float:
    """Certification scale: 2 * (mean nearest-neighbor spacing) / eps."""
    return 2.0 * mean_nn_spacing(S) / eps


def _finish_report(criterion_id: str, eps: float, accepted: np.ndarray,
                   gap_bound: float, search_radius: float, converged: bool,
                   details: dict) -> CriterionReport:
    if len(accepted) == 0:
        gap = math.inf
    else:
        try:
            gap = relative_density_gap(accepted, search_radius)
        except EmptyCandidateSet:
            gap = math.inf
    if not converged:
        verdict = "inconclusive"
    else:
        verdict = "pass" if gap <= gap_bound else "fail"
    return CriterionReport(criterion_id, float(eps), accepted, float(gap),
                           verdict, float(gap_bound), float(search_radius),
                           details)


def _unwrap_gamma(gamma) -> tuple[WeightedAtomMeasure, bool]:
    if hasattr(gamma, "measure"):
        return gamma.measure, bool(gamma.converged)
    return gamma, True


def criterion_gamma_concentration(gamma, R: float, eps: float,
                                  search_radius: float, *,
                                  gap_bound: float) -> CriterionReport:
    """Accept t when the pair measure puts mass >= gamma(0) - eps on t+B_R.

    gamma may be a WeightedAtomMeasure or an autocorrelation estimate; an
    unconverged estimate yields verdict "inconclusive". Candidates are the
    atom locations within the searched ball.
    """
    mu, converged = _unwrap_gamma(gamma)
    gamma0 = mu.mass_at_zero()
    norms = np.sqrt(np.sum(mu.locations ** 2, axis=1))
    sel = norms <= search_radius * (1.0 + 1e-9)
    cand = mu.locations[sel]
    if len(cand) == 0:
        raise NoAtomAtZero("no candidate atoms inside the searched ball")
    grid = GridIndex(mu.locations, max(R, mu.bin_tol))
    qi, pi = grid.pairs_within(cand, R)
    mass = np.zeros(len(cand))
    np.add.at(mass, qi, mu.weights[pi])
    accepted = cand[mass >= gamma0 - eps]
    return _finish_report("C3_gamma_concentration", eps, accepted, gap_bound,
                          search_radius, converged,
                          {"gamma_zero": gamma0, "ball_radius": float(R),
                           "candidates": int(len(cand))})


def criterion_atom_concentration(gamma, eps: float, search_radius: float, *,
                                 gap_bound: float) -> CriterionReport:
    """Accept t when a single atom at t carries mass >= gamma(0) - eps.

    Strictly stronger than the ball-concentration criterion; it presumes the
    difference set is itself uniformly discrete, and legitimately fails when
    pair mass is smeared across nearby atoms.
    """
    mu, converged = _unwrap_gamma(gamma)
    gamma0 = mu.mass_at_zero()
    norms = np.sqrt(np.sum(mu.locations ** 2, axis=1))
    sel = (norms <= search_radius * (1.0 + 1e-9)) & \
        (mu.weights >= gamma0 - eps)
    accepted = mu.locations[sel]
    return _finish_report("ATOM_concentration", eps, accepted, gap_bound,
                          search_radius, converged,
                          {"gamma_zero": gamma0})


def criterion_almost_periods(S: PointSet, eps: float, t_candidates, radii, *,
                             gap_bound: float,
                             search_radius: float | None = None
                             ) -> CriterionReport:
    """Accept t when the eps-mismatch of S against S - t has density <= eps.

    For each candidate, points of S with no point of S - t within eps form
    the mismatch set; its upper density along the schedule must not exceed
    eps. Candidates must leave room: |t| + eps + max(radii) <= window.
    """
    cand = np.atleast_2d(np.asarray(t_candidates, dtype=float))
    if cand.shape[1] != S.dim:
        raise DimensionMismatch("candidate dimension differs from the set")
    radii = np.sort(np.asarray(radii, dtype=float))
    need = float(np.max(np.sqrt(np.sum(cand ** 2, axis=1)))) + eps + radii[-1]
    if need > S.window_radius * (1.0 + 1e-9):
        raise TranslationExceedsWindow(
            f"candidates need window {need:g}, have {S.window_radius:g}")
    if search_radius is None:
        search_radius = float(np.max(np.sqrt(np.sum(cand ** 2, axis=1))))
    accepted_rows = []
    densities = []
    for t in cand:
        mism = asymmetric_mismatch(S, translate(S, t), eps)
        est = upper_density(mism, radii)
        densities.append(est.value)
        if est.value <= eps:
            accepted_rows.append(t)
    accepted = np.array(accepted_rows).reshape(-1, S.dim)
    return _finish_report("C5_almost_periods", eps, accepted, gap_bound,
                          search_radius, True,
                          {"candidates": int(len(cand)),
                           "densities": [float(v) for v in densities]})


def _profile(mu: WeightedAtomMeasure, f: TestFunction,
             pts: np.ndarray) -> np.ndarray:
    """g(u) = sum of weight * f(u - location) at each query point."""
    out = np.zeros(len(pts))
    if len(mu) == 0 or len(pts) == 0:
        return out
    grid = GridIndex(mu.locations, max(f.support_radius, mu.bin_tol))
    qi, pi = grid.pairs_within(pts - f.center, f.support_radius)
    if qi.size:
        np.add.at(out, qi, mu.weights[pi] * f(pts[qi] - mu.locations[pi]))
    return out


def bohr_test_mu_conv_f(gamma, f: TestFunction, eps: float, t_candidates,
                        probe_grid, *, gap_bound: float,
                        search_radius: float | None = None) -> CriterionReport:
    """Accept t when the smoothed pair profile moves by less than eps.

    g(u) = sum of atom weight * f(u - location); t is accepted when
    sup over the probe grid of |g(u) - g(u - t)| < eps. Uniform-norm almost
    periods of the smoothed measure are exactly what a purely atomic
    transform guarantees in abundance.
    """
    mu, converged = _unwrap_gamma(gamma)
    if f.dim != mu.dim:
        raise DimensionMismatch("test function dimension differs from measure")
    cand = np.atleast_2d(np.asarray(t_candidates, dtype=float))
    probes = np.atleast_2d(np.asarray(probe_grid, dtype=float))
    if cand.shape[1] != mu.dim or probes.shape[1] != mu.dim:
        raise DimensionMismatch("candidate or probe dimension differs")
    if search_radius is None:
        search_radius = float(np.max(np.sqrt(np.sum(cand ** 2, axis=1))))
    g0 = _profile(mu, f, probes)
    accepted_rows = []
    sups = []
    for t in cand:
        gt = _profile(mu, f, probes - t)
        sup = float(np.max(np.abs(g0 - gt)))
        sups.append(sup)
        if sup < eps:
            accepted_rows.append(t)
    accepted = np.array(accepted_rows).reshape(-1, mu.dim)
    return _finish_report("BOHR_mu_conv_f", eps, accepted, gap_bound,
                          search_radius, converged,
                          {"candidates": int(len(cand)),
                           "sup_deviation": [float(v) for v in sups]})


# ---------------------------------------------------------------------------
# CSV interchange


def periodogram_to_csv(per: Periodogram) -> str:
    lines = [f"# R={fmt_float(per.radius_used)}, norm={per.normalization}"]
    for k, v in zip(per.k_grid.nodes(), per.values):
        lines.append(",".join(fmt_float(c) for c in k) + "," + fmt_float(v))
    return "\n".join(lines) + "\n"


def write_periodogram_csv(per: Periodogram, path: str) -> None:
    from .pointset import atomic_write_text

    atomic_write_text(path, periodogram_to_csv(per))
