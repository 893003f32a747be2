"""Finite-window autocorrelation measures and averaged pair functionals.

The autocorrelation of a windowed point set at radius R is the atom measure
collecting all ordered pair differences inside the R-ball, weighted 1/|B_R|
per pair, with locations merged at a small binning tolerance. No edge
correction is applied: the definition is exactly the restricted double sum,
and convergence along a radius schedule is what absorbs boundary effects.
A separate, clearly named helper divides weights by the ball-overlap
fraction for callers that want the edge-debiased estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoAtomAtZero,
    PsiNotNormalized,
    RadiusExceedsWindow,
    WindowTooSmall,
)
from .gridindex import GridIndex
from .pointset import PointSet, RegionSpec, ball_volume
from .testfunc import TestFunction
from .util import fmt_float, relative_spread

_MAX_CODES = 2**62


def _group_by_cell(locations: np.ndarray, cell: float):
    """Weighted grouping of rows by their floor-quantized cell."""
    cells = np.floor(locations / cell).astype(np.int64)
    mins = cells.min(axis=0)
    extents = cells.max(axis=0) - mins + 1
    if np.prod(extents.astype(object)) >= _MAX_CODES:
        raise ValueError("bin_tol too fine for the difference extent")
    strides = np.ones(len(extents), dtype=np.int64)
    for i in range(len(extents) - 2, -1, -1):
        strides[i] = strides[i + 1] * extents[i + 1]
    codes = (cells - mins) @ strides
    order = np.argsort(codes, kind="stable")
    codes = codes[order]
    starts = np.nonzero(np.concatenate([[True], codes[1:] != codes[:-1]]))[0]
    return order, starts


def _aggregate(locations, weights, group_ids, n_groups):
    wsum = np.bincount(group_ids, weights=weights, minlength=n_groups)
    locs = np.empty((n_groups, locations.shape[1]))
    for d in range(locations.shape[1]):
        locs[:, d] = np.bincount(group_ids, weights=weights * locations[:, d],
                                 minlength=n_groups) / wsum
    return locs, wsum


def bin_atoms(locations: np.ndarray, weights: np.ndarray, bin_tol: float):
    """Merge atoms until all pairwise distances are >= bin_tol.

    Quantize to bin_tol cells, take weighted centroids, then repeatedly merge
    connected components of the within-bin_tol proximity graph. Smeared mass
    therefore collapses to local weighted centroids at bin_tol resolution.
    """
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if len(locations) == 0:
        return locations, weights
    order, starts = _group_by_cell(locations, bin_tol)
    gid = np.empty(len(locations), dtype=np.int64)
    gid[order] = np.searchsorted(starts, np.arange(len(locations)), side="right") - 1
    locs, wts = _aggregate(locations, weights, gid, len(starts))
    for _ in range(32):
        grid = GridIndex(locs, bin_tol)
        qi, pi = grid.pairs_within(locs, bin_tol * (1.0 - 1e-12))
        edges = qi < pi
        if not np.any(edges):
            break
        parent = np.arange(len(locs))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in zip(qi[edges], pi[edges]):
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[rb] = ra
        roots = np.array([find(int(i)) for i in range(len(locs))])
        _, comp = np.unique(roots, return_inverse=True)
        locs, wts = _aggregate(locs, wts, comp, comp.max() + 1)
    else:
        raise RuntimeError("atom binning did not reach a fixpoint")
    order = np.lexsort(locs.T[::-1])
    return locs[order], wts[order]


class WeightedAtomMeasure:
    """Finite positive atom measure with a resolution tolerance.

    Atom locations are pairwise at least bin_tol apart and sorted
    lexicographically; weights are strictly positive.
    """

    def __init__(self, dim: int, locations, weights, bin_tol: float,
                 validate: bool = True):
        locations = np.asarray(locations, dtype=float).reshape(-1, dim)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if len(locations) != len(weights):
            raise ValueError("locations and weights length mismatch")
        if not (bin_tol > 0):
            raise ValueError("bin_tol must be positive")
        order = np.lexsort(locations.T[::-1])
        self.dim = dim
        self.locations = locations[order]
        self.weights = weights[order]
        self.bin_tol = float(bin_tol)
        if validate:
            if np.any(self.weights <= 0):
                raise ValueError("weights must be strictly positive")
            if len(self.locations) > 1:
                grid = GridIndex(self.locations, bin_tol)
                qi, pi = grid.pairs_within(self.locations,
                                           bin_tol * (1.0 - 1e-9))
                if np.any(qi != pi):
                    raise ValueError("atoms closer than bin_tol")

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return (f"WeightedAtomMeasure(atoms={len(self)}, dim={self.dim}, "
                f"bin_tol={self.bin_tol:g}, mass={self.total_mass():.6g})")

    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def mass_at(self, location, tol: float | None = None) -> float:
        """Total weight within tol (default bin_tol) of the location."""
        if len(self) == 0:
            return 0.0
        location = np.asarray(location, dtype=float).reshape(1, -1)
        tol = self.bin_tol if tol is None else tol
        d2 = np.sum((self.locations - location) ** 2, axis=1)
        return float(np.sum(self.weights[d2 <= tol * tol]))

    def mass_in_region(self, region: RegionSpec) -> float:
        if region.dim != self.dim:
            raise DimensionMismatch("region dimension differs from the measure")
        if len(self) == 0:
            return 0.0
        return float(np.sum(self.weights[region.contains(self.locations)]))

    def mass_at_zero(self) -> float:
        m = self.mass_at(np.zeros(self.dim))
        if m == 0.0:
            raise NoAtomAtZero("measure has no atom at the origin")
        return m

    def support_radius(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.max(np.sqrt(np.sum(self.locations ** 2, axis=1))))

    def coarsened(self, scale: float) -> "WeightedAtomMeasure":
        """Re-binned copy at a coarser resolution."""
        if scale < self.bin_tol:
            raise ValueError("coarsening scale below current bin_tol")
        locs, wts = bin_atoms(self.locations, self.weights, scale)
        return WeightedAtomMeasure(self.dim, locs, wts, scale, validate=False)

    def negation_symmetric(self, rtol: float = 1e-9) -> bool:
        """Whether the measure equals its reflection through the origin."""
        if len(self) == 0:
            return True
        grid = GridIndex(self.locations, max(self.bin_tol, 1e-12))
        qi, pi = grid.pairs_within(-self.locations, self.bin_tol)
        matched_w = np.zeros(len(self))
        np.add.at(matched_w, qi, self.weights[pi])
        scale = float(np.max(self.weights))
        return bool(np.all(np.abs(matched_w - self.weights) <= rtol * scale))


def evaluate(mu: WeightedAtomMeasure, f: TestFunction) -> float:
    """Integral of f against the atom measure: sum of weight * f(location)."""
    if f.dim != mu.dim:
        raise DimensionMismatch("test function dimension differs from measure")
    if len(mu) == 0:
        return 0.0
    return float(np.sum(mu.weights * f(mu.locations)))


def finite_autocorrelation(S: PointSet, R: float, bin_tol: float | None = None,
                           diff_cutoff: float | None = None
                           ) -> WeightedAtomMeasure:
    """Ordered pair-difference measure of S within the closed R-ball.

    Every ordered pair (x, y) of points in S with |x|, |y| <= R and
    |y - x| <= diff_cutoff contributes weight 1/|B_R| at y - x. Self pairs
    give the atom at 0 weight card/|B_R|. With the default cutoff 2R the
    total mass is exactly card^2/|B_R|.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if R > S.window_radius * (1.0 + 1e-9):
        raise RadiusExceedsWindow(
            f"R={R:g} exceeds window radius {S.window_radius:g}")
    if bin_tol is None:
        bin_tol = S.hardcore_radius * 1e-3
    if diff_cutoff is None:
        diff_cutoff = 2.0 * R
    vol = ball_volume(S.dim, R)
    inside = RegionSpec.ball(np.zeros(S.dim), R).contains(S.points) if len(S) \
        else np.zeros(0, dtype=bool)
    P = S.points[inside]
    if len(P) == 0:
        return WeightedAtomMeasure(S.dim, np.empty((0, S.dim)), np.empty(0),
                                   bin_tol, validate=False)
    grid = GridIndex(P, max(diff_cutoff, S.hardcore_radius))
    qi, pi = grid.pairs_within(P, diff_cutoff)
    diffs = P[pi] - P[qi]
    locs, wts = bin_atoms(diffs, np.ones(len(diffs)), bin_tol)
    return WeightedAtomMeasure(S.dim, locs, wts / vol, bin_tol, validate=False)


def ball_overlap_fraction(dim: int, R: float, separations: np.ndarray) -> np.ndarray:
    """|B_R intersect (B_R + v)| / |B_R| as a function of s = |v|.

    Exact in 1D; evaluated by Simpson quadrature of the cross-section formula
    in higher dimensions.
    """
    s = np.asarray(separations, dtype=float)
    out = np.zeros(s.shape)
    inside = s < 2.0 * R
    if dim == 1:
        out[inside] = 1.0 - s[inside] / (2.0 * R)
        return out
    # overlap = 2 * cap volume; cap from x = s/2 to R of (n-1)-ball sections
    nodes = np.linspace(0.0, 1.0, 513)
    w = np.ones(len(nodes))
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    half = s[inside] / 2.0
    x = half[:, None] + (R - half[:, None]) * nodes[None, :]
    sec = (np.maximum(R * R - x * x, 0.0)) ** ((dim - 1) / 2.0)
    cap = np.sum(w[None, :] * sec, axis=1) * ((R - half) / (len(nodes) - 1)) / 3.0
    cap *= ball_volume(dim - 1, 1.0)
    out[inside] = 2.0 * cap / ball_volume(dim, R)
    return out


def debias_ball_edge(mu: WeightedAtomMeasure, R: float) -> WeightedAtomMeasure:
    """Divide weights by the ball-overlap fraction at each atom's distance.

    Turns the restricted pair-difference estimate into an (unbiased, higher
    variance near the support edge) estimate of the limiting weights. Atoms
    within 1% of the 2R horizon are dropped rather than blown up.
    """
    if len(mu) == 0:
        return mu
    seps = np.sqrt(np.sum(mu.locations ** 2, axis=1))
    frac = ball_overlap_fraction(mu.dim, R, seps)
    keep = frac > 0.01
    return WeightedAtomMeasure(mu.dim, mu.locations[keep],
                               mu.weights[keep] / frac[keep], mu.bin_tol,
                               validate=False)


@dataclass
class AutocorrEstimate:
    """Autocorrelation along a radius schedule with atom tracking."""

    measure: WeightedAtomMeasure
    radius_schedule: np.ndarray
    per_radius_mass_at_zero: np.ndarray
    converged: bool
    tracked_locations: np.ndarray
    tracked_weights: np.ndarray   # (n_tracked, n_radii)

    def to_json(self) -> dict:
        return {
            "radii": [float(r) for r in self.radius_schedule],
            "mass_at_zero": [float(v) for v in self.per_radius_mass_at_zero],
            "converged": self.converged,
            "atoms": len(self.measure),
            "total_mass": self.measure.total_mass(),
            "bin_tol": self.measure.bin_tol,
        }


def autocorrelation_limit(S: PointSet, radii, bin_tol: float | None = None,
                          diff_cutoff: float | None = None,
                          significance: float = 0.01,
                          track_rtol: float = 0.05) -> AutocorrEstimate:
    """Pair-difference measures along a schedule, with limit diagnostics.

    The returned measure is the one at the largest radius. Atoms carrying at
    least ``significance`` times the zero-atom weight are tracked across the
    schedule; the estimate is converged when every tracked weight series and
    the zero-atom series have trailing relative spread below ``track_rtol``.
    A shared difference cutoff (default twice the smallest radius) keeps the
    measures comparable across the schedule.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size < 2:
        raise ValueError("need at least two radii to track convergence")
    if diff_cutoff is None:
        diff_cutoff = 2.0 * float(radii[0])
    measures = [finite_autocorrelation(S, float(r), bin_tol, diff_cutoff)
                for r in radii]
    final = measures[-1]
    zero = np.zeros(S.dim)
    mass0 = np.array([m.mass_at(zero) for m in measures])
    if mass0[-1] == 0.0:
        raise NoAtomAtZero("empty sample: autocorrelation has no zero atom")
    sig = final.weights >= significance * mass0[-1]
    tracked_locs = final.locations[sig]
    tracked = np.zeros((len(tracked_locs), len(radii)))
    for j, m in enumerate(measures):
        if len(m) == 0 or len(tracked_locs) == 0:
            continue
        grid = GridIndex(m.locations, max(final.bin_tol, m.bin_tol))
        qi, pi = grid.pairs_within(tracked_locs, final.bin_tol)
        np.add.at(tracked[:, j], qi, m.weights[pi])
    half = max(2, len(radii) // 2)
    ok = relative_spread(mass0[-half:]) < track_rtol
    for row in tracked:
        ok = ok and relative_spread(row[-half:]) < track_rtol
    return AutocorrEstimate(
        measure=final,
        radius_schedule=radii,
        per_radius_mass_at_zero=mass0,
        converged=bool(ok),
        tracked_locations=tracked_locs,
        tracked_weights=tracked,
    )


def _check_psi(psi: TestFunction) -> None:
    if psi.amplitude < 0:
        raise PsiNotNormalized("weight function must be nonnegative")
    total = psi.integral()
    if abs(total - 1.0) > 1e-9:
        raise PsiNotNormalized(
            f"weight function integral {total!r} differs from 1 by more than 1e-9")


def hf_functional(S: PointSet, psi: TestFunction, f: TestFunction) -> float:
    """Weighted pair sum: sum over x, y in S of psi(x) f(y - x).

    psi must be a nonnegative unit-integral weight; both supports (and the
    pair reach) must fit inside the window.
    """
    if psi.dim != S.dim or f.dim != S.dim:
        raise DimensionMismatch("test function dimension differs from the set")
    _check_psi(psi)
    reach = psi.support_bound() + f.support_bound()
    if reach > S.window_radius * (1.0 + 1e-9):
        raise WindowTooSmall(
            f"pair reach {reach:g} exceeds window {S.window_radius:g}")
    if len(S) == 0:
        return 0.0
    sel = psi(S.points) > 0.0
    X = S.points[sel]
    if len(X) == 0:
        return 0.0
    psi_x = psi(X)
    grid = S.grid(max(f.support_radius, S.hardcore_radius))
    qi, pi = grid.pairs_within(X + f.center, f.support_radius)
    if qi.size == 0:
        return 0.0
    contrib = psi_x[qi] * f(S.points[pi] - X[qi])
    return float(np.sum(contrib))


def birkhoff_average_hf(S: PointSet, psi: TestFunction, f: TestFunction,
                        R: float, quad_points: int = 4096) -> float:
    """Ball average over translates t in B_R of the weighted pair sum of S - t.

    Midpoint quadrature; the translate is applied inside the pair sum (psi
    slides over the window) so no per-node point set is materialized.
    """
    from .pseudometrics import _midpoint_grid

    if psi.dim != S.dim or f.dim != S.dim:
        raise DimensionMismatch("test function dimension differs from the set")
    _check_psi(psi)
    margin = psi.support_bound() + f.support_bound()
    if R + margin > S.window_radius * (1.0 + 1e-9):
        raise WindowTooSmall(
            f"need window >= R + supports = {R + margin:g}, have "
            f"{S.window_radius:g}")
    nodes, _ = _midpoint_grid(R, S.dim, quad_points)
    if len(S) == 0:
        return 0.0
    # inner sums F(x) = sum_y f(y - x) for every x that psi can reach
    reach = R + psi.support_bound()
    cand = S.norms() <= reach + 1e-9
    X = S.points[cand]
    grid_all = S.grid(max(f.support_radius, S.hardcore_radius))
    qi, pi = grid_all.pairs_within(X + f.center, f.support_radius)
    F = np.zeros(len(X))
    if qi.size:
        np.add.at(F, qi, f(S.points[pi] - X[qi]))
    # pair each node t with the points psi(x - t) can see
    grid_x = GridIndex(X, max(psi.support_radius, S.hardcore_radius))
    ti, xi = grid_x.pairs_within(nodes + psi.center, psi.support_radius)
    H = np.zeros(len(nodes))
    if ti.size:
        np.add.at(H, ti, psi(X[xi] - nodes[ti]) * F[xi])
    return float(np.mean(H))


# ---------------------------------------------------------------------------
# CSV interchange


def measure_to_csv(mu: WeightedAtomMeasure) -> str:
    lines = [f"# dim={mu.dim}", f"# bin_tol={fmt_float(mu.bin_tol)}"]
    for loc, w in zip(mu.locations, mu.weights):
        lines.append(",".join(fmt_float(v) for v in loc) + "," + fmt_float(w))
    return "\n".join(lines) + "\n"


def write_measure_csv(mu: WeightedAtomMeasure, path: str) -> None:
    from .pointset import atomic_write_text

    atomic_write_text(path, measure_to_csv(mu))


def read_measure_csv(path: str) -> WeightedAtomMeasure:
    meta: dict[str, float] = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    meta[key.strip()] = float(val.strip())
                continue
            rows.append([float(v) for v in line.split(",")])
    for key in ("dim", "bin_tol"):
        if key not in meta:
            raise ValueError(f"measure CSV missing '# {key}=' header")
    dim = int(meta["dim"])
    data = np.asarray(rows, dtype=float).reshape(len(rows), dim + 1)
    return WeightedAtomMeasure(dim, data[:, :dim], data[:, dim],
                               meta["bin_tol"])
