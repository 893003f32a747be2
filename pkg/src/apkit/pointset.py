"""Windowed locally finite point sets and the scale metric between them.

A PointSet is the faithful restriction of an idealized infinite configuration
to a closed observation ball: every point of the configuration with norm at
most ``window_radius`` is present and nothing else. Operations treat the
window as a hard horizon and raise rather than silently read beyond it.

Conventions fixed package-wide:

* balls are closed, boxes are half-open ``[lo, hi)``;
* stored points are sorted lexicographically;
* large float reductions go through numpy's pairwise summation, so results
  do not depend on evaluation order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCandidateSet,
    NotUniformlyDiscrete,
    RadiusExceedsWindow,
    RegionOutsideWindow,
    TranslationExceedsWindow,
    WindowTooSmall,
)
from .gridindex import GridIndex
from .util import fmt_float, tail_converged, tail_max

#: upper cap of the scale metric; reached when no covering scale certifies
METRIC_CAP = 1.0 / math.sqrt(2.0)

_REL_SLACK = 1e-9   # relative slack for closed-boundary float comparisons


def ball_volume(dim: int, radius: float) -> float:
    """Lebesgue volume of the closed Euclidean ball of the given radius."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return math.pi ** (dim / 2.0) * radius ** dim / math.gamma(dim / 2.0 + 1.0)


@dataclass(frozen=True, eq=False)
class RegionSpec:
    """Closed ball or half-open axis-aligned box."""

    kind: str
    center: np.ndarray | None = None
    radius: float = 0.0
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    @staticmethod
    def ball(center, radius: float) -> "RegionSpec":
        center = np.asarray(center, dtype=float).reshape(-1)
        if radius < 0:
            raise ValueError("ball radius must be >= 0")
        return RegionSpec(kind="ball", center=center, radius=float(radius))

    @staticmethod
    def box(lo, hi) -> "RegionSpec":
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box needs lo < hi componentwise")
        return RegionSpec(kind="box", lo=lo, hi=hi)

    @property
    def dim(self) -> int:
        return len(self.center) if self.kind == "ball" else len(self.lo)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "ball":
            d2 = np.sum((points - self.center) ** 2, axis=1)
            return d2 <= self.radius * self.radius
        return np.all(points >= self.lo, axis=1) & np.all(points < self.hi, axis=1)

    def outer_radius(self) -> float:
        """Norm bound on the region: sup |x| over x in the region."""
        if self.kind == "ball":
            return float(np.linalg.norm(self.center) + self.radius)
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    def volume(self) -> float:
        if self.kind == "ball":
            return ball_volume(self.dim, self.radius)
        return float(np.prod(self.hi - self.lo))

    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return float(np.linalg.norm(self.hi - self.lo))

    def shifted(self, t) -> "RegionSpec":
        """The region translated by +t."""
        t = np.asarray(t, dtype=float).reshape(-1)
        if self.kind == "ball":
            return RegionSpec.ball(self.center + t, self.radius)
        return RegionSpec.box(self.lo + t, self.hi + t)

    def to_json(self) -> dict:
        if self.kind == "ball":
            return {"kind": "ball", "center": [float(c) for c in self.center],
                    "radius": float(self.radius)}
        return {"kind": "box", "lo": [float(v) for v in self.lo],
                "hi": [float(v) for v in self.hi]}

    @staticmethod
    def from_json(doc: dict) -> "RegionSpec":
        if doc.get("kind") == "ball":
            return RegionSpec.ball(doc["center"], doc["radius"])
        if doc.get("kind") == "box":
            return RegionSpec.box(doc["lo"], doc["hi"])
        raise ValueError("region kind must be 'ball' or 'box'")


@dataclass
class DensityEstimate:
    """Counting-density estimate along a radius schedule.

    ``value`` is the max over the trailing half of ``tail_values`` (a limsup
    surrogate); ``converged`` reports whether the trailing quarter's relative
    spread fell below the threshold.
    """

    value: float
    radii_used: np.ndarray
    tail_values: np.ndarray
    converged: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "radii_used": [float(r) for r in self.radii_used],
            "tail_values": [float(v) for v in self.tail_values],
            "converged": self.converged,
        }


class PointSet:
    """Finite, lexicographically sorted point batch with window metadata.

    Parameters
    ----------
    points : (N, dim) array
        Coordinates; sorted on construction.
    window_radius : float
        Radius of the faithful observation ball (>= 0).
    hardcore_radius : float
        Declared minimal pairwise distance r > 0.
    validate : bool
        When true (default), check that points lie inside the window and
        respect the hardcore radius. Derived sets whose separation is known
        by construction may skip this.
    """

    def __init__(self, points, window_radius: float, hardcore_radius: float,
                 validate: bool = True):
        points = np.asarray(points, dtype=float)
        if points.size == 0:
            points = points.reshape(0, points.shape[1] if points.ndim == 2 else 1)
        if points.ndim != 2:
            raise ValueError("points must be an (N, dim) array")
        if not (hardcore_radius > 0.0):
            raise ValueError("hardcore_radius must be positive")
        if window_radius < 0.0:
            raise ValueError("window_radius must be >= 0")
        order = np.lexsort(points.T[::-1])
        self.points = points[order]
        self.dim = points.shape[1]
        self.window_radius = float(window_radius)
        self.hardcore_radius = float(hardcore_radius)
        self._norms = None
        if validate:
            self._validate()

    def _validate(self) -> None:
        w = self.window_radius * (1.0 + _REL_SLACK) + 1e-12
        if len(self) and float(np.max(self.norms())) > w:
            raise RegionOutsideWindow("points outside the declared window")
        r = self.hardcore_radius
        if len(self) > 1:
            cell = max(r, self.window_radius / 1024.0, 1e-12)
            grid = GridIndex(self.points, cell)
            qi, pi = grid.pairs_within(self.points, r * (1.0 - _REL_SLACK))
            off = qi != pi
            if np.any(off):
                d = np.sqrt(np.sum((self.points[qi[off]] - self.points[pi[off]]) ** 2,
                                   axis=1))
                raise NotUniformlyDiscrete(
                    f"pairwise distance {float(d.min()):.6g} below declared "
                    f"hardcore radius {r:.6g}")

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return (f"PointSet(n={len(self)}, dim={self.dim}, "
                f"window={self.window_radius:g}, r={self.hardcore_radius:g})")

    def norms(self) -> np.ndarray:
        if self._norms is None:
            self._norms = np.sqrt(np.sum(self.points ** 2, axis=1))
        return self._norms

    def grid(self, cell_size: float) -> GridIndex:
        return GridIndex(self.points, cell_size)


def count_in_region(S: PointSet, region: RegionSpec) -> int:
    """Number of points of S in the region (ball closed, box half-open).

    The region must sit inside the faithful window.
    """
    if region.dim != S.dim:
        raise DimensionMismatch("region and point set dimensions differ")
    if region.outer_radius() > S.window_radius * (1.0 + _REL_SLACK) + 1e-12:
        raise RegionOutsideWindow(
            f"region reaches {region.outer_radius():.6g}, window is "
            f"{S.window_radius:.6g}")
    if len(S) == 0:
        return 0
    return int(np.count_nonzero(region.contains(S.points)))


def translate(S: PointSet, t) -> PointSet:
    """The set S - t, faithfully windowed to radius window_radius - |t|."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if len(t) != S.dim:
        raise DimensionMismatch("translation vector has wrong dimension")
    tnorm = float(np.linalg.norm(t))
    if tnorm > S.window_radius * (1.0 + _REL_SLACK):
        raise TranslationExceedsWindow(
            f"|t|={tnorm:.6g} exceeds window radius {S.window_radius:.6g}")
    new_w = max(0.0, S.window_radius - tnorm)
    shifted = S.points - t
    keep = np.sum(shifted ** 2, axis=1) <= (new_w * (1.0 + _REL_SLACK)) ** 2 + 1e-300
    return PointSet(shifted[keep], new_w, S.hardcore_radius, validate=False)


def metric_d(S: PointSet, S2: PointSet, tol: float = 1e-3) -> float:
    """Scale metric: min(1/sqrt(2), inf of certified covering scales).

    A scale ``a`` certifies when every point of each set inside the ball of
    radius 1/a lies within ``a`` of the other set. Certification is monotone
    in ``a``, so the infimum is located by bisection on [tol, 1/sqrt(2)];
    the returned value is a certified scale at most tol above the infimum.
    Values at or below tol are reported as tol.

    The predicate at scale ``a`` is evaluated on the window-clipped domain
    B_min(1/a, W-a) of each set so that it never consults points the other
    window cannot faithfully represent.
    """
    if S.dim != S2.dim:
        raise DimensionMismatch("point sets live in different dimensions")
    if not (0.0 < tol < METRIC_CAP):
        raise ValueError("tol must lie in (0, 1/sqrt(2))")
    min_w = min(S.window_radius, S2.window_radius)
    if 1.0 / tol > min_w * (1.0 + _REL_SLACK):
        raise WindowTooSmall(
            f"covering check at scale tol={tol:g} needs window >= {1.0 / tol:g}, "
            f"have {min_w:g}")

    cell = max(min(S.hardcore_radius, S2.hardcore_radius), 0.25)
    grids = (S.grid(cell), S2.grid(cell))
    norms = (S.norms(), S2.norms())
    pts = (S.points, S2.points)
    windows = (S.window_radius, S2.window_radius)

    def certified(a: float) -> bool:
        for side in (0, 1):
            other = 1 - side
            dom = min(1.0 / a, windows[other] - a)
            sel = norms[side] <= dom
            if not np.any(sel):
                continue
            if not bool(np.all(grids[other].any_within(pts[side][sel], a))):
                return False
        return True

    if certified(tol):
        return tol
    if not certified(METRIC_CAP):
        return METRIC_CAP
    lo, hi = tol, METRIC_CAP
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            hi = mid
        else:
            lo = mid
    return hi


def upper_density(S: PointSet, radii, tail_fraction: float = 0.5,
                  converge_rtol: float = 0.05) -> DensityEstimate:
    """Counting density count(B_R)/|B_R| along a radius schedule.

    The headline value is the max over the trailing half of the schedule,
    a finite-scale stand-in for the upper density limsup.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size == 0 or radii[0] <= 0:
        raise ValueError("radii must be positive")
    if radii[-1] > S.window_radius * (1.0 + _REL_SLACK):
        raise RadiusExceedsWindow(
            f"schedule reaches {radii[-1]:.6g}, window is {S.window_radius:.6g}")
    sorted_norms = np.sort(S.norms()) if len(S) else np.empty(0)
    counts = np.searchsorted(sorted_norms, radii * (1.0 + _REL_SLACK), side="right")
    vols = np.array([ball_volume(S.dim, r) for r in radii])
    values = counts / vols
    return DensityEstimate(
        value=tail_max(values, tail_fraction),
        radii_used=radii,
        tail_values=values,
        converged=tail_converged(values, rtol=converge_rtol),
    )


def mean_nn_spacing(S: PointSet) -> float:
    """Mean distance from each point to its nearest other point."""
    if len(S) < 2:
        raise ValueError("need at least two points")
    guess = (ball_volume(S.dim, S.window_radius) / len(S)) ** (1.0 / S.dim)
    radius = max(2.0 * guess, 2.0 * S.hardcore_radius)
    while True:
        grid = S.grid(radius)
        qi, pi = grid.pairs_within(S.points, radius)
        real = qi != pi
        best = np.full(len(S), np.inf)
        if np.any(real):
            d = np.sqrt(np.sum((S.points[qi[real]] - S.points[pi[real]]) ** 2,
                               axis=1))
            np.minimum.at(best, qi[real], d)
        if np.all(np.isfinite(best)):
            return float(np.mean(best))
        if radius >= 2.0 * S.window_radius:
            return float(np.mean(best[np.isfinite(best)]))
        radius = min(radius * 2.0, 2.0 * S.window_radius)


def relative_density_gap(candidates, search_radius: float,
                         probe_pitch: float | None = None) -> float:
    """Largest distance from any center in B_search_radius to the candidate set.

    The smallest M such that every closed M-ball centered in the probed ball
    meets the candidates. Exact in 1D (sorted scan over gaps and edge
    distances); in higher dimensions evaluated on a probe grid of the given
    pitch (default search_radius/32), which makes the result a lower bound.
    A value near search_radius means the candidates carry no relative-density
    evidence at this scale.
    """
    pts = np.atleast_2d(np.asarray(candidates, dtype=float))
    if pts.size == 0:
        raise EmptyCandidateSet("no candidates to measure")
    if search_radius <= 0:
        raise ValueError("search_radius must be positive")
    norms = np.sqrt(np.sum(pts ** 2, axis=1))
    if float(np.max(norms)) > search_radius * (1.0 + _REL_SLACK) + 1e-12:
        raise RegionOutsideWindow("candidates outside the probed ball")
    w = float(search_radius)
    if pts.shape[1] == 1:
        xs = np.sort(pts[:, 0])
        edge = max(xs[0] + w, w - xs[-1])
        interior = float(np.max(np.diff(xs)) / 2.0) if len(xs) > 1 else 0.0
        return max(edge, interior)
    pitch = probe_pitch if probe_pitch is not None else w / 32.0
    axes = [np.arange(-w, w + pitch / 2.0, pitch) for _ in range(pts.shape[1])]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, pts.shape[1])
    mesh = mesh[np.sum(mesh ** 2, axis=1) <= w * w]
    spacing = (ball_volume(pts.shape[1], w) / max(len(pts), 1)) ** (1.0 / pts.shape[1])
    grid = GridIndex(pts, max(spacing, pitch))
    return float(np.max(grid.nn_dist(mesh)))


# ---------------------------------------------------------------------------
# CSV interchange


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def pointset_to_csv(S: PointSet) -> str:
    lines = [f"# dim={S.dim}",
             f"# r={fmt_float(S.hardcore_radius)}",
             f"# window={fmt_float(S.window_radius)}"]
    for row in S.points:
        lines.append(",".join(fmt_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_pointset_csv(S: PointSet, path: str) -> None:
    atomic_write_text(path, pointset_to_csv(S))


def read_pointset_csv(path: str) -> PointSet:
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
    for key in ("dim", "r", "window"):
        if key not in meta:
            raise ValueError(f"pointset CSV missing '# {key}=' header")
    dim = int(meta["dim"])
    pts = np.asarray(rows, dtype=float).reshape(len(rows), dim)
    return PointSet(pts, window_radius=meta["window"], hardcore_radius=meta["r"])
