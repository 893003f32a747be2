"""Point-set construction: lattices, cut-and-project sets, random processes.

Deterministic generators (lattices, strip projections with optional smooth
deformation) plus seeded stationary samplers, with Palm-intensity estimation
tying the process view to the autocorrelation view. All randomness flows
through a counter-based generator split per sample index, so identical
(kind, seed) reproduces identical point sets bit for bit.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .autocorr import finite_autocorrelation
from .diffraction import CriterionReport, _finish_report
from .errors import (
    ConfigError,
    NotUniformlyDiscrete,
    SingularBasis,
    WindowTooSmall,
)
from .gridindex import GridIndex
from .pointset import PointSet, RegionSpec, ball_volume
from .util import thread_count

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

SAMPLER_KINDS = ("randomized_model_set", "randomized_lattice", "matern_II",
                 "perturbed_lattice")

_ENUM_LIMIT = 300_000_000


def _min_pair_distance(points: np.ndarray, scale: float) -> float | None:
    """Smallest pairwise distance, or None when fewer than two points."""
    if len(points) < 2:
        return None
    radius = max(scale, 1e-9)
    while True:
        grid = GridIndex(points, radius)
        qi, pi = grid.pairs_within(points, radius)
        real = qi != pi
        if np.any(real):
            d2 = np.sum((points[qi[real]] - points[pi[real]]) ** 2, axis=1)
            return float(math.sqrt(float(np.min(d2))))
        radius *= 2.0


# ---------------------------------------------------------------------------
# Lattices


def make_lattice(basis, window_radius: float) -> PointSet:
    """All integer combinations of the basis rows inside the closed ball."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    d = B.shape[1]
    if B.shape[0] != d:
        raise SingularBasis("basis must be square (one vector per dimension)")
    scale = float(np.max(np.abs(B)))
    if scale == 0 or abs(np.linalg.det(B)) < 1e-12 * scale ** d:
        raise SingularBasis("basis vectors are linearly dependent")
    inv = np.linalg.inv(B)
    bounds = np.ceil(window_radius * np.sqrt(np.sum(inv ** 2, axis=0)) + 1e-9)
    axes = [np.arange(-b, b + 1) for b in bounds]
    M = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    pts = M @ B
    pts = pts[np.sum(pts ** 2, axis=1) <= window_radius ** 2 * (1 + 1e-12)]
    # shortest nonzero lattice vector over a small combination box
    small = np.stack(np.meshgrid(*([np.arange(-4, 5)] * d), indexing="ij"),
                     axis=-1).reshape(-1, d)
    small = small[np.any(small != 0, axis=1)]
    r = float(np.min(np.sqrt(np.sum((small @ B) ** 2, axis=1))))
    return PointSet(pts, window_radius, r)


def lattice_covolume(basis) -> float:
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    return float(abs(np.linalg.det(B)))


# ---------------------------------------------------------------------------
# Cut and project


@dataclass(frozen=True)
class SinusoidalDeformation:
    """Smooth displacement field on internal coordinates.

    g(w) = amplitude * sin(2 pi <frequency, w> + phase); uniformly continuous
    and bounded by |amplitude|, so the enumeration margin is explicit.
    """

    amplitude: np.ndarray
    frequency: np.ndarray
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitude",
                           np.asarray(self.amplitude, dtype=float).reshape(-1))
        object.__setattr__(self, "frequency",
                           np.asarray(self.frequency, dtype=float).reshape(-1))

    def __call__(self, w: np.ndarray) -> np.ndarray:
        s = np.sin(2.0 * np.pi * (w @ self.frequency) + self.phase)
        return s[:, None] * self.amplitude[None, :]

    def bound(self) -> float:
        return float(np.linalg.norm(self.amplitude))

    def to_json(self) -> dict:
        return {"kind": "sinusoidal",
                "amplitude": [float(v) for v in self.amplitude],
                "frequency": [float(v) for v in self.frequency],
                "phase": float(self.phase)}


def _deformation_from_json(doc) -> "SinusoidalDeformation | None":
    if doc is None or doc == {} or doc.get("kind") == "zero":
        return None
    if doc.get("kind") != "sinusoidal":
        raise ConfigError(f"unknown deformation kind {doc.get('kind')!r}")
    return SinusoidalDeformation(doc["amplitude"], doc["frequency"],
                                 doc.get("phase", 0.0))


@dataclass(frozen=True)
class CutProjectConfig:
    """Strip-projection configuration.

    Physical points are the E-coordinates of lattice translates whose
    F-coordinates land in the window, displaced by the deformation of those
    internal coordinates. Window membership is half-open for boxes and
    closed for balls, which makes boundary cases deterministic.
    """

    n: int
    E_basis: np.ndarray
    F_basis: np.ndarray
    window: RegionSpec
    output_radius: float
    deformation: SinusoidalDeformation | None = None
    torus_offset: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "E_basis",
                           np.atleast_2d(np.asarray(self.E_basis, dtype=float)))
        object.__setattr__(self, "F_basis",
                           np.atleast_2d(np.asarray(self.F_basis, dtype=float)))
        offset = np.zeros(self.n) if self.torus_offset is None \
            else np.asarray(self.torus_offset, dtype=float).reshape(-1)
        object.__setattr__(self, "torus_offset", offset)
        self.validate()

    @property
    def physical_dim(self) -> int:
        return self.E_basis.shape[0]

    @property
    def internal_dim(self) -> int:
        return self.F_basis.shape[0]

    def validate(self) -> None:
        if self.E_basis.shape[1] != self.n or self.F_basis.shape[1] != self.n:
            raise ConfigError("basis vectors must live in the ambient space")
        if self.E_basis.shape[0] + self.F_basis.shape[0] != self.n:
            raise ConfigError("E and F dimensions must sum to the ambient n")
        if len(self.torus_offset) != self.n:
            raise ConfigError("torus offset must have ambient dimension")
        M = np.vstack([self.E_basis, self.F_basis])
        gram = M @ M.T
        if float(np.max(np.abs(gram - np.eye(self.n)))) > 1e-10:
            raise ConfigError("E and F bases are not jointly orthonormal")
        if self.window.dim != self.internal_dim:
            raise ConfigError("window dimension must match the internal space")
        if not (self.output_radius >= 0):
            raise ConfigError("output_radius must be nonnegative")
        if self.deformation is not None:
            if len(self.deformation.amplitude) != self.physical_dim:
                raise ConfigError("deformation amplitude must be physical-dim")
            if len(self.deformation.frequency) != self.internal_dim:
                raise ConfigError("deformation frequency must be internal-dim")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "E_basis": [[float(v) for v in row] for row in self.E_basis],
            "F_basis": [[float(v) for v in row] for row in self.F_basis],
            "window": self.window.to_json(),
            "output_radius": float(self.output_radius),
            "deformation": (self.deformation.to_json()
                            if self.deformation else {"kind": "zero"}),
            "torus_offset": [float(v) for v in self.torus_offset],
        }

    @staticmethod
    def from_json(doc: dict) -> "CutProjectConfig":
        return CutProjectConfig(
            n=doc["n"],
            E_basis=doc["E_basis"],
            F_basis=doc["F_basis"],
            window=RegionSpec.from_json(doc["window"]),
            output_radius=doc["output_radius"],
            deformation=_deformation_from_json(doc.get("deformation")),
            torus_offset=doc.get("torus_offset", [0.0] * doc["n"]),
        )


def rationality_report(vector, max_denominator: int = 10 ** 6) -> list[str]:
    """Heuristic rational-relation findings among a vector's coordinates.

    Reports coordinate ratios that agree with a fraction of denominator at
    most max_denominator to within 1e-14 relative. Empty list means no
    relation was found at this resolution; that is evidence, not proof, of
    linear independence over the rationals.
    """
    v = np.asarray(vector, dtype=float).reshape(-1)
    findings = []
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            if v[j] == 0:
                findings.append(f"coordinate {j} is zero")
                continue
            ratio = v[i] / v[j]
            frac = Fraction(ratio).limit_denominator(max_denominator)
            if abs(ratio - float(frac)) <= 1e-14 * max(1.0, abs(ratio)):
                findings.append(
                    f"coordinates {i}/{j} ratio matches {frac} "
                    f"(denominator <= {max_denominator})")
    return findings


def _graze_mask(window: RegionSpec, w: np.ndarray) -> np.ndarray:
    """Rows whose internal coordinates lie exactly on the window boundary."""
    if window.kind == "box":
        return np.any((w == window.lo) | (w == window.hi), axis=1)
    d2 = np.sum((w - window.center) ** 2, axis=1)
    return d2 == window.radius ** 2


def _enumerate_strip(cfg: CutProjectConfig):
    """Scan the integer box covering the strip; return (physical, grazes)."""
    amp = cfg.deformation.bound() if cfg.deformation else 0.0
    rho_E = cfg.output_radius + amp + 1e-9
    rho = math.sqrt(rho_E ** 2 + cfg.window.outer_radius() ** 2)
    lo = np.floor(-rho - cfg.torus_offset).astype(np.int64)
    hi = np.ceil(rho - cfg.torus_offset).astype(np.int64)
    sizes = (hi - lo + 1).astype(object)
    total = int(np.prod(sizes))
    if total > _ENUM_LIMIT:
        raise ConfigError(
            f"strip enumeration would scan {total} lattice points; "
            "reduce output_radius or the window")
    axes = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(cfg.n)]
    rest = int(np.prod([len(a) for a in axes[1:]])) if cfg.n > 1 else 1
    block = max(1, 2_000_000 // max(rest, 1))
    phys_parts = []
    grazes = 0
    for s in range(0, len(axes[0]), block):
        first = axes[0][s:s + block]
        mesh = np.stack(np.meshgrid(first, *axes[1:], indexing="ij"),
                        axis=-1).reshape(-1, cfg.n)
        z = mesh + cfg.torus_offset
        w = z @ cfg.F_basis.T
        grazes += int(np.count_nonzero(_graze_mask(cfg.window, w)))
        inside = cfg.window.contains(w)
        if not np.any(inside):
            continue
        z, w = z[inside], w[inside]
        phys = z @ cfg.E_basis.T
        if cfg.deformation is not None:
            phys = phys + cfg.deformation(w)
        keep = np.sum(phys ** 2, axis=1) <= cfg.output_radius ** 2 * (1 + 1e-12)
        phys_parts.append(phys[keep])
    if phys_parts:
        points = np.concatenate(phys_parts)
    else:
        points = np.empty((0, cfg.physical_dim))
    return points, grazes


def cut_and_project(cfg: CutProjectConfig) -> PointSet:
    """Project the strip's lattice points to physical space.

    The full integer box covering the strip segment is scanned, so the
    output is faithful in its window: enlarging output_radius never changes
    the points inside the smaller radius. The hardcore radius is measured
    from the output; exact collisions raise NotUniformlyDiscrete.
    """
    findings: list[str] = []
    for row in cfg.E_basis:
        findings = rationality_report(row)
        if not findings:
            break
    if findings:
        warnings.warn(
            "no E-basis vector passed the irrationality heuristic: "
            + "; ".join(findings), stacklevel=2)
    points, grazes = _enumerate_strip(cfg)
    if grazes:
        warnings.warn(
            f"{grazes} lattice translate(s) lie exactly on the window "
            "boundary; membership used the half-open/closed convention",
            stacklevel=2)
    if len(points) < 2:
        return PointSet(points, cfg.output_radius, max(cfg.output_radius, 1.0),
                        validate=False)
    spacing_guess = (ball_volume(cfg.physical_dim, cfg.output_radius)
                     / len(points)) ** (1.0 / cfg.physical_dim)
    r = _min_pair_distance(points, spacing_guess)
    if r is None or r <= 1e-12:
        raise NotUniformlyDiscrete(
            "deformation collapsed distinct projections (measured r = 0)")
    return PointSet(points, cfg.output_radius, r)


def fibonacci_config(output_radius: float,
                     torus_offset=(0.0, 0.0),
                     deformation: SinusoidalDeformation | None = None
                     ) -> CutProjectConfig:
    """Canonical two-to-one strip projection with golden-ratio slope.

    Undeformed output has exactly two nearest-neighbor gaps with ratio the
    golden ratio; the short gap is 1/sqrt(2 + golden ratio).
    """
    tau = GOLDEN_RATIO
    c = math.sqrt(2.0 + tau)
    E = np.array([[tau / c, 1.0 / c]])
    F = np.array([[-1.0 / c, tau / c]])
    window = RegionSpec.box([-1.0 / c], [tau / c])
    return CutProjectConfig(n=2, E_basis=E, F_basis=F, window=window,
                            output_radius=output_radius,
                            deformation=deformation,
                            torus_offset=np.asarray(torus_offset, dtype=float))


FIBONACCI_MIN_GAP = 1.0 / math.sqrt(2.0 + GOLDEN_RATIO)
FIBONACCI_DENSITY = GOLDEN_RATIO ** 2 / math.sqrt(2.0 + GOLDEN_RATIO)


# ---------------------------------------------------------------------------
# Stationary samplers


@dataclass(frozen=True)
class ProcessSampler:
    """Seeded description of a stationary point process.

    kind selects the construction; identical (kind, parameters, seed)
    reproduce identical samples. sample(p, index) uses a counter-based
    stream jumped per index, so samples are independent and reproducible
    out of order.
    """

    kind: str
    seed: int
    window_radius: float
    cut_project: CutProjectConfig | None = None
    basis: np.ndarray | None = None
    intensity: float | None = None
    hardcore: float | None = None
    noise_bound: float | None = None
    noise_distribution: str = "uniform_ball"
    dim: int = 1

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ConfigError(f"unknown sampler kind {self.kind!r}")
        if self.basis is not None:
            object.__setattr__(self, "basis",
                               np.atleast_2d(np.asarray(self.basis, dtype=float)))
        if self.kind == "randomized_model_set" and self.cut_project is None:
            raise ConfigError("randomized_model_set needs cut_project")
        if self.kind in ("randomized_lattice", "perturbed_lattice") \
                and self.basis is None:
            raise ConfigError(f"{self.kind} needs a basis")
        if self.kind == "matern_II":
            if self.intensity is None or self.hardcore is None:
                raise ConfigError("matern_II needs intensity and hardcore")
            if self.intensity < 0 or self.hardcore <= 0:
                raise ConfigError("matern_II needs intensity >= 0, hardcore > 0")
        if self.kind == "perturbed_lattice":
            if self.noise_bound is None:
                raise ConfigError("perturbed_lattice needs noise_bound")
            if self.noise_distribution != "uniform_ball":
                raise ConfigError(
                    f"unsupported noise distribution {self.noise_distribution!r}")

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind, "seed": int(self.seed),
                     "window_radius": float(self.window_radius)}
        if self.cut_project is not None:
            doc["cut_project"] = self.cut_project.to_json()
        if self.basis is not None:
            doc["basis"] = [[float(v) for v in row] for row in self.basis]
        if self.intensity is not None:
            doc["intensity"] = float(self.intensity)
        if self.hardcore is not None:
            doc["hardcore"] = float(self.hardcore)
        if self.noise_bound is not None:
            doc["noise_bound"] = float(self.noise_bound)
        if self.kind == "perturbed_lattice":
            doc["noise_distribution"] = self.noise_distribution
        if self.basis is None and self.cut_project is None:
            doc["dim"] = int(self.dim)
        return doc

    @staticmethod
    def from_json(doc: dict) -> "ProcessSampler":
        cp = doc.get("cut_project")
        return ProcessSampler(
            kind=doc["kind"], seed=doc["seed"],
            window_radius=doc["window_radius"],
            cut_project=CutProjectConfig.from_json(cp) if cp else None,
            basis=doc.get("basis"),
            intensity=doc.get("intensity"),
            hardcore=doc.get("hardcore"),
            noise_bound=doc.get("noise_bound"),
            noise_distribution=doc.get("noise_distribution", "uniform_ball"),
            dim=doc.get("dim", 1),
        )


def _rng(p: ProcessSampler, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=p.seed).jumped(index))


def _uniform_in_ball(rng: np.random.Generator, n: int, dim: int,
                     radius: float) -> np.ndarray:
    dirs = rng.normal(size=(n, dim))
    norms = np.sqrt(np.sum(dirs ** 2, axis=1))
    norms[norms == 0] = 1.0
    radii = radius * rng.random(n) ** (1.0 / dim)
    return dirs / norms[:, None] * radii[:, None]


def _lattice_dim(p: ProcessSampler) -> int:
    return p.basis.shape[1]


def sample(p: ProcessSampler, index: int = 0) -> PointSet:
    """Draw the index-th sample of the process, faithful in its window."""
    rng = _rng(p, index)
    W = p.window_radius
    if p.kind == "randomized_lattice":
        u = rng.random(_lattice_dim(p))
        offset = u @ p.basis
        diam = float(np.sum(np.sqrt(np.sum(p.basis ** 2, axis=1))))
        base = make_lattice(p.basis, W + diam + 1.0)
        pts = base.points - offset
        pts = pts[np.sum(pts ** 2, axis=1) <= W * W * (1 + 1e-12)]
        return PointSet(pts, W, base.hardcore_radius)
    if p.kind == "randomized_model_set":
        for _ in range(3):
            u = rng.random(p.cut_project.n)
            cfg = replace(p.cut_project, torus_offset=u, output_radius=W)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                out = cut_and_project(cfg)
            grazed = False
            for c in caught:
                if "window boundary" in str(c.message):
                    grazed = True
                else:
                    warnings.warn_explicit(c.message, c.category, c.filename,
                                           c.lineno)
            if not grazed:
                return out
            # measure-zero event: a translate landed exactly on the window
            # boundary; redraw the offset rather than depend on tie-breaking
        return out
    if p.kind == "matern_II":
        r = p.hardcore
        buf = W + r
        vol = ball_volume(_mat_dim(p), buf)
        n = int(rng.poisson(p.intensity * vol))
        props = _uniform_in_ball(rng, n, _mat_dim(p), buf)
        marks = rng.random(n)
        if n:
            grid = GridIndex(props, r)
            qi, pi = grid.pairs_within(props, r)
            older = (marks[pi] < marks[qi]) | ((marks[pi] == marks[qi]) & (pi < qi))
            killed = np.zeros(n, dtype=bool)
            np.logical_or.at(killed, qi, older)
            props = props[~killed]
        pts = props[np.sum(props ** 2, axis=1) <= W * W * (1 + 1e-12)]
        return PointSet(pts, W, r)
    # perturbed_lattice
    dim = _lattice_dim(p)
    base_r = make_lattice(p.basis, 2.0).hardcore_radius
    if not (p.noise_bound < base_r / 2.0):
        raise ConfigError(
            f"noise bound {p.noise_bound:g} must stay below half the lattice "
            f"hardcore radius {base_r:g}")
    u = rng.random(dim)
    offset = u @ p.basis
    diam = float(np.sum(np.sqrt(np.sum(p.basis ** 2, axis=1))))
    base = make_lattice(p.basis, W + diam + p.noise_bound + 1.0)
    noise = _uniform_in_ball(rng, len(base.points), dim, p.noise_bound)
    pts = base.points - offset + noise
    pts = pts[np.sum(pts ** 2, axis=1) <= W * W * (1 + 1e-12)]
    return PointSet(pts, W, base_r - 2.0 * p.noise_bound)


def _mat_dim(p: ProcessSampler) -> int:
    return p.dim if p.basis is None else p.basis.shape[1]


def matern_effective_intensity(p: ProcessSampler) -> float:
    """Closed-form retained intensity of the dependent-thinning sampler."""
    vr = ball_volume(_mat_dim(p), p.hardcore)
    lam = p.intensity
    if lam == 0:
        return 0.0
    return (1.0 - math.exp(-lam * vr)) / vr


# ---------------------------------------------------------------------------
# Palm calculus


@dataclass
class PalmIntensityEstimate:
    """Monte Carlo estimate of the typical-point intensity on a region."""

    region: RegionSpec
    value: float
    stderr: float
    samples: int
    B_used: RegionSpec

    def to_json(self) -> dict:
        return {"region": self.region.to_json(), "value": self.value,
                "stderr": self.stderr, "samples": self.samples,
                "B_used": self.B_used.to_json()}


def _count_diffs_in(chi: PointSet, anchors: np.ndarray, A: RegionSpec) -> int:
    """Number of pairs (x in anchors, y in chi) with y - x in A."""
    if len(anchors) == 0 or len(chi) == 0:
        return 0
    outer = A.outer_radius()
    grid = chi.grid(max(outer, chi.hardcore_radius))
    if A.kind == "ball":
        qi, pi = grid.pairs_within(anchors + A.center, A.radius)
        return int(len(qi))
    qi, pi = grid.pairs_within(anchors, outer)
    return int(np.count_nonzero(A.contains(chi.points[pi] - anchors[qi])))


def default_palm_base(dim: int) -> RegionSpec:
    return RegionSpec.box([-0.5] * dim, [0.5] * dim)


def palm_intensity(p: ProcessSampler, A: RegionSpec,
                   B: RegionSpec | None = None, n_samples: int = 200,
                   threads: int | None = None) -> PalmIntensityEstimate:
    """Estimate the mean count in A seen from a typical point of the process.

    Averages (1/|B|) * sum over points x in B of card((sample - x) and A)
    across seeded samples. The base region B is arbitrary for a stationary
    process; the default is the unit cube at the origin.
    """
    if B is None:
        B = default_palm_base(A.dim)
    margin = A.diameter() + B.diameter()
    if margin > p.window_radius:
        raise WindowTooSmall(
            f"need window > diameter(A) + diameter(B) = {margin:g}, have "
            f"{p.window_radius:g}")
    volB = B.volume()

    def one(i: int) -> float:
        chi = sample(p, i)
        if len(chi) == 0:
            return 0.0
        anchors = chi.points[B.contains(chi.points)]
        return _count_diffs_in(chi, anchors, A) / volB

    workers = thread_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.fromiter(ex.map(one, range(n_samples)), dtype=float,
                               count=n_samples)
    else:
        vals = np.fromiter((one(i) for i in range(n_samples)), dtype=float,
                           count=n_samples)
    value = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n_samples)) \
        if n_samples > 1 else math.inf
    return PalmIntensityEstimate(A, value, stderr, n_samples, B)


def verify_acpalm(p: ProcessSampler, A: RegionSpec, radii, n_seeds: int = 20,
                  n_palm_samples: int = 200,
                  threads: int | None = None) -> dict:
    """Per-seed autocorrelation mass on A versus the Palm estimate.

    For each seed the pair-difference measure of the sample is evaluated on
    A along the radius schedule; its final value is compared to the Palm
    intensity estimate. Returns a JSON-ready report with per-seed deviations.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    palm = palm_intensity(p, A, n_samples=n_palm_samples, threads=threads)
    cutoff = A.outer_radius() + 1.0

    def one(i: int) -> list[float]:
        chi = sample(p, i)
        return [finite_autocorrelation(chi, float(R), diff_cutoff=cutoff)
                .mass_in_region(A) for R in radii]

    workers = thread_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            series = list(ex.map(one, range(n_seeds)))
    else:
        series = [one(i) for i in range(n_seeds)]
    finals = np.array([s[-1] for s in series])
    deviations = finals - palm.value
    return {
        "palm_value": palm.value,
        "palm_stderr": palm.stderr,
        "radii": [float(r) for r in radii],
        "per_seed_mass": [[float(v) for v in s] for s in series],
        "per_seed_final": [float(v) for v in finals],
        "deviations": [float(v) for v in deviations],
        "max_abs_deviation": float(np.max(np.abs(deviations))) if n_seeds else 0.0,
        "n_seeds": int(n_seeds),
    }


def _wilson_upper(successes: int, n: int, z: float = 1.959964) -> float:
    if n == 0:
        return 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = phat + z * z / (2 * n)
    rad = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return min(1.0, (center + rad) / denom)


def event_almost_periods(p: ProcessSampler, R: float, eps: float,
                         t_candidates, n_samples: int = 500, *,
                         gap_bound: float,
                         search_radius: float | None = None,
                         threads: int | None = None) -> CriterionReport:
    """Monte Carlo occupancy-event almost periods of the process.

    For each candidate t, estimates the probability that exactly one of
    {sample hits B_R} and {sample - t hits B_R} occurs; t is accepted when
    the estimate is at most eps. The one-sided 95% Wilson bound per
    candidate is recorded in the report details.
    """
    cand = np.atleast_2d(np.asarray(t_candidates, dtype=float))
    reach = float(np.max(np.sqrt(np.sum(cand ** 2, axis=1)))) + R
    if reach > p.window_radius:
        raise WindowTooSmall(
            f"candidates need window > {reach:g}, have {p.window_radius:g}")
    if search_radius is None:
        search_radius = float(np.max(np.sqrt(np.sum(cand ** 2, axis=1))))

    def one(i: int) -> np.ndarray:
        chi = sample(p, i)
        if len(chi) == 0:
            return np.zeros(len(cand), dtype=np.int64)
        occ0 = bool(np.any(chi.norms() <= R))
        d2 = np.sum((chi.points[None, :, :] - cand[:, None, :]) ** 2, axis=2)
        occt = np.any(d2 <= R * R, axis=1)
        return (occt != occ0).astype(np.int64)

    workers = thread_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            counts = sum(ex.map(one, range(n_samples)))
    else:
        counts = sum(one(i) for i in range(n_samples))
    counts = np.asarray(counts)
    phat = counts / n_samples
    wilson = [_wilson_upper(int(c), n_samples) for c in counts]
    accepted = cand[phat <= eps]
    return _finish_report("EVENT_almost_periods", eps, accepted, gap_bound,
                          search_radius, True,
                          {"n_samples": int(n_samples),
                           "event_rate": [float(v) for v in phat],
                           "wilson_upper95": [float(v) for v in wilson]})
