"""Hidden metric-measure spaces, i.i.d. point samplers and empirical estimators.

Points are stored as float arrays of shape ``(n, dim)``:

* ``circle``            dim 1, arc-length coordinate in ``[0, C)``; geodesic distance
* ``unit-square``       dim 2, Euclidean
* ``unit-cube``         dim 3, Euclidean
* ``hyperboloid``       dim 3 on ``x^2 + y^2 - z^2 = 1``, ``|z| <= z_max``; chordal distance
* ``sphere-nonuniform`` dim 3 on the unit sphere; chordal distance
* ``pointcloud-file``   dim taken from the file, Euclidean; the measure is the
                        empirical measure of the file's points
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, FormatError, ParameterError
from .rng import substream

KINDS = ("circle", "unit-square", "unit-cube", "hyperboloid", "sphere-nonuniform", "pointcloud-file")

_DEFAULTS = {
    "circle": {"circumference": 1.0},
    "unit-square": {},
    "unit-cube": {},
    "hyperboloid": {"z_max": 1.5},
    "sphere-nonuniform": {"alpha": 0.0},
    "pointcloud-file": {},
}
_ALIASES = {"C": "circumference", "zmax": "z_max"}

ON_SPACE_TOL = 1e-9


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    params: dict = field(default_factory=dict)
    known_doubling: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown space kind {self.kind!r}; expected one of {KINDS}")
        params = dict(_DEFAULTS[self.kind])
        for key, value in self.params.items():
            params[_ALIASES.get(key, key)] = value
        unknown = set(params) - set(_DEFAULTS[self.kind]) - ({"path"} if self.kind == "pointcloud-file" else set())
        if unknown:
            raise ParameterError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        for key in params:
            if key != "path":
                params[key] = float(params[key])
        object.__setattr__(self, "params", params)

        if self.kind == "circle" and not params["circumference"] > 0:
            raise ParameterError("circle circumference must be > 0")
        if self.kind == "hyperboloid" and not params["z_max"] > 0:
            raise ParameterError("hyperboloid z_max must be > 0")
        if self.kind == "sphere-nonuniform" and not params["alpha"] >= 0:
            raise ParameterError("sphere density skew alpha must be >= 0")
        if self.known_doubling is not None and not self.known_doubling >= 1:
            raise ParameterError("known doubling constant must be >= 1")

    @classmethod
    def circle(cls, circumference=1.0):
        return cls("circle", {"circumference": circumference}, known_doubling=2.0)

    @classmethod
    def euclidean(cls, path=None):
        """Euclidean point cloud, optionally backed by a file."""
        return cls("pointcloud-file", {"path": str(path)} if path is not None else {})

    @property
    def dim(self) -> int | None:
        return {"circle": 1, "unit-square": 2, "unit-cube": 3, "hyperboloid": 3, "sphere-nonuniform": 3}.get(self.kind)

    @property
    def periodic(self) -> float | None:
        """Period of the coordinate for the circle, else None."""
        return self.params["circumference"] if self.kind == "circle" else None

    def describe(self) -> str:
        items = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"kind={self.kind}" + (f" {items}" if items else "")


@dataclass(frozen=True)
class PointSample:
    points: np.ndarray
    space: SpaceSpec
    seed: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ParameterError("a point sample needs at least 2 points")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_points(cls, points, space: SpaceSpec | None = None):
        return cls(points, space if space is not None else SpaceSpec.euclidean())


# ---------------------------------------------------------------------------
# point files

def read_points(path) -> tuple[np.ndarray, SpaceSpec | None]:
    """Read a point file; returns the points and the space named in its header, if any.

    A line of the form ``# space: kind=<kind> key=value ...`` restores the space
    the points were generated on; without it the metric is Euclidean.
    """
    path = Path(path)
    rows, space, width = [], None, None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if stripped.startswith("#"):
                body = stripped[1:].strip()
                if body.startswith("space:"):
                    space = _parse_space_header(path, body[len("space:"):], lineno)
                continue
            if not stripped:
                continue
            try:
                row = [float(tok) for tok in stripped.split()]
            except ValueError:
                raise FormatError(path, f"non-numeric coordinate in {stripped!r}", lineno) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FormatError(path, f"expected {width} coordinates, got {len(row)}", lineno)
            rows.append(row)
    if not rows:
        raise FormatError(path, "no points found")
    return np.asarray(rows, dtype=float), space


def _parse_space_header(path, text, lineno):
    fields = dict(tok.split("=", 1) for tok in text.split() if "=" in tok)
    kind = fields.pop("kind", None)
    if kind is None:
        raise FormatError(path, "space header without kind=", lineno)
    try:
        return SpaceSpec(kind, fields)
    except ParameterError as exc:
        raise FormatError(path, str(exc), lineno) from None


def write_points(path, sample: PointSample) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if sample.space.kind != "pointcloud-file":
            fh.write(f"# space: {sample.space.describe()}\n")
        if sample.seed is not None:
            fh.write(f"# seed: {sample.seed}\n")
        for row in sample.points:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_sample(path) -> PointSample:
    points, space = read_points(path)
    return PointSample(points, space if space is not None else SpaceSpec.euclidean(path), _header_seed(path))


def _header_seed(path) -> int | None:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.strip()
            if not body.startswith("#"):
                return None
            body = body[1:].strip()
            if body.startswith("seed:"):
                try:
                    return int(body[len("seed:"):])
                except ValueError:
                    raise FormatError(path, f"bad seed line {line.strip()!r}", lineno) from None
    return None


# ---------------------------------------------------------------------------
# sampling

def sample_points(space: SpaceSpec, n: int, seed: int) -> PointSample:
    if int(n) < 2:
        raise ParameterError("n must be >= 2")
    n = int(n)
    rng = substream(seed, "geometry.sample")
    kind, prm = space.kind, space.params
    if kind == "circle":
        pts = rng.uniform(0.0, prm["circumference"], size=(n, 1))
    elif kind == "unit-square":
        pts = rng.random((n, 2))
    elif kind == "unit-cube":
        pts = rng.random((n, 3))
    elif kind == "hyperboloid":
        pts = _sample_hyperboloid(rng, n, prm["z_max"])
    elif kind == "sphere-nonuniform":
        pts = _sample_sphere(rng, n, prm["alpha"])
    else:
        cloud = _cloud_points(space)
        pts = cloud[rng.integers(0, cloud.shape[0], size=n)]
    return PointSample(pts, space, seed)


def _sample_hyperboloid(rng, n, z_max):
    # surface element of x^2+y^2-z^2=1 in (theta, z) coordinates is sqrt(1+2z^2) dz dtheta
    envelope = math.sqrt(1.0 + 2.0 * z_max**2)
    zs = np.empty(0)
    while zs.size < n:
        z = rng.uniform(-z_max, z_max, size=2 * n)
        keep = rng.random(2 * n) * envelope <= np.sqrt(1.0 + 2.0 * z**2)
        zs = np.concatenate([zs, z[keep]])
    z = zs[:n]
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    rho = np.sqrt(1.0 + z**2)
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])


def _sample_sphere(rng, n, alpha):
    # density proportional to 1 + alpha * cos(latitude) w.r.t. surface area
    out = np.empty((0, 3))
    while out.shape[0] < n:
        g = rng.standard_normal((2 * n, 3))
        g /= np.linalg.norm(g, axis=1)[:, None]
        cos_lat = np.hypot(g[:, 0], g[:, 1])
        keep = rng.random(2 * n) * (1.0 + alpha) <= 1.0 + alpha * cos_lat
        out = np.concatenate([out, g[keep]])
    return out[:n]


def _cloud_points(space):
    path = space.params.get("path")
    if path is None:
        raise ParameterError("pointcloud space has no backing file")
    pts, _ = read_points(path)
    return pts


# ---------------------------------------------------------------------------
# distances

def distances(space: SpaceSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise distances between point arrays ``a`` and ``b`` (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    period = space.periodic
    if period is not None:
        diff = np.abs(a[..., 0] - b[..., 0]) % period
        return np.minimum(diff, period - diff)
    return np.sqrt(np.sum((a - b) ** 2, axis=-1))


def contains(space: SpaceSpec, point, tol: float = ON_SPACE_TOL) -> bool:
    p = np.atleast_1d(np.asarray(point, dtype=float))
    dim = space.dim
    if dim is not None and p.shape != (dim,):
        return False
    kind = space.kind
    if kind == "circle":
        return -tol <= p[0] <= space.params["circumference"] + tol
    if kind in ("unit-square", "unit-cube"):
        return bool(np.all(p >= -tol) and np.all(p <= 1 + tol))
    if kind == "hyperboloid":
        x, y, z = p
        return abs(x * x + y * y - z * z - 1.0) <= tol and abs(z) <= space.params["z_max"] + tol
    if kind == "sphere-nonuniform":
        return abs(float(p @ p) - 1.0) <= tol
    return bool(np.all(np.isfinite(p)))


def space_distance(space: SpaceSpec, a, b) -> float:
    for p in (a, b):
        if not contains(space, p):
            raise DomainError(f"point {p!r} is not on the {space.kind} space")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise DomainError("points have different dimensions")
    return float(distances(space, a, b))


def pairwise_distances(sample: PointSample) -> np.ndarray:
    """Dense n x n matrix of d_X over the sample."""
    pts = sample.points
    return distances(sample.space, pts[:, None, :], pts[None, :, :])


def diameter(space: SpaceSpec, sample: PointSample | None = None) -> float:
    kind, prm = space.kind, space.params
    if kind == "circle":
        return prm["circumference"] / 2.0
    if kind == "unit-square":
        return math.sqrt(2.0)
    if kind == "unit-cube":
        return math.sqrt(3.0)
    if kind == "hyperboloid":
        return 2.0 * math.sqrt(1.0 + 2.0 * prm["z_max"] ** 2)
    if kind == "sphere-nonuniform":
        return 2.0
    pts = _cloud_points(space) if prm.get("path") else sample.points
    best = 0.0
    for start in range(0, pts.shape[0], 1024):
        block = pts[start:start + 1024]
        d = np.sqrt(((block[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        best = max(best, float(d.max()))
    return best


# ---------------------------------------------------------------------------
# empirical estimators

def _tree(sample: PointSample) -> cKDTree:
    period = sample.space.periodic
    if period is not None:
        return cKDTree(np.mod(sample.points, period), boxsize=period)
    return cKDTree(sample.points)


def ball_counts(sample: PointSample, centers: np.ndarray, radius: float) -> np.ndarray:
    """Number of sample points within closed distance ``radius`` of each center index."""
    period = sample.space.periodic
    if period is not None:
        # sorted-arc counting; exact and O(n log n)
        if radius >= period / 2.0:
            return np.full(len(centers), sample.n, dtype=np.int64)
        angles = np.sort(np.mod(sample.points[:, 0], period))
        ext = np.concatenate([angles - period, angles, angles + period])
        x = np.mod(sample.points[centers, 0], period)
        hi = np.searchsorted(ext, x + radius, side="right")
        lo = np.searchsorted(ext, x - radius, side="left")
        return (hi - lo).astype(np.int64)
    tree = _tree(sample)
    return np.asarray(tree.query_ball_point(sample.points[centers], radius, return_length=True), dtype=np.int64)


def estimate_ball_mass_lower(sample: PointSample, r: float) -> float:
    """Vertex-centred plug-in for ``s``: min over x in V of |V ∩ B(x, r/2)| / n."""
    if not r > 0:
        raise ParameterError("r must be > 0")
    counts = ball_counts(sample, np.arange(sample.n), r / 2.0)
    return float(counts.min()) / sample.n


def estimate_doubling_constant(sample: PointSample, radius_cap: float, n_scales: int = 4,
                               max_centers: int | None = None, seed: int = 0) -> float:
    """Largest observed |V ∩ B(x,2R)| / max(1, |V ∩ B(x,R)|).

    Radii run over ``radius_cap/2, radius_cap/4, ...`` (``n_scales`` of them) so
    that every doubled ball stays within ``radius_cap``. Centers are all sample
    points, or a seeded subset of ``max_centers`` of them.
    """
    if not radius_cap > 0 or int(n_scales) < 1:
        raise ParameterError("radius_cap must be > 0 and n_scales >= 1")
    centers = np.arange(sample.n)
    if max_centers is not None and max_centers < sample.n:
        centers = np.sort(substream(seed, "geometry.doubling").choice(sample.n, size=max_centers, replace=False))
    best = 1.0
    for k in range(int(n_scales)):
        R = radius_cap / 2.0 ** (k + 1)
        inner = ball_counts(sample, centers, R)
        outer = ball_counts(sample, centers, 2.0 * R)
        best = max(best, float(np.max(outer / np.maximum(inner, 1))))
    return best


def suggest_radius(sample: PointSample, multiplier: float, k: int = 10) -> float:
    """``multiplier`` times the mean distance from a point to its k-th nearest neighbour."""
    if int(k) < 1 or int(k) >= sample.n:
        raise ParameterError(f"k must satisfy 1 <= k < n (k={k}, n={sample.n})")
    if not multiplier > 0:
        raise ParameterError("multiplier must be > 0")
    dist, _ = _tree(sample).query(np.mod(sample.points, sample.space.periodic)
                                  if sample.space.periodic else sample.points, k=int(k) + 1)
    return float(multiplier * dist[:, int(k)].mean())


@dataclass(frozen=True)
class EpsilonCheck:
    is_sample: bool
    max_gap: float
    probes: int


def probe_points(space: SpaceSpec, count: int, sample: PointSample | None = None) -> np.ndarray:
    """Deterministic, roughly evenly spread reference points covering the space."""
    kind, prm = space.kind, space.params
    if kind == "circle":
        return (np.arange(count) * (prm["circumference"] / count))[:, None]
    if kind in ("unit-square", "unit-cube"):
        d = 2 if kind == "unit-square" else 3
        side = max(2, math.ceil(count ** (1.0 / d)))
        axes = np.meshgrid(*[np.linspace(0.0, 1.0, side)] * d, indexing="ij")
        return np.column_stack([a.ravel() for a in axes])
    if kind == "sphere-nonuniform":
        # Fibonacci lattice
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        rho = np.sqrt(1.0 - z * z)
        phi = math.pi * (3.0 - math.sqrt(5.0)) * i
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    if kind == "hyperboloid":
        nz = max(2, int(math.sqrt(count / 4)))
        nt = max(3, count // nz)
        z, t = np.meshgrid(np.linspace(-prm["z_max"], prm["z_max"], nz),
                           np.arange(nt) * (2 * math.pi / nt), indexing="ij")
        z, t = z.ravel(), t.ravel()
        rho = np.sqrt(1.0 + z * z)
        return np.column_stack([rho * np.cos(t), rho * np.sin(t), z])
    if prm.get("path"):
        return _cloud_points(space)
    return np.asarray(sample.points)


def check_epsilon_sample(sample: PointSample, epsilon: float, probe_count: int = 4096) -> EpsilonCheck:
    """Probe-based test of whether every point of the space is within ``epsilon`` of the sample.

    A failing probe proves the sample is not an epsilon-sample; passing only
    certifies the probes.
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be > 0")
    probes = probe_points(sample.space, int(probe_count), sample)
    period = sample.space.periodic
    if period is not None:
        probes = np.mod(probes, period)
    gaps, _ = _tree(sample).query(probes, k=1)
    gap = float(gaps.max())
    return EpsilonCheck(gap <= epsilon, gap, len(probes))
