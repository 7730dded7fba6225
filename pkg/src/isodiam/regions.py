"""Exact membership oracles for compact sets, with sampling and Monte Carlo metrics.

A region is an immutable CSG tree over geodesic balls and half spaces, plus
symmetrization nodes realizing the two-point rearrangement.  Membership is
evaluated exactly (no discretization); all randomness is confined to the
sampled metrics, which quote their own standard errors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (
    EUCLIDEAN,
    HYPERBOLIC,
    SIDE_TOL,
    SPHERICAL,
    Ball,
    Hyperplane,
    Space,
    ball_volume,
    distance,
    geodesic_point,
    normalize_to_space,
    random_unit_tangent,
    reflect,
    tangent_toward,
    validate_ball,
    validate_hyperplane,
)
from .rng import substream

#: chained Symmetrized nodes double membership queries per level; cap the chain
DEFAULT_DEPTH_CAP = 24


class UnboundedRegionError(ValueError):
    """The region admits no bounding ball (e.g. a bare half space off the sphere)."""


class RegionDepthError(RuntimeError):
    """Symmetrized nesting exceeds the evaluation depth cap."""


class EmptyRegionWarning(UserWarning):
    """Rejection sampling produced no points; the region may be empty."""


@dataclass(frozen=True, eq=False)
class HalfSpace:
    plane: Hyperplane


@dataclass(frozen=True, eq=False)
class Union:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("union needs at least one child")


@dataclass(frozen=True, eq=False)
class Intersection:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("intersection needs at least one child")


@dataclass(frozen=True, eq=False)
class Difference:
    a: object
    b: object


@dataclass(frozen=True, eq=False)
class Symmetrized:
    """Two-point symmetrization of ``inner`` with respect to the plane's H^+."""

    plane: Hyperplane
    inner: object


#: any node of the region tree (geometry.Ball doubles as the leaf node)
Region = Ball | HalfSpace | Union | Intersection | Difference | Symmetrized


def symmetrized_depth(region) -> int:
    """Maximum nesting depth of Symmetrized nodes in the tree."""
    if isinstance(region, Symmetrized):
        return 1 + symmetrized_depth(region.inner)
    if isinstance(region, (Union, Intersection)):
        return max(symmetrized_depth(c) for c in region.children)
    if isinstance(region, Difference):
        return max(symmetrized_depth(region.a), symmetrized_depth(region.b))
    return 0


def validate_region(space: Space, region) -> None:
    """Raise ValueError on any structural invariant violation in the tree."""
    if isinstance(region, Ball):
        validate_ball(space, region)
        if space.curvature == SPHERICAL and region.radius >= math.pi:
            raise ValueError("spherical region balls must have radius < pi")
    elif isinstance(region, HalfSpace):
        validate_hyperplane(space, region.plane)
    elif isinstance(region, (Union, Intersection)):
        for c in region.children:
            validate_region(space, c)
    elif isinstance(region, Difference):
        validate_region(space, region.a)
        validate_region(space, region.b)
    elif isinstance(region, Symmetrized):
        validate_hyperplane(space, region.plane)
        validate_region(space, region.inner)
    else:
        raise ValueError(f"unknown region node {type(region).__name__}")


def _ball_gram_contains(space: Space, balls, pts):
    """Membership of pts in each of several balls at once, shape (N, M).

    Compares in form space (cos r / cosh r thresholds) so every ball leaf in a
    tree goes through the identical arithmetic.
    """
    centers = np.stack([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    if space.curvature == SPHERICAL:
        g = np.einsum("nd,md->nm", pts, centers)
        return g >= np.cos(radii)[None, :]
    if space.curvature == EUCLIDEAN:
        out = np.empty((pts.shape[0], len(balls)), dtype=bool)
        for j, b in enumerate(balls):
            d = pts - b.center
            out[:, j] = np.einsum("nd,nd->n", d, d) <= b.radius * b.radius
        return out
    g = np.einsum("n,m->nm", pts[:, -1], centers[:, -1]) - np.einsum(
        "nd,md->nm", pts[:, :-1], centers[:, :-1]
    )
    return g <= np.cosh(radii)[None, :]


def _plane_values(space: Space, plane: Hyperplane, pts):
    """Form values against the plane as one matvec (sign-adjusted for B)."""
    p = plane.normal
    if space.curvature == HYPERBOLIC:
        q = np.empty_like(p)
        q[:-1] = -p[:-1]
        q[-1] = p[-1]
    else:
        q = p
    v = pts @ q
    if space.curvature == EUCLIDEAN:
        v = v - plane.offset
    return v


def _contains(space: Space, region, pts):
    if isinstance(region, Ball):
        return _ball_gram_contains(space, [region], pts)[:, 0]
    if isinstance(region, HalfSpace):
        v = _plane_values(space, region.plane, pts)
        return region.plane.orientation * v >= -SIDE_TOL
    if isinstance(region, Union):
        res = np.zeros(pts.shape[0], dtype=bool)
        balls = [c for c in region.children if isinstance(c, Ball)]
        rest = [c for c in region.children if not isinstance(c, Ball)]
        if balls:
            res = _ball_gram_contains(space, balls, pts).any(axis=1)
        for child in rest:
            idx = np.flatnonzero(~res)
            if idx.size == 0:
                break
            res[idx] = _contains(space, child, pts[idx])
        return res
    if isinstance(region, Intersection):
        res = np.ones(pts.shape[0], dtype=bool)
        balls = [c for c in region.children if isinstance(c, Ball)]
        rest = [c for c in region.children if not isinstance(c, Ball)]
        if balls:
            res = _ball_gram_contains(space, balls, pts).all(axis=1)
        for child in rest:
            idx = np.flatnonzero(res)
            if idx.size == 0:
                break
            res[idx] = _contains(space, child, pts[idx])
        return res
    if isinstance(region, Difference):
        res = _contains(space, region.a, pts)
        idx = np.flatnonzero(res)
        if idx.size:
            res[idx] = ~_contains(space, region.b, pts[idx])
        return res
    if isinstance(region, Symmetrized):
        # Hot path of nested symmetrization chains: one matvec per visit, and
        # only the rows whose first membership query does not settle the
        # boolean get mirrored.  Mirrors skip renormalization; the drift per
        # reflection is ~1e-16 against membership tolerances of 1e-10.
        plane = region.plane
        v = _plane_values(space, plane, pts)
        p = plane.normal
        if space.curvature == HYPERBOLIC:
            qq = p[-1] * p[-1] - p[:-1] @ p[:-1]
        else:
            qq = p @ p
        scale = 2.0 / qq
        on_plus = plane.orientation * v >= -SIDE_TOL
        res = np.empty(pts.shape[0], dtype=bool)
        for idx, is_plus in ((np.flatnonzero(on_plus), True),
                             (np.flatnonzero(~on_plus), False)):
            if idx.size == 0:
                continue
            sub = pts[idx]
            a = _contains(space, region.inner, sub)
            need = np.flatnonzero(a != is_plus)
            if need.size:
                mirrors = sub[need] - (scale * v[idx[need]])[:, None] * p
                a[need] = _contains(space, region.inner, mirrors)
            res[idx] = a
        return res
    raise ValueError(f"unknown region node {type(region).__name__}")


def contains(space: Space, region, x, depth_cap: int = DEFAULT_DEPTH_CAP):
    """Exact membership of x in the region.

    Points exactly on a symmetrization plane use the H^+ rule (closed half
    space).  Accepts a single point (returns bool) or an (N, d) batch.
    """
    if symmetrized_depth(region) > depth_cap:
        raise RegionDepthError(
            f"symmetrized nesting {symmetrized_depth(region)} exceeds cap {depth_cap}"
        )
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        return bool(_contains(space, region, pts[None, :])[0])
    return _contains(space, region, pts)


def make_membership_oracle(space: Space, region, memoize: bool = False, quantum: float = 2.0**-40):
    """Single-point membership callable, optionally memoized on quantized coordinates.

    Memoization trades exactness at quantum-scale coordinate collisions for
    speed; it is off by default (correctness first).
    """
    if not memoize:
        return lambda x: contains(space, region, x)
    cache: dict = {}

    def oracle(x):
        key = tuple(np.round(np.asarray(x, dtype=float) / quantum).astype(np.int64).tolist())
        hit = cache.get(key)
        if hit is None:
            hit = contains(space, region, x)
            cache[key] = hit
        return hit

    oracle.cache = cache
    return oracle


def _merge_two_balls(space: Space, a: Ball, b: Ball) -> Ball:
    d = float(distance(space, a.center, b.center))
    if space.curvature == SPHERICAL and d > math.pi - 1e-9:
        return Ball(a.center, math.pi)
    if d <= 1e-12:
        return Ball(a.center, max(a.radius, b.radius))
    if d + b.radius <= a.radius:
        return a
    if d + a.radius <= b.radius:
        return b
    r = (d + a.radius + b.radius) / 2.0
    if space.curvature == SPHERICAL and r >= math.pi:
        return Ball(a.center, math.pi)
    u, _ = tangent_toward(space, a.center, b.center)
    c = geodesic_point(space, a.center, u, r - a.radius)
    c = normalize_to_space(space, c) if space.curvature != EUCLIDEAN else c
    return Ball(c, r)


def _enclose_balls(space: Space, balls) -> Ball:
    out = balls[0]
    for b in balls[1:]:
        out = _merge_two_balls(space, out, b)
    return out


def bounding_ball(space: Space, region) -> Ball:
    """A ball guaranteed to contain the region; not necessarily minimal.

    Raises UnboundedRegionError where no finite envelope exists (bare half
    spaces off the sphere).  On the sphere the whole space is the radius-pi
    ball, so everything is boundable there.
    """
    if isinstance(region, Ball):
        return region
    if isinstance(region, HalfSpace):
        if space.curvature != SPHERICAL:
            raise UnboundedRegionError("half space has no bounding ball in this space")
        p = region.plane.normal * float(region.plane.orientation)
        return Ball(normalize_to_space(space, p), math.pi / 2.0)
    if isinstance(region, Union):
        return _enclose_balls(space, [bounding_ball(space, c) for c in region.children])
    if isinstance(region, Intersection):
        best = None
        for c in region.children:
            try:
                b = bounding_ball(space, c)
            except UnboundedRegionError:
                continue
            if best is None or b.radius < best.radius:
                best = b
        if best is None:
            raise UnboundedRegionError("intersection has no boundable child")
        return best
    if isinstance(region, Difference):
        return bounding_ball(space, region.a)
    if isinstance(region, Symmetrized):
        inner = bounding_ball(space, region.inner)
        mirrored = Ball(reflect(space, region.plane, inner.center), inner.radius)
        return _merge_two_balls(space, inner, mirrored)
    raise ValueError(f"unknown region node {type(region).__name__}")


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Weighted sample set drawn from a region; volume per sample is the weight."""

    points: np.ndarray
    weight: float
    density: float
    seed: int

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        points.flags.writeable = False
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def volume_estimate(self) -> float:
        return len(self) * self.weight


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    samples_used: int


def _radius_quantile(space: Space, n: int, r: float, u: np.ndarray) -> np.ndarray:
    """Inverse CDF of the radial density proportional to sin/sinh/t ** (n-1)."""
    if space.curvature == EUCLIDEAN:
        return r * u ** (1.0 / n)
    grid = np.linspace(0.0, r, 4097)
    f = np.sin(grid) ** (n - 1) if space.curvature == SPHERICAL else np.sinh(grid) ** (n - 1)
    steps = np.diff(grid) * (f[1:] + f[:-1]) / 2.0
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    return np.interp(u * cdf[-1], cdf, grid)


def uniform_in_ball(space: Space, ball: Ball, rng: np.random.Generator, size: int | None = None):
    """Point(s) uniform w.r.t. the volume measure inside a geodesic ball.

    Direction is uniform on the unit tangent sphere at the center; the radius
    is drawn by inverse CDF of the ball-volume integrand.
    """
    m = 1 if size is None else int(size)
    dirs = random_unit_tangent(space, ball.center, rng, m)
    u = rng.random(m)
    t = _radius_quantile(space, space.dim, ball.radius, u)
    pts = geodesic_point(space, np.asarray(ball.center, dtype=float), dirs, t)
    return pts[0] if size is None else pts


def sample(space: Space, region, density: float, seed: int) -> PointCloud:
    """Rejection-sample the region at the given density, deterministically.

    Draws ``ceil(density * volume(envelope))`` uniform proposals in the
    bounding ball and keeps the members, so the expected count is density
    times the region volume.
    """
    if density <= 0.0:
        raise ValueError("density must be positive")
    env = bounding_ball(space, region)
    n_env = int(np.ceil(density * ball_volume(space, env.radius)))
    rng = substream(seed)
    props = uniform_in_ball(space, env, rng, size=n_env)
    keep = contains(space, region, props)
    pts = props[keep]
    if pts.shape[0] == 0:
        warnings.warn("rejection sampling accepted no points; region may be empty",
                      EmptyRegionWarning, stacklevel=2)
    return PointCloud(points=pts, weight=1.0 / density, density=density, seed=int(seed))


def _as_points(cloud) -> np.ndarray:
    return cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)


def _gram_distance_chunk(space: Space, block: np.ndarray, pts: np.ndarray):
    """All distances from a row block to pts, computed through one matmul.

    Returns a matrix monotone-equivalent to distance plus the decoder turning
    extreme entries back into distances: the form matrix on the quadrics
    (decreasing in distance on the sphere, increasing on the hyperboloid) and
    squared distances in Euclidean space.
    """
    if space.curvature == SPHERICAL:
        return block @ pts.T
    if space.curvature == HYPERBOLIC:
        flip = pts.copy()
        flip[:, :-1] *= -1.0
        return block @ flip.T
    sq = (np.einsum("nd,nd->n", block, block)[:, None]
          + np.einsum("nd,nd->n", pts, pts)[None, :] - 2.0 * (block @ pts.T))
    return np.maximum(sq, 0.0)


def _decode_gram(space: Space, g):
    if space.curvature == SPHERICAL:
        return np.arccos(np.clip(g, -1.0, 1.0))
    if space.curvature == HYPERBOLIC:
        return np.arccosh(np.clip(g, 1.0, None))
    return np.sqrt(g)


def _pairwise_extremes(space: Space, pts: np.ndarray, chunk: int = 512):
    """Max pairwise distance with an attaining pair, plus mean nearest-neighbor spacing."""
    n = pts.shape[0]
    if n == 1:
        return 0.0, 0, 0, 0.0
    # distance is decreasing in the spherical gram, increasing otherwise
    descending = space.curvature == SPHERICAL
    far_fill, near_fill = (np.inf, -np.inf) if descending else (-np.inf, np.inf)
    best = far_fill
    bi = bj = 0
    nn = np.full(n, near_fill)
    for i0 in range(0, n, chunk):
        block = pts[i0:i0 + chunk]
        g = _gram_distance_chunk(space, block, pts)
        rows = np.arange(block.shape[0])
        g[rows, i0 + rows] = far_fill
        k = int(np.argmin(g) if descending else np.argmax(g))
        r, c = divmod(k, n)
        better = g[r, c] < best if descending else g[r, c] > best
        if better:
            best = float(g[r, c])
            bi, bj = i0 + r, c
        g[rows, i0 + rows] = near_fill
        if descending:
            nn[i0:i0 + chunk] = np.maximum(nn[i0:i0 + chunk], g.max(axis=1))
        else:
            nn[i0:i0 + chunk] = np.minimum(nn[i0:i0 + chunk], g.min(axis=1))
    diam = float(_decode_gram(space, best))
    spacing = float(np.mean(_decode_gram(space, nn)))
    return diam, bi, bj, spacing


def diameter(space: Space, cloud):
    """Exact max pairwise geodesic distance over the samples, with an attaining pair.

    A lower bound on the true diameter of the generating region.
    """
    pts = _as_points(cloud)
    if pts.shape[0] == 0:
        raise ValueError("diameter of an empty cloud")
    best, bi, bj, _ = _pairwise_extremes(space, pts)
    return best, pts[bi].copy(), pts[bj].copy()


def mean_nn_spacing(space: Space, cloud) -> float:
    """Mean nearest-neighbor distance of the samples (0 for fewer than 2 points)."""
    pts = _as_points(cloud)
    if pts.shape[0] < 2:
        return 0.0
    return _pairwise_extremes(space, pts)[3]


def hausdorff(space: Space, a, b, chunk: int = 512) -> float:
    """Hausdorff distance between two sample sets: the max of the directed max-mins."""
    pa = _as_points(a)
    pb = _as_points(b)
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise ValueError("hausdorff of an empty cloud")
    descending = space.curvature == SPHERICAL

    def directed(x, y):
        worst = np.inf if descending else -np.inf
        for i0 in range(0, x.shape[0], chunk):
            g = _gram_distance_chunk(space, x[i0:i0 + chunk], y)
            # nearest neighbor per row, then the worst row
            row_near = g.max(axis=1) if descending else g.min(axis=1)
            worst = min(worst, row_near.min()) if descending else max(worst, row_near.max())
        return float(_decode_gram(space, worst))

    return max(directed(pa, pb), directed(pb, pa))


def volume_estimate(space: Space, region, samples: int, seed: int) -> VolumeEstimate:
    """Hit-or-miss Monte Carlo volume over the bounding ball.

    value = V(envelope) * hits / samples, with the exact binomial standard
    error of the estimator.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    env = bounding_ball(space, region)
    v_env = ball_volume(space, env.radius)
    rng = substream(seed)
    props = uniform_in_ball(space, env, rng, size=samples)
    hits = int(np.count_nonzero(contains(space, region, props)))
    p = hits / samples
    return VolumeEstimate(
        value=v_env * p,
        std_error=v_env * math.sqrt(p * (1.0 - p) / samples),
        samples_used=samples,
    )
