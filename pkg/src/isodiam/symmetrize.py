"""Two-point symmetrization as a region transformer, and the iterated flow.

A flow repeatedly symmetrizes a region across strategy-chosen hyperplanes and
tracks Monte Carlo metrics per step: volume (preserved), sampled diameter
(non-increasing), and Hausdorff distance to the reference ball, the
equal-volume ball at the tracked pole.  Convergence is an experimental
observation, never asserted as a guarantee.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .geometry import (
    EUCLIDEAN,
    SPHERICAL,
    Ball,
    Hyperplane,
    Space,
    ball_volume,
    bisector,
    distance,
    random_unit_tangent,
    reflect,
    side,
    validate_hyperplane,
)
from .regions import (
    DEFAULT_DEPTH_CAP,
    Difference,
    PointCloud,
    Symmetrized,
    Union,
    VolumeEstimate,
    _pairwise_extremes,
    bounding_ball,
    contains,
    diameter,
    hausdorff,
    sample,
    symmetrized_depth,
    uniform_in_ball,
    volume_estimate,
)
from .rng import substream


class SphericalDiameterWarning(UserWarning):
    """Sampled diameter is not below pi, outside the symmetrization hypothesis."""


class FlowInvariantError(RuntimeError):
    """A per-step exact invariant (the counting identity) failed."""


@dataclass(frozen=True, eq=False)
class FarthestPairBisector:
    """Bisector of the diameter-attaining sample pair, pole kept in H^+."""

    pole: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class RandomThroughPole:
    """Uniform random hyperplane through the pole, random orientation."""

    pole: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class FixedSchedule:
    planes: tuple

    def __post_init__(self):
        object.__setattr__(self, "planes", tuple(self.planes))
        if not self.planes:
            raise ValueError("schedule must be nonempty")


Strategy = FarthestPairBisector | RandomThroughPole | FixedSchedule


def strategy_pole(space: Space, strategy) -> np.ndarray:
    pole = getattr(strategy, "pole", None)
    return space.base_point if pole is None else np.asarray(pole, dtype=float)


def choose_hyperplane(space: Space, strategy, cloud, rng: np.random.Generator,
                      step: int = 0) -> Hyperplane:
    """Next symmetrization hyperplane under the strategy."""
    if isinstance(strategy, FarthestPairBisector):
        if cloud is None or len(cloud) < 2:
            raise ValueError("farthest-pair strategy needs at least two sample points")
        _, x, y = diameter(space, cloud)
        h = bisector(space, x, y)
        pole = strategy_pole(space, strategy)
        if side(space, h, pole) < 0:
            h = h.flipped()
        return h
    if isinstance(strategy, RandomThroughPole):
        pole = strategy_pole(space, strategy)
        u = random_unit_tangent(space, pole, rng)
        orientation = 1 if rng.random() < 0.5 else -1
        offset = float(np.dot(pole, u)) if space.curvature == EUCLIDEAN else 0.0
        return Hyperplane(u, orientation, offset)
    if isinstance(strategy, FixedSchedule):
        if step >= len(strategy.planes):
            raise ValueError(f"fixed schedule exhausted after {len(strategy.planes)} planes")
        return strategy.planes[step]
    raise TypeError(f"unknown strategy {type(strategy).__name__}")


def two_point_symmetrize(space: Space, h: Hyperplane, region, cloud=None):
    """Two-point symmetrization of the region with respect to the hyperplane.

    Returns the Symmetrized node; membership follows the union rule on H^+
    and the intersection rule on H^-.  A ball whose center lies on the plane
    is its own symmetrization and is returned unchanged.  With a sample cloud
    supplied, spherical inputs get their diameter hypothesis checked
    (warning-level).
    """
    validate_hyperplane(space, h)
    bounding_ball(space, region)
    if space.curvature == SPHERICAL and cloud is not None and len(cloud) >= 2:
        d, _, _, spacing = _pairwise_extremes(space, cloud.points)
        if d + 2.0 * spacing >= math.pi:
            warnings.warn("sampled diameter is not below pi; symmetrization properties "
                          "are not guaranteed", SphericalDiameterWarning, stacklevel=2)
    if isinstance(region, Ball) and side(space, h, region.center) == 0:
        return region
    return Symmetrized(h, region)


@dataclass(frozen=True)
class MetricsConfig:
    """Per-step metric settings and the symmetrized-chain depth budget."""

    cloud_density: float = 1000.0
    volume_samples: int = 20000
    identity_check_points: int = 1000
    rebase_depth: int = DEFAULT_DEPTH_CAP
    rebase_centers: int = 192


@dataclass(frozen=True)
class FlowStep:
    step: int
    volume: VolumeEstimate
    diameter: float
    hausdorff_to_reference: float
    spacing: float
    plane: Hyperplane | None
    rebased: bool


@dataclass
class FlowReport:
    space: Space
    steps: list
    reference_ball: Ball
    seed: int
    config: dict
    stop_epsilon: float
    converged: bool

    def write_csv(self, path) -> None:
        ad = self.space.ambient_dim
        header = ["step", "volume", "volume_stderr", "diameter", "hausdorff",
                  "spacing", "rebased", "orientation", "offset"]
        header += [f"normal_{i}" for i in range(ad)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for rec in self.steps:
                row = [rec.step, repr(rec.volume.value), repr(rec.volume.std_error),
                       repr(rec.diameter), repr(rec.hausdorff_to_reference),
                       repr(rec.spacing), int(rec.rebased)]
                if rec.plane is None:
                    row += ["", ""] + [""] * ad
                else:
                    row += [rec.plane.orientation, repr(rec.plane.offset)]
                    row += [repr(float(v)) for v in rec.plane.normal]
                w.writerow(row)

    def to_dict(self) -> dict:
        return {
            "space": {"curvature": self.space.curvature, "dim": self.space.dim},
            "seed": self.seed,
            "config": self.config,
            "stop_epsilon": self.stop_epsilon,
            "converged": self.converged,
            "reference_ball": {"center": [float(v) for v in self.reference_ball.center],
                               "radius": float(self.reference_ball.radius)},
            "steps": [
                {
                    "step": rec.step,
                    "volume": rec.volume.value,
                    "volume_stderr": rec.volume.std_error,
                    "samples": rec.volume.samples_used,
                    "diameter": rec.diameter,
                    "hausdorff": rec.hausdorff_to_reference,
                    "spacing": rec.spacing,
                    "rebased": rec.rebased,
                    "plane": None if rec.plane is None else {
                        "normal": [float(v) for v in rec.plane.normal],
                        "orientation": rec.plane.orientation,
                        "offset": rec.plane.offset,
                    },
                }
                for rec in self.steps
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def child_seed(seed: int, *path: int) -> int:
    """Derived integer seed for the (seed, path) coordinate."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def _check_counting_identity(space: Space, plane: Hyperplane, inner, wrapped,
                             n_points: int, seed: int) -> None:
    """Exact pointwise identity behind volume preservation; raises on failure."""
    env = bounding_ball(space, wrapped)
    rng = substream(seed)
    pts = uniform_in_ball(space, env, rng, size=n_points)
    mirrored = reflect(space, plane, pts)
    lhs = contains(space, wrapped, pts).astype(int) + contains(space, wrapped, mirrored).astype(int)
    rhs = contains(space, inner, pts).astype(int) + contains(space, inner, mirrored).astype(int)
    bad = int(np.count_nonzero(lhs != rhs))
    if bad:
        raise FlowInvariantError(f"counting identity failed at {bad}/{n_points} points")


def _rebase_approximation(space: Space, region, target_volume: float,
                          metrics: MetricsConfig, seed: int, step: int):
    """Fresh shallow ball-based approximation of the region, volume-calibrated.

    Regions filling most of their envelope become the envelope minus a union
    of hole balls around complement samples (the envelope boundary stays exact
    across re-bases); sparse regions become a union of balls around member
    samples (no envelope-scale inflation).  Either way the common radius is
    the empirical quantile over the calibration proposals that reproduces the
    target volume.
    """
    env = bounding_ball(space, region)
    v_env = ball_volume(space, env.radius)
    n_cal = max(metrics.volume_samples, 1000)
    props = uniform_in_ball(space, env, substream(seed, step, 8), size=n_cal)
    member = contains(space, region, props)
    outside_idx = np.flatnonzero(~member)
    if outside_idx.size < 8:
        return env
    member_idx = np.flatnonzero(member)
    if member_idx.size < 8:
        raise ValueError("cannot rebase a region with no sampled volume")
    rng = substream(seed, step, 7)
    dense = target_volume / v_env >= 0.55
    pool = outside_idx if dense else member_idx
    m = min(metrics.rebase_centers, pool.size)
    centers = props[rng.choice(pool, size=m, replace=False)]
    dmin = np.full(n_cal, np.inf)
    for c in centers:
        dmin = np.minimum(dmin, distance(space, props, c))
    if dense:
        k = int(round((1.0 - target_volume / v_env) * n_cal))
    else:
        k = int(round(target_volume / v_env * n_cal))
    k = min(max(k, 1), n_cal - 1)
    r = float(np.partition(dmin, k - 1)[k - 1]) + 1e-12
    balls = Union(tuple(Ball(c, r) for c in centers))
    return Difference(env, balls) if dense else balls


def flow_step(space: Space, region, strategy, metrics: MetricsConfig, seed: int,
              step: int, reference_cloud: PointCloud, prev_cloud: PointCloud,
              prev_volume: float):
    """One symmetrization step with its metric record.

    Returns (new region, FlowStep, fresh sample cloud of the new region).
    Re-bases the region to a calibrated ball union when the symmetrized chain
    would exceed the configured depth.
    """
    rng = substream(seed, step, 3)
    plane = choose_hyperplane(space, strategy, prev_cloud, rng, step=step - 1)
    base = region
    rebased = False
    candidate = two_point_symmetrize(space, plane, base, cloud=prev_cloud)
    if symmetrized_depth(candidate) > metrics.rebase_depth:
        base = _rebase_approximation(space, region, prev_volume, metrics, seed, step)
        candidate = two_point_symmetrize(space, plane, base, cloud=prev_cloud)
        rebased = True
    if metrics.identity_check_points > 0:
        _check_counting_identity(space, plane, base, candidate,
                                 metrics.identity_check_points, child_seed(seed, step, 4))
    cloud = sample(space, candidate, metrics.cloud_density, child_seed(seed, step, 0))
    vol = volume_estimate(space, candidate, metrics.volume_samples, child_seed(seed, step, 1))
    diam, _, _, spacing = _pairwise_extremes(space, cloud.points)
    h = hausdorff(space, cloud, reference_cloud)
    rec = FlowStep(step=step, volume=vol, diameter=diam, hausdorff_to_reference=h,
                   spacing=spacing, plane=plane, rebased=rebased)
    return candidate, rec, cloud


def equal_volume_radius(space: Space, volume: float) -> float:
    """Radius r with ball_volume(r) = volume, found by bisection to 1e-10."""
    if volume <= 0.0:
        raise ValueError("volume must be positive")
    if space.curvature == SPHERICAL:
        total = ball_volume(space, math.pi)
        if volume >= total:
            return math.pi
        hi = math.pi
    else:
        hi = 1.0
        while ball_volume(space, hi) < volume:
            hi *= 2.0
            if hi > 1e6:
                raise ValueError("volume out of range")
    return float(bisect(lambda r: ball_volume(space, r) - volume, 1e-12, hi, xtol=1e-10))


def _strategy_echo(space: Space, strategy) -> dict:
    name = type(strategy).__name__
    echo: dict = {"kind": name}
    pole = getattr(strategy, "pole", None)
    if pole is not None:
        echo["pole"] = [float(v) for v in np.asarray(pole, dtype=float)]
    if isinstance(strategy, FixedSchedule):
        echo["planes"] = len(strategy.planes)
    return echo


def run_flow(space: Space, initial, strategy, max_steps: int, stop_epsilon: float,
             seed: int, metrics: MetricsConfig | None = None) -> FlowReport:
    """Iterate symmetrization steps until the sampled Hausdorff distance to the
    reference ball drops below stop_epsilon, or max_steps is reached.

    The reference ball sits at the tracked pole with the radius whose ball
    volume matches the initial volume estimate.  Non-convergence is reported,
    not raised.  The stop criterion compares sample clouds, so it carries the
    sampling slack recorded per step in the ``spacing`` column.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    metrics = metrics or MetricsConfig()
    pole = strategy_pole(space, strategy)
    vol0 = volume_estimate(space, initial, metrics.volume_samples, child_seed(seed, 0, 1))
    if vol0.value <= 0.0:
        raise ValueError("initial region has zero estimated volume")
    ref_ball = Ball(pole, equal_volume_radius(space, vol0.value))
    ref_cloud = sample(space, ref_ball, metrics.cloud_density, child_seed(seed, 0, 2))
    cloud = sample(space, initial, metrics.cloud_density, child_seed(seed, 0, 0))
    diam0, _, _, spacing0 = _pairwise_extremes(space, cloud.points)
    h0 = hausdorff(space, cloud, ref_cloud)
    steps = [FlowStep(step=0, volume=vol0, diameter=diam0, hausdorff_to_reference=h0,
                      spacing=spacing0, plane=None, rebased=False)]
    config = {
        "strategy": _strategy_echo(space, strategy),
        "metrics": {
            "cloud_density": metrics.cloud_density,
            "volume_samples": metrics.volume_samples,
            "identity_check_points": metrics.identity_check_points,
            "rebase_depth": metrics.rebase_depth,
            "rebase_centers": metrics.rebase_centers,
        },
        "max_steps": max_steps,
    }
    region = initial
    converged = h0 < stop_epsilon
    step = 1
    while not converged and step <= max_steps:
        region, rec, cloud = flow_step(space, region, strategy, metrics, seed, step,
                                       ref_cloud, cloud, steps[-1].volume.value)
        steps.append(rec)
        converged = rec.hausdorff_to_reference < stop_epsilon
        step += 1
    return FlowReport(space=space, steps=steps, reference_ball=ref_ball, seed=int(seed),
                      config=config, stop_epsilon=float(stop_epsilon), converged=converged)
