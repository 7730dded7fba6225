"""Campaign drivers: desk-scale numerical checks of the isodiametric inequality.

A verification campaign generates random sampled-admissible regions of
diameter at most D, estimates their volumes, and compares against the ball of
radius D/2; any excess beyond the sigma threshold is a finding.  The greedy
probe grows a diameter-bounded point set and accounts its volume by candidate
fraction.  The symmetrization campaign runs flows over a fixture battery.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ball, Space, ball_volume, distance, geodesic_point
from .regionio import region_digest
from .regions import (
    Difference,
    EmptyRegionWarning,
    Intersection,
    PointCloud,
    Union,
    _pairwise_extremes,
    sample,
    uniform_in_ball,
    volume_estimate,
)
from .rng import substream
from .symmetrize import (
    FlowReport,
    MetricsConfig,
    RandomThroughPole,
    child_seed,
    run_flow,
)


class RegionGenerationError(RuntimeError):
    """Random admissible-region generation failed after bounded retries."""


def random_admissible_region(space: Space, D: float, complexity: int, seed: int,
                             density: float = 600.0, max_retries: int = 20):
    """Random CSG region whose sampled diameter is at most D.

    Builds a union/intersection/difference combination of up to ``complexity``
    balls centered inside the ball of radius D/2 at the pole, then trims by
    intersecting with balls of radius D around witness sample points until the
    sampled diameter check passes.  Complexity 1 yields a plain ball of radius
    at most D/2.
    """
    if D <= 0.0 or (space.curvature == 1 and D >= math.pi):
        raise ValueError(f"invalid diameter bound {D}")
    pole = space.base_point
    half = D / 2.0
    for attempt in range(max_retries):
        rng = substream(seed, attempt, 0)
        k = int(rng.integers(1, complexity + 1))
        if k == 1:
            radius = half * float(rng.uniform(0.3, 1.0))
            center = uniform_in_ball(space, Ball(pole, half * 0.5), rng)
            region = Ball(center, min(radius, half))
            pad = float(distance(space, pole, center)) + region.radius
            if pad > half:
                region = Ball(center, max(half - float(distance(space, pole, center)), 0.1 * half))
            return region
        centers = uniform_in_ball(space, Ball(pole, half * 0.9), rng, size=k)
        radii = half * rng.uniform(0.25, 0.85, size=k)
        region = Ball(centers[0], float(radii[0]))
        for i in range(1, k):
            b = Ball(centers[i], float(radii[i]))
            op = rng.random()
            if op < 0.55:
                region = Union((region, b))
            elif op < 0.8:
                region = Intersection((region, b))
            else:
                region = Difference(region, b)
        trimmed = region
        ok = False
        for trim in range(8):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", EmptyRegionWarning)
                cloud = sample(space, trimmed, density, child_seed(seed, attempt, trim + 1))
            if len(cloud) < 8:
                break
            diam, bi, bj, _ = _pairwise_extremes(space, cloud.points)
            if diam <= D:
                ok = True
                break
            wit_rng = substream(seed, attempt, 40 + trim)
            extra = wit_rng.choice(len(cloud), size=min(10, len(cloud)), replace=False)
            witnesses = np.unique(np.concatenate([[bi, bj], extra]))
            guards = tuple(Ball(cloud.points[w], D) for w in witnesses)
            trimmed = Intersection((trimmed,) + guards)
        if ok:
            return trimmed
    raise RegionGenerationError(f"no admissible region after {max_retries} attempts")


@dataclass(frozen=True)
class CampaignConfig:
    """Settings for one isodiametric verification campaign."""

    curvature: int
    dim: int
    D: float
    trials: int
    seed: int
    volume_samples: int = 100_000
    region_density: float = 600.0
    complexity: int = 4
    include_exact_ball: bool = True
    sigma_threshold: float = 3.0

    @property
    def space(self) -> Space:
        return Space(self.curvature, self.dim)

    @classmethod
    def from_json(cls, path) -> "CampaignConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "curvature": self.curvature, "dim": self.dim, "D": self.D,
            "trials": self.trials, "seed": self.seed,
            "volume_samples": self.volume_samples,
            "region_density": self.region_density, "complexity": self.complexity,
            "include_exact_ball": self.include_exact_ball,
            "sigma_threshold": self.sigma_threshold,
        }


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    digest: str
    volume: float
    std_error: float
    sampled_diameter: float
    margin: float
    violation: bool


@dataclass
class CampaignReport:
    config: CampaignConfig
    ball_reference_volume: float
    records: list

    @property
    def violation_count(self) -> int:
        return sum(1 for r in self.records if r.violation)

    @property
    def max_margin(self) -> float:
        return max(r.margin for r in self.records)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "digest", "volume", "std_error",
                        "sampled_diameter", "margin", "violation"])
            for r in self.records:
                w.writerow([r.trial, r.digest, repr(r.volume), repr(r.std_error),
                            repr(r.sampled_diameter), repr(r.margin), int(r.violation)])

    def summary_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "ball_reference_volume": self.ball_reference_volume,
            "trials": len(self.records),
            "violation_count": self.violation_count,
            "max_margin": self.max_margin,
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def verify_isodiametric(config: CampaignConfig, out_csv=None, out_json=None) -> CampaignReport:
    """Run the volume-vs-ball comparison over random admissible regions.

    Trial 0 is the exact ball of radius D/2 when configured, reproducing the
    equality case; a violation is a trial whose volume exceeds the ball volume
    by more than sigma_threshold standard errors.  Violations are findings
    recorded in the report, not errors.
    """
    space = config.space
    pole = space.base_point
    v_ball = ball_volume(space, config.D / 2.0)
    records = []
    for trial in range(config.trials):
        if trial == 0 and config.include_exact_ball:
            region = Ball(pole, config.D / 2.0)
        else:
            region = random_admissible_region(space, config.D, config.complexity,
                                              child_seed(config.seed, trial, 0),
                                              density=config.region_density)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyRegionWarning)
            cloud = sample(space, region, config.region_density,
                           child_seed(config.seed, trial, 1))
        diam = _pairwise_extremes(space, cloud.points)[0] if len(cloud) >= 2 else 0.0
        est = volume_estimate(space, region, config.volume_samples,
                              child_seed(config.seed, trial, 2))
        margin = est.value - v_ball
        records.append(TrialRecord(
            trial=trial, digest=region_digest(region), volume=est.value,
            std_error=est.std_error, sampled_diameter=diam, margin=margin,
            violation=margin > config.sigma_threshold * est.std_error,
        ))
    report = CampaignReport(config=config, ball_reference_volume=v_ball, records=records)
    if out_csv:
        report.write_csv(out_csv)
    if out_json:
        report.write_json(out_json)
    return report


def greedy_maximal(space: Space, D: float, candidate_count: int, seed: int,
                   seed_with_ball: bool = False):
    """Greedy diameter-D point set in the ball of radius D at the pole.

    Candidates are scattered uniformly; one is accepted exactly when it stays
    within D of every previously accepted point.  The accepted set's volume is
    accounted as accepted_count * envelope_volume / candidate_count; returns
    the accepted cloud and the deficit against the ball of radius D/2.
    """
    if D <= 0.0 or (space.curvature == 1 and D >= math.pi):
        raise ValueError(f"invalid diameter bound {D}")
    pole = space.base_point
    env = Ball(pole, D)
    v_env = ball_volume(space, D)
    rng = substream(seed)
    cand = uniform_in_ball(space, env, rng, size=int(candidate_count))
    if seed_with_ball:
        inner = distance(space, cand, pole) <= D / 2.0
        cand = np.concatenate([cand[inner], cand[~inner]])
    accepted = np.empty_like(cand)
    count = 0
    for x in cand:
        if count == 0 or bool(np.all(distance(space, accepted[:count], x) <= D)):
            accepted[count] = x
            count += 1
    frac = count / candidate_count
    vol = v_env * frac
    sigma = v_env * math.sqrt(frac * (1.0 - frac) / candidate_count)
    deficit = ball_volume(space, D / 2.0) - vol
    cloud = PointCloud(points=accepted[:count], weight=v_env / candidate_count,
                       density=candidate_count / v_env, seed=int(seed))
    return cloud, deficit, sigma


def dented_ball_region(space: Space, outer: float = 0.8, dent_offset: float = 0.45,
                       dent_radius: float = 0.25):
    """Ball at the pole with a smaller interior ball removed."""
    pole = space.base_point
    axis = np.zeros(space.ambient_dim)
    axis[0] = 1.0
    dent_center = geodesic_point(space, pole, axis, dent_offset)
    return Difference(Ball(pole, outer), Ball(dent_center, dent_radius))


def two_caps_region(space: Space, cap_radius: float = 0.52, separation: float = 0.17):
    """Union of two congruent balls mirror-placed around the pole."""
    pole = space.base_point
    axis = np.zeros(space.ambient_dim)
    axis[0] = 1.0
    c1 = geodesic_point(space, pole, axis, separation)
    c2 = geodesic_point(space, pole, -axis, separation)
    return Union((Ball(c1, cap_radius), Ball(c2, cap_radius)))


@dataclass(frozen=True)
class FlowCampaignConfig:
    curvature: int = 1
    dim: int = 2
    seed: int = 0
    max_steps: int = 200
    stop_epsilon: float = 0.0
    hausdorff_threshold: float = 0.1
    metrics: MetricsConfig = field(default_factory=lambda: MetricsConfig(
        cloud_density=2500.0, volume_samples=12000, rebase_depth=9))

    @property
    def space(self) -> Space:
        return Space(self.curvature, self.dim)


def symmetrization_campaign(config: FlowCampaignConfig):
    """Run flows over the fixture battery; returns (reports, findings).

    Per flow, findings are recorded when the diameter trace increases beyond
    the sampling slack, or when volume drifts beyond the sigma budget across
    rebase-free segments.  Flows that do not reach the Hausdorff threshold are
    flagged as non-convergent, not failed.
    """
    space = config.space
    battery = {
        "dented_ball": dented_ball_region(space),
        "two_caps": two_caps_region(space),
        "random_admissible": random_admissible_region(space, 1.4, 3,
                                                      child_seed(config.seed, 90)),
    }
    reports: dict[str, FlowReport] = {}
    findings: list[str] = []
    for name, region in battery.items():
        report = run_flow(space, region, RandomThroughPole(),
                          max_steps=config.max_steps,
                          stop_epsilon=config.hausdorff_threshold,
                          seed=child_seed(config.seed, hash(name) % 1000),
                          metrics=config.metrics)
        reports[name] = report
        for prev, cur in zip(report.steps, report.steps[1:]):
            slack = 2.0 * (prev.spacing + cur.spacing)
            if not cur.rebased and cur.diameter > prev.diameter + slack + 1e-9:
                findings.append(f"{name}: diameter increased at step {cur.step}")
        seg_start = report.steps[0]
        for prev, cur in zip(report.steps, report.steps[1:]):
            if cur.rebased:
                seg_start = cur
                continue
            budget = 3.0 * math.hypot(seg_start.volume.std_error, cur.volume.std_error)
            if abs(cur.volume.value - seg_start.volume.value) > budget:
                findings.append(f"{name}: volume drift beyond 3 sigma at step {cur.step}")
        if not report.converged:
            findings.append(f"{name}: did not reach Hausdorff threshold "
                            f"{config.hausdorff_threshold} (non-convergent)")
    return reports, findings
