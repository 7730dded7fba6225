"""Hemisphere certificates, convex hulls through the gnomonic model, and convexity probes.

The hemisphere test runs the minimum-norm-point construction: the point z of
the Euclidean convex hull closest to the origin certifies containment in the
open hemisphere {x : <x, z> > 0} whenever it is nonzero with positive margins.
Hull predicates never work on the curved spaces directly; they rotate the
certificate direction onto the base point, project centrally, and answer in
the affine model, where geodesic segments are straight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .geometry import (
    EUCLIDEAN,
    SPHERICAL,
    Ball,
    Space,
    distance,
    geodesic_point,
    normalize_to_space,
    project_gnomonic,
    tangent_toward,
)
from .regions import _as_points, diameter, uniform_in_ball
from .rng import substream


@dataclass(frozen=True, eq=False)
class HemisphereCertificate:
    """Witness that every sample has <x, z> >= min_margin > 0."""

    z: np.ndarray
    min_margin: float


def _affine_minimizer(A: np.ndarray) -> np.ndarray:
    """Coefficients summing to 1 that minimize |sum_i alpha_i A_i| over the affine hull."""
    k = A.shape[0]
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = A @ A.T
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(points, tol: float = 1e-10, max_iter: int | None = None) -> np.ndarray:
    """Point of the Euclidean convex hull closest to the origin (Wolfe's method).

    Maintains an affinely independent active set; major cycles add the most
    violating vertex, minor cycles walk back into the simplex.  Terminates at
    duality gap <= tol; returns the zero vector when the hull contains the
    origin.

    Parameters
    ----------
    points : array-like, shape (N, d)
    tol : float
        Bound on the duality gap <z, z> - min_i <z, p_i>.

    Returns
    -------
    ndarray, shape (d,)
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError("need a nonempty (N, d) array of points")
    n = P.shape[0]
    if max_iter is None:
        max_iter = 16 * (n + P.shape[1]) + 64
    start = int(np.argmin(np.einsum("nd,nd->n", P, P)))
    active = [start]
    w = np.array([1.0])
    z = P[start].copy()
    for _ in range(max_iter):
        dots = P @ z
        zz = float(z @ z)
        j = int(np.argmin(dots))
        if zz - dots[j] <= tol * max(1.0, zz):
            break
        if j in active:
            break
        active.append(j)
        w = np.append(w, 0.0)
        while True:
            A = P[active]
            v = _affine_minimizer(A)
            if np.all(v > 1e-12):
                w = v
                break
            drop = v <= 1e-12
            theta = float(np.min(w[drop] / (w[drop] - v[drop])))
            w = (1.0 - theta) * w + theta * v
            keep = w > 1e-12
            if not np.any(keep):
                keep[int(np.argmax(w))] = True
            active = [a for a, k in zip(active, keep) if k]
            w = w[keep]
            w = w / w.sum()
        z = w @ P[active]
    if float(z @ z) <= 1e-24:
        return np.zeros(P.shape[1])
    return z


def hemisphere_center(cloud) -> HemisphereCertificate | None:
    """Open-hemisphere certificate for a spherical sample set, or None.

    z is the minimum-norm point of the samples' Euclidean hull; a certificate
    exists whenever the sampled diameter is below arccos(-1/(n+1)).
    """
    pts = _as_points(cloud)
    z = min_norm_point(pts)
    if float(np.linalg.norm(z)) <= 1e-9:
        return None
    margin = float(np.min(pts @ z))
    if margin <= 0.0:
        return None
    return HemisphereCertificate(z=z, min_margin=margin)


def _householder_to_base(u: np.ndarray) -> np.ndarray:
    """Orthogonal map sending the unit vector u to the last-axis unit vector."""
    d = u.shape[0]
    e = np.zeros(d)
    e[-1] = 1.0
    v = u - e
    nv2 = float(v @ v)
    if nv2 < 1e-26:
        return np.eye(d)
    return np.eye(d) - 2.0 * np.outer(v, v) / nv2


class NoHemisphereError(ValueError):
    """Spherical hull operations require an open-hemisphere certificate."""


def _to_affine_model(space: Space, pts: np.ndarray, extra=None):
    """Rotate (sphere) and project points into the affine model plane."""
    if space.curvature == SPHERICAL:
        cert = hemisphere_center(pts)
        if cert is None:
            raise NoHemisphereError("no open-hemisphere certificate for the samples")
        rot = _householder_to_base(cert.z / np.linalg.norm(cert.z))
        pts = pts @ rot.T
        if extra is not None:
            extra = np.asarray(extra, dtype=float) @ rot.T
    proj = project_gnomonic(space, pts)
    return (proj, pts, extra) if extra is not None else (proj, pts, None)


def hull_contains(space: Space, cloud, query, tol: float = 1e-9) -> bool:
    """Whether query lies in the geodesic convex hull of the samples.

    Answered by linear feasibility in the projected affine model, which is
    exact because central projection maps geodesic segments to straight ones.
    """
    pts = _as_points(cloud)
    query = np.asarray(query, dtype=float)
    if space.curvature == SPHERICAL:
        cert = hemisphere_center(pts)
        if cert is None:
            raise NoHemisphereError("no open-hemisphere certificate for the samples")
        if float(query @ cert.z) <= 0.0:
            return False
        rot = _householder_to_base(cert.z / np.linalg.norm(cert.z))
        pts = pts @ rot.T
        query = rot @ query
    P = project_gnomonic(space, pts)
    q = project_gnomonic(space, query)
    a_eq = np.vstack([P.T, np.ones(P.shape[0])])
    b_eq = np.append(q, 1.0)
    res = linprog(np.zeros(P.shape[0]), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs", options={"primal_feasibility_tolerance": tol})
    return res.status == 0


def hull_diameter_check(space: Space, cloud, hull_samples: int, seed: int):
    """Sampled diameter of the cloud and of a dense hull sample; the hull one
    must never exceed the first beyond numeric tolerance.

    Hull samples are random convex combinations in the projected model mapped
    back to the space, plus the original samples themselves.  Spherical clouds
    must have sampled diameter at most pi/2.
    """
    pts = _as_points(cloud)
    d0, _, _ = diameter(space, pts)
    if space.curvature == SPHERICAL and d0 > math.pi / 2.0 + 1e-9:
        raise ValueError(f"spherical cloud diameter {d0:.6f} exceeds pi/2")
    proj, frame_pts, _ = _to_affine_model(space, pts)
    rng = substream(seed)
    k = min(space.dim + 1, proj.shape[0])
    idx = rng.integers(0, proj.shape[0], size=(int(hull_samples), k))
    wts = rng.standard_exponential((int(hull_samples), k))
    wts /= wts.sum(axis=1, keepdims=True)
    combos = np.einsum("mk,mkd->md", wts, proj[idx])
    if space.curvature == EUCLIDEAN:
        mapped = combos
    else:
        mapped = normalize_to_space(space, combos)
    hull_pts = np.vstack([frame_pts, mapped])
    d1, _, _ = diameter(space, hull_pts)
    return d0, d1


def ball_convexity_probe(space: Space, ball: Ball, trials: int, seed: int):
    """Sample point pairs in the ball and test geodesic midpoint membership.

    Returns the violation count and a witness pair when one exists.  Convex
    balls give zero violations; spherical balls of radius in [pi/2, pi) do not.
    """
    rng = substream(seed)
    xs = uniform_in_ball(space, ball, rng, size=int(trials))
    ys = uniform_in_ball(space, ball, rng, size=int(trials))
    t = distance(space, xs, ys)
    usable = t > 1e-9
    if space.curvature == SPHERICAL:
        usable &= t < math.pi - 1e-9
    xs_u, ys_u, t_u = xs[usable], ys[usable], t[usable]
    if xs_u.shape[0] == 0:
        return 0, None
    u, _ = tangent_toward(space, xs_u, ys_u)
    mid = geodesic_point(space, xs_u, u, t_u / 2.0)
    outside = distance(space, mid, ball.center) > ball.radius + 1e-9
    count = int(np.count_nonzero(outside))
    witness = None
    if count:
        k = int(np.flatnonzero(outside)[0])
        witness = (xs_u[k].copy(), ys_u[k].copy())
    return count, witness
