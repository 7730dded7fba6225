"""Ambient-coordinate kernel for the three model spaces of constant curvature.

The sphere S^n sits in R^{n+1} as the unit quadric of the standard scalar
product; hyperbolic space H^n is the upper sheet of the hyperboloid model,
the unit quadric of the bilinear form B(x, y) = x_e y_e - <x_0, y_0> (last
coordinate is the distinguished axis); Euclidean space is R^n itself.

Everything here is a pure function of immutable values.  Point-valued
arguments are plain float arrays of length ``ambient_dim`` and most
operations broadcast over a leading batch axis, numpy style.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

SPHERICAL = 1
EUCLIDEAN = 0
HYPERBOLIC = -1

#: tolerance for quadric membership checks
POINT_TOL = 1e-10
#: |form value| at or below this counts as lying on a hyperplane
SIDE_TOL = 1e-12

_CURVATURE_NAMES = {SPHERICAL: "sphere", EUCLIDEAN: "euclidean", HYPERBOLIC: "hyperbolic"}


@dataclass(frozen=True)
class Space:
    """A model space of constant curvature: +1, 0 or -1, with dimension n >= 2."""

    curvature: int
    dim: int

    def __post_init__(self):
        if self.curvature not in (-1, 0, 1):
            raise ValueError(f"curvature must be -1, 0 or +1, got {self.curvature}")
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.curvature == EUCLIDEAN else self.dim + 1

    @property
    def name(self) -> str:
        return _CURVATURE_NAMES[self.curvature]

    @property
    def base_point(self) -> np.ndarray:
        """The distinguished reference point: last-axis unit vector, or the origin."""
        e = np.zeros(self.ambient_dim)
        if self.curvature != EUCLIDEAN:
            e[-1] = 1.0
        return e

    @classmethod
    def sphere(cls, dim: int = 2) -> "Space":
        return cls(SPHERICAL, dim)

    @classmethod
    def euclidean(cls, dim: int = 2) -> "Space":
        return cls(EUCLIDEAN, dim)

    @classmethod
    def hyperbolic(cls, dim: int = 2) -> "Space":
        return cls(HYPERBOLIC, dim)


def form(space: Space, x, y):
    """Ambient bilinear form: the scalar product, or B(x, y) when hyperbolic.

    Parameters
    ----------
    x, y : array-like, shape (..., ambient_dim)
        Vectors (not necessarily on the quadric).  Broadcasts over leading axes.

    Returns
    -------
    float or ndarray
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = space.ambient_dim
    if x.shape[-1] != d or y.shape[-1] != d:
        raise ValueError(
            f"dimension mismatch: expected length {d}, got {x.shape[-1]} and {y.shape[-1]}"
        )
    if space.curvature == HYPERBOLIC:
        return x[..., -1] * y[..., -1] - np.sum(x[..., :-1] * y[..., :-1], axis=-1)
    return np.sum(x * y, axis=-1)


def check_point(space: Space, x, tol: float = POINT_TOL) -> None:
    """Raise ValueError unless x satisfies the Point invariant of the space."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != space.ambient_dim:
        raise ValueError(f"expected ambient dimension {space.ambient_dim}, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    if space.curvature == SPHERICAL:
        if np.any(np.abs(form(space, x, x) - 1.0) > tol):
            raise ValueError("point is not on the unit sphere within tolerance")
    elif space.curvature == HYPERBOLIC:
        if np.any(np.abs(form(space, x, x) - 1.0) > tol):
            raise ValueError("point is not on the hyperboloid within tolerance")
        if np.any(x[..., -1] < 1.0 - tol):
            raise ValueError("point is not on the upper hyperboloid sheet")


def tangent_norm(space: Space, v):
    """Length of a tangent vector in the tangent-space inner product."""
    if space.curvature == HYPERBOLIC:
        q = -form(space, v, v)
    else:
        q = form(space, v, v)
    return np.sqrt(np.maximum(q, 0.0))


def is_unit_tangent(space: Space, base, vec, tol: float = POINT_TOL) -> bool:
    """True when vec is tangent to the quadric at base and has unit length."""
    if space.curvature != EUCLIDEAN and np.any(np.abs(form(space, vec, base)) > tol):
        return False
    return bool(np.all(np.abs(tangent_norm(space, vec) - 1.0) <= tol))


def distance(space: Space, x, y):
    """Geodesic distance between points, broadcasting over leading axes.

    Spherical and hyperbolic values clamp the form into the valid domain of
    arccos / arcosh before inverting, absorbing 1e-12-scale drift.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if space.curvature == SPHERICAL:
        return np.arccos(np.clip(form(space, x, y), -1.0, 1.0))
    if space.curvature == HYPERBOLIC:
        return np.arccosh(np.clip(form(space, x, y), 1.0, None))
    return np.linalg.norm(x - y, axis=-1)


def _radial(values):
    """Append a broadcast axis so scalars/batches multiply ambient vectors."""
    a = np.asarray(values, dtype=float)
    return a[..., None] if a.ndim else a


def geodesic_point(space: Space, z, u, t):
    """Point at arc length |t| along the unit-speed geodesic from z with direction u.

    Parameters
    ----------
    z : array-like, shape (..., ambient_dim)
        Base point on the quadric.
    u : array-like, shape (..., ambient_dim)
        Unit tangent vector(s) at z.
    t : float or array-like
        Arc-length parameter(s).

    Returns
    -------
    ndarray
        ``cos(t) z + sin(t) u`` on the sphere, ``cosh(t) z + sinh(t) u`` on the
        hyperboloid, ``z + t u`` in Euclidean space.
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    tn = tangent_norm(space, u)
    if np.any(np.abs(tn - 1.0) > 1e-8):
        raise ValueError("direction is not a unit tangent vector")
    if space.curvature == SPHERICAL:
        return _radial(np.cos(t)) * z + _radial(np.sin(t)) * u
    if space.curvature == HYPERBOLIC:
        return _radial(np.cosh(t)) * z + _radial(np.sinh(t)) * u
    return z + _radial(t) * u


def tangent_toward(space: Space, z, x):
    """Unit tangent at z pointing to x, and the distance, inverting geodesic_point.

    Raises for coincident inputs, and for antipodal spherical inputs where the
    geodesic is not unique.
    """
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    t = distance(space, z, x)
    if np.any(t < 1e-12):
        raise ValueError("coincident points have no direction")
    if space.curvature == SPHERICAL:
        if np.any(t > math.pi - 1e-9):
            raise ValueError("antipodal points: geodesic direction is not unique")
        v = x - _radial(np.cos(t)) * z
    elif space.curvature == HYPERBOLIC:
        v = x - _radial(np.cosh(t)) * z
    else:
        v = x - z
    u = v / _radial(tangent_norm(space, v))
    return u, t


def normalize_to_space(space: Space, raw):
    """Rescale a raw ambient vector onto the quadric; identity on valid points.

    Hyperbolic vectors additionally get their sign fixed so the last
    coordinate is positive (upper sheet).
    """
    raw = np.asarray(raw, dtype=float)
    if space.curvature == EUCLIDEAN:
        if not np.all(np.isfinite(raw)):
            raise ValueError("non-finite input")
        return raw.copy()
    q = form(space, raw, raw)
    if space.curvature == SPHERICAL:
        if np.any(q <= 1e-30):
            raise ValueError("cannot normalize the zero vector onto the sphere")
        return raw / _radial(np.sqrt(q))
    if np.any(q <= 1e-30):
        raise ValueError("vector does not have timelike signature")
    y = raw / _radial(np.sqrt(q))
    sign = np.where(y[..., -1] < 0.0, -1.0, 1.0)
    return y * _radial(sign)


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """A totally geodesic (n-1)-subspace with a chosen positive side.

    Stored by an ambient normal vector ``p``; on the quadrics the hyperplane is
    {x : form(x, p) = 0} and in Euclidean space {x : <x, p> = offset}.  The
    closed half space H^+ is where ``orientation * (form value)`` is >= 0.
    """

    normal: np.ndarray
    orientation: int = 1
    offset: float = 0.0

    def __post_init__(self):
        normal = np.array(self.normal, dtype=float)
        normal.flags.writeable = False
        object.__setattr__(self, "normal", normal)
        if self.orientation not in (-1, 1):
            raise ValueError(f"orientation must be +1 or -1, got {self.orientation}")
        object.__setattr__(self, "offset", float(self.offset))

    def flipped(self) -> "Hyperplane":
        return Hyperplane(self.normal, -self.orientation, self.offset)


def validate_hyperplane(space: Space, h: Hyperplane) -> None:
    """Raise ValueError unless h is a valid hyperplane of the space."""
    p = h.normal
    if p.shape != (space.ambient_dim,):
        raise ValueError(f"normal must have length {space.ambient_dim}, got {p.shape}")
    q = form(space, p, p)
    if space.curvature == HYPERBOLIC:
        if q >= 0.0:
            raise ValueError("hyperbolic hyperplane normal must satisfy B(p, p) < 0")
    elif np.dot(p, p) <= 0.0:
        raise ValueError("hyperplane normal must be nonzero")
    if space.curvature != EUCLIDEAN and h.offset != 0.0:
        raise ValueError("offset is only meaningful for Euclidean hyperplanes")


def plane_eval(space: Space, h: Hyperplane, x):
    """Signed form value of x against the hyperplane (before orientation)."""
    v = form(space, x, h.normal)
    if space.curvature == EUCLIDEAN:
        return v - h.offset
    return v


def side(space: Space, h: Hyperplane, x, tol: float = SIDE_TOL):
    """Which closed half space contains x: +1, -1, or 0 on the hyperplane itself."""
    v = plane_eval(space, h, x)
    s = np.where(np.abs(v) <= tol, 0, np.sign(h.orientation * v)).astype(int)
    return int(s) if s.ndim == 0 else s


def reflect(space: Space, h: Hyperplane, x):
    """Reflected image of x through the hyperplane; renormalized to the quadric.

    An involution that fixes the hyperplane pointwise and preserves all
    pairwise geodesic distances.
    """
    p = h.normal
    v = plane_eval(space, h, x)
    q = form(space, p, p)
    y = np.asarray(x, dtype=float) - _radial(2.0 * v / q) * p
    if space.curvature == EUCLIDEAN:
        return y
    return normalize_to_space(space, y)


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed geodesic ball; radius is capped at pi on the sphere.

    Radius exactly pi (the whole sphere) is admitted so that bounding
    envelopes can degrade gracefully; region documents stay strictly below.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.array(self.center, dtype=float)
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))


def validate_ball(space: Space, b: Ball) -> None:
    """Raise ValueError unless b is a valid ball of the space."""
    check_point(space, b.center)
    if b.radius <= 0.0:
        raise ValueError(f"ball radius must be positive, got {b.radius}")
    if space.curvature == SPHERICAL and b.radius > math.pi:
        raise ValueError(f"spherical ball radius must be at most pi, got {b.radius}")


def bisector(space: Space, x, y) -> Hyperplane:
    """Perpendicular bisector hyperplane of the segment [x, y], with x in H^+.

    On the quadrics the ambient normal is x - y: a point z is equidistant from
    x and y exactly when form(z, x - y) = 0, by the distance formulas.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = distance(space, x, y)
    if d < 1e-12:
        raise ValueError("bisector of coincident points is degenerate")
    if space.curvature == SPHERICAL and d > math.pi - 1e-9:
        raise ValueError("bisector of antipodal points is not unique")
    p = x - y
    offset = 0.0
    if space.curvature == EUCLIDEAN:
        offset = (np.dot(x, x) - np.dot(y, y)) / 2.0
    h = Hyperplane(p, 1, offset)
    if plane_eval(space, h, x) < 0.0:
        h = h.flipped()
    return h


def project_gnomonic(space: Space, x):
    """Central projection x -> x / x_e into the affine plane through the base point.

    Geodesic segments map to straight Euclidean segments, hyperbolic space maps
    into the open unit ball of the plane, and the identity is returned for
    Euclidean input (the space is its own affine model).  Spherical points must
    lie in the open hemisphere around the base point.
    """
    x = np.asarray(x, dtype=float)
    if space.curvature == EUCLIDEAN:
        return x.copy()
    w = x[..., -1]
    if space.curvature == SPHERICAL and np.any(w <= 1e-12):
        raise ValueError("spherical point outside the open hemisphere around the base point")
    return x / _radial(w)


def sphere_area(n: int) -> float:
    """Surface measure of the unit (n-1)-sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _radial_integrand(space: Space):
    n = space.dim
    if space.curvature == SPHERICAL:
        return lambda t: np.sin(t) ** (n - 1)
    if space.curvature == HYPERBOLIC:
        return lambda t: np.sinh(t) ** (n - 1)
    return lambda t: t ** (n - 1)


def ball_volume(space: Space, r: float) -> float:
    """Volume of a geodesic ball of radius r.

    Computed as the surface measure of the unit (n-1)-sphere times the integral
    of sin^(n-1), sinh^(n-1) or t^(n-1) over [0, r], by adaptive quadrature with
    relative tolerance 1e-12.
    """
    r = float(r)
    if r <= 0.0:
        raise ValueError(f"radius must be positive, got {r}")
    if space.curvature == SPHERICAL and r > math.pi + 1e-12:
        raise ValueError(f"spherical radius must be at most pi, got {r}")
    f = _radial_integrand(space)
    val, _ = integrate.quad(f, 0.0, min(r, math.pi) if space.curvature == SPHERICAL else r,
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    return sphere_area(space.dim) * val


def tangent_basis(space: Space, z) -> np.ndarray:
    """Rows form an orthonormal basis of the tangent space at z.

    Orthonormal in the tangent inner product (the ambient scalar product, or
    -B on the hyperboloid).  Euclidean spaces return the identity basis.
    """
    if space.curvature == EUCLIDEAN:
        return np.eye(space.dim)
    z = np.asarray(z, dtype=float)
    check_point(space, z)
    sgn = -1.0 if space.curvature == HYPERBOLIC else 1.0

    def g(a, b):
        return sgn * form(space, a, b)

    rows = []
    for k in range(space.ambient_dim):
        v = np.zeros(space.ambient_dim)
        v[k] = 1.0
        v = v - form(space, v, z) * z
        for r in rows:
            v = v - g(v, r) * r
        nv = math.sqrt(max(g(v, v), 0.0))
        if nv > 1e-8:
            rows.append(v / nv)
        if len(rows) == space.dim:
            break
    if len(rows) != space.dim:
        raise RuntimeError("failed to build a tangent basis")
    return np.array(rows)


def random_unit_tangent(space: Space, z, rng: np.random.Generator, size: int | None = None):
    """Uniform random unit tangent vector(s) at z."""
    basis = tangent_basis(space, z)
    m = 1 if size is None else int(size)
    coeffs = rng.standard_normal((m, space.dim))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    u = coeffs @ basis
    return u[0] if size is None else u
