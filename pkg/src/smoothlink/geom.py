"""Primitives on R^3, the unit sphere S^2, the projective plane, and solid cones.

Points and directions are plain numpy arrays of shape (3,) (or (..., 3) for
batches).  Unit vectors are normalized to 1e-12; all angle-valued functions
return radians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CannotCertifyError

UNIT_TOL = 1e-12


def normalize(v):
    """Return v scaled to unit length (vectorized over the last axis)."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < 1e-300):
        raise ValueError("cannot normalize a zero vector")
    return v / n


def is_unit(v, tol=UNIT_TOL):
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.abs(np.linalg.norm(v, axis=-1) - 1.0) <= tol))


def sphere_distance(p, q):
    """Great-circle distance between unit vectors, in [0, pi].

    Dot products are clamped to [-1, 1] before arccos so values a few ulps
    outside the interval do not produce NaNs.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    c = np.clip(np.sum(p * q, axis=-1), -1.0, 1.0)
    return np.arccos(c)


def proj_distance(p, q):
    """Distance between the images of unit vectors p, q in the projective plane.

    Equal to min(sphere_distance(p, q), pi - sphere_distance(p, q)); lies in
    [0, pi/2] and vanishes exactly when q = +-p.
    """
    d = sphere_distance(p, q)
    return np.minimum(d, np.pi - d)


def chord_to_angle(c):
    """Spherical angle corresponding to a Euclidean chord between unit vectors."""
    return 2.0 * np.arcsin(np.clip(np.asarray(c, dtype=float) / 2.0, 0.0, 1.0))


def proj_canonical(v):
    """Canonical representative of the projective point through unit vector v.

    The sign is fixed so the first coordinate with magnitude above 1e-9 is
    positive, making representatives comparable and hashable downstream.
    """
    v = np.asarray(v, dtype=float)
    for k in range(3):
        if abs(v[k]) > 1e-9:
            return -v if v[k] < 0 else v.copy()
    return v.copy()


@dataclass(frozen=True)
class ProjPoint:
    """A point of the projective plane, stored via its canonical unit lift."""

    representative: np.ndarray

    def __post_init__(self):
        rep = proj_canonical(normalize(self.representative))
        object.__setattr__(self, "representative", rep)

    def distance(self, other: "ProjPoint") -> float:
        return float(proj_distance(self.representative, other.representative))


@dataclass(frozen=True)
class Slab:
    """Region between two horizontal planes z_lo <= z <= z_hi."""

    z_lo: float
    z_hi: float

    def __post_init__(self):
        if not self.z_lo < self.z_hi:
            raise ValueError("slab requires z_lo < z_hi")

    def contains_z(self, z, tol=0.0):
        z = np.asarray(z, dtype=float)
        return (z >= self.z_lo - tol) & (z <= self.z_hi + tol)


def rotation_about(axis, angle):
    """Rodrigues rotation matrix about a unit axis."""
    a = normalize(axis)
    x, y, z = a
    c, s = np.cos(angle), np.sin(angle)
    cc = 1.0 - c
    return np.array(
        [
            [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
            [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
            [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
        ]
    )


def rotation_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_to_pole(v):
    """Orthogonal R with det = 1 sending unit vector v to (0, 0, 1).

    Built from a single Rodrigues rotation about normalize(v x z); for v
    within 1e-9 of +-z the cross product degenerates, so the identity
    (resp. the rotation by pi about x) is returned instead.  Continuity in
    v is not provided or needed.
    """
    v = normalize(v)
    zhat = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(v, zhat))
    if c >= 1.0 - 1e-9:
        return np.eye(3)
    if c <= -1.0 + 1e-9:
        return rotation_about(np.array([1.0, 0.0, 0.0]), np.pi)
    axis = np.cross(v, zhat)
    return rotation_about(axis, np.arccos(np.clip(c, -1.0, 1.0)))


@dataclass(frozen=True)
class Cone:
    """Solid cone with apex `vertex`, opening toward `axis`, half-angle in (0, pi/2).

    A point p belongs to the cone when the angle between p - vertex and the
    axis is at most half_angle, i.e. z >= cot(half_angle) * sqrt(x^2 + y^2)
    in apex-centered coordinates with the axis along z.
    """

    vertex: np.ndarray
    axis: np.ndarray
    half_angle: float

    def __post_init__(self):
        object.__setattr__(self, "vertex", np.asarray(self.vertex, dtype=float))
        object.__setattr__(self, "axis", normalize(self.axis))
        if not 0.0 < self.half_angle < np.pi / 2:
            raise ValueError("half_angle must lie in (0, pi/2)")


def cone_contains(cone: Cone, p, tol=1e-12):
    """Membership test for the closed solid cone (vectorized over points).

    Uses the equivalent form w . axis >= cos(half_angle) * ||w|| with
    w = p - vertex, slackened by `tol` per unit length so exact boundary
    points on either side of rounding are accepted.
    """
    w = np.asarray(p, dtype=float) - cone.vertex
    wn = np.linalg.norm(w, axis=-1)
    lhs = np.tensordot(w, cone.axis, axes=([-1], [0]))
    return lhs >= np.cos(cone.half_angle) * wn - tol * (1.0 + wn)


def cone_in_halfspace(cone: Cone, normal, offset, margin=0.0):
    """True when the full (infinite) cone lies in {x . normal >= offset + margin}.

    Holds iff the vertex does and every cone direction has nonnegative
    component along `normal`, i.e. angle(axis, normal) + half_angle <= pi/2.
    """
    n = normalize(normal)
    if float(np.dot(cone.vertex, n)) < offset + margin:
        return False
    return float(sphere_distance(cone.axis, n)) + cone.half_angle <= np.pi / 2


def _project_truncated_cone(x, cone: Cone, radius):
    """Euclidean projection of point x onto cone intersected with B(vertex, radius).

    The truncated solid cone is the set of w = p - vertex with
    angle(w, axis) <= half_angle and ||w|| <= radius; projection onto the
    (convex) infinite cone followed by radial clamping is exact because the
    ball is centered at the apex.
    """
    w = np.asarray(x, dtype=float) - cone.vertex
    t = float(np.dot(w, cone.axis))
    perp = w - t * cone.axis
    rho = float(np.linalg.norm(perp))
    theta = cone.half_angle
    wn = float(np.linalg.norm(w))
    if wn == 0.0:
        return cone.vertex.copy()
    ang = np.arctan2(rho, t)
    if ang <= theta:
        q = w
    elif ang >= theta + np.pi / 2:
        q = np.zeros(3)
    else:
        u_b = np.cos(theta) * cone.axis + (np.sin(theta) / rho) * perp
        s = max(0.0, float(np.dot(w, u_b)))
        q = s * u_b
    qn = float(np.linalg.norm(q))
    if qn > radius:
        q = q * (radius / qn)
    return cone.vertex + q


def cones_disjoint(a: Cone, b: Cone, radius_bound, sample_budget=256, margin=None):
    """Decide whether two solid cones, truncated at `radius_bound`, are disjoint.

    Exact apex/containment tests run first; the generic case estimates the
    separation of the two convex truncated cones by alternating projections
    (exact closed-form projections, so the estimate converges to the true
    distance).  Positive separation above `margin` certifies disjointness;
    an estimate inside (0, margin] raises CannotCertifyError.

    `sample_budget` bounds the number of projection iterations.
    """
    if margin is None:
        margin = 1e-9 * radius_bound
    if cone_contains(a, b.vertex) or cone_contains(b, a.vertex):
        return False
    x = b.vertex.copy()
    y = a.vertex.copy()
    prev = np.inf
    for _ in range(max(8, int(sample_budget))):
        y = _project_truncated_cone(x, a, radius_bound)
        x = _project_truncated_cone(y, b, radius_bound)
        d = float(np.linalg.norm(x - y))
        if d <= 1e-13 * radius_bound:
            return False
        if prev - d <= 1e-15 * radius_bound:
            break
        prev = d
    d = float(np.linalg.norm(x - y))
    if d > margin:
        return True
    if d <= 1e-12 * radius_bound:
        return False
    raise CannotCertifyError(
        f"cone separation {d:.3e} is below the certification margin {margin:.3e}"
    )
