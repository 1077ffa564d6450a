"""Round suspensions: circular-arc bends replacing straight edges.

Each edge of the preconditioned link is bent into a unit-speed circular arc
whose chord is the edge and whose sagitta is a small fraction of the epsilon
budget; the arc's unit tangents sweep a short great-circle arc on S^2.  The
closure stage later rescales the displacement of up to three suspensions by
a factor k in [1/2, 3/2] via a plateau term added to the speed, which leaves
the tangent map untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmplitudeSolveError
from .geom import normalize
from .indicatrix import CircleArc
from .kernels import (SampledCurve, SpeedFunction, Step, integrate_curve,
                      piecewise_vector_integrals, speed_positivity_certify)


def suspension_plane_normal(edge_dir):
    """Default bending-plane normal: normalize(edge x z), or edge x x near +-z."""
    e = normalize(edge_dir)
    zhat = np.array([0.0, 0.0, 1.0])
    if abs(abs(float(np.dot(e, zhat))) - 1.0) < 1e-6:
        return normalize(np.cross(e, np.array([1.0, 0.0, 0.0])))
    return normalize(np.cross(e, zhat))


@dataclass
class RoundSuspension:
    """A circular arc at constant unit speed bending an edge.

    `sagitta` is the maximal deviation of the arc from its base segment; the
    arc fits inside an isoceles triangle over the base of height
    `triangle_height` (about twice the sagitta), which is the quantity the
    structural certificate compares against the epsilon budget.
    """

    base_from: np.ndarray
    base_to: np.ndarray
    sagitta: float
    plane_normal: np.ndarray
    radius: float
    arc_length: float
    half_angle: float
    e_dir: np.ndarray
    w_dir: np.ndarray
    center: np.ndarray
    arc: SampledCurve
    tangent_arc: CircleArc
    triangle_height: float
    speed: float = 1.0

    def point(self, s):
        zeta = -self.half_angle + np.asarray(s, dtype=float) / self.radius
        return (self.center
                + self.radius * (np.sin(zeta)[..., None] * self.e_dir
                                 + np.cos(zeta)[..., None] * self.w_dir))


def build_round_suspension(base_from, base_to, height, plane_normal=None,
                           samples=64):
    """Bend the segment [base_from, base_to] into a round suspension of sagitta `height`.

    Circle radius follows the chord-sagitta relation R = (u^2 + h^2) / (2h)
    with u the half-chord; the arc is parametrized at unit speed on
    [0, 2 R arcsin(u/R)].  Tangent directions deviate from the edge direction
    by at most arcsin(u/R) (attained at the endpoints, zero at the midpoint).
    """
    base_from = np.asarray(base_from, dtype=float)
    base_to = np.asarray(base_to, dtype=float)
    chord = base_to - base_from
    chord_len = float(np.linalg.norm(chord))
    if chord_len == 0.0:
        raise ValueError("degenerate suspension base")
    if height <= 0:
        raise ValueError("suspension height must be positive")
    e_dir = chord / chord_len
    if plane_normal is None:
        plane_normal = suspension_plane_normal(e_dir)
    plane_normal = normalize(plane_normal)
    if abs(float(np.dot(plane_normal, e_dir))) > 1e-9:
        raise ValueError("plane_normal must be orthogonal to the edge")
    w_dir = normalize(np.cross(plane_normal, e_dir))
    u = 0.5 * chord_len
    h = float(height)
    radius = (u * u + h * h) / (2.0 * h)
    half_angle = float(np.arcsin(u / radius))
    arc_length = 2.0 * radius * half_angle
    mid = 0.5 * (base_from + base_to)
    center = mid - (radius - h) * w_dir

    tangent_arc = CircleArc(u_vec=e_dir, v_vec=-w_dir, omega=1.0 / radius,
                            phase=-half_angle, t0=0.0, t1=arc_length)
    n = max(9, int(samples))
    n += 1 - n % 2  # odd count puts the apex (max sagitta) on the grid
    params = np.linspace(0.0, arc_length, n)
    zeta = -half_angle + params / radius
    pts = center + radius * (np.sin(zeta)[:, None] * e_dir
                             + np.cos(zeta)[:, None] * w_dir)
    curve = SampledCurve(params=params, points=pts,
                         tangents=tangent_arc.point(params))
    triangle_height = u * np.tan(half_angle)
    susp = RoundSuspension(
        base_from=base_from, base_to=base_to, sagitta=h,
        plane_normal=plane_normal, radius=radius, arc_length=arc_length,
        half_angle=half_angle, e_dir=e_dir, w_dir=w_dir, center=center,
        arc=curve, tangent_arc=tangent_arc, triangle_height=float(triangle_height),
    )
    end_err = max(float(np.linalg.norm(pts[0] - base_from)),
                  float(np.linalg.norm(pts[-1] - base_to)))
    if end_err > 1e-10 * max(1.0, chord_len):
        raise AssertionError(f"suspension endpoints off base by {end_err:.3e}")
    return susp


def measure_sagitta(points, base_from, base_to):
    """Maximum distance of sampled points from the base line."""
    e = normalize(np.asarray(base_to, float) - np.asarray(base_from, float))
    w = np.asarray(points, float) - np.asarray(base_from, float)
    along = w @ e
    perp = w - along[:, None] * e
    return float(np.max(np.linalg.norm(perp, axis=1)))


def enclosing_triangle_height(points, base_from, base_to):
    """Height of the smallest isoceles triangle over the base containing the points."""
    base_from = np.asarray(base_from, float)
    base_to = np.asarray(base_to, float)
    L = float(np.linalg.norm(base_to - base_from))
    e = (base_to - base_from) / L
    w = np.asarray(points, float) - base_from
    x = w @ e
    y = np.linalg.norm(w - x[:, None] * e, axis=1)
    interior = (x > 1e-9 * L) & (x < L * (1 - 1e-9))
    if not np.any(interior):
        return 0.0
    ratio = y[interior] * (L / 2.0) / np.minimum(x[interior], L - x[interior])
    return float(np.max(ratio))


def _plateau_speed(arc_length, inset_frac, p):
    """Speed 1 + p * plateau on [0, L]: exactly 1 outside the inset, 1 + p inside."""
    L = arc_length
    d = inset_frac * L / 2.0
    return SpeedFunction(0.0, L, 1.0, (
        Step(d / 2.0, d, p),
        Step(L - d, L - d / 2.0, -p),
    ))


def stretch_to_factor(susp: RoundSuspension, k, tol=1e-13, max_inset_halvings=8):
    """Rescale the suspension's displacement by k in [1/2, 3/2] via a plateau speed.

    Returns (g, rho, info): a speed function g equal to 1 exactly near both
    domain endpoints, the re-integrated curve rho anchored at the original
    base point, and measured diagnostics.  rho's displacement equals
    k * (base_to - base_from) within the bisection tolerance, the transverse
    displacement components vanish by the even/odd symmetry of the plateau
    against the arc, and rho's tangent directions are pointwise identical to
    the original arc's (both are the same tangent map).
    """
    if not 0.5 <= k <= 1.5:
        raise ValueError(f"stretch factor {k} outside [1/2, 3/2]")
    L = susp.arc_length
    base_f = SpeedFunction(0.0, L, 1.0, ())
    params = np.union1d(susp.arc.params, np.linspace(0.0, L, 257))
    if k == 1.0:
        rho = integrate_curve(base_f, susp.tangent_arc, t0=0.0,
                              v0=susp.base_from, params=params, tol=1e-14 * L)
        return base_f, rho, {"p": 0.0, "inset_frac": 0.0, "k_realized": 1.0}

    target = k * (susp.base_to - susp.base_from)
    target_axial = float(target @ susp.e_dir)
    arc_point = susp.tangent_arc.point

    def axial_displacement(f):
        grid = np.union1d(np.linspace(0.0, L, 129), f.breakpoints())
        vals = piecewise_vector_integrals(
            lambda t: arc_point(t) * f(t)[:, None], grid, tol=1e-14 * max(1.0, L))
        return float(vals.sum(axis=0) @ susp.e_dir)

    inset = 1.0 / 8.0
    for _ in range(max_inset_halvings):
        lo, hi = -(1.0 - 1e-3), 4.0
        d_lo = axial_displacement(_plateau_speed(L, inset, lo))
        d_hi = axial_displacement(_plateau_speed(L, inset, hi))
        if d_lo <= target_axial <= d_hi:
            break
        inset /= 2.0
    else:
        raise AmplitudeSolveError("plateau inset refinement failed to bracket the target")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d_mid = axial_displacement(_plateau_speed(L, inset, mid))
        if d_mid < target_axial:
            lo = mid
        else:
            hi = mid
        if abs(d_mid - target_axial) <= tol * max(1.0, abs(target_axial)) or hi - lo < 1e-16:
            break
    p = 0.5 * (lo + hi)
    g = _plateau_speed(L, inset, p)
    speed_positivity_certify(g)
    rho = integrate_curve(g, susp.tangent_arc, t0=0.0, v0=susp.base_from,
                          params=np.union1d(params, g.breakpoints()),
                          tol=1e-14 * max(1.0, L))
    disp = rho.displacement()
    transverse = disp - (disp @ susp.e_dir) * susp.e_dir
    info = {
        "p": float(p),
        "inset_frac": float(inset),
        "k_realized": float((disp @ susp.e_dir) / (2.0 * 0.5 * np.linalg.norm(susp.base_to - susp.base_from))),
        "transverse_error": float(np.linalg.norm(transverse)),
        "axial_error": float(abs(disp @ susp.e_dir - target_axial)),
    }
    return g, rho, info
