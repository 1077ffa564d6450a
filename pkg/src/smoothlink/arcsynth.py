"""Speed synthesis confining each gap arc to a tiny ball as an allowable arc.

For each connector between consecutive edge bends, a coordinate frame is
chosen sending the bisector of the endpoint tangents to the north pole.  The
connector's equator crossings are grouped in transverse pairs; each pair
gets local speed bumps shaping the integral curve (positive x/y excursion,
return to the xz-plane, sandwiched z-levels), after which huge plateau
speeds near the gap endpoints blow the curve up to a large sphere where the
endpoint radial angles are controlled, and a final rescale shrinks the whole
arc into the requested ball with exit cones clear of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import AmplitudeSolveError, PlannerError, StageError
from .geom import (Cone, cone_contains, cone_in_halfspace, cones_disjoint,
                   normalize, rotation_about, rotation_to_pole, rotation_z,
                   sphere_distance)
from .kernels import (Bump, SampledCurve, SpeedFunction, Step,
                      piecewise_vector_integrals, speed_positivity_certify)
from .indicatrix import SphericalArc, params_by_turning


@dataclass
class GapProblem:
    """A connector arc plus the frame and budgets for its confinement solve."""

    arc: SphericalArc
    frame: np.ndarray
    epsilon: float
    mu: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < np.pi / 8:
            raise ValueError("epsilon must lie in (0, pi/8)")
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass
class AllowableArcResult:
    """Confined gap arc: speed, local curve (ball centered at the origin), cones."""

    speed: SpeedFunction
    curve: SampledCurve
    ball_center: np.ndarray
    ball_radius: float
    cones: tuple
    diagnostics: dict


def find_equator_crossings(arc: SphericalArc, frame, n_probe=4096):
    """Roots of the frame third coordinate of the arc, with slope data.

    Returns (roots, slopes, band_margin): band_margin is the minimum of
    |z'| over samples where |z| < 0.02, measuring how transversally the
    curve meets the equator band.
    """
    R = np.asarray(frame, dtype=float)
    ts = np.linspace(arc.t0, arc.t1, n_probe + 1)
    z = arc.point(ts) @ R[2]
    roots = []
    sign = np.sign(z)
    for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        f = lambda t: float(arc.point(np.array([t]))[0] @ R[2])
        roots.append(brentq(f, ts[k], ts[k + 1], xtol=1e-14, rtol=1e-15))
    zz = np.nonzero(z == 0.0)[0]
    for k in zz:
        if 0 < k < n_probe:
            roots.append(float(ts[k]))
    roots = np.array(sorted(roots))
    vel_z = arc.velocity(ts) @ R[2]
    band = np.abs(z) < 0.02
    band_margin = float(np.min(np.abs(vel_z[band]))) if np.any(band) else np.inf
    slopes = (np.array([float(arc.velocity(np.array([r]))[0] @ R[2]) for r in roots])
              if len(roots) else np.zeros(0))
    return roots, slopes, band_margin


def choose_gap_frame(arc: SphericalArc, epsilon, max_nudge=0.01, slope_floor=None):
    """Rotation sending the bisector of the endpoint directions to the pole.

    Both endpoint third coordinates exceed epsilon in the returned frame.
    If the arc meets the equator non-transversally there, the frame is
    nudged by small rotations (up to max_nudge radians) until every crossing
    is simple; the accepted crossing data is returned alongside the frame.
    """
    a0 = normalize(arc.point(np.array([arc.t0]))[0])
    a1 = normalize(arc.point(np.array([arc.t1]))[0])
    dist = float(sphere_distance(a0, a1))
    if dist > np.pi - 2.0 * epsilon:
        raise PlannerError("gap endpoint directions are nearly antipodal")
    base = rotation_to_pole(normalize(a0 + a1))
    if slope_floor is None:
        speed = float(np.median(np.linalg.norm(
            arc.velocity(np.linspace(arc.t0, arc.t1, 257)), axis=-1)))
        slope_floor = 0.02 * max(speed, 1e-6)
    nudges = [np.eye(3)]
    for mag in (0.002, 0.004, 0.007, max_nudge):
        for axis in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0])):
            for s in (1.0, -1.0):
                nudges.append(rotation_about(axis, s * mag))
    last = None
    for nd in nudges:
        R = nd @ base
        z0 = float(a0 @ R[2])
        z1 = float(a1 @ R[2])
        if min(z0, z1) <= epsilon:
            continue
        roots, slopes, band = find_equator_crossings(arc, R)
        if len(roots) % 2 == 0 and (len(roots) == 0 or
                                    (np.min(np.abs(slopes)) > slope_floor
                                     and band > slope_floor)):
            return R, {"roots": roots, "slopes": slopes, "band_margin": band,
                       "z_ends": (z0, z1)}
        last = (roots, slopes, band)
    raise PlannerError(f"no transverse gap frame found within nudge budget: {last}")


def solve_radial_amplitude(base_point, direction, target_norm):
    """Unique positive b with ||base_point + b * direction|| = target_norm.

    Requires direction nonzero and ||base_point|| < target_norm, which makes
    the constant coefficient of the quadratic negative and guarantees exactly
    one positive root.
    """
    base = np.asarray(base_point, dtype=float)
    v = np.asarray(direction, dtype=float)
    a = float(v @ v)
    if a <= 0.0:
        raise AmplitudeSolveError("zero direction vector in amplitude solve")
    bn = float(base @ base)
    if bn >= target_norm ** 2:
        raise AmplitudeSolveError("base point already outside the target sphere")
    b_lin = 2.0 * float(base @ v)
    c = bn - target_norm ** 2
    disc = b_lin * b_lin - 4.0 * a * c
    root = (-b_lin + np.sqrt(disc)) / (2.0 * a)
    if root <= 0.0:
        raise AmplitudeSolveError("no positive amplitude root")
    return float(root)


def _wrap_pi(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def _integral(fn, grid, tol):
    return piecewise_vector_integrals(fn, np.asarray(grid, dtype=float), tol=tol)


def slab_crossing_speed(arc: SphericalArc, frame, A, B, u, v, partition_gap,
                        quad_tol=1e-13, max_doublings=60):
    """Speed bumps for one piece [A, B] with transverse equator crossings u < v.

    After an azimuthal rotation (plus a possible y-flip, both recorded) the
    crossing directions have positive first coordinates and second
    coordinates of opposite sign.  Four local bumps then enforce, for the
    integral curve anchored at the first crossing:

      * x and y strictly positive on (u, v], with y returning to 0 at v;
      * the z level just before u sitting below the level at v, and the
        level just after v sitting above the level at u

    which are the checkable unknottedness surrogates for the slab crossing.
    Returns (terms, record).
    """
    R = np.asarray(frame, dtype=float)
    pt = lambda t: arc.point(t) @ R.T

    pu = pt(np.array([u]))[0]
    pv = pt(np.array([v]))[0]
    phi_u = np.arctan2(pu[1], pu[0])
    phi_v = np.arctan2(pv[1], pv[0])
    delta = _wrap_pi(phi_v - phi_u)
    if abs(delta) < 1e-9 or abs(abs(delta) - np.pi) < 1e-9:
        raise AmplitudeSolveError("crossing directions equal or antipodal")
    flip = delta > 0
    if flip:
        phi_u, phi_v, delta = -phi_u, -phi_v, -delta
    g_rot = phi_u - (-delta) / 2.0
    W = rotation_z(-g_rot)
    if flip:
        W = W @ np.diag([1.0, -1.0, 1.0])
    M = W @ R

    def pts_piece(ts):
        return arc.point(ts) @ M.T

    # shrink the bump half-width until the sign pattern holds on both
    # crossing neighborhoods
    eps_t = min(0.1 * (v - u), 0.25 * partition_gap)
    for _ in range(40):
        tu = np.linspace(u - eps_t, u + eps_t, 65)
        tv = np.linspace(v - eps_t, v + eps_t, 65)
        qu, qv = pts_piece(tu), pts_piece(tv)
        if (np.all(qu[:, 0] > 0) and np.all(qu[:, 1] > 0)
                and np.all(qv[:, 0] > 0) and np.all(qv[:, 1] < 0)):
            break
        eps_t *= 0.5
    else:
        raise AmplitudeSolveError("no sign-stable neighborhood around crossings")

    grid = np.union1d(np.linspace(A, B, 1025),
                      [u - eps_t, u - eps_t / 2, u, u + eps_t,
                       v - eps_t, v, v + eps_t / 2, v + eps_t])

    def beta_on(ts_grid, terms):
        f = SpeedFunction(A, B, 1.0, tuple(terms))
        gg = np.union1d(ts_grid, f.breakpoints())
        vals = _integral(lambda t: pts_piece(t) * f(t)[:, None], gg, quad_tol)
        cum = np.vstack([np.zeros(3), np.cumsum(vals, axis=0)])
        k0 = int(np.searchsorted(gg, u))
        return gg, cum - cum[k0]

    # bump at u: grow until x and y stay positive past the bump and up to v
    bump_u = None
    amp = 1.0
    for _ in range(max_doublings):
        bump_u = Bump(u, eps_t, amp)
        gg, beta = beta_on(grid, [bump_u])
        sel = (gg > u + eps_t) & (gg <= v)
        if np.all(beta[sel, 0] > 0) and np.all(beta[sel, 1] > 0):
            break
        amp *= 2.0
    else:
        raise AmplitudeSolveError("crossing bump amplitude search failed")

    # bump at v restores y(v) = 0 with a closed-form amplitude (linearity)
    gg, beta = beta_on(grid, [bump_u])
    y_v = beta[int(np.searchsorted(gg, v)), 1]
    bump_v0 = Bump(v, eps_t, 1.0)
    seg = np.linspace(v - eps_t, v, 129)
    j2 = _integral(lambda t: pts_piece(t) * bump_v0(t)[:, None], seg, quad_tol)
    j2y = float(j2.sum(axis=0)[1])
    if not j2y < 0:
        raise AmplitudeSolveError("second-coordinate integral not negative at v")
    amp_v = -y_v / j2y
    if amp_v < 0:
        raise AmplitudeSolveError("negative restoring amplitude at v")
    bump_v = Bump(v, eps_t, amp_v)

    # slab-separation bumps just before u and just after v
    gg, beta = beta_on(grid, [bump_u, bump_v])
    k_um, k_u, k_v, k_vp = (int(np.searchsorted(gg, x))
                            for x in (u - eps_t, u, v, v + eps_t))
    z_u, z_v = beta[k_u, 2], beta[k_v, 2]
    drop = z_u - z_v
    if not drop > 0:
        raise AmplitudeSolveError("no descent between the crossings")
    z3_target = z_v - 0.1 * drop
    z4_target = z_u + 0.1 * drop
    terms = [bump_u, bump_v]

    b3 = Bump(u - eps_t / 2, eps_t / 2, 1.0)
    seg3 = np.linspace(u - eps_t, u, 129)
    k3 = float(_integral(lambda t: pts_piece(t) * b3(t)[:, None],
                         seg3, quad_tol).sum(axis=0)[2])
    cur_z3 = beta[k_um, 2]
    if cur_z3 > z3_target:
        if not k3 > 0:
            raise AmplitudeSolveError("nonpositive z integral before u")
        terms.append(Bump(u - eps_t / 2, eps_t / 2, (cur_z3 - z3_target) / k3))

    b4 = Bump(v + eps_t / 2, eps_t / 2, 1.0)
    seg4 = np.linspace(v, v + eps_t, 129)
    k4 = float(_integral(lambda t: pts_piece(t) * b4(t)[:, None],
                         seg4, quad_tol).sum(axis=0)[2])
    cur_z4 = beta[k_vp, 2]
    if cur_z4 < z4_target:
        if not k4 > 0:
            raise AmplitudeSolveError("nonpositive z integral after v")
        terms.append(Bump(v + eps_t / 2, eps_t / 2, (z4_target - cur_z4) / k4))

    record = {
        "piece": (float(A), float(B)),
        "u": float(u), "v": float(v), "eps_t": float(eps_t),
        "rotation": float(g_rot), "flip": bool(flip),
        "frame2d": M,
        "z3_target": float(z3_target), "z4_target": float(z4_target),
    }
    return tuple(terms), record


def verify_piece_conditions(points_frame2d, gg, rec, scale, slack=1e-9):
    """Re-assert the crossing-piece sign and slab conditions on final samples.

    points_frame2d are curve samples already mapped by the piece's recorded
    frame, anchored anywhere; the conditions are invariant under the final
    positive rescale, so `scale` only sets comparison slack.
    """
    u, v, eps_t = rec["u"], rec["v"], rec["eps_t"]
    k_u = int(np.searchsorted(gg, u))
    base = points_frame2d[k_u]
    rel = points_frame2d - base
    tol = slack * max(1.0, float(np.max(np.abs(rel)))) * scale
    sel_open = (gg > u + 1e-12) & (gg < v - 1e-12)
    checks = {
        "x_positive": bool(np.all(rel[sel_open, 0] > -tol)),
        "y_positive": bool(np.all(rel[sel_open, 1] > -tol)),
        "y_zero_at_v": bool(abs(rel[int(np.searchsorted(gg, v)), 1]) <= 1e-9 * scale
                            + 1e-12),
        "slab_low": bool(rel[int(np.searchsorted(gg, u - eps_t)), 2]
                         < rel[int(np.searchsorted(gg, v)), 2]),
        "slab_high": bool(rel[int(np.searchsorted(gg, v + eps_t)), 2]
                          > rel[k_u, 2]),
    }
    return checks


def synthesize_gap_arc(gap: GapProblem, frame_info=None, quad_tol=None,
                       min_samples=256, turn_step=None):
    """Build the speed function confining the gap arc to a ball of radius mu.

    Follows the confinement recipe end to end: crossing-piece bumps, the
    endpoint plateau raising the speed so the pre-rescale curve exits to
    radius 10N, quadratic amplitude solves pinning both endpoint norms to
    10N exactly, and a final rescale by mu/10N.  The returned speed equals 1
    exactly near both gap endpoints, the local curve is anchored with the
    ball center at the origin, and the endpoint cones (half-angle epsilon)
    meet the ball only at their vertices and are separated by the frame's
    equatorial plane.
    """
    arc, R, eps, mu = gap.arc, np.asarray(gap.frame, float), gap.epsilon, gap.mu
    t0, t1 = arc.t0, arc.t1
    span = t1 - t0
    if quad_tol is None:
        quad_tol = 1e-13 * max(1.0, span)
    if turn_step is None:
        turn_step = eps / 8.0

    if frame_info is None:
        roots, slopes, band = find_equator_crossings(arc, R)
    else:
        roots = frame_info["roots"]
    z0 = float(np.atleast_2d(arc.point(np.array([t0])))[0] @ R[2])
    z1 = float(np.atleast_2d(arc.point(np.array([t1])))[0] @ R[2])
    if min(z0, z1) <= eps:
        raise PlannerError("gap endpoint third coordinates must exceed epsilon")
    if len(roots) % 2 != 0:
        raise PlannerError("odd number of equator crossings in the gap frame")

    # inset: largest d <= 0.1 with the arc inside the 0.9 eps cap of each endpoint
    probe = np.linspace(t0, t1, 4097)
    pp = arc.point(probe)
    d_from_start = np.asarray(sphere_distance(pp, pp[0]))
    d_from_end = np.asarray(sphere_distance(pp, pp[-1]))
    cap = 0.9 * eps
    k1 = np.argmax(d_from_start > cap) if np.any(d_from_start > cap) else len(probe) - 1
    k2 = np.argmax(d_from_end[::-1] > cap) if np.any(d_from_end > cap) else len(probe) - 1
    d_inset = min(0.1, 0.2 * span,
                  0.9 * (probe[k1] - t0), 0.9 * (t1 - probe[len(probe) - 1 - k2]))
    if d_inset <= 0:
        raise PlannerError("no usable endpoint inset for the gap")
    c0, cp = t0 + d_inset, t1 - d_inset
    if len(roots) and (roots[0] <= c0 or roots[-1] >= cp):
        raise PlannerError("equator crossing inside an endpoint inset")

    # partition: two crossings per piece, cut at midpoints of ascents
    cuts = [c0]
    for k in range(1, len(roots) - 1, 2):
        cuts.append(0.5 * (roots[k] + roots[k + 1]))
    cuts.append(cp)
    zc = arc.point(np.array(cuts)) @ R[2]
    if np.any(zc <= 0):
        raise PlannerError("partition point below the equator")

    terms = []
    records = []
    min_eps_t = np.inf
    for k in range(len(cuts) - 1):
        A, B = cuts[k], cuts[k + 1]
        pair = roots[2 * k: 2 * k + 2]
        if len(pair) < 2:
            continue
        u, v = float(pair[0]), float(pair[1])
        gapd = min(u - A, B - v)
        piece_terms, rec = slab_crossing_speed(arc, R, A, B, u, v, gapd,
                                               quad_tol=quad_tol)
        terms.extend(piece_terms)
        records.append(rec)
        min_eps_t = min(min_eps_t, rec["eps_t"])

    f1 = SpeedFunction(t0, t1, 1.0, tuple(terms))
    grid = params_by_turning(arc, turn_step, min_samples=min_samples)
    grid = np.union1d(grid, f1.breakpoints())
    grid = np.union1d(grid, cuts)

    def cum_beta(f, extra_tol=1.0):
        gg = np.union1d(grid, f.breakpoints())
        vals = _integral(lambda t: arc.point(t) * f(t)[:, None], gg,
                         quad_tol * extra_tol)
        cum = np.vstack([np.zeros(3), np.cumsum(vals, axis=0)])
        k0 = int(np.searchsorted(gg, c0))
        return gg, cum - cum[k0]

    gg1, beta1 = cum_beta(f1)
    z_all = beta1 @ R[2]
    kc0, kcp = int(np.searchsorted(gg1, c0)), int(np.searchsorted(gg1, cp))
    slab_span = float(z_all[kcp] - z_all[kc0])
    xy = beta1 - np.outer(z_all, R[2])
    N = (2.0 * float(np.max(np.linalg.norm(beta1, axis=1)))
         + abs(slab_span) + 2.0 * float(np.max(np.linalg.norm(xy, axis=1))))
    N = max(N, 1e-6)
    C = 10.0 * N / mu
    eps1 = 0.5 * min(d_inset, mu / 10.0, min_eps_t)

    pre_steps = (Step(t0, t0 + eps1, -(C - 1.0)),
                 Step(t1 - eps1, t1, +(C - 1.0)))
    f2 = SpeedFunction(t0, t1, C, tuple(terms) + pre_steps)
    gg2, beta2 = cum_beta(f2, extra_tol=N)
    if float(np.max(np.linalg.norm(beta2, axis=1))) >= 2.0 * N:
        raise AmplitudeSolveError("pre-rescale curve escaped the 2N bound")
    b2_at = {x: beta2[int(np.searchsorted(gg2, x))] for x in (t0, t1)}

    bump1 = Bump(t0 + d_inset / 2.0, d_inset / 4.0, 1.0)
    bump2 = Bump(t1 - d_inset / 2.0, d_inset / 4.0, 1.0)
    seg1 = np.union1d(np.linspace(t0 + d_inset / 4, t0 + 3 * d_inset / 4, 257),
                      bump1.breakpoints())
    seg2 = np.union1d(np.linspace(t1 - 3 * d_inset / 4, t1 - d_inset / 4, 257),
                      bump2.breakpoints())
    v1 = _integral(lambda t: arc.point(t) * bump1(t)[:, None], seg1, quad_tol).sum(axis=0)
    v2 = _integral(lambda t: arc.point(t) * bump2(t)[:, None], seg2, quad_tol).sum(axis=0)
    b1 = solve_radial_amplitude(b2_at[t0], -v1, 10.0 * N)
    b2 = solve_radial_amplitude(b2_at[t1], +v2, 10.0 * N)

    scale = mu / (10.0 * N)
    post_terms = tuple(
        Bump(b.center, b.half_width, b.amplitude * scale) for b in terms
    ) + (
        Step(t0, t0 + eps1, -(1.0 - scale)),
        Step(t1 - eps1, t1, +(1.0 - scale)),
        Bump(bump1.center, bump1.half_width, b1 * scale),
        Bump(bump2.center, bump2.half_width, b2 * scale),
    )
    f = SpeedFunction(t0, t1, 1.0, post_terms)
    speed_positivity_certify(f)
    for side in ("start", "end"):
        if f.boundary_value(side) != 1.0:
            raise AmplitudeSolveError("final speed boundary value is not exactly 1")

    ggf, beta = cum_beta(f)
    curve = SampledCurve(params=ggf, points=beta, tangents=arc.point(ggf))

    diag = _verify_postconditions(curve, R, eps, mu, N, c0, cp, records,
                                  d_inset, scale)
    diag.update({"N": N, "C": C, "eps1": eps1, "d_inset": d_inset,
                 "b1": b1, "b2": b2, "crossings": roots,
                 "partition": np.array(cuts), "scale": scale})

    k_a1 = int(np.searchsorted(ggf, t0))
    k_a2 = int(np.searchsorted(ggf, t1))
    tan0 = normalize(arc.point(np.array([t0]))[0])
    tan1 = normalize(arc.point(np.array([t1]))[0])
    cone_lo = Cone(vertex=beta[k_a1], axis=-tan0, half_angle=eps)
    cone_hi = Cone(vertex=beta[k_a2], axis=tan1, half_angle=eps)
    return AllowableArcResult(speed=f, curve=curve,
                              ball_center=np.zeros(3), ball_radius=mu,
                              cones=(cone_lo, cone_hi), diagnostics=diag)


def _verify_postconditions(curve, R, eps, mu, N, c0, cp, records, d_inset, scale):
    """Numeric surrogate checks on the final confined arc; raises on failure."""
    gg, beta, tangents = curve.params, curve.points, curve.tangents
    t0, t1 = gg[0], gg[-1]
    norms = np.linalg.norm(beta, axis=1)
    k0 = int(np.searchsorted(gg, t0))
    k1 = int(np.searchsorted(gg, t1))
    end_err = max(abs(norms[k0] - mu), abs(norms[k1] - mu))
    if end_err > 1e-6 * mu:
        raise StageError("gap-arc", f"endpoint norm off ball boundary by {end_err:.3e}")
    if float(np.max(norms)) > mu * (1.0 + 1e-8):
        raise StageError("gap-arc", "curve escapes the confinement ball")

    cos_floor = max(0.5, 0.9 * np.cos(2.0 * eps) - 0.1)
    cos_hi = float(beta[k1] @ tangents[k1] / norms[k1])
    cos_lo = float(beta[k0] @ (-tangents[k0]) / norms[k0])
    if min(cos_hi, cos_lo) <= cos_floor:
        raise StageError("gap-arc", f"endpoint radial angle too wide "
                                    f"(cos {min(cos_hi, cos_lo):.4f})")

    z = beta @ R[2]
    in_start = (gg >= t0) & (gg <= c0)
    in_end = (gg >= cp) & (gg <= t1)
    for m in (in_start, in_end):
        dz = np.diff(z[m])
        if np.any(dz <= 0):
            raise StageError("gap-arc", "z not strictly increasing on an inset")

    # radial growth at large radius (both insets, pre-rescale norm >= ~10N)
    big = (norms >= 0.98 * mu) & (in_start | in_end)
    if np.any(big):
        cos_theta = np.einsum("nc,nc->n", beta[big], tangents[big]) / norms[big]
        outward = np.where(in_end[big], cos_theta, -cos_theta)
        if np.any(outward <= 0.5):
            raise StageError("gap-arc", "radial derivative not outward at large radius")

    piece_checks = []
    for rec in records:
        M = rec["frame2d"]
        sel = (gg >= rec["piece"][0]) & (gg <= rec["piece"][1])
        checks = verify_piece_conditions(beta[sel] @ M.T, gg[sel], rec, scale)
        if not all(checks.values()):
            raise StageError("gap-arc", f"crossing-piece conditions failed: {checks}")
        piece_checks.append(checks)

    z0 = float(beta[k0] @ R[2])
    z1 = float(beta[k1] @ R[2])
    if not (z0 < 0.0 < z1):
        raise StageError("gap-arc", "endpoints not separated by the frame equator")
    return {"endpoint_norm_error": float(end_err),
            "cos_end_angles": (cos_lo, cos_hi),
            "pre_rescale_norms": (float(norms[k0] / scale), float(norms[k1] / scale)),
            "piece_checks": piece_checks,
            "z_ends": (z0, z1)}


def certify_gap_cones(result: AllowableArcResult, frame, sample_budget=256):
    """Independent cone certification for a confined arc.

    Checks each end cone meets the closed ball only at its vertex (radial
    angle + half-angle <= pi/2) and that the two cones are disjoint, both by
    the equatorial separating plane in the gap frame and by the truncated
    convex-separation test.
    """
    R = np.asarray(frame, dtype=float)
    mu = result.ball_radius
    lo, hi = result.cones
    for cone in (lo, hi):
        radial = normalize(cone.vertex - result.ball_center)
        ang = float(sphere_distance(radial, cone.axis))
        if ang + cone.half_angle > np.pi / 2:
            return False, "cone overlaps ball beyond its vertex"
    n = R[2]
    sep = cone_in_halfspace(hi, n, 0.0) and cone_in_halfspace(lo, -n, 0.0)
    if not sep:
        return False, "cones not separated by the frame equator"
    if not cones_disjoint(lo, hi, radius_bound=4.0 * mu,
                          sample_budget=sample_budget):
        return False, "truncated cones intersect"
    pts = result.curve.points
    inside_lo = cone_contains(lo, pts, tol=1e-12)
    inside_hi = cone_contains(hi, pts, tol=1e-12)
    k0 = int(np.argmin(np.linalg.norm(pts - lo.vertex, axis=1)))
    k1 = int(np.argmin(np.linalg.norm(pts - hi.vertex, axis=1)))
    inside_lo[k0] = False
    inside_hi[k1] = False
    if np.any(inside_lo) or np.any(inside_hi):
        return False, "curve sample inside an end cone"
    return True, "ok"
