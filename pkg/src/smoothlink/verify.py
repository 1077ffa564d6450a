"""Independent certification of built curves.

Every verify_* operation consumes only sampled data (and the original
polygon), never the builder's internal success flags; the certificate passes
only if each margin recomputes positively.  Negative controls (a planar
circle, translated twin components, a self-crossing curve) must fail and are
shipped as permanent tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import scans
from .errors import CannotCertifyError
from .geom import chord_to_angle, normalize, sphere_distance
from .kernels import SampledCurve
from .linkmodel import PolygonalLink
from .suspension import enclosing_triangle_height

DEFAULT_WINDOW = 8
DEFAULT_MARGIN_THRESHOLD = 1e-4


def verify_tangents(curves, window=DEFAULT_WINDOW, margin=DEFAULT_MARGIN_THRESHOLD):
    """Worst projective gap between tangent directions over all far pairs.

    Within-component pairs at cyclic index separation >= window plus all
    cross-component pairs are scanned; near-diagonal windows are certified
    by the local-injectivity test.  Returns (margin_found, window_certified,
    detail); margin is what the certificate reports, the pass condition is
    margin > 0 with certified windows.
    """
    margins = []
    window_ok = True
    detail = {"per_component": [], "cross": []}
    for c in curves:
        T = np.asarray(c.tangents, dtype=float)
        gap, i, j = scans.min_projective_far_gap(T, min_sep=window,
                                                 cyclic=c.closed)
        ok, info = scans.certify_windows_sphere(T, window=window, cyclic=c.closed)
        window_ok &= ok
        margins.append(gap)
        detail["per_component"].append({"far_gap": float(gap), "windows": info,
                                        "worst_pair": (i, j)})
    for a in range(len(curves)):
        for b in range(a + 1, len(curves)):
            g = scans.cross_min_projective_gap(curves[a].tangents,
                                               curves[b].tangents)
            margins.append(g)
            detail["cross"].append({"pair": (a, b), "gap": float(g)})
    found = float(min(margins)) if margins else np.inf
    detail["margin_threshold"] = margin
    return found, bool(window_ok), detail


def verify_embedding(curves, window=DEFAULT_WINDOW):
    """Minimum self/cross distance over far sample pairs; positive means embedded.

    Near-diagonal injectivity follows from positive speed plus the per-step
    tangent turning bound, certified by the same window test applied to the
    tangent samples; a failed window raises CannotCertifyError.
    """
    dists = []
    for c in curves:
        ok, info = scans.certify_windows_sphere(np.asarray(c.tangents),
                                                window=window, cyclic=c.closed)
        if not ok:
            raise CannotCertifyError(
                f"near-diagonal windows not certifiable: {info}")
        d, i, j = scans.min_far_pair_distance(np.asarray(c.points),
                                              min_sep=window, cyclic=c.closed)
        dists.append(d)
    for a in range(len(curves)):
        for b in range(a + 1, len(curves)):
            dists.append(scans.cross_min_distance(curves[a].points,
                                                  curves[b].points))
    return float(min(dists)) if dists else np.inf


def point_segment_distance(points, seg_a, seg_b):
    """Distance from each point to the nearest of the given segments."""
    p = np.asarray(points, dtype=float)[:, None, :]
    a = np.asarray(seg_a, dtype=float)[None, :, :]
    b = np.asarray(seg_b, dtype=float)[None, :, :]
    ab = b - a
    denom = np.maximum(np.sum(ab * ab, axis=-1), 1e-300)
    t = np.clip(np.sum((p - a) * ab, axis=-1) / denom, 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.min(np.linalg.norm(p - proj, axis=-1), axis=1)


def verify_tube(curves, link: PolygonalLink, radius):
    """Maximum deviation of each curve from its corresponding polygon component."""
    if len(curves) != link.n_components:
        raise ValueError("component count mismatch")
    worst = 0.0
    for c, comp in zip(curves, link.components):
        a = comp
        b = np.roll(comp, -1, axis=0)
        pts = np.asarray(c.points)
        dev = 0.0
        for lo in range(0, len(pts), 65536):
            dev = max(dev, float(np.max(point_segment_distance(pts[lo:lo + 65536], a, b))))
        worst = max(worst, dev)
    return worst, bool(worst <= radius)


def verify_structure(build):
    """Re-assert the alternating suspension/gap structure from stored artifacts.

    Checks, per component: piece alternation and contiguity, suspension base
    parallelism to the edge and base-length difference <= epsilon, suspension
    containment in the epsilon triangle, gap-ball radius <= epsilon with the
    curve confined and endpoints on the boundary, end-cone conditions, speed
    = 1 exactly at gap boundaries, and the cumulative vertex-drift envelope
    (3i - 2) epsilon.  Returns (ok, violations).
    """
    eps = build.budgets.epsilon
    violations = []
    for ci, comp in enumerate(build.components):
        pieces = comp.pieces
        n = len(pieces)
        if n % 2 != 0:
            violations.append(f"component {ci}: odd piece count")
            continue
        drift_budget = 0.0
        for k, p in enumerate(pieces):
            expected = "susp" if k % 2 == 0 else "gap"
            if p.kind != expected:
                violations.append(f"component {ci} piece {k}: expected {expected}")
                continue
            if k and abs(pieces[k - 1].t1 - p.t0) > 1e-9 * max(1.0, abs(p.t0)):
                violations.append(f"component {ci} piece {k}: domain gap")
            w = p.world_points()
            if p.kind == "susp":
                base_vec = w[-1] - w[0]
                e_vec = p.edge_vector
                cosang = float(np.dot(normalize(base_vec), normalize(e_vec)))
                ang = float(np.arccos(np.clip(cosang, -1.0, 1.0)))
                if ang > 1e-6:
                    violations.append(
                        f"component {ci} edge {p.edge_index}: base parallelism "
                        f"off by {ang:.3e} rad")
                dlen = abs(float(np.linalg.norm(base_vec))
                           - float(np.linalg.norm(e_vec)))
                if dlen > eps:
                    violations.append(
                        f"component {ci} edge {p.edge_index}: base length "
                        f"difference {dlen:.3e} > epsilon")
                h_tri = enclosing_triangle_height(w, w[0], w[-1])
                if h_tri > eps:
                    violations.append(
                        f"component {ci} edge {p.edge_index}: suspension leaves "
                        f"epsilon triangle ({h_tri:.3e})")
            else:
                r = p.result
                if r.ball_radius > eps:
                    violations.append(
                        f"component {ci} gap {p.edge_index}: ball radius "
                        f"{r.ball_radius:.3e} > epsilon")
                center = p.ball_center_world()
                norms = np.linalg.norm(w - center, axis=1)
                if float(np.max(norms)) > r.ball_radius * (1 + 1e-8):
                    violations.append(
                        f"component {ci} gap {p.edge_index}: curve escapes ball")
                end_err = max(abs(norms[0] - r.ball_radius),
                              abs(norms[-1] - r.ball_radius))
                if end_err > 1e-6 * r.ball_radius:
                    violations.append(
                        f"component {ci} gap {p.edge_index}: endpoints off "
                        f"ball boundary")
                for side, cone in zip(("lo", "hi"), r.cones):
                    radial = normalize(cone.vertex - r.ball_center)
                    if float(sphere_distance(radial, cone.axis)) \
                            + cone.half_angle > np.pi / 2:
                        violations.append(
                            f"component {ci} gap {p.edge_index}: {side} cone "
                            f"meets ball interior")
                for side in ("start", "end"):
                    if r.speed.boundary_value(side) != 1.0:
                        violations.append(
                            f"component {ci} gap {p.edge_index}: speed not 1 "
                            f"at {side}")
        # vertex drift envelope (3i - 2) epsilon against the work-scale polygon
        verts = build.work_link.components[ci]
        for j in range(len(verts)):
            w0 = pieces[2 * j].world_points()[0]
            bound = (3 * (j + 1) - 2) * eps + comp.delta
            d = float(np.linalg.norm(w0 - verts[j]))
            if d > bound:
                violations.append(
                    f"component {ci} vertex {j}: drift {d:.3e} exceeds "
                    f"envelope {bound:.3e}")
    return len(violations) == 0, violations


@dataclass
class Certificate:
    """Machine-checked record of every verified margin for a build."""

    passed: bool
    projective_tangent_margin: float
    window_certified: bool
    self_distance: float
    tube_max_deviation: float
    tube_radius: float
    tube_ok: bool
    closure_residuals: list
    structural_ok: bool
    structural_violations: list
    budgets: dict
    scale_factor: float
    stages: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "passed": bool(self.passed),
            "projective_tangent_margin": float(self.projective_tangent_margin),
            "window_certified": bool(self.window_certified),
            "self_distance": float(self.self_distance),
            "tube_max_deviation": float(self.tube_max_deviation),
            "tube_radius": float(self.tube_radius),
            "tube_ok": bool(self.tube_ok),
            "closure_residuals": [float(x) for x in self.closure_residuals],
            "structural_ok": bool(self.structural_ok),
            "structural_violations": list(self.structural_violations),
            "budgets": self.budgets,
            "scale_factor": float(self.scale_factor),
            "stages": self.stages,
            "detail": self.detail,
        }


def certify_build(build, window=DEFAULT_WINDOW,
                  margin_threshold=DEFAULT_MARGIN_THRESHOLD):
    """Full certificate for a SmoothLinkBuild, in output (input-scale) coordinates."""
    curves = build.output_curves()
    margin, window_ok, tangent_detail = verify_tangents(curves, window=window,
                                                        margin=margin_threshold)
    self_dist = verify_embedding(curves, window=window)
    r_out = build.budgets.tube_radius / build.scale_factor
    tube_dev, tube_ok = verify_tube(curves, build.input_link, r_out)
    structural_ok, violations = verify_structure(build)
    residuals = [c.closure["residual"] / build.scale_factor
                 for c in build.components]
    diam = max(c.diameter() for c in curves)
    res_ok = all(r <= 1e-9 * diam for r in residuals)
    passed = bool(margin > 0 and window_ok and self_dist > 0 and tube_ok
                  and structural_ok and res_ok)
    budgets = {
        "min_separation": build.budgets.min_separation,
        "tube_radius": build.budgets.tube_radius,
        "epsilon": build.budgets.epsilon,
        "closure_radius": build.budgets.closure_radius,
        "n_edges": build.budgets.n_edges,
        "per_component": [
            {"mu": c.mu, "delta": c.delta, "closure": c.closure}
            for c in build.components
        ],
    }
    return Certificate(
        passed=passed,
        projective_tangent_margin=margin,
        window_certified=window_ok,
        self_distance=self_dist,
        tube_max_deviation=tube_dev,
        tube_radius=r_out,
        tube_ok=tube_ok,
        closure_residuals=residuals,
        structural_ok=structural_ok,
        structural_violations=violations,
        budgets=budgets,
        scale_factor=build.scale_factor,
        stages=build.stage_log,
        detail={"tangents": tangent_detail, "diameter": diam,
                "isotopy": "by construction (structural checks passed)"
                           if structural_ok else "structural checks FAILED"},
    )


def certify_curves(curves, link=None, tube_radius=None, window=DEFAULT_WINDOW,
                   margin_threshold=DEFAULT_MARGIN_THRESHOLD):
    """Certificate for standalone sampled curves (no build artifacts).

    Structural and closure checks are only available from a build, so they
    are reported as not-applicable; pass/fail covers tangent margins,
    windows, embedding, and (when a polygon is given) tube containment.
    """
    margin, window_ok, tangent_detail = verify_tangents(curves, window=window,
                                                        margin=margin_threshold)
    self_dist = verify_embedding(curves, window=window)
    if link is not None:
        if tube_radius is None:
            from .linkmodel import min_nonadjacent_distance
            tube_radius = 0.9 * min_nonadjacent_distance(link) / 4.0
        tube_dev, tube_ok = verify_tube(curves, link, tube_radius)
    else:
        tube_dev, tube_ok, tube_radius = 0.0, True, np.inf
    passed = bool(margin > 0 and window_ok and self_dist > 0 and tube_ok)
    diam = max(c.diameter() for c in curves)
    return Certificate(
        passed=passed,
        projective_tangent_margin=margin,
        window_certified=window_ok,
        self_distance=self_dist,
        tube_max_deviation=tube_dev,
        tube_radius=float(tube_radius) if np.isfinite(tube_radius) else -1.0,
        tube_ok=tube_ok,
        closure_residuals=[],
        structural_ok=True,
        structural_violations=[],
        budgets={},
        scale_factor=1.0,
        detail={"tangents": tangent_detail, "diameter": diam,
                "mode": "standalone"},
    )
