"""End-to-end pipeline: preconditioning, bends, indicatrix, gaps, closure.

The output of build_smooth_link is a SmoothLinkBuild holding, per component,
a closed densely sampled curve whose tangent map is exactly the assembled
admissible indicatrix loop, together with every stage artifact the structural
verifier re-checks (suspensions, confinement balls, end cones, budgets).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linkmodel
from .arcsynth import GapProblem, certify_gap_cones, choose_gap_frame, \
    synthesize_gap_arc
from .errors import ClosureError, PlannerError, SmoothLinkError, StageError
from .geom import normalize
from .indicatrix import assemble_indicatrix
from .kernels import SampledCurve, SpeedFunction
from .linkmodel import PolygonalLink, Budgets
from .suspension import build_round_suspension, enclosing_triangle_height, \
    stretch_to_factor


@dataclass
class BuildOptions:
    seed: int = 0
    epsilon_scale: float = 1.0
    samples_per_suspension: int = 64
    samples_per_gap: int = 256
    max_angle: float = np.pi / 2
    window: int = 8
    sigma_floor: float = 1e-4
    max_epsilon_retries: int = 2
    precondition_rounds: int = 6


@dataclass
class SuspensionPiece:
    edge_index: int
    t0: float
    t1: float
    suspension: object
    speed: SpeedFunction
    curve_local: SampledCurve
    edge_vector: np.ndarray
    k_factor: float = 1.0
    offset: np.ndarray = None

    @property
    def kind(self):
        return "susp"

    def world_points(self):
        return self.curve_local.points + self.offset

    def realized_base(self):
        w = self.world_points()
        return w[0], w[-1]


@dataclass
class GapPiece:
    edge_index: int
    t0: float
    t1: float
    result: object
    frame: np.ndarray
    offset: np.ndarray = None

    @property
    def kind(self):
        return "gap"

    @property
    def curve_local(self):
        return self.result.curve

    def world_points(self):
        return self.result.curve.points + self.offset

    def ball_center_world(self):
        return self.result.ball_center + self.offset


@dataclass
class ComponentBuild:
    pieces: list
    curve: SampledCurve
    loop: object
    mu: float
    delta: float
    closure: dict


@dataclass
class SmoothLinkBuild:
    input_link: PolygonalLink
    work_link: PolygonalLink
    scale_factor: float
    budgets: Budgets
    components: list
    options: BuildOptions
    stage_log: dict = field(default_factory=dict)

    def output_curves(self):
        """Component curves mapped back to the input's coordinate scale."""
        out = []
        for comp in self.components:
            c = comp.curve
            out.append(SampledCurve(params=c.params,
                                    points=c.points / self.scale_factor,
                                    tangents=c.tangents, closed=True))
        return out


@dataclass
class ClosureProblem:
    """Drift cancellation data: express the seam gap over three edge directions."""

    gap_vector: np.ndarray
    basis: np.ndarray          # columns are the three unit edge directions
    epsilon: float
    edge_lengths: np.ndarray
    delta: float
    sigma_min: float

    def __post_init__(self):
        if not np.linalg.norm(self.gap_vector) <= self.delta * (1 + 1e-9):
            raise ClosureError("gap vector exceeds the closure ball radius")


def closure_ball_radius(basis, epsilon, sigma_floor=1e-6):
    """delta = 0.9 * epsilon * sigma_min(basis): gaps of norm <= delta are
    expressible as sum(u_i p_i) with |u_i| < epsilon."""
    M = np.asarray(basis, dtype=float)
    sigma = float(np.linalg.svd(M, compute_uv=False)[-1])
    if sigma < sigma_floor:
        raise ClosureError(f"basis conditioning {sigma:.3e} below floor {sigma_floor:.0e}")
    return 0.9 * epsilon * sigma


def solve_closure(problem: ClosureProblem):
    """Exact 3x3 solve of sum(u_i p_i) = gap_vector with |u_i| < epsilon.

    The caller cancels the drift by shrinking suspension i's base to
    E_i - u_i p_i, i.e. rescaling its displacement by k_i = 1 - u_i/|E_i|.
    """
    u = np.linalg.solve(problem.basis, problem.gap_vector)
    if np.any(np.abs(u) >= problem.epsilon):
        raise ClosureError(
            f"closure coefficients {u} exceed epsilon {problem.epsilon:.3e} "
            f"(gap norm {float(np.linalg.norm(problem.gap_vector)):.3e})")
    residual = problem.basis @ u - problem.gap_vector
    if float(np.linalg.norm(residual)) > 1e-12 * max(1.0, float(np.linalg.norm(problem.gap_vector))):
        raise ClosureError("closure solve residual too large")
    return u


def best_consecutive_triple(directions, sigma_floor=1e-6):
    """Best-conditioned cyclically consecutive direction triple (index, sigma)."""
    n = len(directions)
    best_k, best_s = -1, -1.0
    for k in range(n):
        M = np.column_stack([directions[k], directions[(k + 1) % n],
                             directions[(k + 2) % n]])
        s = float(np.linalg.svd(M, compute_uv=False)[-1])
        if s > best_s:
            best_k, best_s = k, s
    if best_s < sigma_floor:
        raise ClosureError(f"no consecutive edge triple with conditioning above "
                           f"{sigma_floor:.0e} (best {best_s:.3e})")
    return best_k, best_s


def precondition(link: PolygonalLink, opts: BuildOptions):
    """Perturb, rescale, chamfer until generic with all corner angles < max_angle.

    Returns (work link, cumulative scale factor, final budgets, log).  The
    epsilon budget is tightened to a tenth of the observed minimum projective
    gap when the 10-epsilon general-position target is not attainable.
    """
    work = link
    scale_total = 1.0
    log = {"rounds": 0}
    for rnd in range(opts.precondition_rounds):
        log["rounds"] = rnd + 1
        b0 = linkmodel.compute_budgets(work, epsilon_scale=opts.epsilon_scale)
        magnitude = b0.tube_radius / 20.0
        # the jitter can only open projective gaps of order magnitude/edge;
        # when 10 epsilon is out of reach the budget is tightened below instead
        threshold = max(min(10.0 * b0.epsilon, magnitude / 10.0), 1e-7)
        work = linkmodel.perturb_to_general_position(
            work, magnitude, seed=opts.seed + rnd, threshold=threshold,
            sigma_floor=opts.sigma_floor)
        work, fac = linkmodel.rescale_min_edge(work)
        scale_total *= fac
        work = linkmodel.chamfer_corners(work, opts.max_angle)
        if work.min_edge_length() < 3.0:
            work, fac = linkmodel.rescale_min_edge(work)
            scale_total *= fac
        budgets = linkmodel.compute_budgets(work, epsilon_scale=opts.epsilon_scale)
        report = linkmodel.general_position_check(work, 0.0, opts.sigma_floor)
        angles_ok = all(float(np.max(a)) < opts.max_angle
                        for a in linkmodel.corner_angles(work))
        if report.ok and angles_ok and report.min_projective_edge_gap > 1e-7:
            # epsilon smaller if necessary: keep 10 epsilon below the gap
            eps = min(budgets.epsilon, report.min_projective_edge_gap / 10.0)
            budgets = Budgets(min_separation=budgets.min_separation,
                              tube_radius=budgets.tube_radius,
                              epsilon=eps, n_edges=budgets.n_edges)
            log.update({
                "min_projective_gap": report.min_projective_edge_gap,
                "min_triple_sigma": report.min_triple_sigma,
                "scale_factor": scale_total,
                "n_edges": budgets.n_edges,
            })
            return work, scale_total, budgets, log
    raise StageError("precondition", "no generic configuration found")


def _chain_pieces(pieces, start):
    """Assign world offsets so pieces join head to tail; return the end point."""
    cur = np.asarray(start, dtype=float)
    for p in pieces:
        local = p.curve_local.points
        p.offset = cur - local[0]
        cur = cur + (local[-1] - local[0])
    return cur


def _component_curve(pieces):
    params, points, tangents = [], [], []
    for k, p in enumerate(pieces):
        c = p.curve_local
        sl = slice(1, None) if k else slice(None)
        params.append(c.params[sl])
        points.append(c.points[sl] + p.offset)
        tangents.append(c.tangents[sl])
    return SampledCurve(params=np.concatenate(params),
                        points=np.vstack(points),
                        tangents=np.vstack(tangents), closed=True)


def _build_once(link: PolygonalLink, opts: BuildOptions, stage_log):
    work, scale_total, budgets, pre_log = precondition(link, opts)
    stage_log["precondition"] = pre_log
    eps = budgets.epsilon

    comp_meta = []
    min_delta = np.inf
    for c in work.components:
        dirs = normalize(np.roll(c, -1, axis=0) - c)
        k, sigma = best_consecutive_triple(dirs)
        basis = np.column_stack([dirs[k], dirs[(k + 1) % len(c)],
                                 dirs[(k + 2) % len(c)]])
        delta = closure_ball_radius(basis, eps)
        mu = delta / (2.0 * len(c))
        comp_meta.append({"triple": k, "sigma": sigma, "basis": basis,
                          "delta": delta, "mu": mu})
        min_delta = min(min_delta, delta)
    budgets = budgets.with_closure(min_delta)
    stage_log["budgets"] = {
        "min_separation": budgets.min_separation,
        "tube_radius": budgets.tube_radius,
        "epsilon": eps,
        "closure_radius": budgets.closure_radius,
        "n_edges": budgets.n_edges,
    }

    sagitta = 0.225 * eps
    suspensions = []
    for c in work.components:
        comp_s = []
        nxt = np.roll(c, -1, axis=0)
        for j in range(len(c)):
            s = build_round_suspension(c[j], nxt[j], sagitta,
                                       samples=opts.samples_per_suspension)
            if s.triangle_height > 0.5 * eps:
                raise StageError("suspension", "bend exceeds half the epsilon budget")
            if s.half_angle >= 0.9 * eps:
                raise StageError("suspension", "tangent sweep exceeds its disk")
            comp_s.append(s)
        suspensions.append(comp_s)

    loops, region = assemble_indicatrix(
        [[s.tangent_arc for s in comp] for comp in suspensions],
        epsilon=eps, turn_step=eps / 8.0,
        min_susp_samples=opts.samples_per_suspension,
        min_gap_samples=opts.samples_per_gap, window=opts.window)
    stage_log["indicatrix"] = {
        "loops": [
            {"margin": lp.report.min_projective_self_gap,
             "windows": lp.report.local_injectivity_ok,
             "samples": int(len(lp.sample_params))}
            for lp in loops
        ],
    }

    components = []
    for ci, (comp_s, loop, meta) in enumerate(zip(suspensions, loops, comp_meta)):
        verts = work.components[ci]
        nxt = np.roll(verts, -1, axis=0)
        pieces = []
        gap_info = []
        for j in range(len(comp_s)):
            s_arc = loop.arcs[2 * j]
            susp = comp_s[j]
            local = SampledCurve(params=loop.piece_params[2 * j],
                                 points=susp.point(loop.piece_params[2 * j] - s_arc.t0),
                                 tangents=s_arc.point(loop.piece_params[2 * j]))
            pieces.append(SuspensionPiece(
                edge_index=j, t0=s_arc.t0, t1=s_arc.t1, suspension=susp,
                speed=SpeedFunction(s_arc.t0, s_arc.t1, 1.0, ()),
                curve_local=local, edge_vector=nxt[j] - verts[j]))
            conn = loop.arcs[2 * j + 1]
            frame, finfo = choose_gap_frame(conn, eps)
            result = synthesize_gap_arc(
                GapProblem(arc=conn, frame=frame, epsilon=eps, mu=meta["mu"]),
                frame_info=finfo, min_samples=opts.samples_per_gap,
                turn_step=eps / 8.0)
            ok, why = certify_gap_cones(result, frame)
            if not ok:
                raise StageError("gap-arc", f"cone certification failed: {why}")
            pieces.append(GapPiece(edge_index=j, t0=conn.t0, t1=conn.t1,
                                   result=result, frame=frame))
            gap_info.append({"crossings": len(result.diagnostics["crossings"]),
                             "N": result.diagnostics["N"]})

        start = verts[0]
        end = _chain_pieces(pieces, start)
        drift = end - start
        if float(np.linalg.norm(drift)) > meta["delta"] * (1 + 1e-9):
            raise ClosureError(
                f"component {ci} drift {float(np.linalg.norm(drift)):.3e} exceeds "
                f"delta {meta['delta']:.3e}")

        n_edges_c = len(comp_s)
        triple_edges = [(meta["triple"] + o) % n_edges_c for o in range(3)]
        lengths = np.array([float(np.linalg.norm(pieces[2 * j].edge_vector))
                            for j in triple_edges])
        problem = ClosureProblem(gap_vector=drift, basis=meta["basis"],
                                 epsilon=eps, edge_lengths=lengths,
                                 delta=meta["delta"], sigma_min=meta["sigma"])
        u = solve_closure(problem)
        k_factors = []
        for o, j in enumerate(triple_edges):
            piece = pieces[2 * j]
            e_len = float(np.linalg.norm(piece.edge_vector))
            k_fac = 1.0 - u[o] / e_len
            if not 0.5 <= k_fac <= 1.5:
                raise ClosureError(f"stretch factor {k_fac} outside [1/2, 3/2]")
            g, rho, info = stretch_to_factor(piece.suspension, k_fac)
            shifted = SampledCurve(params=rho.params + piece.t0,
                                   points=rho.points,
                                   tangents=rho.tangents)
            piece.curve_local = shifted
            piece.speed = _shift_speed(g, piece.t0)
            piece.k_factor = k_fac
            h_tri = enclosing_triangle_height(rho.points, rho.points[0],
                                              rho.points[-1])
            if h_tri > eps:
                raise ClosureError("stretched suspension exceeds the epsilon triangle")
            k_factors.append(k_fac)

        end = _chain_pieces(pieces, start)
        residual = float(np.linalg.norm(end - start))
        diam = work.diameter()
        if residual > 1e-9 * diam:
            raise ClosureError(f"seam residual {residual:.3e} exceeds 1e-9 x diameter")

        curve = _component_curve(pieces)
        components.append(ComponentBuild(
            pieces=pieces, curve=curve, loop=loop, mu=meta["mu"],
            delta=meta["delta"],
            closure={"u": u.tolist(), "triple": meta["triple"],
                     "sigma": meta["sigma"], "k_factors": k_factors,
                     "drift": float(np.linalg.norm(drift)),
                     "residual": residual}))
        stage_log.setdefault("gaps", []).append(gap_info)

    return SmoothLinkBuild(input_link=link, work_link=work,
                           scale_factor=scale_total, budgets=budgets,
                           components=components, options=opts,
                           stage_log=stage_log)


def _shift_speed(f: SpeedFunction, offset):
    """Translate a speed function's domain and term parameters by offset."""
    from .kernels import Bump, Step
    terms = []
    for t in f.terms:
        if isinstance(t, Bump):
            terms.append(Bump(t.center + offset, t.half_width, t.amplitude))
        elif isinstance(t, Step):
            terms.append(Step(t.a + offset, t.b + offset, t.amplitude))
        else:
            raise TypeError(f"unknown speed term {t}")
    return SpeedFunction(f.t0 + offset, f.t1 + offset, f.base, tuple(terms))


def build_smooth_link(link: PolygonalLink, options: BuildOptions = None):
    """Smooth an embedded polygonal link into a certified tangent-generic curve.

    Planner congestion at the default clearance is retried with the epsilon
    budget halved (up to max_epsilon_retries times) before giving up.
    """
    opts = options or BuildOptions()
    stage_log = {}
    last = None
    for attempt in range(opts.max_epsilon_retries + 1):
        try:
            scaled = BuildOptions(**{**opts.__dict__,
                                     "epsilon_scale": opts.epsilon_scale * 0.5 ** attempt})
            build = _build_once(link, scaled, stage_log)
            stage_log["epsilon_attempts"] = attempt + 1
            return build
        except PlannerError as exc:
            last = exc
        except SmoothLinkError:
            raise
    raise StageError("indicatrix", f"planner failed at every epsilon budget: {last}")
