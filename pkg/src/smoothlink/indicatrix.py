"""Spherical arcs, admissibility certification, and connector planning.

An admissible loop on S^2 is an embedding with no antipodal pairs, i.e. an
embedding into the projective plane.  The assembler supplies one short
great-circle arc of tangent directions per edge; this module plans smooth
connector arcs between consecutive ones, avoiding the forbidden region
(everything already placed, together with its antipodal image), and
certifies admissibility of the resulting closed loops.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import PlannerError
from .geom import chord_to_angle, normalize, sphere_distance
from .kernels import piecewise_vector_integrals
from . import scans


# ---------------------------------------------------------------------------
# arc types


class SphericalArc:
    """Smooth curve on S^2 over a parameter interval, with analytic derivative."""

    t0 = 0.0
    t1 = 1.0

    def point(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    @property
    def domain(self):
        return (self.t0, self.t1)

    def immersion_margin(self, samples=512):
        ts = np.linspace(self.t0, self.t1, samples)
        return float(np.min(np.linalg.norm(self.velocity(ts), axis=-1)))

    def length(self, samples=2048):
        ts = np.linspace(self.t0, self.t1, samples)
        sp = np.linalg.norm(self.velocity(ts), axis=-1)
        return float(np.trapezoid(sp, ts))


@dataclass
class CircleArc(SphericalArc):
    """cos(theta) u + sin(theta) v with theta = phase + omega (t - t0).

    u, v orthonormal gives a great-circle arc; this is exactly the shape of
    the tangent sweep of a planar circular bend.
    """

    u_vec: np.ndarray
    v_vec: np.ndarray
    omega: float
    phase: float
    t0: float
    t1: float

    def __post_init__(self):
        self.u_vec = np.asarray(self.u_vec, dtype=float)
        self.v_vec = np.asarray(self.v_vec, dtype=float)

    def _theta(self, t):
        return self.phase + self.omega * (np.asarray(t, dtype=float) - self.t0)

    def point(self, t):
        th = self._theta(t)
        return (np.cos(th)[..., None] * self.u_vec
                + np.sin(th)[..., None] * self.v_vec)

    def velocity(self, t):
        th = self._theta(t)
        return self.omega * (-np.sin(th)[..., None] * self.u_vec
                             + np.cos(th)[..., None] * self.v_vec)

    def shifted(self, new_t0):
        return replace(self, t0=new_t0, t1=new_t0 + (self.t1 - self.t0))


@dataclass
class SplineArc(SphericalArc):
    """Clamped cubic spline in R^3 radially projected onto S^2."""

    spline: CubicSpline
    offset: float = 0.0

    def __post_init__(self):
        self._deriv = self.spline.derivative()

    @property
    def t0(self):
        return float(self.spline.x[0] + self.offset)

    @property
    def t1(self):
        return float(self.spline.x[-1] + self.offset)

    def point(self, t):
        c = self.spline(np.asarray(t, dtype=float) - self.offset)
        return c / np.linalg.norm(c, axis=-1, keepdims=True)

    def velocity(self, t):
        tt = np.asarray(t, dtype=float) - self.offset
        c = self.spline(tt)
        d = self._deriv(tt)
        n = np.linalg.norm(c, axis=-1, keepdims=True)
        a = c / n
        rad = np.sum(a * d, axis=-1, keepdims=True)
        return (d - a * rad) / n

    def shifted(self, new_t0):
        return replace(self, offset=self.offset + (new_t0 - self.t0))


@dataclass
class FunctionArc(SphericalArc):
    """Arc given by explicit callables (used for analytic test fields)."""

    point_fn: object
    velocity_fn: object = None
    t0: float = 0.0
    t1: float = 1.0

    def point(self, t):
        return np.asarray(self.point_fn(np.asarray(t, dtype=float)), dtype=float)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        if self.velocity_fn is not None:
            return np.asarray(self.velocity_fn(t), dtype=float)
        h = 1e-7 * max(1.0, self.t1 - self.t0)
        return (self.point(t + h) - self.point(t - h)) / (2.0 * h)


@dataclass
class PiecewiseArc(SphericalArc):
    """Concatenation of arcs with contiguous parameter domains."""

    pieces: tuple

    def __post_init__(self):
        bounds = [self.pieces[0].t0]
        for a, b in zip(self.pieces[:-1], self.pieces[1:]):
            if abs(a.t1 - b.t0) > 1e-9 * max(1.0, abs(a.t1)):
                raise ValueError("piece domains are not contiguous")
            bounds.append(a.t1)
        bounds.append(self.pieces[-1].t1)
        self._bounds = np.array(bounds)

    @property
    def t0(self):
        return float(self._bounds[0])

    @property
    def t1(self):
        return float(self._bounds[-1])

    def _dispatch(self, t, fn):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        idx = np.clip(np.searchsorted(self._bounds[1:-1], flat, side="right"),
                      0, len(self.pieces) - 1)
        out = np.empty((len(flat), 3))
        for k, piece in enumerate(self.pieces):
            m = idx == k
            if np.any(m):
                out[m] = fn(piece, flat[m])
        return out.reshape(t.shape + (3,)) if t.shape else out[0]

    def point(self, t):
        return self._dispatch(t, lambda p, x: p.point(x))

    def velocity(self, t):
        return self._dispatch(t, lambda p, x: p.velocity(x))


def params_by_turning(arc: SphericalArc, max_turn, min_samples=64, rounds=4):
    """Parameter grid on which consecutive arc points are at most max_turn apart."""
    ts = np.linspace(arc.t0, arc.t1, max(int(min_samples), 8) + 1)
    for _ in range(rounds):
        pts = arc.point(ts)
        steps = np.asarray(sphere_distance(pts[:-1], pts[1:]))
        if np.all(steps <= max_turn):
            return ts
        counts = np.ceil(steps / max_turn).astype(int).clip(1, 64)
        pieces = [np.linspace(ts[i], ts[i + 1], counts[i] + 1)[:-1]
                  for i in range(len(steps))]
        ts = np.concatenate(pieces + [ts[-1:]])
    return ts


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityReport:
    ok: bool
    min_projective_self_gap: float
    local_injectivity_ok: bool
    worst_pair: tuple
    window: int
    margin: float
    detail: dict


def admissibility_check(points, window=8, margin=0.0, closed=True):
    """Certify a sampled spherical curve as an embedding with no antipodal pairs.

    Far pairs (cyclic index separation >= window) must have projective gap
    above `margin`; every near-diagonal window must have spherical diameter
    below pi/2 and advance monotonically along its chord.  Both conditions
    together rule out self-intersections and antipodal pairs.
    """
    pts = np.asarray(points, dtype=float)
    gap, i, j = scans.min_projective_far_gap(pts, min_sep=window, cyclic=closed)
    local_ok, detail = scans.certify_windows_sphere(pts, window=window, cyclic=closed)
    ok = bool(local_ok and gap > margin)
    return AdmissibilityReport(ok=ok, min_projective_self_gap=float(gap),
                               local_injectivity_ok=bool(local_ok),
                               worst_pair=(i, j), window=window,
                               margin=float(margin), detail=detail)


# ---------------------------------------------------------------------------
# icosphere routing graph


_ICO_CACHE = {}


def _icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return normalize(verts), faces


def icosphere_graph(level):
    """Subdivided icosahedron: (unit verts, CSR indptr, CSR indices, edge length)."""
    if level in _ICO_CACHE:
        return _ICO_CACHE[level]
    V, faces = _icosahedron()
    for _ in range(level):
        e = np.sort(np.vstack([faces[:, [0, 1]], faces[:, [1, 2]],
                               faces[:, [2, 0]]]), axis=1)
        uniq, inv = np.unique(e, axis=0, return_inverse=True)
        mids = normalize(V[uniq[:, 0]] + V[uniq[:, 1]])
        mid_idx = (len(V) + np.arange(len(uniq)))[inv].reshape(3, -1)
        ab, bc, ca = mid_idx
        a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
        faces = np.vstack([
            np.column_stack([a, ab, ca]),
            np.column_stack([b, bc, ab]),
            np.column_stack([c, ca, bc]),
            np.column_stack([ab, bc, ca]),
        ])
        V = np.vstack([V, mids])
    e = np.sort(np.vstack([faces[:, [0, 1]], faces[:, [1, 2]],
                           faces[:, [2, 0]]]), axis=1)
    e = np.unique(e, axis=0)
    und = np.vstack([e, e[:, ::-1]])
    order = np.lexsort((und[:, 1], und[:, 0]))
    und = und[order]
    indptr = np.searchsorted(und[:, 0], np.arange(len(V) + 1))
    indices = und[:, 1].copy()
    edge_len = float(np.median(sphere_distance(V[e[:, 0]], V[e[:, 1]])))
    _ICO_CACHE[level] = (V, indptr, indices, edge_len)
    return _ICO_CACHE[level]


def _astar(verts, indptr, indices, valid, start, goal):
    """Deterministic A* over valid icosphere nodes; returns vertex index path."""
    import heapq

    n = len(verts)
    g = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=int)
    g[start] = 0.0
    h0 = float(sphere_distance(verts[start], verts[goal]))
    heap = [(h0, start)]
    closed = np.zeros(n, dtype=bool)
    while heap:
        f, u = heapq.heappop(heap)
        if closed[u]:
            continue
        if u == goal:
            path = [u]
            while parent[path[-1]] >= 0:
                path.append(parent[path[-1]])
            return path[::-1]
        closed[u] = True
        nbrs = indices[indptr[u]:indptr[u + 1]]
        nbrs = nbrs[valid[nbrs] & ~closed[nbrs]]
        if len(nbrs) == 0:
            continue
        costs = g[u] + np.asarray(sphere_distance(verts[u], verts[nbrs]))
        hs = np.asarray(sphere_distance(verts[nbrs], verts[goal]))
        for v, c, h in zip(nbrs, costs, hs):
            if c < g[v]:
                g[v] = c
                parent[v] = u
                heapq.heappush(heap, (float(c + h), int(v)))
    return None


# ---------------------------------------------------------------------------
# forbidden region


class ForbiddenRegion:
    """Accumulated indicatrix samples plus their antipodes, with a clearance.

    Distances are spherical and antipode-symmetric by construction, so
    staying `clearance` away from the region keeps projective gaps positive.
    Samples are tagged by piece so the two pieces meeting a connector at its
    junctions can be exempted near those junctions.
    """

    def __init__(self, clearance):
        self.clearance = float(clearance)
        self._chunks = []
        self._tags = []
        self._tree = None
        self._points = None

    def add(self, tag, points):
        pts = np.asarray(points, dtype=float)
        self._chunks.append(pts)
        self._tags.extend([tag] * len(pts))
        self._tree = None

    @property
    def points(self):
        if self._points is None or self._tree is None:
            self._points = (np.vstack(self._chunks) if self._chunks
                            else np.zeros((0, 3)))
        return self._points

    @property
    def tags(self):
        return self._tags

    def tree(self):
        if self._tree is None:
            P = self.points
            self._tree = cKDTree(np.vstack([P, -P])) if len(P) else None
        return self._tree

    def min_distance(self, q):
        """Spherical distance from each query point to the region (inf if empty)."""
        t = self.tree()
        if t is None:
            return np.full(len(np.atleast_2d(q)), np.inf)
        d, _ = t.query(np.atleast_2d(np.asarray(q, dtype=float)), k=1)
        return np.asarray(chord_to_angle(d))

    def violations(self, q, clearance=None):
        """Indices into the base sample set of all region points within clearance of q."""
        t = self.tree()
        if t is None:
            return [np.array([], dtype=int) for _ in np.atleast_2d(q)]
        c = self.clearance if clearance is None else clearance
        r = 2.0 * np.sin(min(c, np.pi / 2) / 2.0)
        hits = t.query_ball_point(np.atleast_2d(np.asarray(q, dtype=float)), r)
        m = len(self.points)
        return [np.unique(np.asarray(h, dtype=int) % m) for h in hits]


# ---------------------------------------------------------------------------
# connector planning


def _slerp(a, b, n):
    ang = float(sphere_distance(a, b))
    if ang < 1e-12:
        return np.repeat(a[None, :], n, axis=0)
    ts = np.linspace(0.0, 1.0, n)
    return (np.sin((1 - ts) * ang)[:, None] * a
            + np.sin(ts * ang)[:, None] * b) / np.sin(ang)


def _geodesic_samples(a, b, step):
    n = max(2, int(np.ceil(float(sphere_distance(a, b)) / step)) + 1)
    return _slerp(a, b, n)


def _fit_clamped_arc(waypoints, start_dir, end_dir):
    """Clamped normalized spline through unit waypoints, approximately unit speed."""
    pts = [waypoints[0]]
    for p in waypoints[1:]:
        if np.linalg.norm(p - pts[-1]) > 1e-9:
            pts.append(p)
    pts = np.array(pts)
    if len(pts) < 2:
        raise PlannerError("degenerate connector waypoints")
    t = np.concatenate([[0.0], np.cumsum(np.asarray(
        sphere_distance(pts[:-1], pts[1:])))])
    spl = CubicSpline(t, pts, bc_type=((1, np.asarray(start_dir, float)),
                                       (1, np.asarray(end_dir, float))))
    arc = SplineArc(spl)
    # arc-length resample once so the parametrization is near unit speed
    dense = np.linspace(arc.t0, arc.t1, max(64, 8 * len(pts)))
    sp = np.linalg.norm(arc.velocity(dense), axis=-1)
    s = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * np.diff(dense))])
    total = s[-1]
    m = max(32, 2 * len(pts))
    targets = np.linspace(0.0, total, m)
    ts = np.interp(targets, s, dense)
    ts[0], ts[-1] = dense[0], dense[-1]
    pts2 = arc.point(ts)
    pts2[0], pts2[-1] = waypoints[0], waypoints[-1]
    t2 = np.concatenate([[0.0], np.cumsum(np.asarray(
        sphere_distance(pts2[:-1], pts2[1:])))])
    if np.any(np.diff(t2) <= 0):
        raise PlannerError("connector resampling produced coincident samples")
    spl2 = CubicSpline(t2, pts2, bc_type=((1, np.asarray(start_dir, float)),
                                          (1, np.asarray(end_dir, float))))
    return SplineArc(spl2)


class ConnectorValidation(Exception):
    pass


def _validate_connector(arc, region: ForbiddenRegion, excludable, start, end,
                        turn_step=None):
    """Check clearance, smooth joins, immersion, and self-admissibility of a candidate.

    `excludable(sample_indices, junction)` says which obstacle samples may be
    ignored near the given junction (the two arcs the connector attaches to).
    Raises ConnectorValidation on failure.
    """
    clearance = region.clearance
    r_ex = 2.5 * clearance
    head_zone = 2.0 * r_ex
    if turn_step is None:
        turn_step = min(clearance / 6.0, 0.02)
    ts = params_by_turning(arc, turn_step, min_samples=64)
    pts = arc.point(ts)
    steps = np.asarray(sphere_distance(pts[:-1], pts[1:]))
    s_arc = np.concatenate([[0.0], np.cumsum(steps)])
    total = s_arc[-1]

    head = s_arc < head_zone
    tail = s_arc > total - head_zone
    mid = ~(head | tail)
    if np.any(mid):
        d = region.min_distance(pts[mid])
        if np.min(d) <= clearance:
            raise ConnectorValidation(
                f"mid-arc clearance {float(np.min(d)):.3e} <= {clearance:.3e}")
    for mask, junction in ((head, start), (tail, end)):
        if not np.any(mask):
            continue
        for hits in region.violations(pts[mask], clearance):
            if len(hits) and not excludable(hits, junction):
                raise ConnectorValidation("non-adjacent obstacle inside clearance "
                                          "near a junction")
    sp = np.linalg.norm(arc.velocity(ts), axis=-1)
    if np.min(sp) < 0.2:
        raise ConnectorValidation(f"immersion margin {float(np.min(sp)):.3e} too small")
    v0 = normalize(arc.velocity(arc.t0))
    v1 = normalize(arc.velocity(arc.t1))
    if (np.linalg.norm(pts[0] - start) > 1e-9 or np.linalg.norm(pts[-1] - end) > 1e-9):
        raise ConnectorValidation("endpoint mismatch")
    if total >= np.pi - 2.0 * clearance:
        dmin, _, _ = scans.min_far_pair_distance(pts, min_sep=8, cyclic=False,
                                                 mirror=True)
        if chord_to_angle(dmin) <= 0.3 * clearance:
            raise ConnectorValidation("connector approaches its own antipode")
    ok, _ = scans.certify_windows_sphere(pts, window=8, cyclic=False)
    if not ok:
        raise ConnectorValidation("connector windows not certifiable")
    return ts, pts, (v0, v1)


def plan_connector(start, end, start_dir, end_dir, region: ForbiddenRegion,
                   excludable=None, max_level=7):
    """Plan a smooth spherical arc from start to end through the free region.

    The arc leaves `start` along `start_dir` and arrives at `end` along
    `end_dir` (C^1 joins with the neighboring tangent arcs).  A direct
    blended route is tried first; otherwise A* on a subdivided icosahedron
    finds a coarse route which is shortcut and spline-smoothed.  Searching on
    S^2 itself (with the antipode-symmetric obstacle set) automatically picks
    the homotopy class whose lift connects start to end rather than start to
    -end.  Raises PlannerError when no route exists at this clearance.
    """
    start = normalize(start)
    end = normalize(end)
    start_dir = normalize(start_dir)
    end_dir = normalize(end_dir)
    if excludable is None:
        def excludable(hits, junction):
            return False
    clearance = region.clearance
    plan_clear = 1.6 * clearance

    target_edge = max(4.0 * clearance, 0.02)
    level = int(np.clip(np.ceil(np.log2(1.107 / target_edge)), 2, max_level))
    verts, indptr, indices, edge_len = icosphere_graph(level)
    geod = float(sphere_distance(start, end))
    launch = max(2.5 * clearance, 0.75 * edge_len)
    launch = min(launch, 0.25 * geod) if geod > 1e-9 else 0.02

    def march(point, direction, dist):
        # walk along the great circle through `point` with initial direction
        axis_u, axis_v = point, normalize(direction)
        return np.cos(dist) * axis_u + np.sin(dist) * axis_v

    head_pts = [march(start, start_dir, s) for s in (0.45 * launch, launch)]
    tail_pts = [march(end, -end_dir, s) for s in (launch, 0.45 * launch)]
    portal_a, portal_b = head_pts[-1], tail_pts[0]

    candidates = []
    mid_direct = _geodesic_samples(portal_a, portal_b, max(edge_len, 4 * clearance))
    candidates.append([start] + head_pts + list(mid_direct[1:-1]) + tail_pts + [end])

    node_d = region.min_distance(verts)
    valid = node_d > plan_clear + 0.6 * edge_len
    route = None
    if np.any(valid):
        vt = cKDTree(verts[valid])
        vid = np.where(valid)[0]
        _, ia = vt.query(portal_a, k=min(4, len(vid)))
        _, ib = vt.query(portal_b, k=min(4, len(vid)))
        for a in np.atleast_1d(ia):
            for b in np.atleast_1d(ib):
                route = _astar(verts, indptr, indices, valid,
                               int(vid[a]), int(vid[b]))
                if route is not None:
                    break
            if route is not None:
                break
    if route is not None:
        way = [verts[k] for k in route]
        # greedy geodesic shortcutting, validated against the full region
        out = [way[0]]
        i = 0
        while i < len(way) - 1:
            j = len(way) - 1
            while j > i + 1:
                seg = _geodesic_samples(way[i], way[j], clearance / 2.0)
                if float(np.min(region.min_distance(seg))) > 1.3 * clearance:
                    break
                j -= 1
            out.append(way[j])
            i = j
        dense = [out[0]]
        for a, b in zip(out[:-1], out[1:]):
            seg = _geodesic_samples(a, b, max(edge_len, 6 * clearance))
            dense.extend(list(seg[1:]))
        candidates.append([start] + head_pts + dense + tail_pts + [end])
        candidates.append([start] + head_pts + [verts[k] for k in route]
                          + tail_pts + [end])

    last_err = None
    for way in candidates:
        try:
            arc = _fit_clamped_arc(np.array(way), start_dir, end_dir)
            _validate_connector(arc, region, excludable, start, end)
            return arc
        except (ConnectorValidation, PlannerError) as exc:
            last_err = exc
    raise PlannerError(
        f"no admissible connector at clearance {clearance:.3e}: {last_err}; "
        "retry with a smaller epsilon budget"
    )


# ---------------------------------------------------------------------------
# whole-link assembly


@dataclass
class IndicatrixLoop:
    """Closed admissible loop for one component: alternating edge arcs and connectors."""

    arcs: tuple
    kinds: tuple
    piece_params: tuple
    report: AdmissibilityReport

    def __post_init__(self):
        self.arc = PiecewiseArc(pieces=self.arcs)

    @property
    def sample_params(self):
        parts = [self.piece_params[0]]
        for p in self.piece_params[1:]:
            parts.append(p[1:])
        ts = np.concatenate(parts)
        return ts[:-1]  # closed loop: final param coincides with start direction

    def sample_points(self):
        return self.arc.point(self.sample_params)


def assemble_indicatrix(tangent_arcs, epsilon, clearance=None, turn_step=None,
                        min_susp_samples=64, min_gap_samples=256, window=8):
    """Connect per-edge tangent arcs into closed admissible loops, one per component.

    tangent_arcs: list (per component) of CircleArc with local domains; the
    arcs must lie in mutually disjoint projective disks of radius epsilon
    around the edge directions.  Connectors are planned sequentially in edge
    order with the forbidden region accumulating, then every loop is
    re-checked by admissibility_check (with cross-loop gaps for links).
    """
    if clearance is None:
        clearance = 2.0 * epsilon
    if turn_step is None:
        turn_step = epsilon / 8.0

    centers = [[normalize(a.point(0.5 * (a.t0 + a.t1))) for a in comp]
               for comp in tangent_arcs]
    flat = [c for comp in centers for c in comp]
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            from .geom import proj_distance
            if float(proj_distance(flat[i], flat[j])) <= 2.0 * epsilon:
                raise PlannerError(
                    f"projective disks of edges {i} and {j} overlap "
                    f"(gap <= 2 epsilon = {2 * epsilon:.3e})")
    for comp, ctr in zip(tangent_arcs, centers):
        for a, c in zip(comp, ctr):
            ts = np.linspace(a.t0, a.t1, 33)
            from .geom import proj_distance
            if float(np.max(proj_distance(a.point(ts), c))) >= epsilon:
                raise PlannerError("edge tangent arc leaves its projective disk")

    region = ForbiddenRegion(clearance)
    susp_samples = {}
    for ci, comp in enumerate(tangent_arcs):
        for j, a in enumerate(comp):
            ts = params_by_turning(a, turn_step, min_samples=min_susp_samples)
            pts = a.point(ts)
            susp_samples[(ci, j)] = pts
            region.add(("susp", ci, j), pts)

    tag_arr = None

    def make_excludable(ci, j, n):
        allowed = {("susp", ci, j), ("susp", ci, (j + 1) % n),
                   ("conn", ci, (j - 1) % n), ("conn", ci, (j + 1) % n)}
        r_ex = 2.5 * clearance

        def excludable(hits, junction):
            pts = region.points[hits]
            near = np.asarray(sphere_distance(pts, junction))
            near = np.minimum(near, np.asarray(sphere_distance(-pts, junction)))
            for h, dn in zip(hits, near):
                if region.tags[h] not in allowed or dn >= r_ex:
                    return False
            return True

        return excludable

    loops = []
    for ci, comp in enumerate(tangent_arcs):
        n = len(comp)
        arcs, kinds, piece_params = [], [], []
        cur = 0.0
        for j, a in enumerate(comp):
            g = a.shifted(cur)
            arcs.append(g)
            kinds.append("susp")
            piece_params.append(params_by_turning(g, turn_step,
                                                  min_samples=min_susp_samples))
            cur = g.t1
            nxt = comp[(j + 1) % n]
            start = g.point(g.t1)
            end = nxt.point(nxt.t0)
            sdir = normalize(g.velocity(g.t1))
            edir = normalize(nxt.velocity(nxt.t0))
            conn = plan_connector(start, end, sdir, edir, region,
                                  excludable=make_excludable(ci, j, n))
            conn = conn.shifted(cur)
            arcs.append(conn)
            kinds.append("gap")
            ts = params_by_turning(conn, turn_step, min_samples=min_gap_samples)
            piece_params.append(ts)
            region.add(("conn", ci, j), conn.point(ts))
            cur = conn.t1
        loop = IndicatrixLoop(arcs=tuple(arcs), kinds=tuple(kinds),
                              piece_params=tuple(piece_params),
                              report=None)
        pts = loop.sample_points()
        report = admissibility_check(pts, window=window, margin=0.0, closed=True)
        if not report.ok:
            raise PlannerError(
                f"assembled loop {ci} failed admissibility: gap "
                f"{report.min_projective_self_gap:.3e}, windows "
                f"{report.local_injectivity_ok}")
        loop.report = report
        loops.append(loop)
    return loops, region
