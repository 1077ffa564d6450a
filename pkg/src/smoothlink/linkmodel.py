"""Polygonal links, their metric budgets, and the preconditioning stages.

A link is a tuple of vertex cycles.  Before smoothing, the pipeline brings
it into general position (distinct projective edge directions), rescales so
every edge has length >= 3, and chamfers corners until adjacent edge
directions subtend less than a right angle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GeneralPositionError, InvalidLinkError
from .geom import normalize, proj_distance, sphere_distance


def _dot(u, v):
    return np.sum(u * v, axis=-1)


def segment_segment_distance(p1, q1, p2, q2):
    """Distance between segments [p1, q1] and [p2, q2] (vectorized, Ericson's clamp)."""
    p1, q1 = np.asarray(p1, float), np.asarray(q1, float)
    p2, q2 = np.asarray(p2, float), np.asarray(q2, float)
    d1, d2, r = q1 - p1, q2 - p2, p1 - p2
    a, e = _dot(d1, d1), _dot(d2, d2)
    f, c, b = _dot(d2, r), _dot(d1, r), _dot(d1, d2)
    denom = a * e - b * b
    safe_denom = np.where(denom > 1e-30, denom, 1.0)
    s = np.where(denom > 1e-30, np.clip((b * f - c * e) / safe_denom, 0.0, 1.0), 0.0)
    t = (b * s + f) / np.where(e > 1e-30, e, 1.0)
    t_cl = np.clip(t, 0.0, 1.0)
    s2 = np.clip((b * t_cl - c) / np.where(a > 1e-30, a, 1.0), 0.0, 1.0)
    s = np.where(t == t_cl, s, s2)
    c1 = p1 + s[..., None] * d1
    c2 = p2 + t_cl[..., None] * d2
    return np.linalg.norm(c1 - c2, axis=-1)


@dataclass(frozen=True)
class PolygonalLink:
    """Ordered vertex cycles (>= 4 vertices each); orientation given by order."""

    components: tuple
    name: str = ""

    def __post_init__(self):
        comps = tuple(np.array(c, dtype=float) for c in self.components)
        object.__setattr__(self, "components", comps)
        for k, c in enumerate(comps):
            if c.ndim != 2 or c.shape[1] != 3:
                raise InvalidLinkError(f"component {k}: expected (n, 3) vertex array")
            if len(c) < 4:
                raise InvalidLinkError(f"component {k}: n >= 4 vertices required")
            if not np.all(np.isfinite(c)):
                raise InvalidLinkError(f"component {k}: non-finite vertex")
            nxt = np.roll(c, -1, axis=0)
            if np.any(np.linalg.norm(nxt - c, axis=1) == 0.0):
                raise InvalidLinkError(f"component {k}: consecutive vertices coincide")
            d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1)
            np.fill_diagonal(d, np.inf)
            if np.min(d) == 0.0:
                raise InvalidLinkError(f"component {k}: repeated vertex in cycle")

    @property
    def n_components(self):
        return len(self.components)

    @property
    def n_edges(self):
        return sum(len(c) for c in self.components)

    def edge_arrays(self):
        """(starts, ends, comp_index, index_in_comp) over all edges, in order."""
        starts, ends, comp, idx = [], [], [], []
        for k, c in enumerate(self.components):
            starts.append(c)
            ends.append(np.roll(c, -1, axis=0))
            comp.append(np.full(len(c), k))
            idx.append(np.arange(len(c)))
        return (np.vstack(starts), np.vstack(ends),
                np.concatenate(comp), np.concatenate(idx))

    def edge_directions(self):
        starts, ends, comp, idx = self.edge_arrays()
        return normalize(ends - starts), comp, idx

    def edge_lengths(self):
        starts, ends, _, _ = self.edge_arrays()
        return np.linalg.norm(ends - starts, axis=1)

    def min_edge_length(self):
        return float(np.min(self.edge_lengths()))

    def diameter(self):
        v = np.vstack(self.components)
        return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))

    def scaled(self, factor):
        return replace(self, components=tuple(c * factor for c in self.components))


def min_nonadjacent_distance(link: PolygonalLink):
    """Minimum distance over nonadjacent same-component and all cross-component edge pairs.

    Positive exactly when the link is embedded; nonpositive input is rejected
    by callers.
    """
    starts, ends, comp, idx = link.edge_arrays()
    m = len(starts)
    i, j = np.triu_indices(m, k=1)
    same = comp[i] == comp[j]
    n_of = np.array([len(c) for c in link.components])
    ni = n_of[comp[i]]
    gap = np.abs(idx[i] - idx[j])
    adjacent = same & ((gap <= 1) | (gap >= ni - 1))
    keep = ~adjacent
    if not np.any(keep):
        raise InvalidLinkError("link has no nonadjacent edge pairs")
    d = segment_segment_distance(starts[i[keep]], ends[i[keep]],
                                 starts[j[keep]], ends[j[keep]])
    return float(np.min(d))


@dataclass(frozen=True)
class GeneralPositionReport:
    ok: bool
    min_projective_edge_gap: float
    offending_pairs: tuple
    min_triple_sigma: float
    offending_triples: tuple
    threshold: float
    sigma_floor: float


def general_position_check(link: PolygonalLink, threshold, sigma_floor=1e-4):
    """Check distinct projective edge directions and well-conditioned consecutive triples.

    ok requires every pair of edge directions (across the whole link) to have
    projective gap > threshold and every cyclically consecutive direction
    triple within a component to have smallest singular value > sigma_floor.
    """
    dirs, comp, idx = link.edge_directions()
    m = len(dirs)
    i, j = np.triu_indices(m, k=1)
    gaps = proj_distance(dirs[i], dirs[j])
    min_gap = float(np.min(gaps)) if len(gaps) else np.inf
    bad = gaps <= threshold
    pairs = tuple((int(a), int(b)) for a, b in zip(i[bad], j[bad]))

    min_sigma = np.inf
    bad_triples = []
    offset = 0
    for c in link.components:
        n = len(c)
        local = dirs[offset:offset + n]
        for k in range(n):
            M = np.column_stack([local[k], local[(k + 1) % n], local[(k + 2) % n]])
            s = np.linalg.svd(M, compute_uv=False)[-1]
            if s < min_sigma:
                min_sigma = float(s)
            if s <= sigma_floor:
                bad_triples.append((offset + k, offset + (k + 1) % n,
                                    offset + (k + 2) % n))
        offset += n
    ok = (min_gap > threshold) and (min_sigma > sigma_floor)
    return GeneralPositionReport(ok, min_gap, pairs, min_sigma, tuple(bad_triples),
                                 float(threshold), float(sigma_floor))


def perturb_to_general_position(link: PolygonalLink, magnitude, seed=0,
                                threshold=1e-3, sigma_floor=1e-4, max_tries=32):
    """Deterministic seeded jitter until general_position_check passes.

    Zero jitter is attempted first so already-generic input is returned
    unchanged.  Every vertex moves strictly less than `magnitude`, which the
    caller keeps below half the tube radius so the isotopy class survives.
    """
    d = min_nonadjacent_distance(link)
    if d <= 0:
        raise InvalidLinkError("link is not embedded (nonadjacent edges touch)")
    r = 0.9 * d / 4.0
    if not magnitude < r / 2.0:
        raise InvalidLinkError(f"perturbation magnitude {magnitude} must be < r/2 = {r / 2}")
    if general_position_check(link, threshold, sigma_floor).ok:
        return link
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        comps = []
        for c in link.components:
            raw = rng.uniform(-1.0, 1.0, size=c.shape)
            comps.append(c + raw * (0.9 * magnitude / np.sqrt(3.0)))
        cand = replace(link, components=tuple(comps))
        if (min_nonadjacent_distance(cand) > 0
                and general_position_check(cand, threshold, sigma_floor).ok):
            return cand
    raise GeneralPositionError(
        f"no generic perturbation found after {max_tries} tries "
        f"(threshold {threshold}, magnitude {magnitude})"
    )


def rescale_min_edge(link: PolygonalLink, target=3.0):
    """Uniformly scale about the origin so the shortest edge has length >= target."""
    m = link.min_edge_length()
    factor = target / m if m < target else 1.0
    return link.scaled(factor), factor


def corner_angles(link: PolygonalLink):
    """Turning angle at each vertex: angle between incoming and outgoing directions."""
    out = []
    for c in link.components:
        dirs = normalize(np.roll(c, -1, axis=0) - c)
        prev = np.roll(dirs, 1, axis=0)
        out.append(np.asarray(sphere_distance(prev, dirs)))
    return out


def chamfer_corners(link: PolygonalLink, max_angle=np.pi / 2):
    """Cut every corner whose adjacent edge directions subtend >= max_angle.

    The corner vertex is replaced by two vertices offset along the adjacent
    edges; the inserted edge runs along the normalized bisector of the two
    directions, halving the turning angle.  Offsets stay below 0.3 of either
    adjacent edge and below half the tube radius, so every inserted vertex
    remains within the tube of the input link.
    """
    d = min_nonadjacent_distance(link)
    r = 0.9 * d / 4.0
    comps = []
    for c in link.components:
        nxt = np.roll(c, -1, axis=0)
        dirs = normalize(nxt - c)
        lens = np.linalg.norm(nxt - c, axis=1)
        prev_dirs = np.roll(dirs, 1, axis=0)
        prev_lens = np.roll(lens, 1)
        angles = np.asarray(sphere_distance(prev_dirs, dirs))
        new_pts = []
        for k in range(len(c)):
            if angles[k] >= max_angle:
                off = min(0.3 * min(prev_lens[k], lens[k]), 0.5 * r)
                new_pts.append(c[k] - off * prev_dirs[k])
                new_pts.append(c[k] + off * dirs[k])
            else:
                new_pts.append(c[k])
        comps.append(np.array(new_pts))
    out = replace(link, components=tuple(comps))
    for a in corner_angles(out):
        if np.any(a >= max_angle):
            raise InvalidLinkError("chamfering failed to reduce all corner angles")
    return out


@dataclass(frozen=True)
class Budgets:
    """Metric budgets driving every downstream tolerance.

    min_separation is the minimum distance between nonadjacent edges (the
    paper-level d and m coincide and are kept as one field); tube_radius
    carries a 0.9 safety factor below a quarter of it, and epsilon carries a
    0.5 safety factor inside its structural bound, capped below pi/8 so the
    gap-arc synthesis hypotheses always hold.
    """

    min_separation: float
    tube_radius: float
    epsilon: float
    n_edges: int
    closure_radius: float = None

    def __post_init__(self):
        d, r, e, n = (self.min_separation, self.tube_radius,
                      self.epsilon, self.n_edges)
        if d <= 0:
            raise InvalidLinkError("nonpositive edge separation")
        if not r < d / 4.0:
            raise ValueError("tube radius must stay below d/4")
        if not (e < min(1.0, d / (10.0 * n), r / (10.0 * n)) and e <= d / 3.0):
            raise ValueError("epsilon outside its structural bound")
        if not e < np.pi / 8:
            raise ValueError("epsilon must stay below pi/8")
        if self.closure_radius is not None and not self.closure_radius < e:
            raise ValueError("closure radius must stay below epsilon")

    def with_closure(self, delta):
        return replace(self, closure_radius=float(delta))


def compute_budgets(link: PolygonalLink, epsilon_scale=1.0, epsilon_cap=0.3):
    """Derive Budgets from a preconditioned link.

    r = 0.9 * d/4 and epsilon = epsilon_scale * 0.5 * min(1, d/10n, r/10n),
    additionally capped at `epsilon_cap` (< pi/8).  The closure radius is
    filled in by the assembler once a basis triple is chosen.
    """
    d = min_nonadjacent_distance(link)
    if d <= 0:
        raise InvalidLinkError("link is not embedded")
    n = link.n_edges
    r = 0.9 * d / 4.0
    if not 0 < epsilon_scale <= 1.0:
        raise ValueError("epsilon_scale must lie in (0, 1]")
    eps = epsilon_scale * 0.5 * min(1.0, d / (10.0 * n), r / (10.0 * n))
    eps = min(eps, epsilon_cap)
    return Budgets(min_separation=d, tube_radius=r, epsilon=eps, n_edges=n)
