"""Pairwise proximity scans and near-diagonal window certification.

The far-pair minimum scans use a KD-tree with a growing query radius: all
pairs within radius r are enumerated, pairs closer than `min_sep` samples
along the curve are discarded, and the minimum of the survivors is exact as
soon as any survivor lies within r.  A quadratic brute-force twin of each
scan is kept for use as a test oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .geom import chord_to_angle


def cyclic_separation(i, j, n):
    d = np.abs(i - j)
    return np.minimum(d, n - d)


def min_far_pair_distance(points, min_sep=8, cyclic=True, mirror=False,
                          max_pairs=50_000_000):
    """Minimum Euclidean distance over sample pairs at least min_sep indices apart.

    mirror=True also pairs each point with the negated copies of the others
    (chordal projective distance on the sphere).  Returns (dmin, i, j) with
    i, j base indices; dmin is inf when no qualifying pair exists.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        return np.inf, -1, -1
    P = np.vstack([pts, -pts]) if mirror else pts
    tree = cKDTree(P)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    pos = steps[steps > 0]
    r = float(np.min(pos)) * min_sep if len(pos) else 1e-12
    r = max(r, 1e-300)
    diam = float(np.linalg.norm(P.max(axis=0) - P.min(axis=0))) + r
    while True:
        pairs = tree.query_pairs(r, output_type="ndarray")
        if len(pairs) > max_pairs:
            raise MemoryError("pair scan radius produced too many candidate pairs")
        if len(pairs):
            i = pairs[:, 0] % n
            j = pairs[:, 1] % n
            sep = cyclic_separation(i, j, n) if cyclic else np.abs(i - j)
            keep = sep >= min_sep
            if np.any(keep):
                d = np.linalg.norm(P[pairs[keep, 0]] - P[pairs[keep, 1]], axis=1)
                k = int(np.argmin(d))
                return float(d[k]), int(i[keep][k]), int(j[keep][k])
        if r > 2.0 * diam:
            return np.inf, -1, -1
        r *= 8.0


def min_far_pair_distance_bruteforce(points, min_sep=8, cyclic=True, mirror=False):
    """O(N^2) twin of min_far_pair_distance (test oracle)."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    i, j = np.triu_indices(n, k=1)
    sep = cyclic_separation(i, j, n) if cyclic else j - i
    keep = sep >= min_sep
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return np.inf, -1, -1
    d = np.linalg.norm(pts[i] - pts[j], axis=1)
    if mirror:
        d = np.minimum(d, np.linalg.norm(pts[i] + pts[j], axis=1))
    k = int(np.argmin(d))
    return float(d[k]), int(i[k]), int(j[k])


def min_projective_far_gap(points, min_sep=8, cyclic=True):
    """Minimum projective distance (radians) over far sample pairs of a sphere curve."""
    d, i, j = min_far_pair_distance(points, min_sep=min_sep, cyclic=cyclic, mirror=True)
    if not np.isfinite(d):
        return np.inf, -1, -1
    return float(chord_to_angle(d)), i, j


def cross_min_distance(a, b):
    """Minimum Euclidean distance between two sample sets."""
    tree = cKDTree(np.asarray(b, dtype=float))
    d, _ = tree.query(np.asarray(a, dtype=float), k=1)
    return float(np.min(d))


def cross_min_projective_gap(a, b):
    """Minimum projective distance between two unit-vector sample sets."""
    bb = np.asarray(b, dtype=float)
    d = cross_min_distance(a, np.vstack([bb, -bb]))
    return float(chord_to_angle(d))


def window_matrix(n, window, cyclic):
    """Index matrix of sliding windows of window+1 consecutive samples."""
    w = window
    if cyclic:
        starts = np.arange(n)
        return (starts[:, None] + np.arange(w + 1)[None, :]) % n
    starts = np.arange(max(1, n - w))
    return starts[:, None] + np.arange(min(w, n - 1) + 1)[None, :]


def certify_windows_sphere(points, window=8, cyclic=True):
    """Local-injectivity / no-antipodal certification of near-diagonal windows.

    Every window of `window` consecutive steps must (a) have spherical
    diameter < pi/2 (so it cannot contain an antipodal pair) and (b) have
    all its steps strictly advancing along the window's chord direction
    (so the restriction is injective).  Returns (ok, detail dict).
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n <= window:
        return False, {"reason": "fewer samples than window", "hint": window + 1}
    W = window_matrix(n, window, cyclic)
    worst_diam = 0.0
    min_adv = np.inf
    for lo in range(0, len(W), 65536):
        w_pts = pts[W[lo:lo + 65536]]
        dots = np.einsum("nwc,nvc->nwv", w_pts, w_pts)
        min_dot = dots.min(axis=(1, 2))
        worst_diam = max(worst_diam, float(np.arccos(np.clip(min_dot, -1, 1)).max()))
        if worst_diam >= np.pi / 2:
            return False, {
                "reason": "window spherical diameter reached pi/2",
                "worst_diameter": worst_diam,
                "hint": int(np.ceil(n * worst_diam / (np.pi / 4))),
            }
        chord = w_pts[:, -1, :] - w_pts[:, 0, :]
        cn = np.linalg.norm(chord, axis=1)
        if np.any(cn <= 0):
            return False, {"reason": "stationary window chord", "hint": 2 * n}
        chord = chord / cn[:, None]
        steps = np.diff(w_pts, axis=1)
        adv = np.einsum("nwc,nc->nw", steps, chord)
        min_adv = min(min_adv, float(adv.min()))
        if min_adv <= 0:
            return False, {
                "reason": "window not monotone along its chord",
                "worst_advance": min_adv,
                "hint": 2 * n,
            }
    return True, {"worst_diameter": worst_diam, "min_advance": min_adv}
