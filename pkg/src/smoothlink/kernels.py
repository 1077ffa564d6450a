"""Smooth scalar gadgets, speed functions, and integration of direction fields.

The two kernels are the classic compactly supported bump and the normalized
smooth step; both are C-infinity with exactly flat tails, which is what lets
speed functions be *exactly* equal to a constant near interval endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import QuadratureError, SpeedPositivityError


def _h(s):
    # exp(-1/s) for s > 0, identically 0 for s <= 0; clamping avoids overflow
    # warnings while leaving values (< 1e-300) that already underflow to 0.
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 1e-12
    out[pos] = np.exp(-1.0 / s[pos])
    return out


@dataclass(frozen=True)
class Bump:
    """amplitude * exp(1 - 1/(1 - s^2)) with s = (x - center)/half_width.

    Symmetric about `center`, equal to `amplitude` there, and identically
    zero for |x - center| >= half_width.  The normalized kernel lies in
    [0, 1].
    """

    center: float
    half_width: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    def __call__(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.half_width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
        return self.amplitude * out

    def breakpoints(self):
        return (
            self.center - self.half_width,
            self.center,
            self.center + self.half_width,
        )

    def term_min(self):
        return min(0.0, self.amplitude)

    def value_at_boundary(self, x):
        """Constant value at x, or None if x sits in the varying zone."""
        if abs(x - self.center) >= self.half_width:
            return 0.0
        return None


@dataclass(frozen=True)
class Step:
    """amplitude * psi(x) where psi = 0 for x <= a, 1 for x >= b, smooth monotone.

    Realized as h(s)/(h(s) + h(1-s)) with h(s) = exp(-1/s), s = (x-a)/(b-a);
    the midpoint value is exactly 1/2 by symmetry of the construction.
    """

    a: float
    b: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("step requires a < b")

    def __call__(self, x):
        s = (np.asarray(x, dtype=float) - self.a) / (self.b - self.a)
        hs = _h(s)
        h1 = _h(1.0 - s)
        out = np.where(s >= 1.0, 1.0, np.where(s <= 0.0, 0.0, hs / (hs + h1)))
        return self.amplitude * out

    def breakpoints(self):
        return (self.a, self.b)

    def term_min(self):
        return min(0.0, self.amplitude)

    def value_at_boundary(self, x):
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return self.amplitude
        return None


@dataclass(frozen=True)
class SpeedFunction:
    """Positive scalar function on [t0, t1]: a base constant plus kernel terms."""

    t0: float
    t1: float
    base: float = 1.0
    terms: tuple = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.base, dtype=float)
        for term in self.terms:
            out = out + term(t)
        return out

    @property
    def domain(self):
        return (self.t0, self.t1)

    def with_terms(self, *extra):
        return replace(self, terms=self.terms + tuple(extra))

    def breakpoints(self):
        """Sorted structural parameters (term supports/transitions) inside the domain."""
        pts = [self.t0, self.t1]
        for term in self.terms:
            pts.extend(term.breakpoints())
        pts = np.array(sorted(pts))
        pts = pts[(pts >= self.t0) & (pts <= self.t1)]
        keep = np.concatenate([[True], np.diff(pts) > 1e-15 * max(1.0, abs(self.t1))])
        return pts[keep]

    def boundary_value(self, side="start"):
        """Constant value of f on a neighborhood of a domain endpoint.

        Computed structurally from term supports, never by sampling; raises
        if some term is still transitioning at the endpoint.
        """
        x = self.t0 if side == "start" else self.t1
        total = self.base
        for term in self.terms:
            v = term.value_at_boundary(x)
            if v is None:
                raise ValueError(f"term {term} is not constant at {side} of domain")
            total += v
        return total

    def positivity_margin(self, samples=4097):
        """Certified-or-sampled lower bound of f over the domain.

        The term-wise bound base + sum(min(0, amplitude)) is rigorous; when
        it is positive it is returned.  Otherwise the minimum over a dense
        grid refined with all structural breakpoints is used.
        """
        rigorous = self.base + sum(term.term_min() for term in self.terms)
        if rigorous > 0:
            return float(rigorous)
        grid = np.linspace(self.t0, self.t1, samples)
        grid = np.union1d(grid, self.breakpoints())
        return float(np.min(self(grid)))


def speed_positivity_certify(f: SpeedFunction, samples=4097):
    """Return a positive lower-bound margin for f, or raise SpeedPositivityError."""
    margin = f.positivity_margin(samples)
    if margin <= 0.0:
        raise SpeedPositivityError(f"speed function has nonpositive margin {margin:.3e}")
    return margin


@dataclass
class SampledCurve:
    """Densely sampled space curve with analytic unit tangents.

    Tangents are stored from the direction field itself (not differenced
    positions) so downstream tangent certificates operate on exact data.
    """

    params: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    closed: bool = False

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        self.tangents = np.asarray(self.tangents, dtype=float)
        if not (len(self.params) == len(self.points) == len(self.tangents)):
            raise ValueError("params/points/tangents length mismatch")
        if np.any(np.diff(self.params) <= 0):
            raise ValueError("params must be strictly increasing")

    def __len__(self):
        return len(self.params)

    def diameter(self):
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def displacement(self):
        return self.points[-1] - self.points[0]

    def seam_position_error(self):
        return float(np.linalg.norm(self.points[-1] - self.points[0]))

    def seam_tangent_error(self):
        return float(np.linalg.norm(self.tangents[-1] - self.tangents[0]))


_SIMPSON_CACHE = {}


def _simpson_coeffs(n):
    if n not in _SIMPSON_CACHE:
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        _SIMPSON_CACHE[n] = w / 3.0
    return _SIMPSON_CACHE[n]


def _simpson_batch(fn, a, b, n):
    """Composite Simpson with n panels on each interval [a_k, b_k]; returns (K, 3)."""
    frac = np.linspace(0.0, 1.0, n + 1)
    xs = a[:, None] + (b - a)[:, None] * frac[None, :]
    vals = fn(xs.reshape(-1)).reshape(len(a), n + 1, 3)
    w = _simpson_coeffs(n)
    h = ((b - a) / n)[:, None]
    return np.einsum("knc,n->kc", vals, w) * h


def piecewise_vector_integrals(fn, grid, tol=None, max_depth=14):
    """Integrals of a vector-valued fn over each consecutive grid interval.

    Each interval is integrated by composite Simpson, doubling its panel
    count until the Richardson estimate |S_2n - S_n|/15 falls below its
    share of `tol` (plus a relative guard).  tol=None disables refinement
    and returns the plain 2-panel Simpson values, which is what the
    fixed-grid convergence-order tests exercise.
    """
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 2:
        return np.zeros((0, 3))
    a, b = grid[:-1], grid[1:]
    K = len(a)
    if tol is None:
        return _simpson_batch(fn, a, b, 2)
    tol_i = tol / K
    out = np.zeros((K, 3))
    pending = np.arange(K)
    prev = _simpson_batch(fn, a, b, 2)
    n = 4
    for _ in range(max_depth):
        cur = _simpson_batch(fn, a[pending], b[pending], n)
        err = np.linalg.norm(cur - prev, axis=1) / 15.0
        guard = np.maximum(tol_i, 1e-14 * np.linalg.norm(cur, axis=1))
        done = err <= guard
        out[pending[done]] = cur[done]
        pending = pending[~done]
        if len(pending) == 0:
            return out
        prev = cur[~done]
        n *= 2
    raise QuadratureError(
        f"{len(pending)} interval(s) failed to converge below {tol_i:.3e} "
        f"(worst estimate {float(np.max(np.linalg.norm(prev, axis=1))) / 15.0:.3e})"
    )


def integrate_vector(fn, a, b, tol=1e-12, splits=32):
    """Definite integral of vector-valued fn over [a, b]."""
    grid = np.linspace(a, b, splits + 1)
    return piecewise_vector_integrals(fn, grid, tol=tol).sum(axis=0)


def integrate_curve(f, alpha, t0=None, v0=(0.0, 0.0, 0.0), params=None,
                    min_intervals=4096, tol=None, refine=True):
    """Integral curve of the direction field alpha at speed f.

    Returns samples of  beta(t) = v0 + int_{t0}^{t} f(s) alpha(s) ds  on the
    given parameter grid (default: a uniform grid of `min_intervals`
    intervals refined with f's structural breakpoints).  beta(t0) = v0
    exactly, and the stored tangent at each sample is alpha(t) itself.

    alpha may be a SphericalArc-like object (with .point) or a plain
    callable returning direction vectors of shape (N, 3).  refine=False runs
    plain composite Simpson on the grid with no adaptive subdivision.
    """
    point = alpha.point if hasattr(alpha, "point") else alpha
    lo, hi = f.t0, f.t1
    if t0 is None:
        t0 = lo
    if not lo <= t0 <= hi:
        raise ValueError("t0 outside the speed function's domain")
    if params is None:
        params = np.linspace(lo, hi, min_intervals + 1)
        params = np.union1d(params, f.breakpoints())
    else:
        params = np.asarray(params, dtype=float)
    params = np.union1d(params, [t0])
    if tol is None:
        tol = 1e-11 * max(1.0, float(np.linalg.norm(np.asarray(v0, dtype=float)))) \
            * max(1.0, hi - lo)

    def integrand(t):
        d = np.asarray(point(t), dtype=float)
        ft = f(t)
        if np.any(ft <= 0.0):
            raise SpeedPositivityError("speed function nonpositive on integration grid")
        return d * ft[:, None]

    pieces = piecewise_vector_integrals(integrand, params, tol=tol if refine else None)
    cum = np.vstack([np.zeros(3), np.cumsum(pieces, axis=0)])
    k0 = int(np.searchsorted(params, t0))
    beta = np.asarray(v0, dtype=float) + (cum - cum[k0])
    tangents = np.asarray(point(params), dtype=float)
    return SampledCurve(params=params, points=beta, tangents=tangents)
