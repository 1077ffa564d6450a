"""JSON schemas for links/curves/certificates, lossy exports, and fixtures.

Floats are serialized with repr (shortest round-trip, up to 17 significant
digits) so read(write(x)) is exact; writers are fully deterministic, with no
timestamps or environment-dependent content.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import SchemaError
from .kernels import SampledCurve
from .linkmodel import PolygonalLink


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{what}: non-finite value")


def write_link(link: PolygonalLink, path):
    doc = {
        "name": link.name,
        "components": [[list(map(float, v)) for v in comp]
                       for comp in link.components],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_link(path):
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "components" not in doc:
        raise SchemaError("link file: missing 'components'")
    comps = doc["components"]
    if not isinstance(comps, list) or not comps:
        raise SchemaError("link file: 'components' must be a nonempty list")
    arrays = []
    for k, comp in enumerate(comps):
        arr = np.asarray(comp, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise SchemaError(f"link file: component {k} is not a list of xyz triples")
        if len(arr) < 4:
            raise SchemaError(f"link file: component {k} has fewer than 4 vertices")
        _check_finite(arr, f"component {k}")
        arrays.append(arr)
    from .errors import InvalidLinkError
    try:
        return PolygonalLink(components=tuple(arrays),
                             name=str(doc.get("name", "")))
    except InvalidLinkError as exc:
        raise SchemaError(str(exc)) from exc


def write_curves(curves, path, name=""):
    doc = {
        "name": name,
        "components": [
            {
                "params": [float(x) for x in c.params],
                "points": [list(map(float, p)) for p in c.points],
                "tangents": [list(map(float, t)) for t in c.tangents],
                "closed": bool(c.closed),
            }
            for c in curves
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_curves(path):
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "components" not in doc:
        raise SchemaError("curve file: missing 'components'")
    out = []
    for k, comp in enumerate(doc["components"]):
        try:
            params = np.asarray(comp["params"], dtype=float)
            points = np.asarray(comp["points"], dtype=float)
            tangents = np.asarray(comp["tangents"], dtype=float)
            closed = bool(comp["closed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"curve file: component {k}: {exc}") from exc
        if len(params) == 0:
            raise SchemaError(f"curve file: component {k} is empty")
        if not (len(params) == len(points) == len(tangents)):
            raise SchemaError(f"curve file: component {k}: array length mismatch")
        if points.ndim != 2 or points.shape[1] != 3 or tangents.shape != points.shape:
            raise SchemaError(f"curve file: component {k}: bad array shapes")
        for arr, what in ((params, "params"), (points, "points"),
                          (tangents, "tangents")):
            _check_finite(arr, f"component {k} {what}")
        tn = np.linalg.norm(tangents, axis=1)
        if np.any(np.abs(tn - 1.0) > 1e-9):
            raise SchemaError(f"curve file: component {k}: tangents not unit")
        try:
            out.append(SampledCurve(params=params, points=points,
                                    tangents=tangents, closed=closed))
        except ValueError as exc:
            raise SchemaError(f"curve file: component {k}: {exc}") from exc
    if not out:
        raise SchemaError("curve file: no components")
    return out, doc.get("name", "")


def write_certificate(cert, path=None):
    text = json.dumps(cert.to_dict(), indent=1, sort_keys=True, default=_json_default)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
            fh.write("\n")
    return text


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_csv(curves, path):
    """Lossy CSV export: component,param,x,y,z,tx,ty,tz per row."""
    with open(path, "w") as fh:
        fh.write("component,param,x,y,z,tx,ty,tz\n")
        for k, c in enumerate(curves):
            for t, p, tg in zip(c.params, c.points, c.tangents):
                fh.write(f"{k},{t!r},{p[0]!r},{p[1]!r},{p[2]!r},"
                         f"{tg[0]!r},{tg[1]!r},{tg[2]!r}\n")


def write_obj(curves, path):
    """OBJ polyline export (positions only, closed line loops)."""
    with open(path, "w") as fh:
        base = 1
        for c in curves:
            for p in c.points:
                fh.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
            n = len(c.points)
            idx = list(range(base, base + n))
            if c.closed:
                idx.append(base)
            fh.write("l " + " ".join(map(str, idx)) + "\n")
            base += n


# ---------------------------------------------------------------------------
# fixtures


def _polygon_from_parametric(fn, n):
    ts = 2.0 * np.pi * np.arange(n) / n
    return np.array([fn(t) for t in ts])


def fixture_link(name):
    """Canonical polygonal fixtures: trefoil, figure8, hopf, square.

    The square is planar and intentionally fails general position (opposite
    edges are antiparallel); the build pipeline must first perturb it.
    """
    if name == "trefoil":
        comp = _polygon_from_parametric(
            lambda t: np.array([(2 + np.cos(3 * t)) * np.cos(2 * t),
                                (2 + np.cos(3 * t)) * np.sin(2 * t),
                                np.sin(3 * t)]), 12)
        return PolygonalLink(components=(comp,), name="trefoil")
    if name == "figure8":
        comp = _polygon_from_parametric(
            lambda t: np.array([(2 + np.cos(2 * t)) * np.cos(3 * t),
                                (2 + np.cos(2 * t)) * np.sin(3 * t),
                                np.sin(4 * t)]), 16)
        return PolygonalLink(components=(comp,), name="figure8")
    if name == "hopf":
        a = _polygon_from_parametric(
            lambda t: np.array([np.cos(t), np.sin(t), 0.0]), 6)
        b = _polygon_from_parametric(
            lambda t: np.array([1.0 + np.cos(t), 0.0, np.sin(t)]), 6)
        return PolygonalLink(components=(a, b), name="hopf")
    if name == "square":
        comp = np.array([[0.0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
        return PolygonalLink(components=(comp,), name="square")
    raise SchemaError(f"unknown fixture '{name}' "
                      "(expected trefoil|figure8|hopf|square)")


FIXTURE_NAMES = ("trefoil", "figure8", "hopf", "square")


def generic_4gon():
    """The non-planar 4-gon used throughout the tests (generic directions)."""
    comp = np.array([[0.0, 0, 0], [1, 0, 0], [1, 1, 1], [0, 1, 0]])
    return PolygonalLink(components=(comp,), name="gen4")
