"""Command-line front end: build / verify / fixtures / indicatrix.

Exit codes: 0 success (certificate passes), 2 input or stage error,
3 certificate failure, 4 cannot certify at this sampling density.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import linkio, verify
from .assemble import BuildOptions, build_smooth_link
from .errors import CannotCertifyError, SchemaError, SmoothLinkError, StageError


def _fail(code, msg):
    print(msg, file=sys.stderr)
    return code


def cmd_build(args):
    try:
        link = linkio.read_link(args.input)
    except SchemaError as exc:
        return _fail(2, f"[input] {exc}")
    opts = BuildOptions(seed=args.seed, epsilon_scale=args.epsilon_scale,
                        samples_per_suspension=max(8, args.samples_per_arc // 4),
                        samples_per_gap=args.samples_per_arc)
    try:
        build = build_smooth_link(link, opts)
        cert = verify.certify_build(build)
    except StageError as exc:
        return _fail(2, str(exc))
    except CannotCertifyError as exc:
        return _fail(4, f"[certify] {exc}")
    except SmoothLinkError as exc:
        return _fail(2, f"[build] {exc}")
    linkio.write_curves(build.output_curves(), args.output, name=link.name)
    if args.certificate:
        linkio.write_certificate(cert, args.certificate)
    print(json.dumps({"passed": cert.passed,
                      "projective_tangent_margin": cert.projective_tangent_margin,
                      "self_distance": cert.self_distance,
                      "tube_max_deviation": cert.tube_max_deviation,
                      "closure_residuals": cert.closure_residuals}))
    return 0 if cert.passed else 3


def cmd_verify(args):
    try:
        curves, _name = linkio.read_curves(args.input)
        link = linkio.read_link(args.link) if args.link else None
    except SchemaError as exc:
        return _fail(2, f"[input] {exc}")
    try:
        cert = verify.certify_curves(curves, link=link, window=args.window,
                                     margin_threshold=args.margin)
    except CannotCertifyError as exc:
        print(f"[cannot-certify] {exc}", file=sys.stderr)
        return 4
    print(linkio.write_certificate(cert))
    if not cert.window_certified:
        return 4
    return 0 if cert.passed else 3


def cmd_fixtures(args):
    try:
        link = linkio.fixture_link(args.name)
    except SchemaError as exc:
        return _fail(2, str(exc))
    linkio.write_link(link, args.output)
    return 0


def cmd_indicatrix(args):
    try:
        curves, name = linkio.read_curves(args.input)
    except SchemaError as exc:
        return _fail(2, f"[input] {exc}")
    margin, window_ok, detail = verify.verify_tangents(curves, window=args.window)
    doc = {
        "name": name,
        "components": [
            {"params": [float(x) for x in c.params],
             "tangents": [list(map(float, t)) for t in c.tangents]}
            for c in curves
        ],
        "summary": {
            "min_projective_gap": float(margin),
            "window_certified": bool(window_ok),
            "per_component": [
                {"far_gap": d["far_gap"], "worst_pair": list(d["worst_pair"])}
                for d in detail["per_component"]
            ],
            "cross": detail["cross"],
        },
    }
    with open(args.output, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    print(json.dumps(doc["summary"]["per_component"]))
    return 0


def make_parser():
    ap = argparse.ArgumentParser(
        prog="smoothlink",
        description="Smooth polygonal links into certified curves with no "
                    "parallel or antiparallel tangents.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="smooth a link file and emit curve + certificate")
    b.add_argument("input")
    b.add_argument("output")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--epsilon-scale", type=float, default=1.0)
    b.add_argument("--samples-per-arc", type=int, default=256)
    b.add_argument("--certificate", default=None)
    b.set_defaults(fn=cmd_build)

    v = sub.add_parser("verify", help="certify an existing curve file")
    v.add_argument("input")
    v.add_argument("--link", default=None)
    v.add_argument("--window", type=int, default=verify.DEFAULT_WINDOW)
    v.add_argument("--margin", type=float, default=verify.DEFAULT_MARGIN_THRESHOLD)
    v.set_defaults(fn=cmd_verify)

    f = sub.add_parser("fixtures", help="write a canonical fixture link file")
    f.add_argument("name")
    f.add_argument("output")
    f.set_defaults(fn=cmd_fixtures)

    i = sub.add_parser("indicatrix", help="export tangent loops and gap summary")
    i.add_argument("input")
    i.add_argument("output")
    i.add_argument("--window", type=int, default=verify.DEFAULT_WINDOW)
    i.set_defaults(fn=cmd_indicatrix)
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
