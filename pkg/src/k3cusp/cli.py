"""Command line front end."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import census, curvestruct as csm, lattice, model


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return csm.loads(fh.read())


def cmd_verify(args, out):
    rep = census.count_cuspidal_cones()
    mx, split, orbs = census.maximal_cone_census(rep)
    print(census.census_table(rep), file=out)
    checks = [("total", rep.total, 93), ("class P", rep.class_P_total, 81), ("class T", rep.class_T_total, 12),
              ("maximal cones", mx, 31), ("maximal split", split, (27, 4)), ("orbits", orbs, (14, 3))]
    for name, got, want in checks:
        if got != want:
            print(f"FAILED {name}: {got} != {want}", file=out)
            return 1
    return 0


def cmd_census(args, out):
    text = census.export_fan_skeleton(args.json)
    if args.json is None:
        out.write(text)
    else:
        print(f"wrote {args.json}", file=out)
    return 0


def _structure_line(cs, smooth=None):
    tag = csm.classify(cs, smooth)
    return f"{tag.verdict}, type {cs.d_type}, |Γ| = {cs.size()}"


def cmd_classify(args, out):
    d = _read(args.file)
    if "components" in d:
        m = model.model_from_dict(d)
        rep = model.validate_model(m)
        if not rep:
            print(f"invalid model: {rep.invariant} ({rep.detail or rep.witness})", file=out)
            return 1
        flags = m.smooth_map()
        for k, c in enumerate(m.components):
            if model.is_explicit(c):
                sm = {b: flags[(k, b)] for b in c.boundary_ids()}
                print(f"component {k}: {_structure_line(c, sm)}", file=out)
            else:
                print(f"component {k}: summary, type {c.d_type}, |Γ| = {c.size()}", file=out)
        s, c = model.admits_cusp_model(m)
        print("no cusp model" if s is None else f"cusp model: survivor {s}, cones {c}", file=out)
        return 0
    cs = csm.from_dict(d)
    rep = csm.validate_curve_structure(cs)
    if not rep:
        print(f"invalid structure: {rep.invariant} ({rep.detail or rep.witness})", file=out)
        return 1
    smooth = d.get("smooth")
    print(_structure_line(cs, smooth), file=out)
    return 0


def cmd_flop(args, out):
    d = _read(args.file)
    m = model.model_from_dict(d)
    k = args.component
    if not 0 <= k < len(m.components):
        raise csm.SchemaError(f"$.components: no component {k}")
    c = m.components[k]
    if not model.is_explicit(c) or args.vertex not in c.vertex_ids():
        raise csm.SchemaError(f"$.components[{k}].structure.vertices: no vertex {args.vertex!r}")
    new = model.flop_type_I(m, k, args.vertex)
    text = model.model_to_json(new) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_lattice(args, out):
    L = lattice.build_lattice(args.spec)
    print(f"{L.name}: rank {L.rank}, determinant {L.determinant}, signature {lattice.signature(L)}", file=out)
    if args.roots_height is not None:
        if args.ref:
            h = tuple(Fraction(x) for x in args.ref.split(","))
        else:
            h = tuple([0] * L.rank)
        roots = lattice.roots_up_to_height(L, h, args.roots_height)
        print(f"roots up to height {args.roots_height}: {len(roots)}", file=out)
        for r in roots:
            print("  " + " ".join(str(x) for x in r) + f"   height {lattice.pairing(L, r, h)}", file=out)
    return 0


def cmd_falsify(args, out):
    fs = census.flop_search(args.depth)
    print(f"depth {fs.depth}: {fs.reached} new models reached, {len(fs.candidates)} candidates", file=out)
    for path, m in fs.candidates:
        sq = [[(b, c.sq(b)) for b in c.boundary_ids()] for c in m.components]
        print("candidate: " + " -> ".join(path) + f"  sizes {m.sizes()}  boundary {sq}", file=out)
    return 1 if fs.candidates else 0


def build_parser():
    p = argparse.ArgumentParser(prog="k3cusp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", help="run the census and check the totals")
    c = sub.add_parser("census", help="export the fan skeleton")
    c.add_argument("--json", metavar="PATH")
    c = sub.add_parser("classify", help="classify a curve structure or model JSON file")
    c.add_argument("file")
    c = sub.add_parser("flop", help="flop an interior (-1)-curve of a model")
    c.add_argument("file")
    c.add_argument("--component", type=int, required=True)
    c.add_argument("--vertex", required=True)
    c.add_argument("--out", metavar="PATH")
    c = sub.add_parser("lattice", help="root tables and signature")
    c.add_argument("--spec", required=True)
    c.add_argument("--roots-height", type=int)
    c.add_argument("--ref", help="comma separated reference vector")
    c = sub.add_parser("falsify", help="search nearby models by flops")
    c.add_argument("--depth", type=int, default=2)
    return p


COMMANDS = {"verify": cmd_verify, "census": cmd_census, "classify": cmd_classify, "flop": cmd_flop,
            "lattice": cmd_lattice, "falsify": cmd_falsify}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except csm.SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
