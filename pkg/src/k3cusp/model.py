"""Central fibers with three components, flops, divisors and cusp certificates.

Components are indexed 0, 1, 2.  In the named class P models component 0 is
the large component; in the class T models component 0 is the d4 component.
A component is either an explicit curve structure or a ``Summary`` that only
records its type, the number of vertices and the boundary data.

Divisor coefficients are sympy expressions in positive symbols so that the
recipes can be checked as identities in the free parameters.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import sympy

from . import curvestruct as csm
from .curvestruct import (CurveStructure, Report, SchemaError, boundary_in_basis, canonical_code,
                          classify, gram_matrix, structure_graph, validate_curve_structure)


class ModelError(ValueError):
    pass


class UnsupportedModelError(ModelError):
    pass


class InvalidFlopError(ModelError):
    pass


class UnsupportedModificationError(ModelError):
    pass


class GluingError(ModelError):
    pass


class CertificationError(ModelError):
    """No certificate; ``obstruction`` names the reason."""

    def __init__(self, obstruction: str, detail: str = ""):
        super().__init__(f"{obstruction}: {detail}" if detail else obstruction)
        self.obstruction = obstruction
        self.detail = detail


# -- components ---------------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    """A component known only through its size and boundary data."""
    d_type: str
    vertex_count: int
    boundary: tuple
    identified_pair: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple((str(b), int(s)) for b, s in self.boundary))
        if self.identified_pair:
            object.__setattr__(self, "identified_pair", tuple(self.identified_pair))

    def boundary_ids(self):
        return [b for b, _ in self.boundary]

    def sq(self, b):
        return dict(self.boundary)[b]

    def size(self):
        return self.vertex_count

    def boundary_pair(self, b, c):
        if b == c:
            return self.sq(b)
        if self.d_type == "d2":
            return 2
        if self.d_type == "d4":
            ids = self.boundary_ids()
            return 1 if (ids.index(b) - ids.index(c)) % 4 in (1, 3) else 0
        return 0

    def mutual(self) -> dict:
        return {(b, c): self.boundary_pair(b, c) for b, c in combinations(self.boundary_ids(), 2)}

    def with_sq(self, b, s):
        return Summary(self.d_type, self.vertex_count, [(x, s if x == b else t) for x, t in self.boundary],
                       self.identified_pair)

    def with_count(self, k):
        return Summary(self.d_type, k, self.boundary, self.identified_pair)


def is_explicit(c) -> bool:
    return isinstance(c, CurveStructure)


@dataclass(frozen=True)
class DoubleCurve:
    i: int
    bi: str
    j: int
    bj: str
    triple_points: int = 2
    nodes: int = 0

    def sides(self):
        return ((self.i, self.bi), (self.j, self.bj))

    def other(self, comp, b):
        if (comp, b) == (self.i, self.bi):
            return self.j, self.bj
        return self.i, self.bi


@dataclass(frozen=True)
class CentralFiber:
    dual_complex: str
    components: tuple
    double_curves: tuple
    smooth: tuple  # sorted ((component, boundary id), bool) pairs
    name: str | None = field(default=None, compare=False)
    # where a flopped vertex came from, so that flopping it back is exact;
    # not part of the isomorphism type
    memory: tuple = field(default=(), compare=False)

    def smooth_map(self) -> dict:
        return dict(self.smooth)

    def curve_at(self, comp, b) -> DoubleCurve:
        for dc in self.double_curves:
            if (comp, b) in dc.sides():
                return dc
        raise ModelError(f"boundary {b!r} of component {comp} is not glued")

    def partner(self, comp, b):
        return self.curve_at(comp, b).other(comp, b)

    def sizes(self):
        return tuple(c.size() for c in self.components)

    def replace(self, **kw) -> "CentralFiber":
        d = dict(dual_complex=self.dual_complex, components=self.components, double_curves=self.double_curves,
                 smooth=self.smooth, name=self.name, memory=self.memory)
        d.update(kw)
        return CentralFiber(**d)

    def __repr__(self):
        return f"CentralFiber({self.name or self.dual_complex}, sizes={self.sizes()})"


def component_count(d: int) -> tuple:
    """(components, triple points, double curves) of the central fiber in degree 2d."""
    if d < 1:
        raise ValueError("d must be positive")
    n = d + 2
    t = 2 * n - 4
    if (3 * t) % 2:
        raise ModelError("3t = 2e has no integral solution")
    e = 3 * t // 2
    assert t - e + n == 2, "Euler relation"
    return n, t, e


def _expected_rank(c) -> int:
    s = sum(q for _, q in c.boundary)
    return {"d1": 10 - s, "d2": 6 - s, "d4": 2 - s}[c.d_type]


def validate_model(m: CentralFiber) -> Report:
    if len(m.components) != 3:
        return Report(False, "three-components", len(m.components))
    types = [c.d_type for c in m.components]
    if m.dual_complex == "P":
        if types != ["d2"] * 3 or len(m.double_curves) != 3:
            return Report(False, "dual-complex", types, "class P has three d2 components and three double curves")
        pairs = sorted(tuple(sorted((dc.i, dc.j))) for dc in m.double_curves)
        if pairs != [(0, 1), (0, 2), (1, 2)]:
            return Report(False, "dual-complex", pairs, "class P glues every pair of components once")
    elif m.dual_complex == "T":
        if sorted(types) != ["d1", "d1", "d4"] or len(m.double_curves) != 3:
            return Report(False, "dual-complex", types, "class T has one d4 and two d1 components")
        w = types.index("d4")
        pair = m.components[w].identified_pair
        self_glued = [dc for dc in m.double_curves if dc.i == dc.j]
        if len(self_glued) != 1 or self_glued[0].i != w or {self_glued[0].bi, self_glued[0].bj} != set(pair or ()):
            return Report(False, "dual-complex", pair, "the identified pair must be glued to itself")
        for dc in m.double_curves:
            if dc.i != dc.j and w not in (dc.i, dc.j):
                return Report(False, "dual-complex", dc, "d1 components meet only the d4 component")
    else:
        return Report(False, "dual-complex", m.dual_complex, "unknown class")
    used = [s for dc in m.double_curves for s in dc.sides()]
    allb = [(k, b) for k, c in enumerate(m.components) for b in c.boundary_ids()]
    if sorted(used) != sorted(allb):
        return Report(False, "gluing", sorted(set(allb) ^ set(used)), "every boundary component is glued once")
    flags = m.smooth_map()
    if set(flags) != set(allb):
        return Report(False, "smooth-flags", sorted(set(allb) ^ set(flags)))
    for dc in m.double_curves:
        if dc.triple_points != 2:
            return Report(False, "triple-points", dc, "every double curve carries two triple points")
        nodal = [k for k, _ in dc.sides() if m.components[k].d_type == "d1"]
        if dc.nodes != len(nodal):
            return Report(False, "nodes", dc, "a double curve is nodal exactly on a d1 side")
        s = m.components[dc.i].sq(dc.bi) + m.components[dc.j].sq(dc.bj)
        if s != -dc.triple_points + 2 * dc.nodes:
            return Report(False, "triple-point-formula", dc, f"squares sum to {s}")
    if sum(m.sizes()) != 24:
        return Report(False, "vertex-sum", m.sizes(), f"sum {sum(m.sizes())} != 24")
    for k, c in enumerate(m.components):
        if is_explicit(c):
            r = validate_curve_structure(c)
            if not r:
                return Report(False, f"component-{k}:" + r.invariant, r.witness, r.detail)
        else:
            if c.vertex_count < 1:
                return Report(False, f"component-{k}:size", c.vertex_count)
            if _expected_rank(c) != c.vertex_count:
                return Report(False, f"component-{k}:noether", c.vertex_count,
                              f"boundary squares force rank {_expected_rank(c)}")
    return Report(True)


def default_smooth(components) -> tuple:
    """Images of double curves: nodal when a d1 side is involved, smooth otherwise."""
    out = []
    for k, c in enumerate(components):
        pair = set(c.identified_pair or ())
        for b in c.boundary_ids():
            out.append(((k, b), c.d_type not in ("d1", "d4") or b in pair))
    return tuple(sorted(out))


def _make(dual, comps, curves, name=None) -> CentralFiber:
    comps = tuple(comps)
    dcs = []
    for i, bi, j, bj in curves:
        nodes = sum(comps[k].d_type == "d1" for k in (i, j))
        dcs.append(DoubleCurve(i, bi, j, bj, 2, nodes))
    return CentralFiber(dual, comps, tuple(dcs), default_smooth(comps), name)


# -- the fifteen models ---------------------------------------------------------

def _parse_label(name: str):
    s = name.replace("−", "-").replace(" ", "")
    if s == "Y_P2":
        return ("P2",)
    for pre in ("Y_R(", "Y_VD("):
        if s.startswith(pre) and s.endswith(")"):
            try:
                return (pre[2:-1], int(s[len(pre):-1]))
            except ValueError:
                break
    if s.startswith("Y_T(") and s.endswith(")"):
        try:
            a, b = s[4:-1].split(",")
            return ("T", int(a), int(b))
        except ValueError:
            pass
    raise UnsupportedModelError(f"unknown model label {name!r}")


def _big(n1, n2, count=None):
    count = 6 - n1 - n2 if count is None else count
    return Summary("d2", count, [("D12", n1), ("D13", n2)])


def build_named_model(name: str) -> CentralFiber:
    key = _parse_label(name)
    if key[0] == "R":
        n = key[1]
        if not -7 <= n <= 1:
            raise UnsupportedModelError("Y_R(n) exists for -7 <= n <= 1")
        if n <= -4:
            y2, face2 = csm.ruled_pair(-6 - n), "D0"
        else:
            y2, face2 = csm.ruled_pair(2 + n), "D1"
        other2 = "D1" if face2 == "D0" else "D0"
        y3 = csm.ruled_pair(8 + n)
        comps = [_big(n, -14 - n), y2, y3]
        curves = [(0, "D12", 1, face2), (0, "D13", 2, "D0"), (1, other2, 2, "D1")]
        label = f"Y_R({n})"
    elif key[0] == "VD":
        n = key[1]
        if n == -2:
            comps = [_big(-2, -12), csm.degenerate_pair(), csm.ruled_pair(6)]
            curves = [(0, "D12", 1, "D1"), (0, "D13", 2, "D0"), (1, "D0", 2, "D1")]
        elif n == -6:
            comps = [_big(-6, -8), csm.degenerate_pair(), csm.ruled_pair(2)]
            curves = [(0, "D12", 1, "D0"), (0, "D13", 2, "D0"), (1, "D1", 2, "D1")]
        else:
            raise UnsupportedModelError("Y_VD(n) exists for n in {-2, -6}")
        label = f"Y_VD({n})"
    elif key[0] == "P2":
        # conic towards the large component, line towards the Hirzebruch component
        comps = [_big(-6, -9), csm.plane(), csm.ruled_pair(3)]
        curves = [(0, "D12", 1, "D0"), (0, "D13", 2, "D0"), (1, "D1", 2, "D1")]
        label = "Y_P2"
    else:
        _, n1, n2 = key
        if (n1, n2) not in ((-8, -8), (-8, -9), (-9, -9)):
            raise UnsupportedModelError("Y_T(n1,n2) exists for (-8,-8), (-8,-9), (-9,-9)")
        d4 = Summary("d4", 4 - n1 - n2, [("DX", n1), ("Dw1", -1), ("DY", n2), ("Dw2", -1)], ("Dw1", "Dw2"))
        side = {-8: csm.d1_with_minus_one, -9: csm.p2_cubic}
        comps = [d4, side[n1](), side[n2]()]
        curves = [(0, "DX", 1, "D"), (0, "DY", 2, "D"), (0, "Dw1", 0, "Dw2")]
        label = f"Y_T({n1},{n2})"
    m = _make(key[0] == "T" and "T" or "P", comps, curves, label)
    rep = validate_model(m)
    if not rep:
        raise ModelError(f"{label} failed validation: {rep!r}")
    return m


NAMED_MODELS = tuple([f"Y_R({n})" for n in range(-7, 2)] + ["Y_VD(-2)", "Y_VD(-6)", "Y_P2",
                     "Y_T(-8,-8)", "Y_T(-8,-9)", "Y_T(-9,-9)"])


# -- canonical forms of glued data ------------------------------------------------

def model_graph(m: CentralFiber, comp_tags=None):
    colors, edges = [], {}
    where = {}

    def add(col):
        colors.append(col)
        return len(colors) - 1

    def link(a, b, lab):
        key = (min(a, b), max(a, b))
        edges[key] = (edges[key], lab) if key in edges else lab

    flags = m.smooth_map()
    for k, c in enumerate(m.components):
        tag = comp_tags[k] if comp_tags else None
        if is_explicit(c):
            node = add(("comp", "explicit", c.d_type, tag))
            cols, es, names = structure_graph(c)
            base = len(colors)
            for nm, col in zip(names, cols):
                extra = flags.get((k, nm[1])) if nm[0] == "b" else None
                add(col + (extra,))
            for (i, j), lab in es.items():
                link(base + i, base + j, lab)
            for t, nm in enumerate(names):
                link(node, base + t, "member")
                if nm[0] == "b":
                    where[(k, nm[1])] = base + t
        else:
            node = add(("comp", "summary", c.d_type, c.vertex_count, tag))
            pair = set(c.identified_pair or ())
            for b, s in c.boundary:
                t = add(("b", s, b in pair, flags.get((k, b))))
                link(node, t, "member")
                where[(k, b)] = t
            for (b, d), val in c.mutual().items():
                if val:
                    link(where[(k, b)], where[(k, d)], ("m", val))
    for dc in m.double_curves:
        link(where[(dc.i, dc.bi)], where[(dc.j, dc.bj)], ("glue", dc.triple_points, dc.nodes))
    return colors, edges


def model_canonical_form(m: CentralFiber) -> tuple:
    colors, edges = model_graph(m)
    return (m.dual_complex, canonical_code(colors, edges))


def models_isomorphic(a: CentralFiber, b: CentralFiber) -> bool:
    return model_canonical_form(a) == model_canonical_form(b)


def component_automorphisms(m: CentralFiber) -> list:
    """Permutations of the components that extend to isomorphisms of the glued data."""
    from itertools import permutations
    base = canonical_code(*model_graph(m, comp_tags=(0, 1, 2)))
    out = []
    for p in permutations(range(3)):
        if canonical_code(*model_graph(m, comp_tags=p)) == base:
            out.append(p)
    return out


def relabel_model(m: CentralFiber, component: int, mapping: dict) -> CentralFiber:
    """Rename vertex and boundary ids of one explicit component."""
    c = m.components[component]
    if not is_explicit(c):
        raise ModelError("only explicit components carry ids to rename")
    f = lambda x: mapping.get(x, x)
    comps = list(m.components)
    comps[component] = c.relabel(mapping)
    dcs = []
    for dc in m.double_curves:
        bi = f(dc.bi) if dc.i == component else dc.bi
        bj = f(dc.bj) if dc.j == component else dc.bj
        dcs.append(DoubleCurve(dc.i, bi, dc.j, bj, dc.triple_points, dc.nodes))
    smooth = tuple(sorted(((k, f(b) if k == component else b), v) for (k, b), v in m.smooth))
    return m.replace(components=tuple(comps), double_curves=tuple(dcs), smooth=smooth, memory=())


# -- flops ----------------------------------------------------------------------

def _fresh(cs: CurveStructure, stem="e") -> str:
    used = set(cs.vertex_ids()) | set(cs.boundary_ids())
    k = 1
    while f"{stem}{k}" in used:
        k += 1
    return f"{stem}{k}"


def _blow_down(cs: CurveStructure, e) -> tuple:
    """Contract the interior (-1)-curve e; returns (structure, ids of curves through the point)."""
    through = [w for w in cs.vertex_ids() if w != e and cs.meets(w, e)]
    (b,) = cs.boundary_meeting(e)
    verts = [(w, s + (1 if w in through else 0)) for w, s in cs.vertices if w != e]
    edges = {tuple(sorted(x)) for x in cs.edges if e not in x}
    for a, c in combinations(through, 2):
        key = tuple(sorted((a, c)))
        if key in edges:
            raise InvalidFlopError(f"{a} and {c} would meet twice after contracting {e}")
        edges.add(key)
    inc = {k: v for k, v in cs.incidence if k[0] != e}
    for w in through:
        inc[(w, b)] = inc.get((w, b), 0) + 1
    bnd = [(x, s + 1 if x == b else s) for x, s in cs.boundary]
    return CurveStructure(cs.d_type, verts, sorted(edges), bnd, inc, cs.identified_pair), tuple(through)


def _blow_up(cs: CurveStructure, b, through=(), new_id=None, position=None):
    """Blow up a point of boundary b lying on the listed vertices (generic when empty)."""
    e = new_id or _fresh(cs)
    if e in cs.vertex_ids() or e in cs.boundary_ids():
        e = _fresh(cs)
    verts = [(w, s - (1 if w in through else 0)) for w, s in cs.vertices]
    verts.insert(len(verts) if position is None else position, (e, -1))
    edges = {tuple(sorted(x)) for x in cs.edges}
    for a, c in combinations(through, 2):
        edges.discard(tuple(sorted((a, c))))
    for w in through:
        edges.add(tuple(sorted((w, e))))
    inc = dict(cs.incidence)
    for w in through:
        inc[(w, b)] = inc.get((w, b), 0) - 1
    inc[(e, b)] = 1
    bnd = [(x, s - 1 if x == b else s) for x, s in cs.boundary]
    return CurveStructure(cs.d_type, verts, sorted(edges), bnd, inc, cs.identified_pair), e


def flop_type_I(m: CentralFiber, component: int, vertex) -> CentralFiber:
    """Elementary modification of type I in an interior (-1)-curve."""
    if not 0 <= component < 3:
        raise InvalidFlopError(f"no component {component}")
    cs = m.components[component]
    if not is_explicit(cs):
        raise InvalidFlopError("flops start from explicit components")
    if vertex not in cs.vertex_ids():
        raise InvalidFlopError(f"component {component} has no vertex {vertex!r}")
    if cs.sq(vertex) != -1:
        raise InvalidFlopError(f"{vertex} is not a (-1)-curve")
    bs = cs.boundary_meeting(vertex)
    if len(bs) != 1 or cs.inc(vertex, bs[0]) != 1:
        raise InvalidFlopError(f"{vertex} must meet exactly one boundary component, once")
    b = bs[0]
    j, bj = m.partner(component, b)
    if j == component:
        raise InvalidFlopError("the partner curve lies on the same component")
    mem = dict(m.memory)
    here, through = _blow_down(cs, vertex)
    comps = list(m.components)
    comps[component] = here
    target = comps[j]
    back = mem.get((component, vertex))
    if is_explicit(target):
        if back and back[0] == j and back[1] == bj:
            target, new = _blow_up(target, bj, back[3], back[2], back[4])
        else:
            target, new = _blow_up(target, bj)
        comps[j] = target
        newmem = {k: v for k, v in mem.items() if k[0] not in (component, j) and v[0] not in (component, j)}
        newmem[(j, new)] = (component, b, vertex, through, cs.vertex_ids().index(vertex))
    else:
        comps[j] = target.with_count(target.vertex_count + 1).with_sq(bj, target.sq(bj) - 1)
        newmem = {k: v for k, v in mem.items() if k[0] not in (component, j) and v[0] not in (component, j)}
    out = m.replace(components=tuple(comps), name=None, memory=tuple(sorted(newmem.items())))
    rep = validate_model(out)
    if not rep:
        raise InvalidFlopError(f"flop produced inconsistent data: {rep!r}")
    return out


def flop_double_curve(m: CentralFiber) -> CentralFiber:
    """Type II modification along the self-glued curve of a class T fiber."""
    if m.dual_complex != "T":
        raise UnsupportedModificationError("only class T fibers carry the self-glued curve")
    w = [c.d_type for c in m.components].index("d4")
    Y = m.components[w]
    p, q = Y.identified_pair
    if (Y.sq(p), Y.sq(q)) != (-1, -1):
        raise UnsupportedModificationError("the identified pair must consist of two (-1)-curves")
    if is_explicit(Y):
        raise UnsupportedModificationError("only summary d4 components are handled")
    rest = [b for b in Y.boundary_ids() if b not in (p, q)]
    big = Summary("d2", Y.vertex_count - 2, [(b, Y.sq(b) + 2) for b in rest])
    comps = list(m.components)
    comps[w] = big
    curves = []
    es = {}
    for b in rest:
        k, bk = m.partner(w, b)
        cs = comps[k]
        if not is_explicit(cs):
            raise UnsupportedModificationError("the d1 components must be explicit")
        u = next((v for v, s in cs.vertices if cs.inc(v, bk) >= 2 and s in (0, 1)), None)
        if u is None:
            raise UnsupportedModificationError(f"component {k} has no curve through the node")
        E = "E"
        u2 = _fresh(cs, "u")
        verts = list(cs.vertices) + [(u2, cs.sq(u) - 1)]
        edges = list(cs.edges) + [(u2, x) for x in cs.neighbours(u)]
        if cs.sq(u) == 1:
            edges.append((u, u2))
        inc = dict(cs.incidence)
        inc[(u2, bk)] = cs.inc(u, bk) - 2
        inc[(u2, E)] = 1
        bnd = [(bk, cs.sq(bk) - 4), (E, -1)]
        comps[k] = CurveStructure("d2", verts, edges, bnd, inc)
        curves.append((w, b, k, bk))
        es[k] = (k, E)
    (k1, e1), (k2, e2) = es.values()
    curves.append((k1, e1, k2, e2))
    out = _make("P", comps, curves)
    rep = validate_model(out)
    if not rep:
        raise UnsupportedModificationError(f"modification produced inconsistent data: {rep!r}")
    return out


def available_flops(m: CentralFiber) -> list:
    out = []
    for k, c in enumerate(m.components):
        if not is_explicit(c):
            continue
        for v, s in c.vertices:
            if s == -1:
                bs = c.boundary_meeting(v)
                if len(bs) == 1 and c.inc(v, bs[0]) == 1 and m.partner(k, bs[0])[0] != k:
                    out.append((k, v))
    return out


# -- NE cones and divisors ---------------------------------------------------------

def _rank(vectors) -> int:
    rows = [[Fraction(x) for x in v] for v in vectors]
    r = 0
    ncol = len(rows[0]) if rows else 0
    for c in range(ncol):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def ne_generators(m: CentralFiber, component: int) -> list:
    """(label, class in the vertex basis) for the generators of the effective cone."""
    cs = m.components[component]
    if not is_explicit(cs):
        raise UnsupportedModelError("effective cones are only needed on explicit components")
    return structure_ne_generators(cs)


def structure_ne_generators(cs: CurveStructure) -> list:
    n = cs.size()
    unit = lambda i: tuple(Fraction(int(i == j)) for j in range(n))
    vids = cs.vertex_ids()
    gens = [(v, unit(i)) for i, v in enumerate(vids) if cs.sq(v) < 0]
    gens += [(b, boundary_in_basis(cs, b)) for b in cs.boundary_ids() if cs.sq(b) < 0]
    for level in (0, 1):
        if gens and _rank([g for _, g in gens]) == n:
            break
        for i, v in enumerate(vids):
            s = cs.sq(v)
            if (s == 0 if level == 0 else s > 0):
                gens.append((v, unit(i)))
    return gens


def _nonneg(expr) -> bool:
    """True when a polynomial is nonnegative for all positive values of its symbols."""
    e = sympy.expand(expr)
    if e.is_number:
        return bool(e >= 0)
    poly = sympy.Poly(e, *sorted(e.free_symbols, key=str))
    return all(c >= 0 for c in poly.coeffs())


def _zero(expr) -> bool:
    return sympy.expand(expr) == 0


class SummaryDivisor:
    """a*A + sum c_b D_b on a summary component, with prescribed degrees A.D_b."""

    def __init__(self, a_coeff, coeffs: dict, degrees: dict):
        self.a_coeff = sympy.sympify(a_coeff)
        self.coeffs = {b: sympy.sympify(c) for b, c in coeffs.items()}
        self.degrees = {b: sympy.sympify(d) for b, d in degrees.items()}

    def is_zero(self):
        return _zero(self.a_coeff) and all(_zero(c) for c in self.coeffs.values())

    def __repr__(self):
        terms = [f"{self.a_coeff}*A"] + [f"({c})*{b}" for b, c in self.coeffs.items() if not _zero(c)]
        return " + ".join(terms)


def zero_divisor(c):
    if is_explicit(c):
        return tuple(sympy.Integer(0) for _ in range(c.size()))
    return SummaryDivisor(0, {}, {b: 0 for b in c.boundary_ids()})


def degree(c, L, b):
    """L.D_b on a component."""
    if is_explicit(c):
        return sympy.expand(sum(x * c.inc(v, b) for x, v in zip(L, c.vertex_ids())))
    tot = L.a_coeff * L.degrees[b]
    for d, coef in L.coeffs.items():
        tot += coef * c.boundary_pair(d, b)
    return sympy.expand(tot)


def explicit_pairing(cs: CurveStructure, L, g):
    G = gram_matrix(cs)
    n = len(G)
    return sympy.expand(sum(L[i] * G[i][j] * sympy.Rational(g[j].numerator, g[j].denominator)
                            for i in range(n) for j in range(n) if G[i][j] and g[j]))


def explicit_square(cs: CurveStructure, L):
    G = gram_matrix(cs)
    n = len(G)
    return sympy.expand(sum(L[i] * G[i][j] * L[j] for i in range(n) for j in range(n) if G[i][j]))


@dataclass
class DivisorTriple:
    parts: tuple
    gluing: tuple  # (double curve, degree on side i, degree on side j)

    def __repr__(self):
        return f"DivisorTriple({list(self.parts)!r})"


def glue_divisor(m: CentralFiber, parts) -> DivisorTriple:
    parts = tuple(parts)
    if len(parts) != 3:
        raise GluingError("a divisor needs one part per component")
    rows = []
    for dc in m.double_curves:
        di = degree(m.components[dc.i], parts[dc.i], dc.bi)
        dj = degree(m.components[dc.j], parts[dc.j], dc.bj)
        if not _zero(di - dj):
            raise GluingError(f"degrees differ across {dc.i}:{dc.bi} / {dc.j}:{dc.bj}: {di} != {dj}")
        rows.append((dc, di, dj))
    return DivisorTriple(parts, tuple(rows))


def nefness_and_contracted_locus(m: CentralFiber, L: DivisorTriple) -> list:
    """Per component: {"nef", "contracted", "zero"}."""
    out = []
    for c, part in zip(m.components, L.parts):
        if is_explicit(c):
            gens = structure_ne_generators(c)
            degs = [(lab, explicit_pairing(c, part, g)) for lab, g in gens]
            out.append({"nef": all(_nonneg(d) for _, d in degs),
                        "contracted": [lab for lab, d in degs if _zero(d)],
                        "zero": all(_zero(x) for x in part)})
        else:
            degs = [(b, degree(c, part, b)) for b in c.boundary_ids()]
            zero = part.is_zero()
            nef = zero or (_nonneg(part.a_coeff) and not _zero(part.a_coeff) and all(_nonneg(d) for _, d in degs))
            out.append({"nef": nef, "contracted": [b for b, d in degs if _zero(d)], "zero": zero})
    return out


# -- certificates ---------------------------------------------------------------

@dataclass
class CuspCertificate:
    model: CentralFiber
    survivor: int
    recipe: str
    divisor: DivisorTriple
    contracted: tuple
    checks: dict

    def ok(self):
        return all(self.checks.values())

    def __repr__(self):
        return f"CuspCertificate({self.model.name}, survivor={self.survivor}, recipe={self.recipe})"


def _sym(name):
    return sympy.Symbol(name, positive=True)


def _fiber_vertex(cs: CurveStructure):
    """The square-zero vertex meeting every boundary component once, else any square-zero vertex."""
    zs = [v for v, s in cs.vertices if s == 0]
    for v in zs:
        if all(cs.inc(v, b) == 1 for b in cs.boundary_ids()):
            return v
    return zs[0] if zs else None


def _vec(cs, coeffs: dict):
    return tuple(sympy.sympify(coeffs.get(v, 0)) for v in cs.vertex_ids())


def _kind(cs: CurveStructure, smooth: dict) -> str:
    if cs.size() == 1:
        return "plane"
    tag = classify(cs, smooth)
    if tag.verdict == "very-degenerate":
        return "very-degenerate"
    return "regular"


def _recipes_P(m, s):
    """Divisor recipes when the large component s survives (class P)."""
    S = m.components[s]
    X, Z = [k for k in range(3) if k != s]
    flags = m.smooth_map()
    kinds = {}
    for k in (X, Z):
        kinds[k] = _kind(m.components[k], {b: flags[(k, b)] for b in m.components[k].boundary_ids()})
    bS = {k: b for k in (X, Z) for b in S.boundary_ids() if m.partner(s, b)[0] == k}
    face = {k: m.partner(s, bS[k])[1] for k in (X, Z)}      # boundary of k facing s
    toward = {}
    for k, o in ((X, Z), (Z, X)):
        toward[k] = next(b for b in m.components[k].boundary_ids() if m.partner(k, b)[0] == o)
    a = {k: _sym(f"a_{bS[k]}") for k in (X, Z)}
    out = []

    def summ(acoef, coeffs, degs):
        return SummaryDivisor(acoef, coeffs, degs)

    def place(parts):
        full = [None] * 3
        for k, v in parts.items():
            full[k] = v
        return full

    if kinds[X] == kinds[Z] == "regular":
        p = _sym("p")
        parts = {s: summ(1, {}, {bS[X]: p, bS[Z]: p})}
        for k in (X, Z):
            c = m.components[k]
            parts[k] = _vec(c, {_fiber_vertex(c): p})
        expect = {k: [_fiber_vertex(m.components[k])] for k in (X, Z)}
        out.append(("fibration-pair", place(parts), expect))
        for P, Q in ((X, Z), (Z, X)):
            c = m.components[P]
            if sorted(q for _, q in c.vertices) != [0, 0]:
                continue
            v0 = _fiber_vertex(c)
            v1 = next(v for v in c.vertex_ids() if v != v0)
            w0 = _fiber_vertex(m.components[Q])
            q = _sym("q")
            if c.inc(v1, toward[P]) == 2 and S.sq(bS[P]) == -2:
                parts = {s: summ(1, {bS[P]: q}, {bS[P]: 2 * q, bS[Q]: 2 * q}),
                         P: _vec(c, {v1: 2 * q}), Q: _vec(m.components[Q], {w0: 4 * q})}
                out.append(("ruling-swap", place(parts), {P: [v1], Q: [w0]}))
            elif c.inc(v1, toward[P]) == 0 and S.sq(bS[Q]) == -8:
                LS = summ(8, {bS[Q]: a[Q]}, {bS[P]: a[P], bS[Q]: a[Q]})
                qq = degree(S, LS, bS[P])
                parts = {s: LS, P: _vec(c, {v1: qq / 2}), Q: zero_divisor(m.components[Q])}
                out.append(("ruling-swap", place(parts), {P: [v1], Q: "all"}))
    elif sorted(kinds.values()) == ["regular", "very-degenerate"]:
        V = X if kinds[X] == "very-degenerate" else Z
        R = Z if V == X else X
        cv, cr = m.components[V], m.components[R]
        v0 = _fiber_vertex(cv)
        w0 = _fiber_vertex(cr)
        if cr.sq(toward[R]) == -2 and S.sq(bS[R]) == -8:
            LS = summ(8, {bS[R]: a[R]}, {bS[V]: a[V], bS[R]: a[R]})
            q = degree(S, LS, bS[V]) / 2
            parts = {s: LS, V: _vec(cv, {v0: q}), R: zero_divisor(cr)}
            out.append(("degenerate-pair", place(parts), {V: [v0], R: "all"}))
        elif cr.sq(toward[R]) == -6 and S.sq(bS[V]) == -2:
            LS = summ(2, {bS[V]: a[V]}, {bS[V]: a[V], bS[R]: a[R]})
            q = degree(S, LS, bS[R]) / 2
            parts = {s: LS, V: _vec(cv, {v0: q}), R: _vec(cr, {w0: 2 * q})}
            out.append(("degenerate-pair", place(parts), {V: [v0], R: [w0]}))
    elif sorted(kinds.values()) == ["plane", "regular"]:
        P = X if kinds[X] == "plane" else Z
        R = Z if P == X else X
        sqs = (S.sq(bS[P]), S.sq(bS[R]))
        coef = {(-6, -9): (50, 6, 9), (-3, -12): (32, 3, 12)}.get(sqs)
        if coef:
            c0, cr_, cp = coef
            LS = summ(c0, {bS[R]: cr_ * a[R] + 2 * a[P], bS[P]: cp * a[P] + 2 * a[R]},
                      {bS[P]: a[P], bS[R]: a[R]})
            parts = {s: LS, P: zero_divisor(m.components[P]), R: zero_divisor(m.components[R])}
            out.append(("plane-pair", place(parts), {P: "all", R: "all"}))
    return out


def _recipes_T(m, s):
    S = m.components[s]
    pair = set(S.identified_pair)
    sides = [b for b in S.boundary_ids() if b not in pair]
    comp = {b: m.partner(s, b) for b in sides}
    for b in sides:
        k, _ = comp[b]
        if m.components[k].size() > 2:
            return []
    a = {b: _sym(f"a_{b}") for b in S.boundary_ids()}
    aw = _sym("a_w")
    for b in pair:
        a[b] = aw  # the pulled back ample class has equal degree on both preimages
    points = [b for b in sides if m.components[comp[b][0]].size() == 1]
    curves = [b for b in sides if b not in points]
    s_ = {b: -S.sq(b) for b in sides}
    prod = 1
    for b in points:
        prod *= s_[b]
    scale = 2 if curves else 1
    coeffs = {}
    for b in points:
        rest = 1
        for o in points:
            if o != b:
                rest *= s_[o]
        coeffs[b] = scale * rest * a[b]
    LS = SummaryDivisor(scale * prod, coeffs, {b: a[b] for b in S.boundary_ids()})
    parts = [None] * 3
    parts[s] = LS
    expect = {}
    for b in sides:
        k, bk = comp[b]
        c = m.components[k]
        if b in points:
            parts[k] = zero_divisor(c)
            expect[k] = "all"
        else:
            u = next((v for v, q in c.vertices if q == 0 and c.inc(v, bk) == 2), None)
            if u is None:
                return []
            parts[k] = _vec(c, {u: degree(S, LS, b) / 2})
            expect[k] = [u]
    return [("class-T", parts, expect)]


def _obstruction(m: CentralFiber, s: int):
    """First reason why component s cannot be the survivor, or None."""
    S = m.components[s]
    others = [k for k in range(3) if k != s]
    if m.dual_complex == "T" and S.d_type != "d4":
        return "special-component-contracted", "the d4 component cannot be contracted"
    if S.size() < 19:
        return "picard-rank", f"survivor has rank {S.size()} < 19"
    if S.d_type in ("d2", "d4") and S.size() < 20:
        return "picard-rank", f"{S.d_type} survivor has rank {S.size()} < 20"
    flags = m.smooth_map()
    for k in others:
        c = m.components[k]
        if c.size() > 4 or (c.size() == 4 and not (S.d_type == "d1" and c.d_type == "d4")):
            return "contracted-size", f"component {k} has {c.size()} vertices"
        if c.d_type == "d2" and is_explicit(c):
            tag = classify(c, {b: flags[(k, b)] for b in c.boundary_ids()})
            if not tag.is_degenerate:
                return "contracted-nondegenerate", f"component {k} is non-degenerate"
    for k in others:
        c = m.components[k]
        if c.size() > 2:
            return "contracted-size", f"contracted component {k} has {c.size()} > 2 vertices"
        if not is_explicit(c):
            return "summary-contracted", f"component {k} carries no explicit structure"
    if is_explicit(S):
        return "no-construction", "recipes need a summary survivor"
    return None


def cusp_certificates(m: CentralFiber, survivor: int) -> list:
    """All verified certificates for the given survivor (empty when obstructed)."""
    try:
        return _certificates(m, survivor)
    except CertificationError:
        return []


def _certificates(m, s):
    ob = _obstruction(m, s)
    if ob:
        raise CertificationError(*ob)
    recipes = _recipes_P(m, s) if m.dual_complex == "P" else _recipes_T(m, s)
    if not recipes:
        raise CertificationError("no-construction", "no divisor recipe matches this configuration")
    certs = []
    failures = []
    for name, parts, expect in recipes:
        cert = _verify(m, s, name, parts, expect)
        if cert.ok():
            certs.append(cert)
        else:
            failures.append(cert)
    if not certs:
        bad = [k for k, v in failures[0].checks.items() if not v]
        raise CertificationError("verification-failed", f"{failures[0].recipe}: {bad}")
    return certs


def _verify(m, s, name, parts, expect) -> CuspCertificate:
    checks = {}
    try:
        L = glue_divisor(m, parts)
        checks["gluing"] = True
    except GluingError:
        return CuspCertificate(m, s, name, DivisorTriple(tuple(parts), ()), (), {"gluing": False})
    info = nefness_and_contracted_locus(m, L)
    checks["nef"] = all(x["nef"] for x in info)
    checks["survivor-nonzero"] = not info[s]["zero"]
    locus_ok = True
    square_ok = True
    minus_two_ok = True
    minus_one_ok = True
    pair_ok = True
    for k in range(3):
        if k == s:
            continue
        c = m.components[k]
        gens = [lab for lab, _ in structure_ne_generators(c)]
        exp = gens if expect[k] == "all" else list(expect[k])
        if sorted(info[k]["contracted"]) != sorted(exp):
            locus_ok = False
        if not _zero(explicit_square(c, L.parts[k])):
            square_ok = False
        for v in info[k]["contracted"]:
            if v in c.vertex_ids() and c.sq(v) == -2:
                minus_two_ok = False
            if v in c.vertex_ids() and c.sq(v) == -1:
                bs = c.boundary_meeting(v)
                if len(bs) == 1 and m.partner(k, bs[0])[0] == s:
                    minus_one_ok = False
            if v in c.boundary_ids():
                o, ob = m.partner(k, v)
                if o != s and c.sq(v) == -1 and m.components[o].sq(ob) == -1 and ob in info[o]["contracted"]:
                    pair_ok = False
    checks["contracted-locus"] = locus_ok
    checks["contracted-square-zero"] = square_ok
    checks["no-minus-two-contracted"] = minus_two_ok
    checks["no-survivor-minus-one-contracted"] = minus_one_ok
    checks["no-minus-one-pair-contracted"] = pair_ok
    contracted = tuple(tuple(x["contracted"]) if k != s else () for k, x in enumerate(info))
    return CuspCertificate(m, s, name, L, contracted, checks)


def certify_cusp_model(m: CentralFiber, survivor: int) -> CuspCertificate:
    return _certificates(m, survivor)[0]


def admits_cusp_model(m: CentralFiber) -> tuple:
    """(survivor index or None, number of cuspidal cones in the nef cone)."""
    found = [(s, cusp_certificates(m, s)) for s in range(3)]
    found = [(s, cs) for s, cs in found if cs]
    if not found:
        return None, 0
    if len(found) > 1:
        raise ModelError("certificates for two different survivors; cusp cones would intersect")
    s, certs = found[0]
    return s, len(certs)


# -- JSON ----------------------------------------------------------------------------

def model_to_dict(m: CentralFiber) -> dict:
    comps = []
    for c in m.components:
        if is_explicit(c):
            comps.append({"kind": "explicit", "structure": csm.to_dict(c)})
        else:
            s = {"d_type": c.d_type, "vertex_count": c.vertex_count,
                 "boundary": [{"id": b, "sq": q} for b, q in c.boundary],
                 "mutual": [{"a": a, "b": b, "m": k} for (a, b), k in c.mutual().items()]}
            if c.identified_pair:
                s["identified_pair"] = list(c.identified_pair)
            comps.append({"kind": "summary", "summary": s})
    d = {"dual_complex": m.dual_complex, "components": comps,
         "double_curves": [{"i": dc.i, "bi": dc.bi, "j": dc.j, "bj": dc.bj,
                            "triple_points": dc.triple_points, "nodes": dc.nodes} for dc in m.double_curves],
         "smooth": [{"component": k, "b": b, "smooth": f} for (k, b), f in m.smooth]}
    if m.name:
        d["name"] = m.name
    return d


def model_to_json(m: CentralFiber) -> str:
    return json.dumps(model_to_dict(m), indent=2)


def _field(d, key, typ, where):
    return csm._need(d, key, typ, where)


def model_from_dict(d: dict) -> CentralFiber:
    dual = _field(d, "dual_complex", str, "$")
    comps = []
    for i, c in enumerate(_field(d, "components", list, "$")):
        w = f"$.components[{i}]"
        kind = _field(c, "kind", str, w)
        if kind == "explicit":
            comps.append(csm.from_dict(_field(c, "structure", dict, w), w + ".structure"))
        elif kind == "summary":
            s = _field(c, "summary", dict, w)
            ws = w + ".summary"
            bnd = [(_field(x, "id", str, f"{ws}.boundary[{t}]"), _field(x, "sq", int, f"{ws}.boundary[{t}]"))
                   for t, x in enumerate(_field(s, "boundary", list, ws))]
            comps.append(Summary(_field(s, "d_type", str, ws), _field(s, "vertex_count", int, ws), bnd,
                                 s.get("identified_pair")))
        else:
            raise SchemaError(f"{w}.kind: expected 'explicit' or 'summary'")
    dcs = []
    for t, x in enumerate(_field(d, "double_curves", list, "$")):
        w = f"$.double_curves[{t}]"
        dcs.append(DoubleCurve(_field(x, "i", int, w), _field(x, "bi", str, w), _field(x, "j", int, w),
                               _field(x, "bj", str, w), x.get("triple_points", 2), x.get("nodes", 0)))
    if "smooth" in d:
        smooth = []
        for t, x in enumerate(d["smooth"]):
            w = f"$.smooth[{t}]"
            smooth.append(((_field(x, "component", int, w), _field(x, "b", str, w)),
                           bool(_field(x, "smooth", bool, w))))
        smooth = tuple(sorted(smooth))
    else:
        smooth = default_smooth(comps)
    return CentralFiber(dual, tuple(comps), tuple(dcs), smooth, d.get("name"))


def model_from_json(text: str) -> CentralFiber:
    return model_from_dict(csm.loads(text))
