"""Curve structures: labeled dual graphs of interior curves plus the boundary cycle.

A structure stores its vertices (interior curves with self-intersection),
the pairwise intersections between them (0 or 1, stored as edges), the
boundary components with their squares, and vertex/boundary incidence
multiplicities.  Boundary components meet each other according to the type:

* d1: one nodal curve,
* d2: two curves meeting in two points,
* d4: a cycle of four, in the listed order; the identified pair is opposite.
"""
from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations

from .lattice import DegenerateFormError, det, solve_linear

D_TYPES = {"d1": 1, "d2": 2, "d4": 4}
VERDICTS = ("regular-nondegenerate", "tamely-degenerate", "very-degenerate")


class CurveStructureError(ValueError):
    pass


class BasisViolationError(CurveStructureError):
    pass


class DataInconsistencyError(CurveStructureError):
    pass


class PreconditionError(CurveStructureError):
    pass


class IncompleteInputError(CurveStructureError):
    pass


class UnsupportedTypeError(CurveStructureError):
    pass


class SchemaError(CurveStructureError):
    pass


class Report:
    """A pass/fail verdict that names the first violated invariant."""

    def __init__(self, ok: bool, invariant: str = "", witness=None, detail: str = ""):
        self.ok = ok
        self.invariant = invariant
        self.witness = witness
        self.detail = detail

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            return "Report(pass)"
        return f"Report(fail: {self.invariant} at {self.witness!r}; {self.detail})"


class CurveStructure:
    """Immutable labeled graph; see the module docstring for conventions."""

    __slots__ = ("d_type", "vertices", "edges", "boundary", "incidence", "identified_pair")

    def __init__(self, d_type, vertices, edges, boundary, incidence, identified_pair=None):
        object.__setattr__(self, "d_type", str(d_type))
        object.__setattr__(self, "vertices", tuple((str(v), int(s)) for v, s in vertices))
        # kept as a list on purpose: a repeated pair is a multigraph edge
        object.__setattr__(self, "edges", tuple(tuple(sorted((str(a), str(b)))) for a, b in edges))
        object.__setattr__(self, "boundary", tuple((str(b), int(s)) for b, s in boundary))
        if isinstance(incidence, dict):
            items = incidence.items()
        else:
            items = (((v, b), m) for v, b, m in incidence)
        inc = {}
        for (v, b), m in items:
            if m:
                inc[(str(v), str(b))] = inc.get((str(v), str(b)), 0) + int(m)
        object.__setattr__(self, "incidence", tuple(sorted(inc.items())))
        object.__setattr__(self, "identified_pair",
                           tuple(str(x) for x in identified_pair) if identified_pair else None)

    def __setattr__(self, *_):
        raise AttributeError("CurveStructure is immutable")

    # -- accessors ----------------------------------------------------------
    def vertex_ids(self) -> list:
        return [v for v, _ in self.vertices]

    def boundary_ids(self) -> list:
        return [b for b, _ in self.boundary]

    def sq(self, x) -> int:
        for v, s in self.vertices + self.boundary:
            if v == x:
                return s
        raise KeyError(x)

    def inc(self, v, b) -> int:
        return dict(self.incidence).get((v, b), 0)

    def meets(self, v, w) -> int:
        return int(tuple(sorted((v, w))) in set(self.edges))

    def neighbours(self, v) -> list:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(set(out))

    def degree_on_boundary(self, v) -> int:
        return sum(m for (w, _), m in self.incidence if w == v)

    def boundary_meeting(self, v) -> list:
        return [b for (w, b), m in self.incidence if w == v and m > 0]

    def boundary_pair(self, b, c) -> int:
        """Intersection of two distinct boundary components, from the type."""
        ids = self.boundary_ids()
        if b == c:
            return self.sq(b)
        if self.d_type == "d2":
            return 2
        if self.d_type == "d4":
            i, j = ids.index(b), ids.index(c)
            return 1 if (i - j) % 4 in (1, 3) else 0
        return 0

    def size(self) -> int:
        return len(self.vertices)

    def replace(self, **kw) -> "CurveStructure":
        args = dict(d_type=self.d_type, vertices=self.vertices, edges=self.edges,
                    boundary=self.boundary, incidence=dict(self.incidence),
                    identified_pair=self.identified_pair)
        args.update(kw)
        return CurveStructure(**args)

    def relabel(self, mapping: dict) -> "CurveStructure":
        f = lambda x: mapping.get(x, x)
        return CurveStructure(
            self.d_type,
            [(f(v), s) for v, s in self.vertices],
            [(f(a), f(b)) for a, b in self.edges],
            [(f(b), s) for b, s in self.boundary],
            {(f(v), f(b)): m for (v, b), m in self.incidence},
            [f(x) for x in self.identified_pair] if self.identified_pair else None,
        )

    def _key(self):
        return (self.d_type, self.vertices, tuple(sorted(self.edges)), self.boundary,
                self.incidence, self.identified_pair)

    def __eq__(self, other):
        return isinstance(other, CurveStructure) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        vs = ", ".join(f"{v}:{s}" for v, s in self.vertices)
        bs = ", ".join(f"{b}:{s}" for b, s in self.boundary)
        return f"CurveStructure({self.d_type}; [{vs}]; [{bs}])"


# -- validation ------------------------------------------------------------------

def expected_rank(cs: CurveStructure) -> int:
    """Picard number forced by Noether's formula for the boundary cycle."""
    s = sum(q for _, q in cs.boundary)
    return {"d1": 10 - s, "d2": 6 - s, "d4": 2 - s}[cs.d_type]


def validate_curve_structure(cs: CurveStructure) -> Report:
    if cs.d_type not in D_TYPES:
        return Report(False, "d-type", cs.d_type, "unknown type tag")
    if len(cs.boundary) != D_TYPES[cs.d_type]:
        return Report(False, "boundary-count", len(cs.boundary),
                      f"{cs.d_type} needs {D_TYPES[cs.d_type]} boundary components")
    vids, bids = cs.vertex_ids(), cs.boundary_ids()
    allids = vids + bids
    if len(set(allids)) != len(allids):
        return Report(False, "unique-ids", sorted(x for x in allids if allids.count(x) > 1))
    if not vids:
        return Report(False, "nonempty", None, "a structure has at least one vertex")
    if cs.d_type == "d4":
        pair = cs.identified_pair
        if not pair or len(pair) != 2 or any(p not in bids for p in pair):
            return Report(False, "identified-pair", pair, "d4 needs two boundary ids")
        if cs.boundary_pair(*pair) != 0 or pair[0] == pair[1]:
            return Report(False, "identified-pair", pair, "identified components must be opposite")
    elif cs.identified_pair:
        return Report(False, "identified-pair", cs.identified_pair, "only d4 carries an identified pair")
    seen = set()
    for e in cs.edges:
        a, b = e
        if a not in vids or b not in vids:
            return Report(False, "edge-endpoints", e)
        if a == b:
            return Report(False, "intersection-0-1", e, "self loop")
        if e in seen:
            return Report(False, "intersection-0-1", e, "vertices meet more than once")
        seen.add(e)
    for (v, b), m in cs.incidence:
        if v not in vids or b not in bids:
            return Report(False, "incidence-ids", (v, b))
        if m < 0:
            return Report(False, "incidence-sign", (v, b), "negative multiplicity")
    for v, s in cs.vertices:
        deg = cs.degree_on_boundary(v)
        if deg != s + 2:
            return Report(False, "adjunction", v, f"boundary degree {deg} != {s} + 2")
    g = gram_matrix(cs, check=False)
    if det(g) == 0:
        return Report(False, "basis", vids, "vertex Gram matrix is degenerate")
    for b in bids:
        x = _solve(cs, b)
        for c in bids:
            rc = [cs.inc(v, c) for v in vids]
            val = sum(xi * r for xi, r in zip(x, rc))
            if val != cs.boundary_pair(b, c):
                return Report(False, "boundary-class", (b, c),
                              f"solved intersection {val} != stored {cs.boundary_pair(b, c)}")
    if expected_rank(cs) != len(vids):
        return Report(False, "noether", len(vids), f"boundary squares force rank {expected_rank(cs)}")
    return Report(True)


def gram_matrix(cs: CurveStructure, check: bool = True) -> tuple:
    vids = cs.vertex_ids()
    g = tuple(tuple(cs.sq(v) if v == w else cs.meets(v, w) for w in vids) for v in vids)
    if check and det(g) == 0:
        raise BasisViolationError("vertex classes are not a basis")
    return g


def _solve(cs, b):
    vids = cs.vertex_ids()
    try:
        return solve_linear(gram_matrix(cs, check=False), [cs.inc(v, b) for v in vids])
    except DegenerateFormError as exc:
        raise BasisViolationError("vertex classes are not a basis") from exc


def boundary_in_basis(cs: CurveStructure, b) -> tuple:
    """Coordinates of a boundary class in the vertex basis."""
    if b not in cs.boundary_ids():
        raise KeyError(b)
    x = _solve(cs, b)
    g = gram_matrix(cs)
    sq = sum(x[i] * g[i][j] * x[j] for i in range(len(x)) for j in range(len(x)))
    if sq != cs.sq(b):
        raise DataInconsistencyError(f"{b}: solved square {sq} != stored {cs.sq(b)}")
    return x


def class_pairing(cs: CurveStructure, x, y) -> Fraction:
    g = gram_matrix(cs, check=False)
    n = len(g)
    return sum((Fraction(x[i]) * g[i][j] * y[j] for i in range(n) for j in range(n) if x[i] and y[j]),
               Fraction(0))


# -- exceptional vertices and legs ------------------------------------------------

def exceptional_vertices(cs: CurveStructure) -> list:
    out = []
    for v, s in cs.vertices:
        if s != -1 or len(cs.neighbours(v)) != 1:
            continue
        bs = cs.boundary_meeting(v)
        if len(bs) != 1:
            continue
        if any(cs.inc(w, bs[0]) for w in cs.vertex_ids() if w != v):
            continue
        out.append(v)
    return out


def leg(cs: CurveStructure, v) -> tuple:
    if v not in exceptional_vertices(cs):
        raise PreconditionError(f"{v!r} is not an exceptional vertex")
    path = [v]
    prev, cur = v, cs.neighbours(v)[0]
    while True:
        path.append(cur)
        nb = cs.neighbours(cur)
        if len(nb) > 2 or cs.boundary_meeting(cur):
            break
        nxt = [w for w in nb if w != prev]
        if not nxt or nxt[0] in path:
            break
        prev, cur = cur, nxt[0]
    return tuple(path)


class ClassificationTag:
    def __init__(self, exceptional_vertex_ids, is_degenerate, is_regular):
        self.exceptional_vertex_ids = list(exceptional_vertex_ids)
        self.is_degenerate = bool(is_degenerate)
        self.is_regular = bool(is_regular)
        if not is_regular:
            self.verdict = "very-degenerate"
        elif is_degenerate:
            self.verdict = "tamely-degenerate"
        else:
            self.verdict = "regular-nondegenerate"

    def as_dict(self) -> dict:
        return {"exceptional_vertex_ids": self.exceptional_vertex_ids, "is_degenerate": self.is_degenerate,
                "is_regular": self.is_regular, "verdict": self.verdict}

    def __repr__(self):
        return f"ClassificationTag({self.verdict}, exceptional={self.exceptional_vertex_ids})"


def classify(cs: CurveStructure, smooth: dict | None = None) -> ClassificationTag:
    """Regularity and degeneracy.

    ``smooth`` maps boundary ids to whether their image in the glued fiber is
    a smooth curve; it is only consulted when an exceptional vertex exists on
    a regular structure (otherwise the answer does not depend on it).
    """
    exc = exceptional_vertices(cs)
    ends = [leg(cs, e)[-1] for e in exc]
    regular = cs.size() > 1 and all(cs.sq(w) != 0 for w in ends)
    if not exc:
        degenerate = True
    elif not regular:
        degenerate = True  # very degenerate implies degenerate
    else:
        needed = sorted({b for w in ends for b in cs.boundary_meeting(w)})
        if smooth is None or any(b not in smooth for b in needed):
            raise IncompleteInputError(f"smoothness flags needed for boundary components {needed}")
        degenerate = any(cs.inc(w, b) >= 1 and smooth[b] for w in ends for b in needed)
    return ClassificationTag(exc, degenerate, regular)


def type_of(cs: CurveStructure) -> str:
    n = len(cs.boundary)
    if n == 1:
        t = "d1"
    elif n == 2:
        t = "d2"
    elif n == 4 and cs.identified_pair:
        t = "d4"
    else:
        raise UnsupportedTypeError(f"{n} boundary components is not a supported type")
    if t != cs.d_type:
        raise UnsupportedTypeError(f"stored tag {cs.d_type} disagrees with derived {t}")
    return t


# -- canonical forms ------------------------------------------------------------

def _enc(x) -> str:
    return json.dumps(x, sort_keys=True)


def canonical_code(colors: list, edges: dict) -> tuple:
    """Canonical encoding of a vertex- and edge-labeled simple graph.

    Colour refinement followed by exhaustive individualisation; the result is
    the lexicographically least (colour sequence, sorted edge list) over all
    discrete leaves, which is a complete isomorphism invariant.
    """
    n = len(colors)
    cols = [_enc(c) for c in colors]
    adj = [[] for _ in range(n)]
    elist = []
    for (i, j), lab in edges.items():
        le = _enc(lab)
        adj[i].append((le, j))
        adj[j].append((le, i))
        elist.append((i, j, le))
    init = sorted(set(cols))
    start = [init.index(c) for c in cols]

    def refine(cell):
        k = len(set(cell))
        while True:
            sig = [(cell[i], tuple(sorted((lab, cell[j]) for lab, j in adj[i]))) for i in range(n)]
            keys = sorted(set(sig))
            rank = {s: r for r, s in enumerate(keys)}
            cell = [rank[s] for s in sig]
            if len(keys) == k:
                return cell
            k = len(keys)

    best = [None]

    def search(cell):
        cell = refine(cell)
        if len(set(cell)) == n:
            code = (tuple(c for _, c in sorted(zip(cell, cols))),
                    tuple(sorted((min(cell[i], cell[j]), max(cell[i], cell[j]), le) for i, j, le in elist)))
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        counts = {}
        for c in cell:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, k in counts.items() if k > 1)
        for i in range(n):
            if cell[i] == target:
                c2 = [2 * x for x in cell]
                c2[i] -= 1
                search(c2)

    search(start)
    return best[0]


def structure_graph(cs: CurveStructure, tag: str = "") -> tuple:
    """(colours, edges, node names) of the two-sorted graph of a structure."""
    names = [("v", v) for v in cs.vertex_ids()] + [("b", b) for b in cs.boundary_ids()]
    idx = {nm: i for i, nm in enumerate(names)}
    pair = set(cs.identified_pair or ())
    colors = [(tag, "v", s) for _, s in cs.vertices] + [(tag, "b", s, b in pair) for b, s in cs.boundary]
    edges = {}
    for a, b in set(cs.edges):
        edges[(idx[("v", a)], idx[("v", b)])] = "e"
    for (v, b), m in cs.incidence:
        edges[(idx[("v", v)], idx[("b", b)])] = ("i", m)
    for b, c in combinations(cs.boundary_ids(), 2):
        k = cs.boundary_pair(b, c)
        if k:
            edges[(idx[("b", b)], idx[("b", c)])] = ("m", k)
    if cs.identified_pair:
        x, y = cs.identified_pair
        edges[(idx[("b", x)], idx[("b", y)])] = "w"
    return colors, edges, names


def canonical_form(cs: CurveStructure) -> tuple:
    colors, edges, _ = structure_graph(cs)
    return (cs.d_type, canonical_code(colors, edges))


def is_isomorphic(a: CurveStructure, b: CurveStructure) -> bool:
    return canonical_form(a) == canonical_form(b)


# -- reference structures ------------------------------------------------------

def ruled_pair(n: int) -> CurveStructure:
    """Regular d2 structure with two vertices: v1^2 = n, v0^2 = 0."""
    if n < -2:
        raise ValueError("the two-vertex regular structure needs n >= -2")
    return CurveStructure(
        "d2", [("v1", n), ("v0", 0)], [("v1", "v0")], [("D0", 4 + n), ("D1", -n)],
        {("v1", "D0"): n + 2, ("v0", "D0"): 1, ("v0", "D1"): 1},
    )


def degenerate_pair() -> CurveStructure:
    """Very degenerate d2 structure with two vertices."""
    return CurveStructure(
        "d2", [("v0", 0), ("v1", -1)], [("v0", "v1")], [("D0", 4), ("D1", 0)],
        {("v0", "D0"): 2, ("v1", "D1"): 1},
    )


def plane() -> CurveStructure:
    """P^2 with a conic D0 and a line D1."""
    return CurveStructure("d2", [("v0", 1)], [], [("D0", 4), ("D1", 1)], {("v0", "D0"): 2, ("v0", "D1"): 1})


def p2_cubic() -> CurveStructure:
    """P^2 with a nodal cubic: the d1 structure with one vertex."""
    return CurveStructure("d1", [("v0", 1)], [], [("D", 9)], {("v0", "D"): 3})


def d4_chain() -> CurveStructure:
    """d4 structure with four vertices; Dw1, Dw2 are the identified pair."""
    return CurveStructure(
        "d4",
        [("C1", 0), ("C2", -1), ("C3", 7), ("C4", -1)],
        [("C1", "C3"), ("C2", "C3"), ("C3", "C4")],
        [("DX", -9), ("Dw1", -1), ("DY", 9), ("Dw2", -1)],
        {("C1", "DX"): 1, ("C1", "DY"): 1, ("C2", "Dw1"): 1, ("C3", "DY"): 9, ("C4", "Dw2"): 1},
        identified_pair=("Dw1", "Dw2"),
    )


def d1_triple() -> CurveStructure:
    """The d1 structure with three vertices."""
    return CurveStructure(
        "d1", [("a", -1), ("b", -2), ("c", -1)], [("a", "b"), ("a", "c")], [("D", 7)],
        {("a", "D"): 1, ("c", "D"): 1},
    )


def d1_with_minus_two() -> CurveStructure:
    return CurveStructure("d1", [("v0", 0), ("w", -2)], [("v0", "w")], [("D", 8)], {("v0", "D"): 2})


def d1_with_minus_one() -> CurveStructure:
    return CurveStructure("d1", [("P", 0), ("Q", -1)], [("P", "Q")], [("D", 8)], {("P", "D"): 2, ("Q", "D"): 1})


STRUCTURES = {
    "ruled_pair": ruled_pair, "degenerate_pair": degenerate_pair, "plane": plane, "p2_cubic": p2_cubic,
    "d4_chain": d4_chain, "d1_triple": d1_triple, "d1_with_minus_two": d1_with_minus_two, "d1_with_minus_one": d1_with_minus_one,
}


# -- JSON ------------------------------------------------------------------------

def to_dict(cs: CurveStructure) -> dict:
    d = {
        "d_type": cs.d_type,
        "vertices": [{"id": v, "sq": s} for v, s in cs.vertices],
        "edges": [list(e) for e in cs.edges],
        "boundary": [{"id": b, "sq": s} for b, s in cs.boundary],
        "incidence": [{"v": v, "b": b, "m": m} for (v, b), m in cs.incidence],
    }
    if cs.identified_pair:
        d["identified_pair"] = list(cs.identified_pair)
    return d


def to_json(cs: CurveStructure) -> str:
    return json.dumps(to_dict(cs), indent=2)


def _need(d, key, typ, where):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = d[key]
    if typ is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise SchemaError(f"{where}.{key}: expected an integer")
    if typ is not int and not isinstance(val, typ):
        raise SchemaError(f"{where}.{key}: expected {typ.__name__}")
    return val


def from_dict(d: dict, where: str = "$") -> CurveStructure:
    dt = _need(d, "d_type", str, where)
    vs = [(_need(x, "id", str, f"{where}.vertices[{i}]"), _need(x, "sq", int, f"{where}.vertices[{i}]"))
          for i, x in enumerate(_need(d, "vertices", list, where))]
    bs = [(_need(x, "id", str, f"{where}.boundary[{i}]"), _need(x, "sq", int, f"{where}.boundary[{i}]"))
          for i, x in enumerate(_need(d, "boundary", list, where))]
    es = []
    for i, e in enumerate(d.get("edges", [])):
        if not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, str) for x in e):
            raise SchemaError(f"{where}.edges[{i}]: expected a pair of ids")
        es.append(tuple(e))
    inc = []
    for i, x in enumerate(d.get("incidence", [])):
        w = f"{where}.incidence[{i}]"
        inc.append((_need(x, "v", str, w), _need(x, "b", str, w), _need(x, "m", int, w)))
    pair = d.get("identified_pair")
    if pair is not None and (not isinstance(pair, list) or len(pair) != 2):
        raise SchemaError(f"{where}.identified_pair: expected two ids")
    return CurveStructure(dt, vs, es, bs, inc, pair)


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def from_json(text: str) -> CurveStructure:
    return from_dict(loads(text))
