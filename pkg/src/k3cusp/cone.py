"""Rational polyhedral cones, cone systems and common refinements.

A cone is stored by its primitive extreme rays.  The inequality description
(facet normals plus the equations cutting out the linear span) is derived by
an exact double description run and cached on first use.
"""
from __future__ import annotations

import json
from collections import deque
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Iterable, Sequence

from .lattice import BilinearLattice, InvalidReferenceError, ShapeError, det, pairing


class ConeError(ValueError):
    pass


class NondegeneracyError(ConeError):
    """The generators span a cone containing a line."""


class InvalidIsometryError(ConeError):
    pass


class InvalidInputError(ConeError):
    pass


def primitive(v) -> tuple:
    """Scale a rational vector to the primitive integer vector on its ray."""
    if all(type(x) is int for x in v):
        g = reduce(gcd, v, 0)
        return tuple(v) if g in (0, 1) else tuple(x // g for x in v)
    fr = [Fraction(x) for x in v]
    den = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def double_description(dim: int, ineqs: Sequence, eqs: Sequence = ()) -> tuple:
    """Solve {x : a.x >= 0 for a in ineqs, e.x = 0 for e in eqs}.

    Returns (lineality basis, extreme rays modulo lineality), both integral.
    Constraints are added one at a time (Motzkin's incremental scheme); the
    new rays on each hyperplane come from pairs that pass the combinatorial
    adjacency test.
    """
    lin = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    rays: list = []  # (vector, frozenset of tight constraint indices)
    cons = [(tuple(e), True) for e in eqs] + [(tuple(a), False) for a in ineqs]
    for idx, (a, is_eq) in enumerate(cons):
        if len(a) != dim:
            raise ShapeError("constraint of wrong length")
        hit = next((l for l in lin if _dot(a, l) != 0), None)
        if hit is not None:
            s = _dot(a, hit)
            if s < 0:
                hit = tuple(-x for x in hit)
                s = -s
            new_lin = []
            for l in lin:
                if l is hit or l == hit or l == tuple(-x for x in hit):
                    continue
                t = _dot(a, l)
                new_lin.append(primitive([s * x - t * y for x, y in zip(l, hit)]) if t else l)
            lin = [l for l in new_lin if any(l)]
            # rays slide along `hit` onto the hyperplane
            new_rays = []
            for r, z in rays:
                t = _dot(a, r)
                v = primitive([s * x - t * y for x, y in zip(r, hit)]) if t else r
                new_rays.append((v, z | {idx}))
            if not is_eq:
                new_rays.append((primitive(hit), frozenset(range(idx))))
            rays = new_rays
            continue
        pos, zero, neg = [], [], []
        for r, z in rays:
            t = _dot(a, r)
            (pos if t > 0 else neg if t < 0 else zero).append((r, z, t))
        new = [(r, z | {idx}) for r, z, _ in zero]
        if not is_eq:
            new += [(r, z) for r, z, _ in pos]
        allz = [z for _, z in rays]
        for p, zp, tp in pos:
            for n, zn, tn in neg:
                common = zp & zn
                # adjacent iff no third ray is tight on all common constraints
                if any(common <= z and z is not zp and z is not zn for z in allz):
                    continue
                v = primitive([tp * x - tn * y for x, y in zip(n, p)])
                new.append((v, common | {idx}))
        rays = new
    uniq = {}
    for r, _ in rays:
        uniq.setdefault(r, None)
    return lin, list(uniq)


class RationalCone:
    """Finitely generated pointed cone in Q^n."""

    __slots__ = ("ambient_dim", "rays", "_h")

    def __init__(self, dim: int, rays: Iterable = (), _trusted: bool = False):
        if dim < 1:
            raise ShapeError("ambient dimension must be positive")
        if _trusted:
            self.ambient_dim = dim
            self._h = None
            self.rays = tuple(sorted({tuple(r) for r in rays}))
            return
        rs = []
        for r in rays:
            if len(r) != dim:
                raise ShapeError(f"ray {tuple(r)} not in Q^{dim}")
            p = primitive(r)
            if any(p):
                rs.append(p)
        self.ambient_dim = dim
        self._h = None
        rs = sorted(set(rs))
        eqs, facets = _v_to_h(dim, tuple(rs))
        lin, ext = double_description(dim, facets, eqs)
        if lin:
            raise NondegeneracyError("generators span a cone containing a line")
        self.rays = tuple(sorted(ext))
        self._h = (eqs, facets)

    # -- inequality side ---------------------------------------------------
    @property
    def equations(self) -> tuple:
        return self._hrep()[0]

    @property
    def facet_normals(self) -> tuple:
        return self._hrep()[1]

    def _hrep(self):
        if self._h is None:
            self._h = _v_to_h(self.ambient_dim, self.rays)
        return self._h

    @property
    def dim(self) -> int:
        return self.ambient_dim - len(self.equations)

    def contains(self, x) -> bool:
        if len(x) != self.ambient_dim:
            raise ShapeError("point of wrong length")
        eqs, facets = self._hrep()
        return all(_dot(e, x) == 0 for e in eqs) and all(_dot(f, x) >= 0 for f in facets)

    def contains_cone(self, other: "RationalCone") -> bool:
        return all(self.contains(r) for r in other.rays)

    def same_as(self, other: "RationalCone") -> bool:
        """Semantic equality: mutual containment."""
        return self.contains_cone(other) and other.contains_cone(self)

    def canonical(self) -> tuple:
        return self.rays

    def is_zero(self) -> bool:
        return not self.rays

    def __eq__(self, other):
        return isinstance(other, RationalCone) and self.ambient_dim == other.ambient_dim and self.rays == other.rays

    def __hash__(self):
        return hash((self.ambient_dim, self.rays))

    def __repr__(self):
        return f"RationalCone({self.ambient_dim}, {list(self.rays)})"


@lru_cache(maxsize=65536)
def _v_to_h(dim: int, rays: tuple) -> tuple:
    # the polar cone: its lineality gives the span equations, its rays the facets
    lin, ext = double_description(dim, rays)
    return tuple(sorted(primitive(l) for l in lin)), tuple(sorted(ext))


@lru_cache(maxsize=65536)
def _h_to_cone(dim: int, eqs: tuple, ineqs: tuple) -> RationalCone:
    lin, ext = double_description(dim, ineqs, eqs)
    if lin:
        raise NondegeneracyError("inequality system does not cut out a pointed cone")
    return RationalCone(dim, ext, _trusted=True)


def cone_from_generators(dim: int, rays: Iterable) -> RationalCone:
    return RationalCone(dim, rays)


def zero_cone(dim: int) -> RationalCone:
    return RationalCone(dim, (), _trusted=True)


def cone_from_inequalities(dim: int, ineqs: Iterable, eqs: Iterable = ()) -> RationalCone:
    return _h_to_cone(dim, tuple(tuple(e) for e in eqs), tuple(tuple(a) for a in ineqs))


def intersect_cones(a: RationalCone, b: RationalCone) -> RationalCone:
    if a.ambient_dim != b.ambient_dim:
        raise ShapeError("cones live in different ambient spaces")
    if a.is_zero() or b.is_zero():
        return zero_cone(a.ambient_dim)
    if b.contains_cone(a):
        return a
    if a.contains_cone(b):
        return b
    return _h_to_cone(a.ambient_dim, tuple(sorted(set(a.equations + b.equations))),
                      tuple(sorted(set(a.facet_normals + b.facet_normals))))


def faces(c: RationalCone) -> list:
    """Every face, from c itself down to the origin, without repetition."""
    facets = c.facet_normals
    start = frozenset(c.rays)
    seen = {start}
    todo = [start]
    while todo:
        f = todo.pop()
        for n in facets:
            g = frozenset(r for r in f if _dot(n, r) == 0)
            if g != f and g not in seen:
                seen.add(g)
                todo.append(g)
    out = [RationalCone(c.ambient_dim, sorted(s), _trusted=True) for s in seen]
    return sorted(out, key=lambda k: (len(k.rays), k.rays))


class ConeCollection:
    def __init__(self, dim: int, cones: Iterable = ()):
        self.ambient_dim = dim
        cs = {}
        for k in cones:
            if k.ambient_dim != dim:
                raise ShapeError("all cones of a collection share the ambient dimension")
            cs.setdefault(k.rays, k)
        self.cones = sorted(cs.values(), key=lambda k: (len(k.rays), k.rays))

    def __len__(self):
        return len(self.cones)

    def __iter__(self):
        return iter(self.cones)

    def keys(self) -> set:
        return {k.rays for k in self.cones}

    def maximal(self) -> list:
        return [k for k in self.cones if not any(o is not k and o.contains_cone(k) for o in self.cones)]

    def with_faces(self) -> "ConeCollection":
        return ConeCollection(self.ambient_dim, [f for k in self.cones for f in faces(k)])

    def same_as(self, other: "ConeCollection") -> bool:
        return self.ambient_dim == other.ambient_dim and self.keys() == other.keys()

    def __repr__(self):
        return f"ConeCollection({self.ambient_dim}, {len(self.cones)} cones)"


class SystemReport:
    """Outcome of a cone system check; falsy when a violation was found."""

    def __init__(self, ok: bool, kind: str = "", witness: tuple = ()):
        self.ok = ok
        self.kind = kind
        self.witness = witness

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            return "SystemReport(ok)"
        return f"SystemReport({self.kind}: {self.witness})"


def is_rational_cone_system(S: ConeCollection) -> SystemReport:
    keys = S.keys()
    for k in S.cones:
        for f in faces(k):
            if f.rays not in keys:
                return SystemReport(False, "missing face", (k, f))
    cs = S.cones
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            m = intersect_cones(cs[i], cs[j])
            if m.rays not in keys:
                return SystemReport(False, "intersection not a member", (cs[i], cs[j], m))
    return SystemReport(True)


def restriction_is_cone_system(S: ConeCollection, tests: Iterable) -> SystemReport:
    """Check the restriction of S to each supplied test subcone."""
    for t in tests:
        R = ConeCollection(S.ambient_dim, [intersect_cones(k, t) for k in S.cones]).with_faces()
        rep = is_rational_cone_system(R)
        if not rep:
            return SystemReport(False, f"restriction to {t!r}: " + rep.kind, rep.witness)
    return SystemReport(True)


def common_refinement(A: ConeCollection, B: ConeCollection) -> ConeCollection:
    if A.ambient_dim != B.ambient_dim:
        raise ShapeError("collections live in different ambient spaces")
    for name, S in (("first", A), ("second", B)):
        rep = is_rational_cone_system(S)
        if not rep:
            raise InvalidInputError(f"{name} collection is not a rational cone system: {rep!r}")
    out = {}
    for a in A.cones:
        for b in B.cones:
            m = intersect_cones(a, b)
            out.setdefault(m.rays, m)
    return ConeCollection(A.ambient_dim, out.values()).with_faces()


def positive_cone_rc_contains(L: BilinearLattice, x, ref) -> bool:
    """Membership in the rational closure of the component of x^2 > 0 holding ref."""
    if pairing(L, ref, ref) <= 0:
        raise InvalidReferenceError("reference vector must have positive square")
    if not any(x):
        return True
    return pairing(L, x, x) >= 0 and pairing(L, x, ref) > 0


# -- isometries ----------------------------------------------------------------

def _matvec(g, v):
    return tuple(sum(g[i][j] * v[j] for j in range(len(v))) for i in range(len(g)))


def apply_isometry(c: RationalCone, g) -> RationalCone:
    n = c.ambient_dim
    if len(g) != n or any(len(r) != n for r in g):
        raise ShapeError("matrix size does not match the cone")
    if abs(det(g)) != 1:
        raise InvalidIsometryError("matrix is not invertible over the integers")
    return RationalCone(n, [_matvec(g, r) for r in c.rays], _trusted=True)


def orbit(c: RationalCone, gens: Sequence, bound: int) -> tuple:
    """Breadth-first orbit; returns (cones, exhausted)."""
    seen = {c.rays: c}
    q = deque([c])
    while q:
        k = q.popleft()
        for g in gens:
            img = apply_isometry(k, g)
            if img.rays not in seen:
                if len(seen) >= bound:
                    return list(seen.values()), False
                seen[img.rays] = img
                q.append(img)
    return list(seen.values()), True


# -- fan JSON --------------------------------------------------------------------

def fan_to_json(S: ConeCollection) -> str:
    cones = sorted(S.cones, key=lambda k: k.rays)
    doc = {"ambient_dim": S.ambient_dim, "cones": [{"rays": [list(r) for r in k.rays]} for k in cones]}
    return json.dumps(doc, indent=2, sort_keys=True)


def fan_from_json(text: str) -> ConeCollection:
    doc = json.loads(text)
    n = doc["ambient_dim"]
    return ConeCollection(n, [RationalCone(n, k["rays"]) for k in doc["cones"]])
