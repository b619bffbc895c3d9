"""Integral lattices with a nondegenerate symmetric form.

Everything is exact: Python integers and ``fractions.Fraction``.  Vectors are
plain tuples of coordinates in the lattice basis.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

Vector = tuple
Matrix = tuple


class LatticeError(ValueError):
    pass


class DegenerateFormError(LatticeError):
    pass


class ShapeError(LatticeError):
    pass


class NotARootError(LatticeError):
    pass


class InvalidReferenceError(LatticeError):
    pass


class LatticeSpecError(LatticeError):
    pass


# Bourbaki numbering: the chain 1-3-4-5-6-7-8 with node 2 hanging off node 4.
E8_EDGES = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))


def e8_cartan() -> Matrix:
    c = [[0] * 8 for _ in range(8)]
    for i in range(8):
        c[i][i] = 2
    for a, b in E8_EDGES:
        c[a - 1][b - 1] = c[b - 1][a - 1] = -1
    return tuple(tuple(r) for r in c)


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    d = Fraction(1)
    for i in range(n):
        p = next((k for k in range(i, n) if a[k][i] != 0), None)
        if p is None:
            return Fraction(0)
        if p != i:
            a[i], a[p] = a[p], a[i]
            d = -d
        d *= a[i][i]
        for k in range(i + 1, n):
            f = a[k][i] / a[i][i]
            if f:
                for j in range(i, n):
                    a[k][j] -= f * a[i][j]
    return d


@dataclass(frozen=True)
class BilinearLattice:
    gram: Matrix
    name: str | None = None

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        n = len(g)
        if n == 0 or any(len(r) != n for r in g):
            raise ShapeError("gram matrix must be square and nonempty")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise LatticeError(f"gram not symmetric at ({i},{j})")
        if det(g) == 0:
            raise DegenerateFormError("gram matrix is degenerate")
        object.__setattr__(self, "gram", g)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def determinant(self) -> int:
        return int(det(self.gram))

    def pairing(self, v, w):
        return pairing(self, v, w)

    def square(self, v):
        return pairing(self, v, v)

    def basis(self) -> list:
        n = self.rank
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]


def direct_sum(*lats: BilinearLattice, name: str | None = None) -> BilinearLattice:
    n = sum(L.rank for L in lats)
    g = [[0] * n for _ in range(n)]
    off = 0
    for L in lats:
        for i in range(L.rank):
            for j in range(L.rank):
                g[off + i][off + j] = L.gram[i][j]
        off += L.rank
    return BilinearLattice(g, name)


# -- the lattice grammar -------------------------------------------------------

_ATOM_RANK1 = re.compile(r"^[<⟨]\s*([+-]?\d+)\s*[>⟩]$")
_SHORT = re.compile(r"^(M2d|L2d)\(\s*(\d+)\s*\)$")


def _atom(tok: str) -> list:
    if tok == "U":
        return [BilinearLattice(((0, 1), (1, 0)), "U")]
    if tok == "E8(-1)":
        c = e8_cartan()
        return [BilinearLattice(tuple(tuple(-x for x in r) for r in c), "E8(-1)")]
    m = _ATOM_RANK1.match(tok)
    if m:
        k = int(m.group(1))
        if k == 0:
            raise DegenerateFormError("rank-one atom <0> is degenerate")
        return [BilinearLattice(((k,),), f"<{k}>")]
    m = _SHORT.match(tok)
    if m:
        d = int(m.group(2))
        if d < 1:
            raise LatticeSpecError("degree parameter must be positive")
        us = 1 if m.group(1) == "M2d" else 2
        return _atom("E8(-1)") * 2 + _atom("U") * us + _atom(f"<{-2 * d}>")
    if tok == "K3":
        return _atom("E8(-1)") * 2 + _atom("U") * 3
    raise LatticeSpecError(f"unknown lattice atom {tok!r}")


def build_lattice(spec: str) -> BilinearLattice:
    """Parse ``"E8(-1)⊕E8(-1)⊕U⊕<-2>"`` style expressions."""
    s = spec.replace("−", "-").replace(" ", "")
    if not s:
        raise LatticeSpecError("empty lattice spec")
    parts = []
    depth = 0
    cur = ""
    # split on ⊕ or on + outside of brackets (so <+2> survives)
    for ch in s:
        if ch in "(<⟨":
            depth += 1
        elif ch in ")>⟩":
            depth -= 1
        if depth == 0 and ch in "⊕+":
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    if any(not p for p in parts):
        raise LatticeSpecError(f"malformed lattice spec {spec!r}")
    atoms = [a for p in parts for a in _atom(p)]
    return direct_sum(*atoms, name=spec)


# -- basic operations ---------------------------------------------------------

def _check(L: BilinearLattice, *vs):
    for v in vs:
        if len(v) != L.rank:
            raise ShapeError(f"vector of length {len(v)} in a rank {L.rank} lattice")


def pairing(L: BilinearLattice, v, w):
    _check(L, v, w)
    g = L.gram
    return sum(v[i] * sum(g[i][j] * w[j] for j in range(L.rank) if w[j]) for i in range(L.rank) if v[i])


def _require_root(L, r):
    if pairing(L, r, r) != -2:
        raise NotARootError(f"{tuple(r)} has square {pairing(L, r, r)}, not -2")


def reflect(L: BilinearLattice, r, x) -> Vector:
    """x + (x.r) r, the reflection in the (-2)-vector r."""
    _check(L, r, x)
    _require_root(L, r)
    c = pairing(L, x, r)
    return tuple(a + c * b for a, b in zip(x, r))


def reflection_matrix(L: BilinearLattice, r) -> Matrix:
    """Integer matrix (acting on column vectors) of the reflection in r."""
    cols = [reflect(L, r, e) for e in L.basis()]
    return tuple(tuple(cols[j][i] for j in range(L.rank)) for i in range(L.rank))


def inertia(gram: Sequence[Sequence]) -> tuple:
    """(positives, negatives, zeros) by symmetric Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in gram]
    n = len(a)
    pos = neg = 0
    i = 0
    while i < n:
        p = next((k for k in range(i, n) if a[k][k] != 0), None)
        if p is None:
            pair = next(((k, l) for k in range(i, n) for l in range(k + 1, n) if a[k][l] != 0), None)
            if pair is None:
                break  # the remaining block is zero
            k, l = pair
            # row/col k += row/col l makes the diagonal entry 2 a_kl
            for j in range(n):
                a[k][j] += a[l][j]
            for j in range(n):
                a[j][k] += a[j][l]
            p = k
        if p != i:
            a[i], a[p] = a[p], a[i]
            for row in a:
                row[i], row[p] = row[p], row[i]
        piv = a[i][i]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        for k in range(i + 1, n):
            f = a[k][i] / piv
            if f:
                for j in range(i, n):
                    a[k][j] -= f * a[i][j]
        # keep the trailing block symmetric
        for k in range(i + 1, n):
            a[i][k] = Fraction(0)
            a[k][i] = Fraction(0)
        i += 1
    return pos, neg, n - pos - neg


def signature(L: BilinearLattice) -> tuple:
    p, q, _ = inertia(L.gram)
    return p, q


# -- roots ---------------------------------------------------------------------

def _cholesky_form(gram):
    """Upper-triangular data q with P(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2."""
    n = len(gram)
    q = [[Fraction(x) for x in row] for row in gram]
    for i in range(n):
        if q[i][i] <= 0:
            raise LatticeError("form is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _int_range(c: Fraction, s: Fraction):
    """Integers k with (k + c)^2 <= s."""
    if s < 0:
        return range(0)
    r = isqrt(s.numerator // s.denominator) + 1
    lo = -c - r
    lo = lo.numerator // lo.denominator
    hi = -c + r
    hi = -((-hi.numerator) // hi.denominator)
    ks = [k for k in range(lo, hi + 1) if (k + c) ** 2 <= s]
    return range(ks[0], ks[-1] + 1) if ks else range(0)


def short_vectors(gram, bound) -> list:
    """All integer x with x^T gram x <= bound, for positive definite gram.

    Fincke-Pohst style: complete the square coordinate by coordinate and prune
    with the remaining budget at every level.
    """
    n = len(gram)
    q = _cholesky_form(gram)
    bound = Fraction(bound)
    out = []
    x = [0] * n

    def rec(i, budget):
        c = sum((q[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        for k in _int_range(c, budget / q[i][i]):
            x[i] = k
            rest = budget - q[i][i] * (k + c) ** 2
            if i == 0:
                out.append(tuple(x))
            else:
                rec(i - 1, rest)
        x[i] = 0

    rec(n - 1, bound)
    return out


def is_negative_definite(L: BilinearLattice) -> bool:
    return signature(L) == (0, L.rank)


def _normalize(L, h, v):
    t = pairing(L, v, h)
    if t < 0 or (t == 0 and tuple(-a for a in v) > tuple(v)):
        return tuple(-a for a in v)
    return tuple(v)


def roots_up_to_height(L: BilinearLattice, h, bound: int) -> list:
    """Roots v (v^2 = -2) with |v.h| <= bound, one per pair {v, -v}.

    The representative has v.h >= 0; at height 0 the lexicographically larger
    of v, -v is kept.  A negative definite lattice accepts any h, there the
    height only fixes the sign convention.
    """
    _check(L, h)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    n = L.rank
    hh = pairing(L, h, h)
    if is_negative_definite(L):
        pform = [[-x for x in row] for row in L.gram]
        budget = Fraction(2)
    else:
        if hh <= 0:
            raise InvalidReferenceError("height reference must have positive square")
        gh = [sum(L.gram[i][j] * h[j] for j in range(n)) for i in range(n)]
        # P(x) = 2 (x.h)^2 / h^2 - x^2 is positive definite on a hyperbolic lattice
        pform = [[Fraction(2 * gh[i] * gh[j], hh) - L.gram[i][j] for j in range(n)] for i in range(n)]
        budget = Fraction(2 * bound * bound, hh) + 2
    found = set()
    for v in short_vectors(pform, budget):
        if pairing(L, v, v) == -2 and abs(pairing(L, v, h)) <= bound:
            found.add(_normalize(L, h, v))
    return sorted(found)


def chamber_membership(L: BilinearLattice, x, simple_roots: Iterable) -> bool:
    """Closed chamber test: x^2 >= 0 and x.a >= 0 for each listed root."""
    _check(L, x)
    roots = list(simple_roots)
    for a in roots:
        _check(L, a)
        _require_root(L, a)
    if pairing(L, x, x) < 0:
        return False
    return all(pairing(L, x, a) >= 0 for a in roots)


def solve_linear(m: Sequence[Sequence], b: Sequence) -> tuple:
    """Exact solution of m x = b for a square nonsingular m."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(m, b)]
    for i in range(n):
        p = next((k for k in range(i, n) if a[k][i] != 0), None)
        if p is None:
            raise DegenerateFormError("singular system")
        a[i], a[p] = a[p], a[i]
        piv = a[i][i]
        a[i] = [x / piv for x in a[i]]
        for k in range(n):
            if k != i and a[k][i]:
                f = a[k][i]
                a[k] = [x - f * y for x, y in zip(a[k], a[i])]
    return tuple(row[n] for row in a)
