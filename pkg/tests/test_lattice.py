from __future__ import annotations

import itertools

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import QUICK
from k3cusp.lattice import (BilinearLattice, DegenerateFormError, InvalidReferenceError, LatticeSpecError,
                            NotARootError, ShapeError, build_lattice, chamber_membership, e8_cartan, pairing,
                            reflect, reflection_matrix, roots_up_to_height, signature, solve_linear)


def test_atoms():
    U = build_lattice("U")
    assert U.rank == 2 and U.gram == ((0, 1), (1, 0))
    A = build_lattice("⟨-2⟩")
    assert A.gram == ((-2,),)
    assert build_lattice("<-2>").gram == A.gram


def test_m2_rank_and_determinant():
    M = build_lattice("E8(-1)⊕E8(-1)⊕U⊕⟨-2⟩")
    assert M.rank == 19
    # independent check of the block product: 1 * 1 * (-1) * (-2)
    assert M.determinant == int(sympy.Matrix(M.gram).det()) == 2
    assert build_lattice("M2d(1)").gram == M.gram


def test_shortcuts():
    assert build_lattice("L2d(1)").rank == 21
    assert build_lattice("K3").rank == 22
    assert signature(build_lattice("K3")) == (3, 19)


def test_bad_specs():
    for s in ["", "V", "U⊕", "E7(-1)", "<0>"]:
        with pytest.raises((LatticeSpecError, DegenerateFormError)):
            build_lattice(s)
    with pytest.raises(ShapeError):
        BilinearLattice([[1, 0]])


def test_pairings():
    U = build_lattice("U")
    assert pairing(U, (1, 0), (0, 1)) == 1
    assert pairing(U, (1, 1), (1, 1)) == 2
    assert pairing(build_lattice("<-2>"), (1,), (1,)) == -2


def test_reflection_examples():
    U = build_lattice("U")
    r = (1, -1)
    assert reflect(U, r, r) == (-1, 1)
    assert reflect(U, r, (1, 1)) == (1, 1)
    assert reflect(U, r, (1, 0)) == (0, 1)
    with pytest.raises(NotARootError):
        reflect(U, (1, 0), (1, 1))


def test_signatures():
    assert signature(build_lattice("M2d(1)")) == (1, 18)
    assert signature(build_lattice("U")) == (1, 1)
    assert signature(build_lattice("E8(-1)")) == (0, 8)


def test_e8_cartan_is_unimodular_and_definite():
    m = sympy.Matrix(e8_cartan())
    assert m.det() == 1
    assert all(ev > 0 for ev in m.eigenvals())


def _box_roots(L, h, bound, box):
    found = set()
    for v in itertools.product(range(-box, box + 1), repeat=L.rank):
        if pairing(L, v, v) == -2 and abs(pairing(L, v, h)) <= bound:
            w = tuple(-x for x in v)
            t = pairing(L, v, h)
            found.add(w if t < 0 or (t == 0 and w > v) else v)
    return sorted(found)


def test_roots_in_u():
    U = build_lattice("U")
    assert roots_up_to_height(U, (1, 1), 2) == [(1, -1)]
    for b in range(5):
        assert roots_up_to_height(U, (1, 1), b) == _box_roots(U, (1, 1), b, 6)


def test_roots_in_u_plus_minus_two():
    L = build_lattice("U⊕<-2>")
    rs = roots_up_to_height(L, (1, 1, 0), 0)
    assert (0, 0, 1) in rs
    for b in range(4):
        assert roots_up_to_height(L, (1, 1, 0), b) == _box_roots(L, (1, 1, 0), b, 5)
    assert roots_up_to_height(L, (2, 1, 1), 3) == _box_roots(L, (2, 1, 1), 3, 6)


def test_e8_roots():
    E = build_lattice("E8(-1)")
    rs = roots_up_to_height(E, (1,) * 8, 100)
    assert len(rs) == 120
    # box scan of the nonnegative coordinates bounded by the highest root
    high = (2, 3, 4, 6, 5, 4, 3, 2)
    G = E.gram
    box = set()
    for v in itertools.product(*[range(k + 1) for k in high]):
        q = sum(G[i][i] * v[i] * v[i] for i in range(8) if v[i])
        q += 2 * sum(G[i][j] * v[i] * v[j] for i in range(8) for j in range(i + 1, 8) if G[i][j] and v[i] and v[j])
        if q == -2:
            box.add(v)
    assert len(box) == 120
    assert {frozenset((r, tuple(-x for x in r))) for r in rs} == \
        {frozenset((r, tuple(-x for x in r))) for r in box}


def test_roots_reference_errors():
    U = build_lattice("U")
    with pytest.raises(InvalidReferenceError):
        roots_up_to_height(U, (1, 0), 2)


def test_chamber_membership():
    L = build_lattice("U⊕<-2>")
    walls = [(0, 0, 1), (-1, 1, 0)]
    x = (3, 2, -1)
    assert pairing(L, x, x) > 0 and all(pairing(L, x, a) > 0 for a in walls)
    assert chamber_membership(L, x, walls)
    y = reflect(L, walls[0], x)
    assert not chamber_membership(L, y, walls)
    z = (1, 1, 0)
    assert pairing(L, z, walls[0]) == 0
    assert chamber_membership(L, z, walls)


def test_solve_linear():
    assert solve_linear([[2, 1], [1, 0]], [3, 1]) == (1, 1)
    with pytest.raises(DegenerateFormError):
        solve_linear([[1, 1], [1, 1]], [0, 0])


M2 = build_lattice("M2d(1)")
_SEEDS = [tuple(int(i == j) for j in range(19)) for i in range(16)]
_SEEDS += [tuple([0] * 16 + [1, -1, 0]), tuple([0] * 18 + [1])]


@st.composite
def m2_roots(draw):
    r = draw(st.sampled_from(_SEEDS))
    for k in draw(st.lists(st.integers(0, len(_SEEDS) - 1), max_size=4)):
        r = reflect(M2, _SEEDS[k], r)
    return r


vectors19 = st.lists(st.integers(-5, 5), min_size=19, max_size=19).map(tuple)


def check_reflection(r, x, y):
    assert M2.square(r) == -2
    rx, ry = reflect(M2, r, x), reflect(M2, r, y)
    assert reflect(M2, r, rx) == x
    assert pairing(M2, rx, ry) == pairing(M2, x, y)
    g = reflection_matrix(M2, r)
    assert tuple(sum(a * b for a, b in zip(row, x)) for row in g) == rx


test_reflection_involution_and_isometry_on_m2 = QUICK(given(m2_roots(), vectors19, vectors19)(check_reflection))
