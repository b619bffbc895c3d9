from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import QUICK
from k3cusp.cone import (ConeCollection, InvalidInputError, InvalidIsometryError, NondegeneracyError, RationalCone,
                         apply_isometry, common_refinement, cone_from_generators, cone_from_inequalities, faces,
                         fan_from_json, fan_to_json, intersect_cones, is_rational_cone_system, orbit,
                         positive_cone_rc_contains, primitive, restriction_is_cone_system, zero_cone)
from k3cusp.lattice import build_lattice, reflection_matrix


def C(*rays, dim=None):
    return cone_from_generators(dim or len(rays[0]), rays)


def fan(*cones):
    return ConeCollection(cones[0].ambient_dim, cones).with_faces()


QUADRANTS = fan(C((1, 0), (0, 1)), C((0, 1), (-1, 0)), C((-1, 0), (0, -1)), C((0, -1), (1, 0)))


def test_generators_are_minimal():
    assert C((1, 0), (0, 1), (1, 1)).rays == ((0, 1), (1, 0))


def test_zero_cone():
    z = cone_from_generators(2, [])
    assert z.is_zero() and z.dim == 0


def test_line_rejected():
    with pytest.raises(NondegeneracyError):
        C((1, 0), (-1, 0))


def test_intersections():
    q = C((1, 0), (0, 1))
    assert intersect_cones(q, q).same_as(q)
    # the wedge between the diagonals meets the quadrant in a two dimensional cone
    assert intersect_cones(q, C((1, 1), (-1, 1))).rays == ((0, 1), (1, 1))
    assert intersect_cones(C((1, 0), (1, 1)), C((1, 1), (0, 1))).rays == ((1, 1),)
    assert intersect_cones(q, zero_cone(2)).is_zero()


def test_faces():
    assert [f.rays for f in faces(zero_cone(2))] == [()]
    assert len(faces(C((1, 2)))) == 2
    assert len(faces(C((1, 0), (0, 1)))) == 4


def test_cone_systems():
    assert is_rational_cone_system(QUADRANTS)
    bad = fan(C((1, 0), (1, 1)), C((2, 1), (0, 1)))
    rep = is_rational_cone_system(bad)
    assert not rep and rep.kind == "intersection not a member"
    assert is_rational_cone_system(ConeCollection(2, [zero_cone(2)]))


def test_restriction():
    tests = [C((1, 0), (1, 1)), C((1, 2), (-1, 1))]
    assert restriction_is_cone_system(QUADRANTS, tests)


def test_refinement_examples():
    assert common_refinement(QUADRANTS, QUADRANTS).same_as(QUADRANTS)
    R8 = common_refinement(QUADRANTS, fan(C((1, 1), (1, -1)), C((1, 1), (-1, 1)),
                                          C((-1, 1), (-1, -1)), C((-1, -1), (1, -1))))
    assert len([k for k in R8 if k.dim == 2]) == 8
    assert common_refinement(QUADRANTS, ConeCollection(2, [zero_cone(2)])).same_as(ConeCollection(2, [zero_cone(2)]))
    with pytest.raises(InvalidInputError):
        common_refinement(QUADRANTS, ConeCollection(2, [C((1, 0), (0, 1))]))


def test_positive_cone():
    L = build_lattice("U⊕<-2>")
    ref = (1, 1, 0)
    assert positive_cone_rc_contains(L, ref, ref)
    assert positive_cone_rc_contains(L, (1, 0, 0), ref)
    assert not positive_cone_rc_contains(L, (-1, -1, 0), ref)


def test_isometries():
    q = C((1, 0), (0, 1))
    assert apply_isometry(q, [[1, 0], [0, 1]]).same_as(q)
    rot = [[0, -1], [1, 0]]
    cones, done = orbit(q, [rot], 10)
    assert len(cones) == 4 and done
    cones, done = orbit(q, [rot], 2)
    assert len(cones) == 2 and not done
    with pytest.raises(InvalidIsometryError):
        apply_isometry(q, [[2, 0], [0, 1]])
    L = build_lattice("U⊕<-2>")
    g = reflection_matrix(L, (0, 0, 1))
    k = C((1, 0, 1), (0, 1, 0), (1, 1, 1))
    assert apply_isometry(apply_isometry(k, g), g).same_as(k)


def test_fan_json_round_trip():
    assert fan_from_json(fan_to_json(QUADRANTS)).same_as(QUADRANTS)


# -- brute force oracles -----------------------------------------------------------

def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def brute_facets(rays):
    """Facet normals of a full dimensional cone by testing every candidate hyperplane."""
    n = len(rays[0])
    if n == 2:
        cands = [(-r[1], r[0]) for r in rays] + [(r[1], -r[0]) for r in rays]
    else:
        cands = []
        for a, b in itertools.combinations(rays, 2):
            c = cross(a, b)
            cands += [c, tuple(-x for x in c)]
    out = set()
    for c in cands:
        if any(c) and all(dot(c, r) >= 0 for r in rays):
            out.add(primitive(c))
    return out


def brute_rays(normals, n):
    """Extreme rays of {x : c.x >= 0} for pointed cones in dimension 2 or 3."""
    if n == 2:
        cands = [(-c[1], c[0]) for c in normals] + [(c[1], -c[0]) for c in normals]
    else:
        cands = []
        for a, b in itertools.combinations(normals, 2):
            c = cross(a, b)
            cands += [c, tuple(-x for x in c)]
    out = set()
    for c in cands:
        if any(c) and all(dot(c, m) >= 0 for m in normals):
            tight = [m for m in normals if dot(c, m) == 0]
            if n == 2 or any(any(cross(a, b)) for a, b in itertools.combinations(tight, 2)):
                out.add(primitive(c))
    return out


def brute_intersection(a_rays, b_rays):
    n = len(a_rays[0])
    return brute_rays(list(brute_facets(a_rays)) + list(brute_facets(b_rays)), n)


def full_dim(rays):
    if len(rays[0]) == 2:
        return rays[0][0] * rays[1][1] - rays[0][1] * rays[1][0] != 0
    return dot(cross(rays[0], rays[1]), rays[2]) != 0


coord = st.integers(-4, 4)


def simplicial(n):
    return st.lists(st.tuples(*[coord] * n), min_size=n, max_size=n).filter(full_dim)


fan_pairs = st.sampled_from([2, 3]).flatmap(lambda n: st.tuples(simplicial(n), simplicial(n)))


def check_refinement(pair):
    a_rays, b_rays = pair
    a, b = C(*a_rays), C(*b_rays)
    A, B = fan(a), fan(b)
    # intersection of the top cones by brute force
    got = intersect_cones(a, b)
    assert set(got.rays) == brute_intersection(a_rays, b_rays)
    R = common_refinement(A, B)
    assert common_refinement(A, A).same_as(A)
    # every cone of the refinement lies in a cone of each input
    for k in R:
        assert any(x.contains_cone(k) for x in A) and any(x.contains_cone(k) for x in B)
    # oracle: all pairwise intersections with their faces
    oracle = ConeCollection(a.ambient_dim, [intersect_cones(x, y) for x in A for y in B]).with_faces()
    assert R.same_as(oracle)
    assert is_rational_cone_system(R)


gens = st.integers(2, 4).flatmap(lambda n: st.lists(st.tuples(*[coord] * n), min_size=1, max_size=6))


def check_double_description(vs):
    n = len(vs[0])
    try:
        k = cone_from_generators(n, vs)
    except NondegeneracyError:
        return
    facets = k.facet_normals
    eqs = k.equations
    for v in vs:
        assert all(dot(f, v) >= 0 for f in facets)
        assert all(dot(e, v) == 0 for e in eqs)
    # each ray is a generator direction
    prim = {primitive(v) for v in vs if any(v)}
    assert set(k.rays) <= prim
    # back from the inequalities
    back = cone_from_inequalities(n, facets, eqs)
    assert back.rays == k.rays
    # every facet is tight on at least dim - 1 rays
    for f in facets:
        assert sum(dot(f, r) == 0 for r in k.rays) >= k.dim - 1
    # every generator lies in the cone
    assert all(k.contains(v) for v in vs)


test_refinement_against_pairwise_oracle = QUICK(given(fan_pairs)(check_refinement))
test_double_description_consistency = QUICK(given(gens)(check_double_description))
