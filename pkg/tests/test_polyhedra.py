"""Polyhedral geometry: membership, cones, faces, projections, unions."""

import itertools
import random

import pytest

from plqstab import (PolyCone, Polyhedron, PolyUnion, critical_cone, dual_cone,
                     fm_project, horizon_cone, limiting_normal_cone_union,
                     normal_cone, polar_cone, rat, tangent_cone)
from plqstab.rational import vdot

ORTHANT2 = Polyhedron([(-1, 0), (0, -1)], [0, 0])


def rand_cone(rng, dim):
    rows = [tuple(rat(rng.randint(-2, 2)) for _ in range(dim))
            for _ in range(rng.randint(0, 4))]
    return PolyCone(rows, dim=dim)


def rand_polyhedron(rng, dim, nonempty=True):
    while True:
        rows = [tuple(rat(rng.randint(-2, 2)) for _ in range(dim))
                for _ in range(rng.randint(1, 4))]
        rhs = [rat(rng.randint(0 if nonempty else -2, 3)) for _ in rows]
        p = Polyhedron(rows, rhs).with_dim(dim)
        if not nonempty or not p.is_empty():
            return p


# -- membership and active sets ---------------------------------------------------


def test_membership_and_active_set():
    assert ORTHANT2.contains((0, 1))
    face = ORTHANT2.active_set((0, 1))
    assert face.tight == frozenset({0})        # the row for y1 >= 0
    assert not ORTHANT2.contains((-1, 0))
    with pytest.raises(ValueError):
        ORTHANT2.active_set((-1, 0))


def test_active_set_by_substitution():
    y = Polyhedron([(1, 1), (-1, 0), (0, -1)], [1, 0, 0])
    face = y.active_set((1, 0))
    # tight rows: y1 + y2 <= 1 and y2 >= 0
    assert face.tight == frozenset({0, 2})


# -- tangent / normal / critical ----------------------------------------------------


def test_tangent_cone_examples():
    t = tangent_cone(ORTHANT2, (0, 0))
    assert t.contains((1, 1)) and not t.contains((-1, 0))  # equals the orthant
    t_int = tangent_cone(ORTHANT2, (2, 3))
    assert t_int.contains((-5, -5))                         # whole space
    t_edge = tangent_cone(ORTHANT2, (0, 1))                 # R_+ x R
    assert t_edge.contains((0, -4)) and t_edge.contains((1, 7))
    assert not t_edge.contains((-1, 0))
    with pytest.raises(ValueError):
        tangent_cone(ORTHANT2, (-1, 0))


def test_normal_cone_examples():
    n0 = normal_cone(ORTHANT2, (0, 0))
    assert n0.contains((-1, -2)) and not n0.contains((1, 0))  # R^2_-
    n_int = normal_cone(ORTHANT2, (1, 1))
    assert n_int.is_trivial()
    n_edge = normal_cone(ORTHANT2, (0, 1))                    # R_- x {0}
    assert n_edge.contains((-3, 0))
    assert not n_edge.contains((0, 1)) and not n_edge.contains((1, 0))


def test_normal_is_polar_of_tangent_on_random_boundary_points():
    rng = random.Random(7)
    checked = 0
    while checked < 40:
        p = rand_polyhedron(rng, rng.randint(1, 3))
        pt = p.some_point()
        if pt is None or not p.tight_rows(pt):
            continue
        assert normal_cone(p, pt).set_equal(tangent_cone(p, pt).polar())
        checked += 1


def test_critical_cone_examples():
    # orthant at 0 with zero normal: the whole tangent cone
    k = critical_cone(ORTHANT2, (0, 0), (0, 0))
    assert k.set_equal(tangent_cone(ORTHANT2, (0, 0)))
    # rank-one penalty base data: lam = 0, v = 0 gives K = Y for the orthant
    k2 = critical_cone(ORTHANT2, (0, 0), (-1, -1))
    assert k2.contains((0, 0)) and not k2.contains((1, 1))
    with pytest.raises(ValueError):
        critical_cone(ORTHANT2, (0, 0), (1, 1))   # not a normal vector


def test_critical_cone_inside_tangent_cone_randomized():
    rng = random.Random(19)
    for _ in range(30):
        p = rand_polyhedron(rng, 2)
        pt = p.some_point()
        if pt is None:
            continue
        tcone = tangent_cone(p, pt)
        ncone = normal_cone(p, pt)
        lin, rays = ncone.generators()
        gens = list(rays) + list(lin)
        v = (rat(0), rat(0))
        for g in gens:
            v = tuple(a + b for a, b in zip(v, g))
        k = critical_cone(p, pt, v)
        for g in list(k.extreme_rays()) + list(k.lineality_basis()):
            assert tcone.contains(g)


# -- polarity ------------------------------------------------------------------------


def test_dual_cone_convention():
    orth = PolyCone([(-1, 0), (0, -1)], dim=2)
    d = dual_cone(orth)
    assert d.contains((1, 1)) and not d.contains((-1, 0))   # (R^2_+)* = R^2_+
    p = polar_cone(orth)
    assert p.contains((-1, -1)) and not p.contains((1, 0))  # paper-sign polar
    half = PolyCone([(-1, 0)], dim=2)                        # R_+ x R
    dh = dual_cone(half)
    assert dh.contains((1, 0)) and not dh.contains((0, 1)) \
        and not dh.contains((0, -1))                          # R_+ x {0}
    ph = polar_cone(half)
    assert ph.contains((-1, 0)) and not ph.contains((0, 1))  # R_- x {0}
    trivial = PolyCone([(1, 0), (-1, 0), (0, 1), (0, -1)], dim=2)
    assert dual_cone(trivial).contains((5, -9))               # whole space


def test_polar_involution_random():
    rng = random.Random(3)
    for _ in range(40):
        c = rand_cone(rng, rng.randint(1, 4))
        assert c.polar().polar().set_equal(c)


# -- faces -----------------------------------------------------------------------------


def test_faces_examples():
    orth = PolyCone([(-1, 0), (0, -1)], dim=2)
    faces = orth.faces()
    assert len(faces) == 4
    line = PolyCone([(1, 0), (-1, 0)], dim=2)
    assert len(line.faces()) == 1
    wedge = PolyCone([(-1, 0), (-1, 1)], dim=2)
    assert len(wedge.faces()) == 4


def test_faces_match_brute_force_tight_sets():
    rng = random.Random(13)
    for _ in range(12):
        dim = rng.randint(1, 3)
        rows = [tuple(rat(rng.randint(-2, 2)) for _ in range(dim))
                for _ in range(rng.randint(0, 6))]
        cone = PolyCone(rows, dim=dim)
        faces = cone.faces()
        # brute force: distinct solution sets over all tight subsets
        seen = set()
        for subset in itertools.chain.from_iterable(
                itertools.combinations(range(len(cone.rows)), k)
                for k in range(len(cone.rows) + 1)):
            sub = PolyCone(list(cone.rows) +
                           [tuple(-v for v in cone.rows[i]) for i in subset],
                           dim=dim)
            key = frozenset(sub.generators()[0]) | frozenset(sub.generators()[1])
            seen.add(key)
        assert len(faces) == len(seen)


def test_faces_closed_under_intersection():
    cone = PolyCone([(-1, 0, 0), (0, -1, 0), (0, 0, -1)], dim=3)
    faces = cone.faces()
    for f1 in faces:
        for f2 in faces:
            meet = PolyCone(list(f1.piece.rows) + list(f2.piece.rows), dim=3)
            assert any(meet.set_equal(f.piece) for f in faces)


# -- horizon ----------------------------------------------------------------------------


def test_horizon_cone_examples():
    orth_h = horizon_cone(ORTHANT2)
    assert orth_h.set_equal(PolyCone([(-1, 0), (0, -1)], dim=2))
    box = Polyhedron([(1, 0), (-1, 0), (0, 1), (0, -1)], [1, 1, 1, 1])
    assert horizon_cone(box).is_trivial()
    half = Polyhedron([(1, 0)], [1]).with_dim(2)
    h = horizon_cone(half)
    assert h.contains((-2, 5)) and not h.contains((1, 0))
    with pytest.raises(ValueError):
        horizon_cone(Polyhedron.empty(2))


def test_horizon_cone_by_scaling_samples():
    rng = random.Random(29)
    half = Polyhedron([(1, 0)], [1]).with_dim(2)
    h = horizon_cone(half)
    for _ in range(50):
        pt = (rat(rng.randint(-6, 1)), rat(rng.randint(-5, 5)))
        if half.contains(pt):
            # lambda_k * x stays feasible for small scalings iff direction
            # is in the horizon cone or the ray re-enters: sample check
            scaled = tuple(v * rat(1, 1000) for v in pt)
            assert half.contains(scaled)
    assert h.contains((-1, 3)) and h.contains((0, -2)) and not h.contains((2, 0))


# -- projection ---------------------------------------------------------------------------


def test_project_point_examples():
    pt, d2 = ORTHANT2.project_point((-1, 2))
    assert pt == (rat(0), rat(2)) and d2 == 1
    pt, d2 = ORTHANT2.project_point((3, 4))
    assert pt == (rat(3), rat(4)) and d2 == 0
    zero = Polyhedron([(1,), (-1,)], [0, 0])
    pt, d2 = zero.project_point((rat(1, 20),))
    assert pt == (rat(0),) and d2 == rat(1, 400)
    with pytest.raises(ValueError):
        Polyhedron.empty(2).project_point((0, 0))


def test_projection_optimality_randomized():
    rng = random.Random(37)
    for _ in range(40):
        p = rand_polyhedron(rng, rng.randint(1, 3))
        x = tuple(rat(rng.randint(-6, 6), rng.randint(1, 4))
                  for _ in range(p.dim))
        pt, d2 = p.project_point(x)
        assert p.contains(pt)
        resid = tuple(a - b for a, b in zip(x, pt))
        assert vdot(resid, resid) == d2
        assert normal_cone(p, pt).contains(resid)


# -- Fourier-Motzkin -----------------------------------------------------------------------


def test_fm_project_examples():
    p = Polyhedron([(1, 1), (0, -1)], [1, 0]).with_dim(2)
    r = fm_project(p, [0])
    assert r.contains((1,)) and r.contains((-5,)) and not r.contains((2,))

    # product set onto one factor
    prod = Polyhedron([(1, 0), (-1, 0), (0, 1), (0, -1)], [1, 0, 2, 0])
    r2 = fm_project(prod, [1])
    assert r2.contains((0,)) and r2.contains((2,)) and not r2.contains((3,))

    # direct elimination of a lifted multiplier
    lifted = Polyhedron([(1, -1, -1), (-1, 1, 1), (0, 0, -1)], [0, 0, 0])
    r3 = fm_project(lifted, [0, 1])
    assert r3.contains((1, 0)) and r3.contains((1, 1))
    assert not r3.contains((0, 1))


def test_fm_project_membership_sampling():
    rng = random.Random(43)
    p = rand_polyhedron(rng, 3)
    keep = [0, 2]
    proj = fm_project(p, keep)
    inside = outside = 0
    while inside < 1000 or outside < 1000:
        pt = tuple(rat(rng.randint(-8, 8), rng.randint(1, 4)) for _ in range(3))
        image = (pt[0], pt[2])
        if p.contains(pt):
            assert proj.contains(image)
            inside += 1
        elif not proj.contains(image):
            outside += 1
        else:
            # in the shadow but not from this lift: must have another preimage;
            # certify by a feasibility LP on the fiber
            from plqstab.lp import lp_feasible_point

            a_eq = [(rat(1), rat(0), rat(0)), (rat(0), rat(0), rat(1))]
            b_eq = [image[0], image[1]]
            assert lp_feasible_point(p.b, p.alpha, tuple(a_eq), tuple(b_eq),
                                     n=3) is not None
            outside += 1


# -- unions ------------------------------------------------------------------------------------


def test_limiting_normals_of_cross():
    ray1 = Polyhedron([(-1, 0), (0, 1), (0, -1)], [0, 0, 0])   # R_+ x {0}
    ray2 = Polyhedron([(1, 0), (-1, 0), (0, -1)], [0, 0, 0])   # {0} x R_+
    cones = limiting_normal_cone_union(PolyUnion([ray1, ray2]), (0, 0))
    expected = {(0, 5): True, (5, 0): True, (0, -5): True, (-5, 0): True,
                (-1, -1): True, (-2, -3): True,
                (1, 1): False, (1, -1): False, (-1, 1): False}
    for v, want in expected.items():
        assert cones.contains(v) == want, v


def test_limiting_normals_single_polyhedron_collapse():
    rng = random.Random(53)
    for _ in range(100):
        p = rand_polyhedron(rng, rng.randint(1, 2))
        pt = p.some_point()
        if pt is None:
            continue
        union = limiting_normal_cone_union(PolyUnion([p]), pt)
        convex = normal_cone(p, pt)
        for c in union:
            for g in list(c.extreme_rays()) + list(c.lineality_basis()):
                assert convex.contains(g)
        for g in list(convex.extreme_rays()) + list(convex.lineality_basis()):
            assert union.contains(g)


def test_limiting_normals_whole_space_trivial():
    w = Polyhedron((), ()).with_dim(2)
    cones = limiting_normal_cone_union(PolyUnion([w]), (1, 1))
    assert all(c.is_trivial() for c in cones)
    with pytest.raises(ValueError):
        limiting_normal_cone_union(PolyUnion([ORTHANT2]), (-1, -1))
