import math

import numpy as np
import pytest
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from scipy.spatial.transform import Rotation

from compactpack.angle_core import DomainError, Realizer, scale
from compactpack.codes import PackingCode
from compactpack.hull import convex_hull_3d
from compactpack.spherical import (
    LabeledSphericalTriangulation as LST,
    PreconditionError,
    TriangulationError,
    arcs_feasible,
    build_darts_triangulation,
    build_split_meridian_octahedron,
    center_in_interior,
    compare_edges,
    geodesic_distance,
    heteroperturbative_violation,
    in_Q,
    in_W,
    regular_octahedron,
    relation_blacktriangle,
    relation_vartriangle,
    vertex_code,
    vertex_scheme,
    witness_bounds,
    witness_exists_2d,
)

R2 = math.sqrt(2) - 1
SQUARE_RHO = Realizer.of(R2, 1.0)


def square(labels=(1, 1, 1, 1), center=0):
    return LST.circle([0, math.pi / 2, math.pi, 3 * math.pi / 2], labels, center)


def identity(P):
    return {i: i for i in range(P.n_vertices)}


def lambda_oracle(V):
    # origin interior  <=>  full rank and sum lambda_i v_i = 0 with all lambda_i >= 1 (after scaling)
    V = np.asarray(V, float)
    if np.linalg.matrix_rank(V) < V.shape[1]:
        return False
    res = linprog(np.zeros(len(V)), A_eq=V.T, b_eq=np.zeros(V.shape[1]), bounds=[(1, None)] * len(V), method="highs")
    return res.status == 0


@pytest.mark.parametrize(
    "u,v,expected",
    [((1, 0, 0), (1, 0, 0), 0.0), ((1, 0, 0), (-1, 0, 0), math.pi), ((1, 0), (0, 1), math.pi / 2)],
)
def test_geodesic_distance(u, v, expected):
    assert geodesic_distance(u, v) == pytest.approx(expected, abs=1e-15)


def test_geodesic_rejects_non_unit():
    with pytest.raises(DomainError):
        geodesic_distance((2, 0), (0, 1))


def test_vertex_scheme_square_and_octahedron():
    assert vertex_scheme(square()).word() == "1111"
    assert len(vertex_scheme(regular_octahedron()).facets) == 8


def test_circle_validation():
    with pytest.raises(TriangulationError):
        LST.circle([0, 1, 2], [0, 0, 0])  # arcs 1, 1, 2pi-2 > pi
    with pytest.raises(TriangulationError):
        LST(2, 0, [(1, 0), (0, 1), (-1, 0), (0, -1)], (0,) * 4, frozenset({frozenset((0, 2)), frozenset((1, 3)), frozenset((0, 1)), frozenset((2, 3))}))


def test_sphere_validation_catches_missing_facet():
    P = regular_octahedron()
    with pytest.raises(TriangulationError):
        LST(3, 0, P.coords, P.labels, frozenset(list(P.facets)[1:]))


def test_compare_edges_identity_and_rotation():
    P = build_darts_triangulation(6, 0.03)
    r = compare_edges(P, P, identity(P))
    assert r.isometric and len(r.equal) == len(P.edges())
    R = Rotation.from_euler("xyz", [0.3, -1.1, 2.0]).as_matrix()
    assert compare_edges(P, P.rotated(R), identity(P)).isometric


def test_compare_edges_bad_matching():
    P = square((0, 1, 0, 1))
    with pytest.raises(PreconditionError):
        compare_edges(P, P, {0: 1, 1: 2, 2: 3, 3: 0})


def test_darts_one_sided():
    P0 = build_darts_triangulation(6, 0.0)
    P1 = build_darts_triangulation(6, 0.05)
    assert P0.is_valid() and P1.is_valid()
    r = compare_edges(P0, P1, identity(P0))
    assert r.grow and not r.shrink
    assert heteroperturbative_violation(P0, P1)
    assert not heteroperturbative_violation(P0, P0)
    assert compare_edges(P0, build_darts_triangulation(6, 0.0), identity(P0)).isometric


@pytest.mark.parametrize("k,phi", [(2, 0.0), (6, 0.6), (6, -0.6)])
def test_darts_range(k, phi):
    with pytest.raises(DomainError):
        build_darts_triangulation(k, phi)


def test_circle_pairs_are_two_sided():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = int(rng.integers(3, 9))
        def draw():
            while True:
                gaps = rng.dirichlet(np.ones(m)) * 2 * math.pi
                if gaps.max() < math.pi:
                    return np.concatenate([[0.0], np.cumsum(gaps)[:-1]])
        P, Q = LST.circle(draw(), [0] * m), LST.circle(draw(), [0] * m)
        r = compare_edges(P, Q, identity(P))
        assert r.grow and r.shrink
        assert not heteroperturbative_violation(P, Q)


def test_split_meridian():
    M = build_split_meridian_octahedron(0.1)
    assert M.is_valid()
    assert not in_W(M)
    assert in_W(regular_octahedron())
    with pytest.raises(TriangulationError):
        build_split_meridian_octahedron(1e-10)
    with pytest.raises(DomainError):
        build_split_meridian_octahedron(0.5)


def test_in_W_circle():
    assert in_W(square())


def test_hull_matches_scipy():
    rng = np.random.default_rng(4)
    for _ in range(30):
        pts = rng.normal(size=(int(rng.integers(4, 30)), 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        mine = {frozenset(f) for f in convex_hull_3d(pts)}
        ref = {frozenset(s) for s in ConvexHull(pts).simplices}
        assert mine == ref


def test_center_in_interior_examples():
    assert center_in_interior(regular_octahedron())
    assert center_in_interior(square())
    half = np.array([[0.6, 0.8, 0], [0.6, -0.8, 0], [0.6, 0, 0.8], [0.6, 0, -0.8]])
    assert not center_in_interior(half)
    assert not lambda_oracle(half)


def test_center_in_interior_against_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        pts = rng.normal(size=(int(rng.integers(3, 9)), 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        assert center_in_interior(pts) == lambda_oracle(pts)


def test_in_Q_square():
    assert in_Q(square(), SQUARE_RHO)
    rep = in_Q(square(), Realizer.of(0.5, 1.0))
    assert not rep and rep.kind == "edge"


def test_relations_on_square():
    P, code = square(), PackingCode.from_cycle(0, "1111")
    assert relation_vartriangle(SQUARE_RHO, code, P) and relation_vartriangle(P, code, SQUARE_RHO)
    assert relation_blacktriangle(SQUARE_RHO, code, P)
    # opposite vertices are pi apart, more than the realized pi/2
    assert not relation_blacktriangle(P, code, SQUARE_RHO)
    assert relation_blacktriangle(scale(SQUARE_RHO, 0.5), code, P)
    narrower = Realizer.of(0.6, 1.0)  # a larger center narrows every angle
    assert relation_blacktriangle(narrower, code, P)
    assert not relation_vartriangle(P, code, narrower)
    assert not relation_blacktriangle(SQUARE_RHO, PackingCode.from_cycle(0, "0111"), P)
    assert not relation_blacktriangle(SQUARE_RHO, PackingCode.from_cycle(1, "1111"), P)


def test_vartriangle_detects_lengthened_edge():
    P = LST.circle([0, math.pi / 2 + 0.01, math.pi, 3 * math.pi / 2], (1, 1, 1, 1), 0)
    code = vertex_code(P)
    assert not relation_vartriangle(P, code, SQUARE_RHO)
    assert not relation_vartriangle(SQUARE_RHO, code, P)


def test_witness_examples():
    code = PackingCode.from_cycle(0, "1111")
    assert witness_exists_2d(code, SQUARE_RHO, SQUARE_RHO)
    # a smaller center radius widens the angle: four lower bounds above pi/2
    assert not witness_exists_2d(code, Realizer.of(0.3, 1.0), SQUARE_RHO)
    # a larger center radius narrows it, so arcs of pi/2 still fit
    assert witness_exists_2d(code, Realizer.of(0.9, 1.0), SQUARE_RHO)
    tri = PackingCode.from_cycle(0, "111")
    # every edge bound is below 2pi/3 once the center radius exceeds 2/sqrt(3) - 1
    assert not witness_exists_2d(tri, Realizer.of(0.9, 1.0), Realizer.of(0.2, 1.0))
    assert witness_exists_2d(tri, Realizer.of(0.9, 1.0), Realizer.of(0.1, 1.0))


def test_witness_tightness():
    lower, upper = witness_bounds((1, 1, 1, 1), 0, SQUARE_RHO, SQUARE_RHO)
    assert arcs_feasible(lower, upper)
    for key in [(0, 1), (1, 2), (2, 3), (0, 3)]:
        raised = dict(lower)
        raised[key] += 1e-3
        assert not arcs_feasible(raised, upper)


def test_witness_monotone():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = int(rng.integers(3, 8))
        code = PackingCode.from_cycle(0, [int(x) for x in rng.integers(0, 3, size=m)])
        r = np.sort(rng.uniform(0.05, 1, size=2))
        rho = Realizer.of(*r, 1.0)
        s = np.sort(rng.uniform(0.05, 1, size=2))
        sigma = Realizer.of(*s, 1.0)
        if witness_exists_2d(code, rho, sigma):
            assert witness_exists_2d(code, Realizer.of(*(r * 0.9), 1.0), sigma)
            # lower center radius enlarges every angle at the center
            assert witness_exists_2d(code, rho, Realizer.of(s[0] * 0.9, s[1], 1.0))


def test_witness_rejects_short_cycle():
    with pytest.raises(Exception):
        witness_exists_2d(PackingCode.from_cycle(0, "11"), SQUARE_RHO, SQUARE_RHO)


def test_json_roundtrip():
    P = build_split_meridian_octahedron(0.1)
    Q = LST.from_json(P.dumps())
    assert np.allclose(P.coords, Q.coords) and P.facets == Q.facets and P.labels == Q.labels


def test_center_in_interior_all_constructions():
    for P in (build_darts_triangulation(6, 0.05), build_split_meridian_octahedron(0.1), regular_octahedron(), square()):
        assert center_in_interior(P)
