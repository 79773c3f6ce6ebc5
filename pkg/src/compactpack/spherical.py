"""Labeled spherical triangulations: validation, metrics, perturbation
comparison, membership in the sets Q and W, distance relations against a
realized code, a circle witness decider and two counterexample constructions."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .angle_core import DomainError, Realizer, angle
from .codes import NeighborComplex, PackingCode, iter_isomorphisms, labeled_isomorphic
from .hull import DegenerateHull, convex_hull_3d, coplanar_points

TOL = 1e-9
TWO_PI = 2.0 * math.pi


class TriangulationError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def geodesic_distance(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for w in (u, v):
        if abs(np.linalg.norm(w) - 1.0) > 1e-10:
            raise DomainError(f"not a unit vector: {w.tolist()}")
    return math.acos(max(-1.0, min(1.0, float(np.dot(u, v)))))


def _dist(u, v) -> float:
    return math.acos(max(-1.0, min(1.0, float(np.dot(u, v)))))


def triangle_area(a, b, c) -> float:
    """Area of the spherical triangle with unit vertices a, b, c."""
    num = abs(float(np.dot(a, np.cross(b, c))))
    den = 1.0 + float(np.dot(a, b) + np.dot(b, c) + np.dot(c, a))
    return 2.0 * math.atan2(num, den)


@dataclass(frozen=True, eq=False)
class LabeledSphericalTriangulation:
    """Unit vectors with labels, facets of ``dim`` vertex ids and a center label."""

    dim: int
    center_label: int
    coords: np.ndarray
    labels: tuple
    facets: frozenset
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != self.dim:
            raise TriangulationError(f"coordinates must have shape (m, {self.dim})")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))
        object.__setattr__(self, "facets", frozenset(frozenset(int(v) for v in f) for f in self.facets))
        if len(self.labels) != len(coords):
            raise TriangulationError("one label per vertex is required")
        if self.validate:
            problems = self.problems()
            if problems:
                raise TriangulationError("; ".join(problems))

    # -- construction helpers ------------------------------------------------

    @classmethod
    def unchecked(cls, dim, center_label, coords, labels, facets):
        return cls(dim, center_label, coords, labels, facets, validate=False)

    @classmethod
    def circle(cls, angles, labels, center_label: int = 0, validate: bool = True):
        """Circle triangulation with vertices at the given polar angles, in cyclic order."""
        coords = [(math.cos(t), math.sin(t)) for t in angles]
        m = len(coords)
        facets = [frozenset((i, (i + 1) % m)) for i in range(m)]
        return cls(2, center_label, coords, labels, frozenset(facets), validate)

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    def edges(self) -> set[frozenset]:
        return {frozenset(e) for f in self.facets for e in itertools.combinations(sorted(f), 2)}

    def distance(self, i: int, j: int) -> float:
        return _dist(self.coords[i], self.coords[j])

    def rotated(self, matrix) -> "LabeledSphericalTriangulation":
        R = np.asarray(matrix, dtype=float)
        return LabeledSphericalTriangulation(
            self.dim, self.center_label, self.coords @ R.T, self.labels, self.facets, self.validate
        )

    def with_coords(self, coords, validate: bool = True) -> "LabeledSphericalTriangulation":
        return LabeledSphericalTriangulation(self.dim, self.center_label, coords, self.labels, self.facets, validate)

    # -- validation ----------------------------------------------------------

    def problems(self) -> list[str]:
        out = []
        m = self.n_vertices
        norms = np.linalg.norm(self.coords, axis=1)
        bad = [i for i in range(m) if abs(norms[i] - 1.0) > 1e-10]
        if bad:
            out.append(f"vertices {bad} are not unit vectors")
            return out
        for i, j in itertools.combinations(range(m), 2):
            if self.distance(i, j) <= TOL:
                out.append(f"vertices {i} and {j} coincide")
        for f in self.facets:
            if len(f) != self.dim or not all(0 <= v < m for v in f):
                out.append(f"facet {sorted(f)} is malformed")
        if out:
            return out
        for f in self.facets:
            mat = self.coords[sorted(f)]
            if self.dim == 2:
                if abs(mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]) <= 1e-12:
                    out.append(f"facet {sorted(f)} is not a spherical simplex")
            elif abs(np.linalg.det(mat)) <= 1e-12:
                out.append(f"facet {sorted(f)} is not a spherical simplex")
        if out:
            return out
        if self.dim == 2:
            out += self._circle_problems()
        elif self.dim == 3:
            out += self._sphere_problems()
        else:
            out.append("validation is implemented for dimensions 2 and 3 only")
        return out

    def _circle_problems(self):
        m = self.n_vertices
        deg = [0] * m
        for f in self.facets:
            for v in f:
                deg[v] += 1
        if m < 3 or any(d != 2 for d in deg):
            return ["every vertex must lie on exactly two arcs (at least three vertices)"]
        try:
            order = NeighborComplex(2, self.labels, self.facets).cycle()
        except ValueError as exc:
            return [str(exc)]
        theta = [math.atan2(self.coords[v, 1], self.coords[v, 0]) for v in order]
        for seq in (theta, theta[::-1]):
            arcs = [(seq[(i + 1) % m] - seq[i]) % TWO_PI for i in range(m)]
            if abs(sum(arcs) - TWO_PI) <= 1e-9 and all(0 < a < math.pi for a in arcs):
                return []
        return ["arcs do not partition the circle"]

    def _sphere_problems(self):
        out = []
        edge_count: dict[frozenset, int] = {}
        for f in self.facets:
            for e in itertools.combinations(sorted(f), 2):
                edge_count[frozenset(e)] = edge_count.get(frozenset(e), 0) + 1
        bad = [sorted(e) for e, c in edge_count.items() if c != 2]
        if bad:
            out.append(f"edges {bad[:5]} are not in exactly two facets")
        for v in range(self.n_vertices):
            link = [tuple(sorted(f - {v})) for f in self.facets if v in f]
            if not link:
                out.append(f"vertex {v} lies in no facet")
                continue
            try:
                verts = sorted({u for e in link for u in e})
                index = {u: i for i, u in enumerate(verts)}
                NeighborComplex(2, tuple(0 for _ in verts), frozenset(frozenset(index[u] for u in e) for e in link))
            except ValueError:
                out.append(f"link of vertex {v} is not a single cycle")
        if out:
            return out
        total = sum(triangle_area(*self.coords[sorted(f)]) for f in self.facets)
        if abs(total - 4.0 * math.pi) > 1e-8:
            out.append(f"facet areas sum to {total:.12f}, not 4*pi")
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    # -- I/O -------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "center_label": self.center_label,
            "vertices": [
                {"id": i, "label": lab, "coords": [float(x) for x in self.coords[i]]}
                for i, lab in enumerate(self.labels)
            ],
            "facets": sorted(sorted(f) for f in self.facets),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, doc) -> "LabeledSphericalTriangulation":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            ids = [int(v["id"]) for v in doc["vertices"]]
            index = {vid: i for i, vid in enumerate(ids)}
            coords = np.array([v["coords"] for v in doc["vertices"]], dtype=float)
            coords /= np.linalg.norm(coords, axis=1)[:, None]
            labels = [int(v["label"]) for v in doc["vertices"]]
            facets = frozenset(frozenset(index[int(v)] for v in f) for f in doc["facets"])
            return cls(int(doc["dim"]), int(doc["center_label"]), coords, labels, facets)
        except (KeyError, TypeError) as exc:
            raise TriangulationError(f"malformed triangulation document: {exc}") from None


def vertex_scheme(P: LabeledSphericalTriangulation) -> NeighborComplex:
    return NeighborComplex(P.dim, P.labels, P.facets)


def vertex_code(P: LabeledSphericalTriangulation) -> PackingCode:
    return PackingCode(P.center_label, vertex_scheme(P))


def circle_order(P: LabeledSphericalTriangulation) -> list[int]:
    """Vertex ids of a circle triangulation in counter-clockwise order."""
    return sorted(range(P.n_vertices), key=lambda v: math.atan2(P.coords[v, 1], P.coords[v, 0]) % TWO_PI)


# -- perturbation comparison ----------------------------------------------------


@dataclass(frozen=True)
class EdgeComparison:
    grow: frozenset
    shrink: frozenset
    equal: frozenset

    @property
    def isometric(self) -> bool:
        return not self.grow and not self.shrink


def _check_matching(P, Q, matching):
    if P.dim != Q.dim or P.center_label != Q.center_label:
        raise PreconditionError("triangulations differ in dimension or center label")
    if sorted(matching) != list(range(P.n_vertices)) or sorted(matching.values()) != list(range(Q.n_vertices)):
        raise PreconditionError("matching is not a vertex bijection")
    if any(P.labels[v] != Q.labels[w] for v, w in matching.items()):
        raise PreconditionError("matching does not preserve labels")
    if {frozenset(matching[v] for v in f) for f in P.facets} != set(Q.facets):
        raise PreconditionError("matching does not map facets onto facets")


def compare_edges(P, Q, matching: dict[int, int]) -> EdgeComparison:
    """Partition P's edges by whether the matched edge of Q is longer, shorter or equal."""
    _check_matching(P, Q, matching)
    grow, shrink, equal = set(), set(), set()
    for e in P.edges():
        i, j = sorted(e)
        diff = Q.distance(matching[i], matching[j]) - P.distance(i, j)
        if diff > TOL:
            grow.add(e)
        elif diff < -TOL:
            shrink.add(e)
        else:
            equal.add(e)
    return EdgeComparison(frozenset(grow), frozenset(shrink), frozenset(equal))


def heteroperturbative_violation(P, Q) -> bool:
    """True iff P and Q are not edge-isometric under any matching, yet some
    matching lengthens no edge or shortens no edge.

    Such a pair shows that a set containing both is not heteroperturbative.
    """
    if P.center_label != Q.center_label:
        raise PreconditionError("center labels differ")
    matchings = list(iter_isomorphisms(vertex_scheme(P), vertex_scheme(Q)))
    if not matchings:
        raise PreconditionError("triangulations are not combinatorially equivalent")
    results = [compare_edges(P, Q, m) for m in matchings]
    if any(r.isometric for r in results):
        return False
    return any(not r.grow or not r.shrink for r in results)


# -- center, Q and W --------------------------------------------------------------


def center_in_interior(P) -> bool:
    """Whether the origin is interior to the convex hull of P's vertices.

    Needs full rank and no direction ``w`` with ``<w, v> <= 0`` for all vertices
    and ``sum <w, v> = -1``; the latter is a linear feasibility problem.
    """
    V = np.asarray(P.coords if hasattr(P, "coords") else P, dtype=float)
    d = V.shape[1]
    if np.linalg.matrix_rank(V, tol=1e-10) < d:
        return False
    res = linprog(
        c=np.zeros(d),
        A_ub=V,
        b_ub=np.zeros(len(V)),
        A_eq=V.sum(axis=0)[None, :],
        b_eq=[-1.0],
        bounds=[(None, None)] * d,
        method="highs",
    )
    return res.status == 2  # infeasible


@dataclass(frozen=True)
class QReport:
    ok: bool
    worst_pair: tuple | None = None
    worst_excess: float = 0.0
    kind: str = ""
    reason: str = ""

    def __bool__(self):
        return self.ok


def in_Q(P, rho: Realizer) -> QReport:
    """Check edges realize their symbols exactly and all pairs are at least as far apart."""
    if not rho.is_monotone():
        return QReport(False, reason="realizer is not monotone")
    c = P.center_label
    edges = P.edges()
    worst, worst_pair, kind = 0.0, None, ""
    for i, j in itertools.combinations(range(P.n_vertices), 2):
        target = angle(c, P.labels[i], P.labels[j], rho)
        dist = P.distance(i, j)
        if frozenset((i, j)) in edges:
            excess, what = abs(dist - target), "edge"
        else:
            excess, what = target - dist, "pair"
        if excess > worst:
            worst, worst_pair, kind = excess, (i, j), what
    ok = worst <= TOL
    reason = "" if ok else f"{kind} {worst_pair} off by {worst:.3e}"
    return QReport(ok, worst_pair, worst, kind, reason)


@dataclass(frozen=True)
class WReport:
    ok: bool
    reason: str = ""
    hull_facets: frozenset = frozenset()

    def __bool__(self):
        return self.ok


def in_W(P) -> WReport:
    if P.dim == 2:
        return WReport(True, "circle triangulations always match their hull")
    if P.dim != 3:
        raise DomainError("in_W is implemented for dimensions 2 and 3")
    try:
        faces = convex_hull_3d(P.coords)
    except DegenerateHull as exc:
        return WReport(False, f"degenerate hull: {exc}")
    hull = frozenset(frozenset(f) for f in faces)
    on_plane = coplanar_points(P.coords, faces)
    if on_plane:
        return WReport(False, f"hull is not simplicial: point {on_plane[0][1]} lies on facet {on_plane[0][0]}", hull)
    if hull != P.facets:
        extra = sorted(sorted(f) for f in hull - P.facets)
        return WReport(False, f"hull facets {extra[:3]} are not facets of the triangulation", hull)
    return WReport(True, "", hull)


# -- relations against a realized code ----------------------------------------------


def _equivalent(code: PackingCode, P) -> bool:
    return code.center == P.center_label and code.dim == P.dim and labeled_isomorphic(code.neighbors, vertex_scheme(P)) is not None


def _relation(left, code, right, pairs_of):
    if isinstance(left, Realizer):
        rho, P, sign = left, right, 1.0
    elif isinstance(right, Realizer):
        rho, P, sign = right, left, -1.0
    else:
        raise TypeError("one side of the relation must be a Realizer")
    if not _equivalent(code, P):
        return False
    c = code.center
    for i, j in pairs_of(P):
        gap = P.distance(i, j) - angle(c, P.labels[i], P.labels[j], rho)
        if sign * gap < -TOL:
            return False
    return True


def relation_blacktriangle(left, code: PackingCode, right) -> bool:
    """``rho ◁ P`` (pairwise distances at least the realized symbols) or ``P ◁ rho`` (at most)."""
    return _relation(left, code, right, lambda P: itertools.combinations(range(P.n_vertices), 2))


def relation_vartriangle(left, code: PackingCode, right) -> bool:
    """``rho ⊴ P`` or ``P ⊴ rho``: as :func:`relation_blacktriangle`, on edges only."""
    return _relation(left, code, right, lambda P: (tuple(sorted(e)) for e in P.edges()))


# -- circle witnesses ---------------------------------------------------------------


def _has_negative_cycle(n_nodes: int, arcs: list[tuple[int, int, float]]) -> bool:
    dist = [0.0] * n_nodes  # virtual source at distance 0 to everybody
    for _ in range(n_nodes):
        changed = False
        for u, v, w in arcs:
            if dist[u] + w < dist[v] - 1e-15:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            return False
    return True


def arcs_feasible(lower: dict[tuple[int, int], float], upper: list[float], slack: float = TOL) -> bool:
    """Decide whether points ``0 = P_0 <= ... <= P_m = 2pi`` exist with

    ``lower[i, j] <= P_j - P_i <= 2pi - lower[i, j]`` for ``i < j < m`` and
    ``P_(i+1) - P_i <= upper[i]``.
    """
    m = len(upper)
    arcs = []
    # x_j - x_i <= w  is an arc i -> j of weight w
    arcs.append((0, m, TWO_PI + slack))
    arcs.append((m, 0, -TWO_PI + slack))
    for i in range(m):
        arcs.append((i, i + 1, upper[i] + slack))
        arcs.append((i + 1, i, slack))
    for (i, j), low in lower.items():
        arcs.append((j, i, -low + slack))
        arcs.append((i, j, TWO_PI - low + slack))
    return not _has_negative_cycle(m + 1, arcs)


def witness_bounds(labels, center: int, rho: Realizer, sigma: Realizer):
    m = len(labels)
    lower = {(i, j): angle(center, labels[i], labels[j], rho) for i, j in itertools.combinations(range(m), 2)}
    upper = [angle(center, labels[i], labels[(i + 1) % m], sigma) for i in range(m)]
    return lower, upper


def witness_exists_2d(code: PackingCode, rho: Realizer, sigma: Realizer) -> bool:
    """Whether some circle triangulation P with the code's cycle satisfies ``rho ◁ P ⊴ sigma``."""
    if code.dim != 2:
        raise DomainError("witness_exists_2d needs a circle code")
    labels = code.cycle_labels()
    if len(labels) < 3:
        raise DomainError("cycle length must be at least 3")
    for seq in (labels, labels[::-1]):
        if arcs_feasible(*witness_bounds(seq, code.center, rho, sigma)):
            return True
    return False


# -- constructions -------------------------------------------------------------------


def regular_octahedron(labels=(0,) * 6, center_label: int = 0) -> LabeledSphericalTriangulation:
    coords = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    facets = [frozenset((x, y, z)) for x in (0, 1) for y in (2, 3) for z in (4, 5)]
    return LabeledSphericalTriangulation(3, center_label, coords, labels, frozenset(facets))


def build_darts_triangulation(k: int, phi: float, latitude: float = math.pi / 5) -> LabeledSphericalTriangulation:
    """Polar caps over two rings of ``k`` vertices and an equatorial strip of darts.

    Rotating the ``k`` equator vertices by ``phi`` lengthens every edge from
    the equator to a ring and leaves all other edges unchanged.
    """
    if k < 3 or not abs(phi) < math.pi / k:
        raise DomainError(f"need k >= 3 and |phi| < pi/k, got k={k}, phi={phi}")
    ch, sh = math.cos(latitude), math.sin(latitude)
    coords = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    U = lambda i: 2 + i % k
    L = lambda i: 2 + k + i % k
    Q = lambda i: 2 + 2 * k + i % k
    for z in (sh, -sh):
        for i in range(k):
            t = TWO_PI * i / k
            coords.append((ch * math.cos(t), ch * math.sin(t), z))
    for i in range(k):
        t = TWO_PI * i / k + phi
        coords.append((math.cos(t), math.sin(t), 0.0))
    facets = []
    for i in range(k):
        facets += [
            (0, U(i), U(i + 1)),
            (U(i), Q(i), Q(i + 1)),
            (U(i), Q(i + 1), U(i + 1)),
            (1, L(i + 1), L(i)),
            (L(i), Q(i + 1), Q(i)),
            (L(i), L(i + 1), Q(i + 1)),
        ]
    return LabeledSphericalTriangulation(3, 0, coords, (0,) * len(coords), frozenset(frozenset(f) for f in facets))


def build_split_meridian_octahedron(delta: float) -> LabeledSphericalTriangulation:
    """Octahedron whose north pole slides by ``delta`` toward a split west vertex.

    The west vertex becomes two vertices ``delta`` apart on the equator, and
    the meridian quadrilateral between them is cut into two skinny triangles
    along the pole-to-pole diagonal.  The chord joining the split vertices lies
    outside that diagonal, so the hull disagrees with the triangulation.
    """
    if not 0 < delta < math.pi / 8:
        raise DomainError(f"need 0 < delta < pi/8, got {delta}")
    s, c = math.sin(delta), math.cos(delta)
    # T, S, E1, E2, E4, X, Y
    coords = [(-s, 0, c), (0, 0, -1), (1, 0, 0), (0, 1, 0), (0, -1, 0), (-c, s, 0), (-c, -s, 0)]
    T, S, E1, E2, E4, X, Y = range(7)
    facets = [
        (T, X, S), (T, S, Y), (T, E2, X), (S, X, E2), (T, Y, E4),
        (S, E4, Y), (T, E1, E2), (T, E4, E1), (S, E2, E1), (S, E1, E4),
    ]
    return LabeledSphericalTriangulation(3, 0, coords, (0,) * 7, frozenset(frozenset(f) for f in facets))
