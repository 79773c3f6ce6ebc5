"""Sphere packings (optionally periodic), their contact hypergraph, compactness
verification on the torus, canonical labels, triangulations and codes."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .angle_core import Realizer, angle
from .codes import CodeSet, NeighborComplex, PackingCode, is_fundamental
from .spherical import LabeledSphericalTriangulation

TANGENT_TOL = 1e-9
HULL_SLACK = 1e-9


class InvalidPacking(ValueError):
    def __init__(self, message: str, spheres: tuple = ()):
        super().__init__(message)
        self.spheres = tuple(spheres)


class InternalConsistencyError(RuntimeError):
    pass


class IncompleteCorona(ValueError):
    pass


Image = tuple  # (sphere index, offset tuple)


@dataclass(frozen=True, eq=False)
class SpherePacking:
    """Spheres with centers and radii; with a lattice, a periodic packing whose
    centers are reduced into the fundamental cell."""

    dim: int
    centers: np.ndarray
    radii: np.ndarray
    lattice: np.ndarray | None = None
    ids: tuple = ()
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        centers = np.array(self.centers, dtype=float).reshape(-1, self.dim)
        radii = np.array(self.radii, dtype=float).reshape(-1)
        if len(centers) != len(radii) or len(radii) == 0:
            raise InvalidPacking("need one radius per center and at least one sphere")
        if np.any(~(radii > 0)):
            raise InvalidPacking("radii must be positive")
        lattice = None
        if self.lattice is not None:
            lattice = np.array(self.lattice, dtype=float).reshape(self.dim, self.dim)
            if abs(np.linalg.det(lattice)) < 1e-12:
                raise InvalidPacking("lattice vectors are linearly dependent")
            frac = np.linalg.solve(lattice.T, centers.T).T
            frac -= np.floor(frac + 1e-12)
            centers = frac @ lattice
            lattice.setflags(write=False)
        ids = tuple(self.ids) if self.ids else tuple(range(len(radii)))
        if len(ids) != len(radii) or len(set(ids)) != len(ids):
            raise InvalidPacking("sphere ids must be unique, one per sphere")
        centers.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "ids", ids)

    @property
    def periodic(self) -> bool:
        return self.lattice is not None

    def __len__(self):
        return len(self.radii)

    def index_of(self, sphere_id) -> int:
        try:
            return self.ids.index(sphere_id)
        except ValueError:
            raise KeyError(f"no sphere with id {sphere_id!r}") from None

    def position(self, image: Image) -> np.ndarray:
        i, off = image
        if self.lattice is None:
            return self.centers[i]
        return self.centers[i] + np.asarray(off, dtype=float) @ self.lattice

    # -- mutations used by tests and the CLI --------------------------------

    def without(self, sphere_id) -> "SpherePacking":
        keep = [k for k, s in enumerate(self.ids) if s != sphere_id]
        return SpherePacking(self.dim, self.centers[keep], self.radii[keep], self.lattice,
                             tuple(self.ids[k] for k in keep), self.name, dict(self.meta))

    def moved(self, sphere_id, delta) -> "SpherePacking":
        centers = np.array(self.centers)
        centers[self.index_of(sphere_id)] += np.asarray(delta, dtype=float)
        return SpherePacking(self.dim, centers, self.radii, self.lattice, self.ids, self.name, dict(self.meta))

    def supercell(self, reps) -> "SpherePacking":
        if self.lattice is None:
            raise InvalidPacking("supercell needs a periodic packing")
        centers, radii = [], []
        for off in itertools.product(*(range(r) for r in reps)):
            shift = np.asarray(off, dtype=float) @ self.lattice
            centers.extend(self.centers + shift)
            radii.extend(self.radii)
        lattice = np.asarray(reps, dtype=float)[:, None] * self.lattice
        return SpherePacking(self.dim, centers, radii, lattice, (), self.name, dict(self.meta))

    # -- I/O -----------------------------------------------------------------

    def to_json(self) -> dict:
        doc = {
            "dim": self.dim,
            "lattice": None if self.lattice is None else self.lattice.tolist(),
            "spheres": [
                {"id": sid, "center": [float(x) for x in c], "radius": float(r)}
                for sid, c, r in zip(self.ids, self.centers, self.radii)
            ],
        }
        if self.name:
            doc["name"] = self.name
        if self.meta:
            doc["meta"] = self.meta
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, doc) -> "SpherePacking":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            spheres = doc["spheres"]
            return cls(
                int(doc["dim"]),
                [s["center"] for s in spheres],
                [s["radius"] for s in spheres],
                doc.get("lattice"),
                tuple(s.get("id", k) for k, s in enumerate(spheres)),
                doc.get("name", ""),
                doc.get("meta", {}),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidPacking(f"malformed packing document: {exc}") from None

    @classmethod
    def load(cls, path) -> "SpherePacking":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


# -- neighbourhoods ---------------------------------------------------------------


def _offsets(p: SpherePacking, reach: float):
    if p.lattice is None:
        return [tuple([0] * p.dim)]
    inv = np.linalg.inv(p.lattice)
    # any vector of length <= reach + cell diameter has coefficients bounded by this
    diam = float(np.abs(p.lattice).sum())
    k = int(math.ceil((reach + diam) * np.linalg.norm(inv, 2))) + 1
    return list(itertools.product(range(-k, k + 1), repeat=p.dim))


class _Neighbourhoods:
    """Images near each sphere of the cell (within twice the largest diameter)."""

    def __init__(self, p: SpherePacking):
        self.p = p
        rmax = float(p.radii.max())
        self.reach = 4.0 * rmax * (1 + 1e-6)
        self.offsets = _offsets(p, self.reach)
        self.near: list[list[tuple[Image, np.ndarray, float]]] = []
        for i in range(len(p)):
            ci = p.centers[i]
            items = []
            for j in range(len(p)):
                for off in self.offsets:
                    if j == i and not any(off):
                        continue
                    pos = p.position((j, off))
                    d = float(np.linalg.norm(pos - ci))
                    if d <= self.reach:
                        items.append(((j, off), pos, d))
            self.near.append(items)

    def check_overlaps(self):
        p = self.p
        for i, items in enumerate(self.near):
            for (j, off), _, d in items:
                s = p.radii[i] + p.radii[j]
                if d < s * (1 - TANGENT_TOL):
                    raise InvalidPacking(
                        f"spheres {p.ids[i]} and {p.ids[j]} (offset {off}) overlap by {s - d:.3e}",
                        (p.ids[i], p.ids[j]),
                    )

    def tangent(self, a: Image, b: Image) -> bool:
        p = self.p
        d = float(np.linalg.norm(p.position(a) - p.position(b)))
        s = p.radii[a[0]] + p.radii[b[0]]
        return abs(d - s) <= TANGENT_TOL * s


def _shift(image: Image, by) -> Image:
    return (image[0], tuple(int(x) - int(y) for x, y in zip(image[1], by)))


def canonical_edge(members) -> tuple:
    """Hyperedge on the torus as a sorted tuple of images, normalized by translation."""
    best = None
    for m in members:
        cand = tuple(sorted(_shift(x, m[1]) for x in members))
        if best is None or cand < best:
            best = cand
    return best


def _in_hull(point, verts, slack=HULL_SLACK) -> bool:
    """Point inside the convex hull of up to d+1 affinely independent points (with slack)."""
    verts = np.asarray(verts, dtype=float)
    if len(verts) == 1:
        return float(np.linalg.norm(point - verts[0])) <= slack
    base = verts[0]
    A = (verts[1:] - base).T
    coef, *_ = np.linalg.lstsq(A, point - base, rcond=None)
    if np.linalg.norm(A @ coef - (point - base)) > slack:
        return False
    bary = np.concatenate([[1 - coef.sum()], coef])
    scale = max(1.0, float(np.abs(A).max()))
    return bool(np.all(bary >= -slack / scale))


@dataclass(frozen=True)
class ContactComplex:
    """Contact hypergraph: vertices are sphere ids; hyperedges are canonical tuples
    of images ``(sphere index, lattice offset)``."""

    vertices: tuple
    hyperedges: frozenset

    def of_size(self, k: int) -> list:
        return sorted(e for e in self.hyperedges if len(e) == k)


def contact_hypergraph(p: SpherePacking, _nb: _Neighbourhoods | None = None) -> ContactComplex:
    nb = _nb or _Neighbourhoods(p)
    nb.check_overlaps()
    zero = tuple([0] * p.dim)
    edges = set()
    for i in range(len(p)):
        anchor = (i, zero)
        tangent = [img for img, _, _ in nb.near[i] if nb.tangent(anchor, img)]
        edges.add(((i, zero),))
        for size in range(1, p.dim + 1):
            for combo in itertools.combinations(tangent, size):
                if not all(nb.tangent(a, b) for a, b in itertools.combinations(combo, 2)):
                    continue
                members = (anchor,) + combo
                key = canonical_edge(members)
                if key in edges:
                    continue
                pts = [p.position(m) for m in members]
                if size >= 2 and _hull_blocked(p, nb, i, members, pts):
                    continue
                edges.add(key)
    return ContactComplex(tuple(p.ids), frozenset(edges))


def _hull_blocked(p, nb, i, members, pts) -> bool:
    mset = set(members)
    for img, pos, _ in nb.near[i]:
        if img in mset:
            continue
        if _in_hull(pos, pts):
            return True
    return False


# -- compactness on the torus -------------------------------------------------------


@dataclass
class Corner:
    """A triangle seen from one of its vertices (sphere index at offset zero)."""

    triangle: tuple
    left: Image
    right: Image


@dataclass
class PackingComplex:
    packing: SpherePacking
    labels: tuple
    realizer: Realizer
    triangles: list
    fans: dict  # sphere index -> neighbour images in cyclic order

    def fan_labels(self, i: int) -> tuple:
        return tuple(self.labels[img[0]] for img in self.fans[i])


@dataclass
class VerificationReport:
    ok: bool
    failures: list = field(default_factory=list)
    complex: PackingComplex | None = None

    def __bool__(self):
        return self.ok

    def failing_spheres(self) -> set:
        return {f["sphere"] for f in self.failures if "sphere" in f}

    def describe(self) -> str:
        if self.ok:
            return "compact: every fan closes with angle sum 2pi and every edge lies in two triangles"
        return "; ".join(dict.fromkeys(f["message"] for f in self.failures))


def _corners(triangles, n_spheres):
    corners = {i: [] for i in range(n_spheres)}
    for tri in triangles:
        for m in tri:
            others = [_shift(x, m[1]) for x in tri if x is not m]
            corners[m[0]].append(Corner(tri, others[0], others[1]))
    return corners


def _fan_cycle(corners):
    """Order the corner neighbours into one cycle, or return None."""
    adj: dict = {}
    for c in corners:
        adj.setdefault(c.left, []).append(c.right)
        adj.setdefault(c.right, []).append(c.left)
    if not adj or any(len(v) != 2 for v in adj.values()):
        return None
    start = min(adj)
    order, prev, cur = [start], None, start
    while True:
        a, b = adj[cur]
        nxt = a if a != prev else b
        if nxt == start:
            break
        order.append(nxt)
        prev, cur = cur, nxt
        if len(order) > len(adj):
            return None
    return order if len(order) == len(adj) else None


def verify_compact_2d(p: SpherePacking) -> VerificationReport:
    """Check that the contact triangles tile the torus (or fail with a report)."""
    if p.dim != 2:
        raise ValueError("verify_compact_2d needs a planar packing")
    if not p.periodic:
        raise ValueError("verify_compact_2d needs a lattice (periodic packing)")
    try:
        nb = _Neighbourhoods(p)
        cc = contact_hypergraph(p, nb)
    except InvalidPacking as exc:
        return VerificationReport(False, [
            {"kind": "overlap", "sphere": sid, "message": str(exc)} for sid in exc.spheres
        ] or [{"kind": "overlap", "message": str(exc)}])
    labels = canonical_labeling(p)
    rho = canonical_realizer(p)
    triangles = cc.of_size(3)
    failures = []
    edge_count: dict = {}
    for tri in triangles:
        for e in itertools.combinations(tri, 2):
            key = canonical_edge(e)
            edge_count[key] = edge_count.get(key, 0) + 1
    for e, cnt in sorted(edge_count.items()):
        if cnt != 2:
            a, b = e
            failures.append({
                "kind": "edge",
                "edge": [p.ids[a[0]], p.ids[b[0]]],
                "count": cnt,
                "message": f"edge {p.ids[a[0]]}-{p.ids[b[0]]}{b[1]} lies in {cnt} triangle(s)",
            })
    corners = _corners(triangles, len(p))
    fans = {}
    for i in range(len(p)):
        sid = p.ids[i]
        cs = corners[i]
        if not cs:
            failures.append({"kind": "uncovered", "sphere": sid, "message": f"sphere {sid} lies in no triangle"})
            continue
        total = sum(angle(labels[i], labels[c.left[0]], labels[c.right[0]], rho) for c in cs)
        if abs(total - 2 * math.pi) > 1e-8:
            failures.append({
                "kind": "angle_sum",
                "sphere": sid,
                "angle_sum": total,
                "message": f"sphere {sid}: fan angles sum to {total:.10f}, not 2pi",
            })
        order = _fan_cycle(cs)
        if order is None:
            failures.append({"kind": "fan", "sphere": sid, "message": f"sphere {sid}: triangles do not close into one fan"})
            continue
        fans[i] = _orient_ccw(p, i, order)
    if failures:
        return VerificationReport(False, failures)
    return VerificationReport(True, [], PackingComplex(p, labels, rho, triangles, fans))


def _orient_ccw(p, i, order):
    c = p.centers[i]
    ang = [math.atan2(*(p.position(img) - c)[::-1]) for img in order]
    # turning positively from the first to the second neighbour
    step = (ang[1] - ang[0]) % (2 * math.pi)
    return order if step < math.pi else [order[0]] + order[:0:-1]


# -- canonical objects -----------------------------------------------------------------


def radii_of(p: SpherePacking, rel_tol: float = 1e-9) -> list[float]:
    out: list[float] = []
    for r in sorted(float(x) for x in p.radii):
        if not out or r - out[-1] > rel_tol * max(r, out[-1]):
            out.append(r)
    return out


def canonical_labeling(p: SpherePacking) -> tuple:
    sizes = radii_of(p)
    labels = []
    for r in p.radii:
        labels.append(min(range(len(sizes)), key=lambda j: abs(sizes[j] - r)))
    return tuple(labels)


def canonical_realizer(p: SpherePacking) -> Realizer:
    return Realizer(tuple(radii_of(p)))


def canonical_triangulation(p: SpherePacking, sphere_id, report: VerificationReport | None = None):
    """Tangency points of the neighbours, projected to the unit sphere about the center."""
    i = p.index_of(sphere_id)
    labels = canonical_labeling(p)
    if p.dim == 2:
        report = report or verify_compact_2d(p)
        if not report:
            bad = [f for f in report.failures if f.get("sphere") == sphere_id]
            raise IncompleteCorona(f"sphere {sphere_id}: " + ("; ".join(f["message"] for f in bad) or report.describe()))
        order = report.complex.fans[i]
        dirs = [p.position(img) - p.centers[i] for img in order]
        coords = [d / np.linalg.norm(d) for d in dirs]
        m = len(order)
        facets = frozenset(frozenset((k, (k + 1) % m)) for k in range(m))
        return LabeledSphericalTriangulation(2, labels[i], coords, [labels[img[0]] for img in order], facets)
    if p.dim == 3:
        return _link_triangulation_3d(p, i, labels)
    raise ValueError("canonical triangulations are available for dimensions 2 and 3")


def _link_triangulation_3d(p, i, labels):
    cc = contact_hypergraph(p)
    zero = (0,) * p.dim
    images, facets = [], set()
    for tet in cc.of_size(4):
        for m in tet:
            if m[0] != i:
                continue
            others = [_shift(x, m[1]) for x in tet if x is not m]
            ids = []
            for img in others:
                if img not in images:
                    images.append(img)
                ids.append(images.index(img))
            facets.add(frozenset(ids))
    if not facets:
        raise IncompleteCorona(f"sphere {p.ids[i]} lies in no tetrahedron of the contact hypergraph")
    coords = []
    for img in images:
        d = p.position(img) - p.position((i, zero))
        coords.append(d / np.linalg.norm(d))
    try:
        return LabeledSphericalTriangulation(3, labels[i], coords, [labels[img[0]] for img in images], frozenset(facets))
    except ValueError as exc:
        raise IncompleteCorona(f"sphere {p.ids[i]}: corona does not close ({exc})") from None


def codes_of(p: SpherePacking) -> CodeSet:
    n = len(radii_of(p))
    report = verify_compact_2d(p) if p.dim == 2 else None
    codes = []
    for sid in p.ids:
        P = canonical_triangulation(p, sid, report) if p.dim == 2 else canonical_triangulation(p, sid)
        codes.append(PackingCode(P.center_label, NeighborComplex(p.dim, P.labels, P.facets)))
    return CodeSet(n, p.dim, tuple(codes))


def fundamental_subset(p: SpherePacking, codes: CodeSet | None = None) -> CodeSet:
    n = len(radii_of(p))
    if n < 2:
        raise ValueError("n >= 2 required: the packing has a single size")
    codes = codes or codes_of(p)
    sub = codes.with_center_at_most(n - 2)
    verdict = is_fundamental(sub)
    if not verdict:
        raise InternalConsistencyError(f"extracted codes are not fundamental ({verdict.describe()})")
    return sub
