"""Constructions of the shipped fixture packings.

Two-size packings are built from explicit geometry with the small radius taken
from the corona root of the small disc.  The five-size packing is developed
by growing a patch disc by disc from the declared coronas and reading the
lattice off the translations that map the patch core onto itself.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from pathlib import Path

import numpy as np

from .angle_core import Realizer, angle
from .codes import codes_from_words, serialize_codes
from .packing import SpherePacking
from .solver import CoronaSystem, solve_corona_two_size, solve_realizer

S3 = math.sqrt(3.0)
FIGURE4_WORDS = ["0:43142", "1:421230", "2:431140", "3:434210", "4:3320120"]


def small_radius(word: str) -> float:
    roots = solve_corona_two_size(word).roots
    if len(roots) != 1:
        raise RuntimeError(f"corona word {word} has roots {roots}")
    return roots[0]


def _dedupe(points, lattice, tol=1e-9):
    lattice = np.asarray(lattice, float)
    inv = np.linalg.inv(lattice.T)
    out = []
    for p in points:
        f = inv @ np.asarray(p, float)
        f -= np.floor(f + 1e-12)
        q = lattice.T @ f
        if all(np.linalg.norm(_wrap(q - o, lattice)) > tol for o in out):
            out.append(q)
    return out


def _wrap(v, lattice):
    f = np.linalg.solve(lattice.T, v)
    f -= np.round(f)
    return lattice.T @ f


def _packing(name, lattice, large, small, r):
    lattice = np.asarray(lattice, float)
    large = _dedupe(large, lattice)
    small = _dedupe(small, lattice)
    centers = large + small
    radii = [1.0] * len(large) + [r] * len(small)
    return SpherePacking(2, centers, radii, lattice, (), name)


def hexagonal() -> SpherePacking:
    return SpherePacking(2, [[0.0, 0.0]], [1.0], [[2.0, 0.0], [1.0, S3]], (), "hexagonal")


def square_two_size() -> SpherePacking:
    r = small_radius("1111")
    return SpherePacking(2, [[0.0, 0.0], [1.0, 1.0]], [1.0, r], [[2.0, 0.0], [0.0, 2.0]], (), "square-1111")


def triangle_holes(word: str, name: str) -> SpherePacking:
    """Hexagonal large discs; each triangular hole holds one disc (111) or three (0011)."""
    r = small_radius(word)
    lattice = [[2.0, 0.0], [1.0, S3]]
    up = [np.array(v) for v in ((0.0, 0.0), (2.0, 0.0), (1.0, S3))]
    down = [np.array(v) for v in ((2.0, 0.0), (3.0, S3), (1.0, S3))]
    small = []
    for tri in (up, down):
        g = sum(tri) / 3.0
        if word == "111":
            small.append(g)
        else:
            for a, b in itertools.combinations(tri, 2):
                m = (a + b) / 2.0
                small.append(g + (2.0 * r / S3) * (m - g) / np.linalg.norm(m - g))
    return _packing(name, lattice, [(0.0, 0.0)], small, r)


def rhombic_pairs() -> SpherePacking:
    """Rhombic large lattice; a tangent small pair on every long diagonal (0111)."""
    r = small_radius("0111")
    alpha = math.acos((1.0 + 2.0 * r) / 2.0)
    a1 = 2.0 * np.array([math.cos(alpha), -math.sin(alpha)])
    a2 = 2.0 * np.array([math.cos(alpha), math.sin(alpha)])
    diag = (a1 + a2) / np.linalg.norm(a1 + a2)
    small = [(1.0 + r) * diag, (a1 + a2) - (1.0 + r) * diag]
    return _packing("rhombic-0111", [a1, a2], [(0.0, 0.0)], small, r)


def ringed() -> SpherePacking:
    """Every large disc carries a closed ring of twelve small discs (00101)."""
    r = small_radius("00101")
    D = 2.0 * math.sqrt(1.0 + 2.0 * r)
    lattice = [[D, 0.0], [D / 2.0, D * S3 / 2.0]]
    small = [
        (1.0 + r) * np.array([math.cos(t), math.sin(t)])
        for t in (math.radians(15 + 30 * k) for k in range(12))
    ]
    return _packing("ringed-00101", lattice, [(0.0, 0.0)], small, r)


def honeycomb_flowers() -> SpherePacking:
    """Honeycomb of large discs; each hexagon holds a seven-disc flower (00011)."""
    r = small_radius("00011")
    lattice = [[2.0 * S3, 0.0], [S3, 3.0]]
    large = [(2.0 * math.cos(t), 2.0 * math.sin(t)) for t in (math.radians(30 + 60 * k) for k in range(6))]
    small = [(0.0, 0.0)] + [
        (2.0 * r * math.cos(t), 2.0 * r * math.sin(t)) for t in (math.radians(60 * k) for k in range(6))
    ]
    return _packing("honeycomb-00011", lattice, large, small, r)


def zigzag_rows() -> SpherePacking:
    """Rows of large discs separated by zigzag chains of small discs (01011)."""
    r = small_radius("01011")
    yd = math.sqrt((1.0 + r) ** 2 - 1.0)
    H = 1.0 + r + yd
    lattice = [[2.0, 0.0], [1.0, H]]
    small = [(1.0, yd), (0.0, H - yd)]
    return _packing("zigzag-01011", lattice, [(0.0, 0.0)], small, r)


def kagome_trimers(shift: int = 1) -> SpherePacking:
    """Corner-sharing triangles of large discs; each hexagonal hole holds a small trimer (00111)."""
    r = small_radius("00111")
    rs = 2.0 * r / S3
    rho_a = r / S3 + math.sqrt(1.0 + 2.0 * r)
    rho_b = rho_a / 2.0 + math.sqrt(4.0 - 0.75 * rho_a * rho_a)
    unit = lambda t: np.array([math.cos(t), math.sin(t)])
    s = [rs * unit(2 * math.pi * i / 3) for i in range(3)]
    A = [rho_a * unit(2 * math.pi * i / 3 + math.pi / 3) for i in range(3)]
    B = [rho_b * unit(2 * math.pi * i / 3) for i in range(3)]
    t = [B[i] - A[(i + shift) % 3] for i in range(3)]
    return _packing("kagome-00111", [t[0], t[1]], A, s, r)


def hexagon_pairs() -> SpherePacking:
    """Hexagons of large discs, each holding a tangent small pair (01111)."""
    r = small_radius("01111")
    h = math.sqrt(1.0 + 2.0 * r)
    x = r + math.sqrt(r * r + 2.0 * r)
    lattice = [[-x, 1.0 + h], [x, 1.0 + h]]
    return _packing("hexagon-01111", lattice, [(0.0, h), (0.0, -h)], [(r, 0.0), (-r, 0.0)], r)


TWO_SIZE_BUILDERS = {
    "two-size-0011": lambda: triangle_holes("0011", "triangle-holes-0011"),
    "two-size-111": lambda: triangle_holes("111", "triangle-holes-111"),
    "two-size-0111": rhombic_pairs,
    "two-size-1111": square_two_size,
    "two-size-00101": ringed,
    "two-size-00011": honeycomb_flowers,
    "two-size-01011": zigzag_rows,
    "two-size-00111": kagome_trimers,
    "two-size-01111": hexagon_pairs,
}


# -- five sizes -------------------------------------------------------------------


def figure4_realizer() -> Realizer:
    system = CoronaSystem.from_codeset(codes_from_words(5, FIGURE4_WORDS))
    res = solve_realizer(system, Realizer.of(0.5, 0.6, 0.7, 0.8, 1.0))
    if not res.ok:
        raise RuntimeError(f"five-size system did not converge: {res.reason}")
    return res.realizer


class _Patch:
    """A finite patch of discs grown corona by corona."""

    def __init__(self, rho: Realizer):
        self.rho = rho
        self.pos: list[np.ndarray] = []
        self.lab: list[int] = []
        self.done: list[bool] = []

    def copy(self):
        other = _Patch(self.rho)
        other.pos, other.lab, other.done = list(self.pos), list(self.lab), list(self.done)
        return other

    def add(self, label, p):
        self.pos.append(np.asarray(p, float))
        self.lab.append(int(label))
        self.done.append(False)

    def find(self, p, tol=1e-7):
        for k, q in enumerate(self.pos):
            if np.linalg.norm(q - p) <= tol:
                return k
        return None

    def overlaps(self, label, p, tol=1e-7):
        r = self.rho(label)
        for q, lab in zip(self.pos, self.lab):
            if np.linalg.norm(q - p) < r + self.rho(lab) - tol:
                return True
        return False

    def tangent_neighbours(self, i, tol=1e-7):
        out = []
        for k, (q, lab) in enumerate(zip(self.pos, self.lab)):
            if k != i and abs(np.linalg.norm(q - self.pos[i]) - self.rho(self.lab[i]) - self.rho(lab)) <= tol:
                out.append(k)
        return out


def _corona_placements(patch: _Patch, i: int, words):
    """Every way of completing disc ``i``'s corona consistently with the patch."""
    c, p = patch.lab[i], patch.pos[i]
    known = patch.tangent_neighbours(i)
    theta = {k: math.atan2(*(patch.pos[k] - p)[::-1]) for k in known}
    results = []
    for word in words:
        m = len(word)
        steps = [angle(c, word[k], word[(k + 1) % m], patch.rho) for k in range(m)]
        anchor = known[0] if known else None
        for direction in (1, -1):
            for k0 in range(m):
                if anchor is not None and word[k0] != patch.lab[anchor]:
                    continue
                base = theta[anchor] if anchor is not None else 0.0
                slots, t = [], base
                for j in range(m):
                    k = (k0 + direction * j) % m
                    slots.append((word[k], t))
                    step_index = k if direction == 1 else (k - 1) % m
                    t += steps[step_index]
                ok, used = True, set()
                for kn in known:
                    match = [s for s, (lab, th) in enumerate(slots)
                             if lab == patch.lab[kn] and abs(math.remainder(th - theta[kn], 2 * math.pi)) <= 1e-7]
                    if len(match) != 1 or match[0] in used:
                        ok = False
                        break
                    used.add(match[0])
                if not ok:
                    continue
                new = []
                for s_idx, (lab, th) in enumerate(slots):
                    if s_idx in used:
                        continue
                    q = p + (patch.rho(c) + patch.rho(lab)) * np.array([math.cos(th), math.sin(th)])
                    if patch.find(q) is not None or patch.overlaps(lab, q):
                        ok = False
                        break
                    new.append((lab, q))
                if ok:
                    key = tuple(sorted((lab, round(q[0], 6), round(q[1], 6)) for lab, q in new))
                    if all(key != other[0] for other in results):
                        results.append((key, new))
        if anchor is None:
            break  # the very first corona only needs one orientation
    return [new for _, new in results]


def grow_patch(rho: Realizer, words_by_label: dict, seed_label: int, radius: float, max_nodes: int = 20000):
    """Grow discs around a seed until every disc within ``radius`` has a full corona."""
    patch = _Patch(rho)
    patch.add(seed_label, (0.0, 0.0))
    budget = [max_nodes]

    def extend(patch):
        budget[0] -= 1
        if budget[0] < 0:
            raise RuntimeError("corona growth exceeded its search budget")
        todo = [k for k in range(len(patch.pos)) if not patch.done[k] and np.linalg.norm(patch.pos[k]) <= radius]
        if not todo:
            return patch
        i = min(todo, key=lambda k: (np.linalg.norm(patch.pos[k]), k))
        for new in _corona_placements(patch, i, words_by_label[patch.lab[i]]):
            nxt = patch.copy()
            for lab, q in new:
                nxt.add(lab, q)
            nxt.done[i] = True
            found = extend(nxt)
            if found is not None:
                return found
        return None

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        result = extend(patch)
    finally:
        sys.setrecursionlimit(limit)
    if result is None:
        raise RuntimeError("the coronas admit no consistent patch")
    return result


def _translations(patch: _Patch, inner: float, tol=1e-6):
    pts = np.array(patch.pos)
    labs = np.array(patch.lab)
    core = [k for k in range(len(pts)) if np.linalg.norm(pts[k]) <= inner]
    origin_label = patch.lab[0]
    found = []
    for k in range(1, len(pts)):
        if labs[k] != origin_label:
            continue
        v = pts[k]
        ok = True
        for j in core:
            q = pts[j] + v
            if np.linalg.norm(q) > inner:
                continue
            d = np.linalg.norm(pts - q, axis=1)
            hit = np.argmin(d)
            if d[hit] > tol or labs[hit] != labs[j]:
                ok = False
                break
        if ok:
            found.append(v)
    return sorted(found, key=np.linalg.norm)


def develop_packing(rho: Realizer, words_by_label: dict, seed_label: int, name: str,
                    radius: float = 12.0) -> SpherePacking:
    """Periodic packing whose discs carry the given coronas, found by growing a patch."""
    patch = grow_patch(rho, words_by_label, seed_label, radius)
    trans = _translations(patch, radius - 2.0 * max(rho.values) * 2)
    if len(trans) < 2:
        raise RuntimeError("no two independent translations found in the grown patch")
    basis = _lattice_basis(trans)
    inner = [k for k in range(len(patch.pos)) if np.linalg.norm(patch.pos[k]) <= radius]
    inv = np.linalg.inv(basis.T)
    reps: list[tuple[int, np.ndarray]] = []
    for k in inner:
        f = inv @ patch.pos[k]
        f -= np.floor(f + 1e-9)
        q = basis.T @ f
        if all(lab != patch.lab[k] or np.linalg.norm(_wrap(q - p, basis)) > 1e-6 for lab, p in reps):
            reps.append((patch.lab[k], q))
    reps.sort(key=lambda t: t[0])
    return SpherePacking(2, [p for _, p in reps], [rho(lab) for lab, _ in reps], basis, (), name)


def _lattice_basis(vectors, tol=1e-6) -> np.ndarray:
    vectors = [np.asarray(v, float) for v in vectors]
    best = None
    for a, b in itertools.combinations(vectors[:40], 2):
        M = np.array([a, b])
        det = abs(np.linalg.det(M))
        if det < 1e-9:
            continue
        if best is not None and det >= best[0] - 1e-9:
            continue
        coeffs = [np.linalg.solve(M.T, v) for v in vectors]
        if all(np.allclose(c, np.round(c), atol=tol) for c in coeffs):
            best = (det, M)
    if best is None:
        raise RuntimeError("translations do not form a lattice")
    return best[1]


def figure4() -> SpherePacking:
    rho = figure4_realizer()
    words = {int(w[0]): [tuple(int(ch) for ch in w[2:])] for w in FIGURE4_WORDS}
    return develop_packing(rho, words, 4, "figure4-five-size")


# -- three dimensions --------------------------------------------------------------


def fcc_octahedral() -> SpherePacking:
    """Unit spheres in face-centred cubic order with every octahedral hole filled."""
    a = 2.0 * math.sqrt(2.0)  # cube edge for touching unit spheres
    lattice = [[0.0, a / 2, a / 2], [a / 2, 0.0, a / 2], [a / 2, a / 2, 0.0]]
    r = math.sqrt(2.0) - 1.0
    return SpherePacking(3, [[0.0, 0.0, 0.0], [a / 2, 0.0, 0.0]], [1.0, r], lattice, (), "fcc-octahedral")


# -- corpus ------------------------------------------------------------------------------


def all_fixtures() -> dict[str, SpherePacking]:
    out = {"hexagonal": hexagonal()}
    out.update({name: build() for name, build in TWO_SIZE_BUILDERS.items()})
    out["figure4"] = figure4()
    out["fcc-octahedral"] = fcc_octahedral()
    return out


def data_dir() -> Path:
    override = os.environ.get("COMPACTPACK_FIXTURES")
    return Path(override) if override else Path(__file__).resolve().parent / "data"


def fixture_path(name: str) -> Path:
    """Resolve a fixture name (or a path) against the fixture directory."""
    path = Path(name)
    if path.exists():
        return path
    for cand in (data_dir() / name, data_dir() / f"{name}.json"):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no fixture or file named {name!r} (looked in {data_dir()})")


def load_fixture(name: str) -> SpherePacking:
    return SpherePacking.load(fixture_path(name))


def verified_two_size(directory: Path | None = None) -> list[tuple[str, float]]:
    """(fixture name, small radius) for every shipped two-size planar fixture that verifies."""
    from .packing import radii_of, verify_compact_2d

    directory = Path(directory or data_dir())
    out = []
    for path in sorted(directory.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        if "spheres" not in doc or doc.get("dim") != 2 or not doc.get("lattice"):
            continue
        p = SpherePacking.from_json(doc)
        sizes = radii_of(p)
        if len(sizes) == 2 and abs(sizes[1] - 1.0) <= 1e-12 and verify_compact_2d(p):
            out.append((path.stem, sizes[0]))
    return out


def write_corpus(target: Path | None = None) -> list[Path]:
    """Write every fixture as JSON plus the code files used by the CLI examples."""
    from .packing import codes_of, verify_compact_2d

    target = Path(target or data_dir())
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name, p in all_fixtures().items():
        path = target / f"{name}.json"
        path.write_text(p.dumps() + "\n", encoding="utf-8")
        written.append(path)
    (target / "figure4.codes").write_text(
        "# five-size packing, centers 0..3 (a fundamental set)\n"
        + serialize_codes(codes_from_words(5, FIGURE4_WORDS[:4])), encoding="utf-8")
    (target / "figure4-all.codes").write_text(serialize_codes(codes_from_words(5, FIGURE4_WORDS)), encoding="utf-8")
    (target / "square.codes").write_text(serialize_codes(codes_from_words(2, ["0:1111"])), encoding="utf-8")
    (target / "octahedron.json").write_text(
        json.dumps(_octahedron_doc(), indent=1) + "\n", encoding="utf-8")
    written += [target / f for f in ("figure4.codes", "figure4-all.codes", "square.codes", "octahedron.json")]
    return written


def _octahedron_doc():
    from .spherical import regular_octahedron

    return regular_octahedron().to_json()
