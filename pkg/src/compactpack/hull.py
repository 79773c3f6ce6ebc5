"""Incremental convex hull of points in R^3 (triangular facets)."""

from __future__ import annotations

import itertools

import numpy as np


class DegenerateHull(ValueError):
    pass


def _initial_simplex(pts, eps):
    n = len(pts)
    i0 = 0
    i1 = max(range(n), key=lambda i: np.linalg.norm(pts[i] - pts[i0]))
    if np.linalg.norm(pts[i1] - pts[i0]) <= eps:
        raise DegenerateHull("all points coincide")
    d01 = pts[i1] - pts[i0]
    i2 = max(range(n), key=lambda i: np.linalg.norm(np.cross(d01, pts[i] - pts[i0])))
    normal = np.cross(d01, pts[i2] - pts[i0])
    if np.linalg.norm(normal) <= eps:
        raise DegenerateHull("all points are collinear")
    i3 = max(range(n), key=lambda i: abs(np.dot(normal, pts[i] - pts[i0])))
    if abs(np.dot(normal, pts[i3] - pts[i0])) <= eps * np.linalg.norm(normal):
        raise DegenerateHull("all points are coplanar")
    return i0, i1, i2, i3


def convex_hull_3d(points, eps: float = 1e-10) -> list[tuple[int, int, int]]:
    """Outward-oriented triangular facets of the hull, as index triples.

    Points that lie on a facet plane (within ``eps``) without being needed as
    vertices are left out, so a non-simplicial hull shows up as a facet list
    that misses some input points or as coplanar neighbouring facets; see
    :func:`coplanar_points`.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise DegenerateHull("need at least four points in R^3")
    a, b, c, d = _initial_simplex(pts, eps)
    centroid = pts[[a, b, c, d]].mean(axis=0)

    def oriented(i, j, k):
        n = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        return (i, j, k) if np.dot(n, pts[i] - centroid) > 0 else (i, k, j)

    faces = {oriented(*f) for f in itertools.combinations((a, b, c, d), 3)}

    def above(face, p):
        i, j, k = face
        n = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        norm = np.linalg.norm(n)
        return np.dot(n, p - pts[i]) / norm > eps

    for idx in range(len(pts)):
        if idx in (a, b, c, d):
            continue
        p = pts[idx]
        visible = [f for f in faces if above(f, p)]
        if not visible:
            continue
        edges = {}
        for i, j, k in visible:
            for e in ((i, j), (j, k), (k, i)):
                edges[e] = edges.get(e, 0) + 1
        horizon = [e for e in edges if (e[1], e[0]) not in edges]
        faces.difference_update(visible)
        for i, j in horizon:
            faces.add((i, j, idx))
    return sorted(faces)


def coplanar_points(points, faces, eps: float = 1e-10) -> list[tuple[tuple[int, int, int], int]]:
    """Pairs (facet, point) where a non-vertex point lies on the facet's plane."""
    pts = np.asarray(points, dtype=float)
    out = []
    for f in faces:
        i, j, k = f
        n = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        n /= np.linalg.norm(n)
        for q in range(len(pts)):
            if q not in f and abs(np.dot(n, pts[q] - pts[i])) <= eps:
                out.append((f, q))
    return out
