"""SVG drawings of planar packings (with the packing complex) and circle triangulations."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

import numpy as np

from .packing import SpherePacking, canonical_labeling, verify_compact_2d

PALETTE = ["#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"]


def _svg_root(xmin, ymin, width, height, size=600):
    scale = size / max(width, height)
    root = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": f"{width * scale:.1f}",
        "height": f"{height * scale:.1f}",
        "viewBox": f"{xmin:.6f} {ymin:.6f} {width:.6f} {height:.6f}",
    })
    return root, 1.0 / scale


def packing_svg(p: SpherePacking, overlay: bool = True) -> str:
    """One circle per disc of the cell, the cell outline and the packing-complex edges."""
    if p.dim != 2:
        raise ValueError("only planar packings can be drawn")
    labels = canonical_labeling(p)
    corners = [np.zeros(2)]
    if p.lattice is not None:
        a, b = p.lattice
        corners = [np.zeros(2), a, a + b, b]
    pts = np.array(list(p.centers) + corners)
    pad = float(p.radii.max()) * 1.5
    lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
    root, px = _svg_root(lo[0], -hi[1], hi[0] - lo[0], hi[1] - lo[1])
    g = ET.SubElement(root, "g", {"transform": "scale(1,-1)"})
    if p.lattice is not None:
        ET.SubElement(g, "polygon", {
            "points": " ".join(f"{x:.6f},{y:.6f}" for x, y in corners),
            "fill": "none", "stroke": "#999999", "stroke-width": f"{px:.6f}", "stroke-dasharray": f"{4 * px:.6f}",
            "class": "cell",
        })
    discs = ET.SubElement(g, "g", {"class": "discs"})
    for sid, c, r, lab in zip(p.ids, p.centers, p.radii, labels):
        ET.SubElement(discs, "circle", {
            "cx": f"{c[0]:.6f}", "cy": f"{c[1]:.6f}", "r": f"{r:.6f}",
            "fill": PALETTE[lab % len(PALETTE)], "fill-opacity": "0.35",
            "stroke": "#222222", "stroke-width": f"{px:.6f}",
            "data-id": str(sid), "data-label": str(lab),
        })
    if overlay and p.lattice is not None:
        report = verify_compact_2d(p)
        edges = ET.SubElement(g, "g", {"class": "complex", "stroke": "#000000", "stroke-width": f"{px:.6f}"})
        if report.ok:
            seen = set()
            for i, fan in report.complex.fans.items():
                for img in fan:
                    j, off = img
                    neg = tuple(-x for x in off)
                    # an edge to one's own image is the same edge seen from both ends
                    key = (i, j, min(off, neg)) if i == j else (min(i, j), max(i, j), off if i < j else neg)
                    if key in seen:
                        continue
                    seen.add(key)
                    a, b = p.centers[i], p.position(img)
                    ET.SubElement(edges, "line", {
                        "x1": f"{a[0]:.6f}", "y1": f"{a[1]:.6f}", "x2": f"{b[0]:.6f}", "y2": f"{b[1]:.6f}",
                    })
    text = ET.SubElement(root, "g", {"class": "labels", "font-size": f"{10 * px:.6f}", "text-anchor": "middle"})
    for c, lab in zip(p.centers, labels):
        t = ET.SubElement(text, "text", {"x": f"{c[0]:.6f}", "y": f"{-c[1] + 3 * px:.6f}"})
        t.text = str(lab)
    return ET.tostring(root, encoding="unicode")


def circle_triangulation_svg(P) -> str:
    if P.dim != 2:
        raise ValueError("only circle triangulations can be drawn")
    root, px = _svg_root(-1.3, -1.3, 2.6, 2.6, size=400)
    ET.SubElement(root, "circle", {"cx": "0", "cy": "0", "r": "1", "fill": "none", "stroke": "#bbbbbb",
                                   "stroke-width": f"{px:.6f}"})
    ET.SubElement(root, "circle", {"cx": "0", "cy": "0", "r": f"{3 * px:.6f}",
                                   "fill": PALETTE[P.center_label % len(PALETTE)]})
    for f in P.facets:
        i, j = sorted(f)
        a, b = P.coords[i], P.coords[j]
        ET.SubElement(root, "line", {"x1": f"{a[0]:.6f}", "y1": f"{-a[1]:.6f}", "x2": f"{b[0]:.6f}",
                                     "y2": f"{-b[1]:.6f}", "stroke": "#000000", "stroke-width": f"{px:.6f}"})
    for (x, y), lab in zip(P.coords, P.labels):
        ET.SubElement(root, "circle", {"cx": f"{x:.6f}", "cy": f"{-y:.6f}", "r": f"{4 * px:.6f}",
                                       "fill": PALETTE[lab % len(PALETTE)], "data-label": str(lab)})
    return ET.tostring(root, encoding="unicode")
