import xml.etree.ElementTree as ET

import pytest

from compactpack import fixtures
from compactpack.spherical import regular_octahedron
from compactpack.packing import canonical_triangulation
from compactpack.svg import circle_triangulation_svg, packing_svg

NS = "{http://www.w3.org/2000/svg}"


@pytest.mark.parametrize("name", ["two-size-1111", "two-size-0111", "figure4"])
def test_one_circle_per_disc(name):
    p = fixtures.load_fixture(name)
    root = ET.fromstring(packing_svg(p))
    discs = root.findall(f".//{NS}g[@class='discs']/{NS}circle")
    assert sorted(int(c.get("data-id")) for c in discs) == sorted(p.ids)


def test_overlay_edge_count():
    p = fixtures.load_fixture("two-size-1111")
    root = ET.fromstring(packing_svg(p))
    lines = root.findall(f".//{NS}g[@class='complex']/{NS}line")
    # 2 discs per cell: 4 + 8 fan entries, each edge counted twice
    assert len(lines) == 6


def test_no_overlay():
    root = ET.fromstring(packing_svg(fixtures.load_fixture("hexagonal"), overlay=False))
    assert root.find(f".//{NS}g[@class='complex']") is None


def test_circle_triangulation():
    p = fixtures.load_fixture("two-size-1111")
    P = canonical_triangulation(p, p.ids[1])
    root = ET.fromstring(circle_triangulation_svg(P))
    assert len(root.findall(f"{NS}line")) == len(P.facets)


def test_rejects_3d():
    with pytest.raises(ValueError):
        circle_triangulation_svg(regular_octahedron())
    with pytest.raises(ValueError):
        packing_svg(fixtures.load_fixture("fcc-octahedral"))
