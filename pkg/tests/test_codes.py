import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from compactpack.codes import (
    CodeParseError,
    CodeSet,
    CodeValidationError,
    NeighborComplex,
    PackingCode,
    PreconditionError,
    canonical_cycle,
    codes_from_words,
    downarrow,
    downarrow_codeset,
    is_fundamental,
    labeled_isomorphic,
    parse_codes,
    serialize_codes,
)

FIG4 = ["0:43142", "1:421230", "2:431140", "3:434210"]


def octahedron(labels=(0,) * 6):
    # vertices 0/1 = +-x, 2/3 = +-y, 4/5 = +-z
    facets = [frozenset((x, y, z)) for x in (0, 1) for y in (2, 3) for z in (4, 5)]
    return NeighborComplex(3, tuple(labels), frozenset(facets))


def test_canonical_cycle():
    assert canonical_cycle((4, 3, 1, 4, 2)) == (1, 3, 4, 2, 4)
    assert canonical_cycle((2, 4, 1, 3, 4)) == canonical_cycle((4, 3, 1, 4, 2))


def test_fig4_fundamental():
    assert is_fundamental(codes_from_words(5, FIG4))


def test_trivial_fundamental():
    assert is_fundamental(codes_from_words(2, ["0:111"]))


def test_closed_set_certificate():
    res = is_fundamental(codes_from_words(3, ["0:000", "1:000"]))
    assert not res
    assert res.violating_set == frozenset({0, 1})


def test_missing_center_certificate():
    res = is_fundamental(codes_from_words(4, ["0:333", "1:333"]))
    assert not res and res.missing_centers == frozenset({2})
    assert not is_fundamental(CodeSet(3, 2, ()))


def test_downarrow_examples():
    assert downarrow((4, 3, 1, 4, 2), 2) == (2, 2, 1, 2, 2)
    assert downarrow((4, 3, 1, 4, 2), 4) == (4, 3, 1, 4, 2)
    code = PackingCode.from_cycle(1, "421230")
    assert str(downarrow(code, 2)) == str(PackingCode.from_cycle(1, "221220"))


def test_downarrow_codeset_examples():
    C = codes_from_words(5, FIG4)
    assert downarrow_codeset(C, 5).words() == C.words()
    C2 = downarrow_codeset(C, 2)
    assert C2.words() == {"0:11111"} and C2.n == 2
    with pytest.raises(PreconditionError):
        downarrow_codeset(codes_from_words(3, ["0:000", "1:000"]), 2)


@given(st.lists(st.integers(0, 6), min_size=3, max_size=9), st.integers(0, 6), st.integers(0, 6))
def test_downarrow_idempotent_and_ordered(labels, s, t):
    s, t = min(s, t), max(s, t)
    once = downarrow(tuple(labels), s)
    assert downarrow(once, s) == once
    assert downarrow(downarrow(tuple(labels), t), s) == once


def test_parse_and_roundtrip():
    C = parse_codes("# figure\ndim=2 n=5\n" + "\n".join(FIG4 + ["4:3320120"]) + "\n")
    assert C.n == 5 and len(C) == 5
    first = [c for c in C if c.center == 0][0]
    assert sorted(first.cycle_labels()) == [1, 2, 3, 4, 4]
    text = serialize_codes(C)
    assert serialize_codes(parse_codes(text)) == text


def test_parse_error_offset():
    with pytest.raises(CodeParseError) as info:
        parse_codes("0:4x1")
    assert info.value.char == 3 and info.value.line == 1


@pytest.mark.parametrize("text", ["dim=2 n=2\n0:12", "0:11"])
def test_validation_errors(text):
    with pytest.raises(CodeValidationError):
        parse_codes(text)


def test_parse_error_line_number():
    with pytest.raises(CodeParseError) as info:
        parse_codes("0:111\n\nfoo\n")
    assert info.value.line == 3


def test_isomorphism_d2():
    a = NeighborComplex.from_cycle((4, 3, 1, 4, 2))
    assert labeled_isomorphic(a, NeighborComplex.from_cycle((2, 4, 1, 3, 4))) is not None
    assert labeled_isomorphic(a, NeighborComplex.from_cycle((4, 3, 1, 2, 4))) is None


def test_isomorphism_octahedron_permuted():
    labels = (0, 0, 1, 1, 2, 2)
    t1 = octahedron(labels)
    perm = [3, 5, 0, 4, 1, 2]
    inv = {p: i for i, p in enumerate(perm)}
    t2 = NeighborComplex(3, tuple(labels[inv[v]] for v in range(6)), frozenset(frozenset(perm[v] for v in f) for f in t1.facets))
    m = labeled_isomorphic(t1, t2)
    assert m is not None
    assert all(t1.labels[v] == t2.labels[w] for v, w in m.items())
    assert {frozenset(m[v] for v in f) for f in t1.facets} == set(t2.facets)
    assert labeled_isomorphic(t1, octahedron((0, 1, 0, 1, 2, 2))) is None


def test_json_roundtrip_d3():
    C = CodeSet(3, 3, (PackingCode(0, octahedron((1,) * 6)), PackingCode(1, octahedron((0, 0, 1, 1, 2, 2)))))
    text = serialize_codes(C)
    assert json.loads(text)["dim"] == 3
    back = parse_codes(text)
    assert back.n == 3 and len(back) == 2
    assert serialize_codes(back) == text


def test_dedup_up_to_isomorphism():
    C = codes_from_words(5, ["0:43142", "0:24134", "0:31424"])
    assert len(C) == 1


def test_invalid_cycle_complex():
    with pytest.raises(CodeValidationError):
        NeighborComplex(2, (0, 0, 0, 0), frozenset({frozenset((0, 1)), frozenset((1, 0)), frozenset((2, 3))}))


def random_codeset(rng, n):
    codes = []
    for c in range(n - 1):
        for _ in range(rng.randint(1, 2)):
            m = rng.randint(3, 8)
            codes.append(PackingCode.from_cycle(c, [rng.randrange(n) for _ in range(m)]))
    return CodeSet(n, 2, tuple(codes))


def random_fundamental(rng, n):
    while True:
        C = random_codeset(rng, n)
        if is_fundamental(C):
            return C


def test_fundamental_monotone_under_adding_codes():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(2, 5)
        C = random_fundamental(rng, n)
        C2 = C.union(random_codeset(rng, n))
        assert is_fundamental(C2)


def test_downarrow_preserves_fundamental_random():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(2, 5)
        C = random_fundamental(rng, n)
        for k in range(2, n + 1):
            assert is_fundamental(downarrow_codeset(C, k))


def test_exhaustive_subset_oracle():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(2, 5)
        C = random_codeset(rng, n)
        ok = C.centers() == set(range(n - 1)) and all(
            any(c.center in K and not c.neighbor_labels() <= set(K) for c in C)
            for r in range(1, n)
            for K in itertools.combinations(range(n - 1), r)
        )
        assert bool(is_fundamental(C)) == ok


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_serialize_parse_canonical(seed):
    rng = random.Random(seed)
    C = random_codeset(rng, rng.randint(2, 6))
    again = parse_codes(serialize_codes(C))
    assert again.words() == C.words() and again.n == C.n
