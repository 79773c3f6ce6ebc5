"""Packing codes, code sets, fundamentality and the down-arrow relabeling."""

from __future__ import annotations

import itertools
import json
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class CodeParseError(ValueError):
    """Malformed code-set text; carries the 1-based line and 0-based character offset."""

    def __init__(self, message: str, line: int, char: int | None = None):
        where = f"line {line}" + (f", character {char}" if char is not None else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.char = char


class CodeValidationError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def canonical_cycle(labels: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least rotation of the label cycle or of its reversal."""
    seq = tuple(labels)
    m = len(seq)
    if m == 0:
        return seq
    best = None
    for s in (seq, seq[::-1]):
        for i in range(m):
            cand = s[i:] + s[:i]
            if best is None or cand < best:
                best = cand
    return best


@dataclass(frozen=True)
class NeighborComplex:
    """An abstract homogeneous simplicial (dim-1)-complex with labeled vertices.

    Vertex ``i`` carries ``labels[i]``.  Only facets (sets of ``dim`` vertex ids)
    are stored; lower simplices are implied.
    """

    dim: int
    labels: tuple[int, ...]
    facets: frozenset

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))
        object.__setattr__(self, "facets", frozenset(frozenset(int(v) for v in f) for f in self.facets))
        self._validate()

    def _validate(self):
        d, m = self.dim, len(self.labels)
        if d < 2:
            raise CodeValidationError(f"dimension must be >= 2, got {d}")
        if any(lab < 0 for lab in self.labels):
            raise CodeValidationError("labels must be non-negative")
        covered = set()
        for f in self.facets:
            if len(f) != d:
                raise CodeValidationError(f"facet {sorted(f)} does not have {d} vertices")
            if not all(0 <= v < m for v in f):
                raise CodeValidationError(f"facet {sorted(f)} references unknown vertices")
            covered |= f
        if len(covered) != m:
            raise CodeValidationError("complex is not homogeneous: some vertex lies in no facet")
        if d == 2:
            if m < 3:
                raise CodeValidationError(f"a neighbor cycle needs at least 3 vertices, got {m}")
            deg = [0] * m
            for f in self.facets:
                for v in f:
                    deg[v] += 1
            if any(x != 2 for x in deg):
                raise CodeValidationError("every vertex of a neighbor cycle must lie in exactly two edges")
            if len(self._walk_cycle()) != m:
                raise CodeValidationError("neighbor edges do not form a single cycle")

    @classmethod
    def from_cycle(cls, labels: Sequence[int]) -> "NeighborComplex":
        m = len(labels)
        if m < 3:
            raise CodeValidationError(f"a neighbor cycle needs at least 3 vertices, got {m}")
        return cls(2, tuple(labels), frozenset(frozenset((i, (i + 1) % m)) for i in range(m)))

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    def label_values(self) -> set[int]:
        return set(self.labels)

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in self.labels]
        for f in self.facets:
            for u, v in itertools.combinations(f, 2):
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def edges(self) -> set[frozenset]:
        return {frozenset(e) for f in self.facets for e in itertools.combinations(sorted(f), 2)}

    def _walk_cycle(self) -> list[int]:
        adj = self.adjacency()
        order = [0]
        prev, cur = None, 0
        while True:
            nxt = [v for v in sorted(adj[cur]) if v != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            if cur == 0:
                break
            order.append(cur)
            if len(order) > len(self.labels):
                break
        return order

    def cycle(self) -> list[int]:
        """Vertex ids in cyclic order (dimension 2 only)."""
        if self.dim != 2:
            raise ValueError("cycle() is only defined for dimension 2")
        return self._walk_cycle()

    def cycle_labels(self) -> tuple[int, ...]:
        return tuple(self.labels[v] for v in self.cycle())

    def relabeled(self, fn) -> "NeighborComplex":
        return NeighborComplex(self.dim, tuple(fn(x) for x in self.labels), self.facets)

    def word(self) -> str:
        return "".join(str(x) for x in canonical_cycle(self.cycle_labels()))


@dataclass(frozen=True)
class PackingCode:
    center: int
    neighbors: NeighborComplex

    @classmethod
    def from_cycle(cls, center: int, labels: Sequence[int] | str) -> "PackingCode":
        if isinstance(labels, str):
            labels = [int(ch) for ch in labels]
        return cls(int(center), NeighborComplex.from_cycle(labels))

    @property
    def dim(self) -> int:
        return self.neighbors.dim

    def neighbor_labels(self) -> set[int]:
        return self.neighbors.label_values()

    def all_labels(self) -> set[int]:
        return self.neighbor_labels() | {self.center}

    def cycle_labels(self) -> tuple[int, ...]:
        return self.neighbors.cycle_labels()

    def key(self):
        """Hashable form equal for labeled-isomorphic codes (exact for dim 2)."""
        if self.dim == 2:
            return (self.center, canonical_cycle(self.cycle_labels()))
        deg = sorted((self.neighbors.labels[v], d) for v, d in enumerate(_degrees(self.neighbors)))
        return (self.center, self.dim, len(self.neighbors.facets), tuple(deg))

    def __str__(self):
        if self.dim == 2:
            return f"{self.center}:{self.neighbors.word()}"
        return f"{self.center}:<{self.dim - 1}-complex, {self.neighbors.n_vertices} vertices>"


def _degrees(t: NeighborComplex) -> list[int]:
    deg = [0] * t.n_vertices
    for f in t.facets:
        for v in f:
            deg[v] += 1
    return deg


def same_code(x: PackingCode, y: PackingCode) -> bool:
    if x.center != y.center or x.dim != y.dim:
        return False
    if x.dim == 2:
        return x.key() == y.key()
    return x.key() == y.key() and labeled_isomorphic(x.neighbors, y.neighbors) is not None


@dataclass(frozen=True)
class CodeSet:
    """A finite set of packing codes over the labels ``0..n-1``, deduplicated
    up to labeled isomorphism of neighbor complexes."""

    n: int
    dim: int
    codes: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise CodeValidationError("n must be positive")
        kept: list[PackingCode] = []
        for code in self.codes:
            if code.dim != self.dim:
                raise CodeValidationError(f"code {code} has dimension {code.dim}, expected {self.dim}")
            bad = [lab for lab in code.all_labels() if lab >= self.n]
            if bad:
                raise CodeValidationError(f"code {code} uses label {max(bad)} >= n={self.n}")
            if not any(same_code(code, k) for k in kept):
                kept.append(code)
        if self.dim == 2:
            kept.sort(key=lambda c: c.key())
        object.__setattr__(self, "codes", tuple(kept))

    def __iter__(self) -> Iterator[PackingCode]:
        return iter(self.codes)

    def __len__(self):
        return len(self.codes)

    def __contains__(self, code) -> bool:
        return any(same_code(code, k) for k in self.codes)

    def centers(self) -> set[int]:
        return {c.center for c in self.codes}

    def with_center_at_most(self, c_max: int) -> "CodeSet":
        return CodeSet(self.n, self.dim, tuple(c for c in self.codes if c.center <= c_max))

    def union(self, other: "CodeSet") -> "CodeSet":
        if (self.n, self.dim) != (other.n, other.dim):
            raise CodeValidationError("code sets differ in label set or dimension")
        return CodeSet(self.n, self.dim, self.codes + other.codes)

    def words(self) -> set[str]:
        return {str(c) for c in self.codes}

    def __str__(self):
        return "{" + ", ".join(str(c) for c in self.codes) + "}"


@dataclass(frozen=True)
class Fundamentality:
    """Outcome of :func:`is_fundamental`; truthy iff the set is fundamental.

    On failure either ``missing_centers`` is non-empty or ``violating_set`` is the
    largest K whose codes only see labels inside K.
    """

    fundamental: bool
    missing_centers: frozenset = frozenset()
    extra_centers: frozenset = frozenset()
    violating_set: frozenset | None = None

    def __bool__(self):
        return self.fundamental

    def describe(self) -> str:
        if self.fundamental:
            return "fundamental"
        if self.missing_centers or self.extra_centers:
            parts = []
            if self.missing_centers:
                parts.append("no code with center " + ",".join(map(str, sorted(self.missing_centers))))
            if self.extra_centers:
                parts.append("unexpected center " + ",".join(map(str, sorted(self.extra_centers))))
            return "; ".join(parts)
        return "K={" + ",".join(map(str, sorted(self.violating_set))) + "} is closed: no code centered in K sees a label outside K"


def is_fundamental(C: CodeSet) -> Fundamentality:
    n = C.n
    wanted = set(range(n - 1))
    centers = C.centers()
    if not C.codes or n < 2:
        return Fundamentality(False, missing_centers=frozenset(wanted))
    if centers != wanted:
        return Fundamentality(
            False,
            missing_centers=frozenset(wanted - centers),
            extra_centers=frozenset(centers - wanted),
        )
    escapes = []
    for code in C.codes:
        escapes.append((code.center, frozenset(code.neighbor_labels())))
    closed: set[int] = set()
    for size in range(1, n):
        for K in itertools.combinations(range(n - 1), size):
            Ks = set(K)
            if not any(c in Ks and not labs <= Ks for c, labs in escapes):
                closed |= Ks
    if closed:
        return Fundamentality(False, violating_set=frozenset(closed))
    return Fundamentality(True)


def downarrow(x, s: int):
    """Replace every label strictly larger than ``s`` by ``s``.

    Works on a label, a sequence of labels, a :class:`NeighborComplex`, a
    :class:`PackingCode` or a :class:`CodeSet` (whose label set is kept).
    """
    cap = lambda lab: s if lab > s else lab
    if isinstance(x, int):
        return cap(x)
    if isinstance(x, NeighborComplex):
        return x.relabeled(cap)
    if isinstance(x, PackingCode):
        return PackingCode(cap(x.center), x.neighbors.relabeled(cap))
    if isinstance(x, CodeSet):
        return CodeSet(x.n, x.dim, tuple(downarrow(c, s) for c in x.codes))
    if isinstance(x, str):
        return "".join(str(cap(int(ch))) for ch in x)
    return type(x)(cap(lab) for lab in x)


def downarrow_codeset(C: CodeSet, k: int) -> CodeSet:
    """The set ``{c:T downarrow_(k-1) : c <= k-2}`` over the labels ``0..k-1``."""
    if not 2 <= k <= C.n:
        raise PreconditionError(f"k must satisfy 2 <= k <= n={C.n}, got {k}")
    verdict = is_fundamental(C)
    if not verdict:
        raise PreconditionError(f"code set is not fundamental ({verdict.describe()})")
    kept = tuple(downarrow(c, k - 1) for c in C.codes if c.center <= k - 2)
    return CodeSet(k, C.dim, kept)


# -- isomorphism -------------------------------------------------------------


def iter_isomorphisms(t1: NeighborComplex, t2: NeighborComplex) -> Iterator[dict[int, int]]:
    """Yield every label-preserving simplicial isomorphism from ``t1`` onto ``t2``."""
    if t1.dim != t2.dim or t1.n_vertices != t2.n_vertices or len(t1.facets) != len(t2.facets):
        return
    if sorted(t1.labels) != sorted(t2.labels):
        return
    if t1.dim == 2:
        yield from _cycle_isomorphisms(t1, t2)
        return
    yield from _backtrack_isomorphisms(t1, t2)


def _cycle_isomorphisms(t1, t2):
    c1, c2 = t1.cycle(), t2.cycle()
    m = len(c1)
    for direction in (1, -1):
        for shift in range(m):
            mapping = {c1[i]: c2[(shift + direction * i) % m] for i in range(m)}
            if all(t1.labels[v] == t2.labels[w] for v, w in mapping.items()):
                yield mapping


def _backtrack_isomorphisms(t1, t2):
    adj1, adj2 = t1.adjacency(), t2.adjacency()
    deg1, deg2 = _degrees(t1), _degrees(t2)
    # visit vertices so that each one (after the first of its component) has a mapped neighbour
    order: list[int] = []
    seen: set[int] = set()
    for root in range(t1.n_vertices):
        if root in seen:
            continue
        seen.add(root)
        queue = deque([root])
        while queue:
            v = queue.popleft()
            order.append(v)
            for u in sorted(adj1[v]):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    facets_by_vertex = [[] for _ in range(t1.n_vertices)]
    for f in t1.facets:
        for v in f:
            facets_by_vertex[v].append(f)
    facets2 = t2.facets
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def candidates(v):
        for w in range(t2.n_vertices):
            if w in used or t2.labels[w] != t1.labels[v] or deg2[w] != deg1[v]:
                continue
            if len(adj2[w]) != len(adj1[v]):
                continue
            if all(mapping[u] in adj2[w] for u in adj1[v] if u in mapping):
                yield w

    def consistent(v):
        for f in facets_by_vertex[v]:
            if all(u in mapping for u in f):
                if frozenset(mapping[u] for u in f) not in facets2:
                    return False
        return True

    def extend(i):
        if i == len(order):
            yield dict(mapping)
            return
        v = order[i]
        for w in candidates(v):
            mapping[v] = w
            used.add(w)
            if consistent(v):
                yield from extend(i + 1)
            del mapping[v]
            used.discard(w)

    yield from extend(0)


def labeled_isomorphic(t1: NeighborComplex, t2: NeighborComplex) -> dict[int, int] | None:
    """A label-preserving isomorphism ``t1 -> t2`` as a vertex map, or ``None``."""
    return next(iter_isomorphisms(t1, t2), None)


# -- text and JSON formats ---------------------------------------------------

_HEADER = re.compile(r"^dim\s*=\s*(\d+)\s+n\s*=\s*(\d+)\s*$")


def parse_codes(text: str, n: int | None = None) -> CodeSet:
    """Parse the line format (``<center>:<digits>``) or the JSON document form."""
    if text.lstrip().startswith("{"):
        return _parse_codes_json(text)
    dim, header_n = 2, None
    entries: list[tuple[int, int, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        offset = len(line) - len(line.lstrip())
        m = _HEADER.match(stripped)
        if m:
            dim, header_n = int(m.group(1)), int(m.group(2))
            if dim != 2:
                raise CodeParseError("the line format is only for dim=2; use the JSON form", lineno)
            continue
        if ":" not in stripped:
            raise CodeParseError("expected '<center>:<labels>'", lineno, offset)
        head, tail = stripped.split(":", 1)
        if not head.isdigit():
            bad = next((i for i, ch in enumerate(head) if not ch.isdigit()), 0)
            raise CodeParseError(f"invalid center {head!r}", lineno, offset + bad)
        for i, ch in enumerate(tail):
            if not ch.isdigit():
                raise CodeParseError(f"invalid label digit {ch!r}", lineno, offset + len(head) + 1 + i)
        if len(tail) < 3:
            raise CodeValidationError(f"line {lineno}: neighbor cycle needs at least 3 labels, got {len(tail)}")
        entries.append((lineno, int(head), [int(ch) for ch in tail]))
    if n is None:
        n = header_n
    if n is None:
        n = 1 + max((max([c] + labs) for _, c, labs in entries), default=1)
    codes = []
    for lineno, center, labs in entries:
        top = max([center] + labs)
        if top >= n:
            raise CodeValidationError(f"line {lineno}: label {top} is not below n={n}")
        codes.append(PackingCode.from_cycle(center, labs))
    return CodeSet(n, 2, tuple(codes))


def _parse_codes_json(text: str) -> CodeSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodeParseError(exc.msg, exc.lineno, exc.colno - 1) from None
    try:
        dim, n = int(doc["dim"]), int(doc["n"])
        codes = []
        for entry in doc["codes"]:
            ids = [int(v["id"]) for v in entry["vertices"]]
            index = {vid: i for i, vid in enumerate(ids)}
            labels = [int(v["label"]) for v in entry["vertices"]]
            facets = frozenset(frozenset(index[v] for v in f) for f in entry["facets"])
            center = int(entry["center"])
            if max(labels + [center]) >= n:
                raise CodeValidationError(f"code centered at {center} uses a label >= n={n}")
            codes.append(PackingCode(center, NeighborComplex(dim, tuple(labels), facets)))
    except (KeyError, TypeError) as exc:
        raise CodeParseError(f"malformed code document: {exc}", 1) from None
    return CodeSet(n, dim, tuple(codes))


def serialize_codes(C: CodeSet) -> str:
    if C.dim == 2:
        lines = [f"dim=2 n={C.n}"]
        lines += [str(code) for code in C.codes]
        return "\n".join(lines) + "\n"
    doc = {"dim": C.dim, "n": C.n, "codes": []}
    for code in C.codes:
        t = code.neighbors
        doc["codes"].append(
            {
                "center": code.center,
                "vertices": [{"id": i, "label": lab} for i, lab in enumerate(t.labels)],
                "facets": sorted(sorted(f) for f in t.facets),
            }
        )
    return json.dumps(doc, indent=1) + "\n"


def codes_from_words(n: int, words: Iterable[str]) -> CodeSet:
    """Build a dim-2 code set from strings such as ``"0:43142"``."""
    codes = []
    for w in words:
        center, tail = w.split(":")
        codes.append(PackingCode.from_cycle(int(center), tail))
    return CodeSet(n, 2, tuple(codes))
