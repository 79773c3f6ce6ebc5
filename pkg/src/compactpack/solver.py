"""Corona equations, the two-size candidate pipeline, multi-size Newton solves
and randomized harnesses for uniqueness and bootstrapping."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import bisect

from .angle_core import AngleSymbol, DomainError, Realizer, gradient, realize
from .codes import CodeSet, PackingCode, canonical_cycle, is_fundamental

TWO_PI = 2.0 * math.pi
CANDIDATE, VERIFIED, UNRESOLVED = "CANDIDATE", "VERIFIED", "UNRESOLVED"


class SolverError(RuntimeError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class CoronaWord:
    center: int
    word: tuple

    def __post_init__(self):
        word = tuple(int(x) for x in self.word)
        if len(word) < 3:
            raise DomainError(f"a corona word needs at least 3 labels, got {len(word)}")
        if self.center < 0 or any(x < 0 for x in word):
            raise DomainError("labels must be non-negative")
        object.__setattr__(self, "word", canonical_cycle(word))

    @classmethod
    def parse(cls, text: str, center: int = 0) -> "CoronaWord":
        if ":" in text:
            head, text = text.split(":", 1)
            center = int(head)
        return cls(center, tuple(int(ch) for ch in text.strip()))

    @classmethod
    def from_code(cls, code: PackingCode) -> "CoronaWord":
        return cls(code.center, code.cycle_labels())

    def corners(self):
        m = len(self.word)
        return [(self.word[i], self.word[(i + 1) % m]) for i in range(m)]

    def mixes_labels(self) -> bool:
        return len(set(self.word) | {self.center}) > 1

    def __str__(self):
        return f"{self.center}:" + "".join(map(str, self.word))


def angle_sum(w: CoronaWord, rho: Realizer) -> float:
    return sum(realize(AngleSymbol(w.center, a, b), rho) for a, b in w.corners())


def angle_sum_gradient(w: CoronaWord, rho: Realizer) -> np.ndarray:
    g = np.zeros(rho.n)
    for a, b in w.corners():
        for label, v in gradient(AngleSymbol(w.center, a, b), rho).items():
            g[label] += v
    return g


# -- two sizes -------------------------------------------------------------------


def _two_size_residual(w: CoronaWord, r: np.ndarray) -> np.ndarray:
    """Vectorized angle sum minus 2pi at realizer (r, 1)."""
    rad = lambda lab: r if lab == 0 else np.ones_like(r)
    c = rad(w.center)
    total = np.zeros_like(r)
    for a_lab, b_lab in w.corners():
        a, b = rad(a_lab), rad(b_lab)
        ratio = 1.0 - 2.0 * a * b / ((c + a) * (c + b))
        total += np.arccos(np.clip(ratio, -1.0, 1.0))
    return total - TWO_PI


@dataclass(frozen=True)
class CoronaRoots:
    word: CoronaWord
    roots: tuple
    degenerate: bool = False


def solve_corona_two_size(w: CoronaWord | str, center: int = 0, cells: int = 10_000) -> CoronaRoots:
    """All r in (1e-6, 1 - 1e-6) with angle_sum(w, (r, 1)) = 2pi."""
    if isinstance(w, str):
        w = CoronaWord.parse(w, center)
    if any(x > 1 for x in w.word) or w.center > 1:
        raise DomainError("two-size words use labels 0 and 1 only")
    grid = np.linspace(1e-6, 1 - 1e-6, cells + 1)
    vals = _two_size_residual(w, grid)
    if np.all(np.abs(vals) <= 1e-12):
        return CoronaRoots(w, (), True)
    f = lambda x: float(_two_size_residual(w, np.array([x]))[0])
    roots = []
    for k in range(cells):
        lo, hi = vals[k], vals[k + 1]
        if lo == 0.0:
            roots.append(float(grid[k]))
        elif lo * hi < 0:
            roots.append(bisect(f, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    roots = [r for r in roots if abs(f(r)) <= 1e-10]
    return CoronaRoots(w, tuple(roots), False)


def canonical_binary_words(length: int) -> list[tuple]:
    seen = set()
    for bits in itertools.product((0, 1), repeat=length):
        if 1 in bits:
            seen.add(canonical_cycle(bits))
    return sorted(seen)


@dataclass
class Candidate:
    radius: float
    words: list
    residual: float
    tier: str = CANDIDATE
    fixture: str = ""


def enumerate_two_size_candidates(max_len: int, verified: Iterable[tuple[str, float]] = ()) -> list[Candidate]:
    """Union of corona roots of canonical words of length 3..max_len over {0, 1}.

    ``verified`` pairs fixture names with the small radius of a two-size packing
    that passed verification; matching candidates are tiered VERIFIED, the rest
    UNRESOLVED.
    """
    if not 3 <= max_len <= 12:
        raise DomainError("max_len must lie in 3..12")
    found: list[Candidate] = []
    for length in range(3, max_len + 1):
        for bits in canonical_binary_words(length):
            w = CoronaWord(0, bits)
            res = solve_corona_two_size(w)
            for r in res.roots:
                resid = abs(float(_two_size_residual(w, np.array([r]))[0]))
                for cand in found:
                    if abs(cand.radius - r) <= 1e-8:
                        cand.words.append(str(w))
                        cand.residual = max(cand.residual, resid)
                        break
                else:
                    found.append(Candidate(r, [str(w)], resid))
    found.sort(key=lambda c: c.radius)
    verified = list(verified)
    for cand in found:
        match = [name for name, r in verified if abs(r - cand.radius) <= 1e-8]
        if match:
            cand.tier, cand.fixture = VERIFIED, match[0]
        elif verified:
            cand.tier = UNRESOLVED
    return found


def candidates_csv(cands: Sequence[Candidate]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["word", "root", "residual", "tier"])
    for c in cands:
        writer.writerow([c.words[0], f"{c.radius:.15f}", f"{c.residual:.3e}", c.tier])
    return out.getvalue()


# -- n sizes ------------------------------------------------------------------------


@dataclass(frozen=True)
class CoronaSystem:
    """One corona word per label; the equation for label n-1 is optional and
    only used as a residual check."""

    n: int
    equations: tuple

    def __post_init__(self):
        eqs = tuple(sorted(self.equations, key=lambda w: w.center))
        centers = [w.center for w in eqs]
        if len(set(centers)) != len(centers):
            raise DomainError("at most one equation per label")
        if set(range(self.n - 1)) - set(centers):
            raise DomainError(f"need an equation for every label below {self.n - 1}")
        if any(x >= self.n for w in eqs for x in w.word + (w.center,)):
            raise DomainError(f"labels must be below n={self.n}")
        if not any(w.mixes_labels() for w in eqs):
            raise DomainError("at least one equation must mix labels")
        object.__setattr__(self, "equations", eqs)

    @classmethod
    def from_codeset(cls, C: CodeSet) -> "CoronaSystem":
        if C.dim != 2:
            raise DomainError("corona systems are planar")
        chosen = {}
        for code in C.codes:
            w = CoronaWord.from_code(code)
            if code.center not in chosen or (not chosen[code.center].mixes_labels() and w.mixes_labels()):
                chosen[code.center] = w
        return cls(C.n, tuple(chosen.values()))

    @property
    def solved(self):
        return [w for w in self.equations if w.center <= self.n - 2]

    @property
    def checks(self):
        return [w for w in self.equations if w.center == self.n - 1]

    def realizer(self, x) -> Realizer:
        return Realizer(tuple(float(v) for v in x) + (1.0,))

    def residual(self, x) -> np.ndarray:
        rho = self.realizer(x)
        return np.array([angle_sum(w, rho) - TWO_PI for w in self.solved])

    def jacobian(self, x) -> np.ndarray:
        rho = self.realizer(x)
        return np.array([angle_sum_gradient(w, rho)[: self.n - 1] for w in self.solved])


@dataclass
class SolveResult:
    ok: bool
    realizer: Realizer | None
    residual: float
    iterations: int
    check_residual: float = 0.0
    reason: str = ""


def solve_realizer(system: CoronaSystem, start: Realizer | Sequence[float], tol: float = 1e-12,
                   max_iter: int = 200) -> SolveResult:
    """Damped Newton on the corona equations with the last radius fixed to 1."""
    vals = list(start.values if isinstance(start, Realizer) else start)
    if len(vals) != system.n or any(not v > 0 for v in vals) or abs(vals[-1] - 1.0) > 1e-12:
        raise DomainError("start must be strictly positive with last value 1")
    x = np.array(vals[:-1], dtype=float)
    F = system.residual(x)
    norm = float(np.max(np.abs(F)))
    for it in range(max_iter + 1):
        if norm <= tol:
            return _finish(system, x, norm, it)
        if it == max_iter:
            break
        J = system.jacobian(x)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return SolveResult(False, None, norm, it, reason="singular Jacobian")
        t = 1.0
        while t > 1e-12:
            trial = x + t * step
            if np.all(trial > 0):
                Ft = system.residual(trial)
                nt = float(np.max(np.abs(Ft)))
                if nt < norm:
                    x, F, norm = trial, Ft, nt
                    break
            t *= 0.5
        else:
            return SolveResult(False, None, norm, it, reason="damping failed to reduce the residual")
    return SolveResult(False, None, norm, max_iter, reason="iteration cap reached")


def _finish(system, x, norm, it):
    if np.any(x <= 0) or np.any(x > 1 + 1e-12):
        return SolveResult(False, None, norm, it, reason=f"solution {x.tolist()} leaves (0, 1]")
    rho = system.realizer(np.minimum(x, 1.0))
    if not rho.is_monotone():
        return SolveResult(False, None, norm, it, reason=f"solution {x.tolist()} is not monotone")
    check = max((abs(angle_sum(w, rho) - TWO_PI) for w in system.checks), default=0.0)
    return SolveResult(True, rho, norm, it, check)


def random_monotone_realizer(rng: np.random.Generator, n: int) -> Realizer:
    return Realizer(tuple(np.sort(rng.uniform(0.05, 1.0, size=n - 1))) + (1.0,))


@dataclass
class UniquenessReport:
    outcome: str  # "pass", "fail" or "inconclusive"
    runs: int
    successes: int
    realizer: Realizer | None
    spread: float
    check_residual: float
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "runs": self.runs,
            "successes": self.successes,
            "realizer": None if self.realizer is None else list(self.realizer.values),
            "max_coordinate_spread": self.spread,
            "check_residual": self.check_residual,
            "failures": self.failures,
        }


def uniqueness_harness(C: CodeSet, starts: int = 20, seed: int = 0, agree_tol: float = 1e-8) -> UniquenessReport:
    if C.n < 2:
        raise PreconditionError("n >= 2 required")
    verdict = is_fundamental(C)
    if not verdict:
        raise PreconditionError(f"code set is not fundamental ({verdict.describe()})")
    system = CoronaSystem.from_codeset(C)
    rng = np.random.default_rng(seed)
    sols, failures, check = [], [], 0.0
    for k in range(starts):
        start = random_monotone_realizer(rng, C.n)
        res = solve_realizer(system, start)
        if res.ok:
            sols.append(np.array(res.realizer.values))
            check = max(check, res.check_residual)
        else:
            failures.append({"start": list(start.values), "reason": res.reason})
    if len(sols) < 2:
        return UniquenessReport("inconclusive", starts, len(sols), None, float("nan"), check, failures)
    arr = np.array(sols)
    spread = float(np.max(arr.max(axis=0) - arr.min(axis=0)))
    outcome = "pass" if spread <= agree_tol else "fail"
    return UniquenessReport(outcome, starts, len(sols), Realizer(tuple(arr[0])), spread, check, failures)


# -- bootstrapping ---------------------------------------------------------------------


def bootstrap_hypothesis_2d(C: CodeSet, rho: Realizer, sigma: Realizer, slack: float = 1e-9) -> bool:
    """For circles: some P with rho ⊴ P exists iff the rho angle sum is at most 2pi,
    and some Q with Q ⊴ sigma exists iff the sigma angle sum is at least 2pi."""
    if C.dim != 2:
        raise DomainError("the planar hypothesis needs d=2 codes")
    for code in C.codes:
        w = CoronaWord.from_code(code)
        if angle_sum(w, rho) > TWO_PI + slack or angle_sum(w, sigma) < TWO_PI - slack:
            return False
    return True


def bootstrap_conclusion_check(C: CodeSet, rho: Realizer, sigma: Realizer, slack: float = 1e-9) -> bool:
    if not is_fundamental(C):
        raise PreconditionError("code set is not fundamental")
    if not bootstrap_hypothesis_2d(C, rho, sigma):
        raise PreconditionError("hypothesis fails for this pair of realizers")
    n = C.n
    return sigma(n - 2) / sigma(n - 1) <= rho(n - 2) / rho(n - 1) + slack


def _jitter(rng, base: np.ndarray, spread: float) -> Realizer:
    vals = base * np.exp(rng.normal(0.0, spread, size=len(base)))
    return Realizer(tuple(vals))


def bootstrap_harness(code_sets: Sequence[tuple[CodeSet, Realizer | None]], count: int, seed: int,
                      max_attempts: int | None = None) -> dict:
    """Draw realizer pairs until ``count`` of them satisfy the hypothesis and
    check the conclusion on each one.

    Pairs come from uniform monotone draws and from log-normal jitter around a
    known solution (when one is supplied), cycling through the code sets.
    """
    rng = np.random.default_rng(seed)
    max_attempts = max_attempts if max_attempts is not None else 200 * max(count, 1)
    instances, attempts, failures = 0, 0, []
    per_set = [0] * len(code_sets)
    strongest = math.inf
    while instances < count and attempts < max_attempts:
        idx = attempts % len(code_sets)
        C, center = code_sets[idx]
        attempts += 1
        if center is not None and rng.random() < 0.8:
            spread = float(rng.choice([1e-3, 1e-2, 5e-2, 0.2]))
            base = np.array(center.values)
            rho, sigma = _jitter(rng, base, spread), _jitter(rng, base, spread)
        else:
            rho, sigma = random_monotone_realizer(rng, C.n), random_monotone_realizer(rng, C.n)
        if not bootstrap_hypothesis_2d(C, rho, sigma):
            continue
        instances += 1
        per_set[idx] += 1
        n = C.n
        ratios = [rho(j) / sigma(j) for j in range(n)]
        # a stronger property than the conclusion: rho/sigma is smallest at label n-1
        strongest = min(strongest, min(r - ratios[n - 1] for r in ratios) / ratios[n - 1])
        if not bootstrap_conclusion_check(C, rho, sigma):
            failures.append({"codes": str(C), "rho": list(rho.values), "sigma": list(sigma.values)})
    return {
        "seed": seed,
        "requested": count,
        "instances": instances,
        "attempts": attempts,
        "per_code_set": per_set,
        "failures": failures,
        "min_relative_ratio_gap": None if strongest is math.inf else strongest,
    }
