"""Angle symbols, realizers and the closed-form gradients of realized angles.

An angle symbol ``c_b^a`` stands for the angle at the centre of a disc with
radius ``c`` in the triangle formed with two tangent neighbours of radii ``a``
and ``b``.  Labels are integers ``0..n-1`` and a :class:`Realizer` assigns a
radius to each label.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Mapping, Sequence


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


@dataclass(frozen=True)
class LabelSet:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"a label set needs n >= 2, got {self.n!r}")

    @property
    def largest(self) -> int:
        return self.n - 1

    def __contains__(self, label) -> bool:
        return isinstance(label, int) and 0 <= label < self.n

    def __iter__(self):
        return iter(range(self.n))


@dataclass(frozen=True)
class AngleSymbol:
    """The symbol ``vertex`` with flanks ``flank_a`` and ``flank_b``.

    Flanks are stored sorted, so ``AngleSymbol(c, a, b) == AngleSymbol(c, b, a)``.
    """

    vertex: int
    flank_a: int
    flank_b: int

    def __post_init__(self):
        for name in ("vertex", "flank_a", "flank_b"):
            label = getattr(self, name)
            if isinstance(label, bool) or not isinstance(label, numbers.Integral) or label < 0:
                raise DomainError(f"labels are non-negative integers, got {label!r}")
            object.__setattr__(self, name, int(label))
        if self.flank_a > self.flank_b:
            a, b = self.flank_b, self.flank_a
            object.__setattr__(self, "flank_a", a)
            object.__setattr__(self, "flank_b", b)

    @property
    def labels(self) -> tuple[int, int, int]:
        return (self.vertex, self.flank_a, self.flank_b)

    def __str__(self):
        return f"{self.vertex}_{self.flank_b}^{self.flank_a}"


@dataclass(frozen=True)
class Realizer:
    """Positive radii indexed by label: ``values[j]`` is the radius of label ``j``."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise DomainError("a realizer needs at least one value")
        for j, v in enumerate(vals):
            if not (v > 0.0) or not math.isfinite(v):
                raise DomainError(f"realizer value for label {j} must be positive, got {v!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, *values: float) -> "Realizer":
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.values)

    def __call__(self, label: int) -> float:
        if not isinstance(label, int) or not 0 <= label < len(self.values):
            raise DomainError(f"label {label!r} is not covered by a realizer on {self.n} labels")
        return self.values[label]

    def __getitem__(self, label: int) -> float:
        return self(label)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def is_normalized(self, tol: float = 0.0) -> bool:
        return abs(self.values[-1] - 1.0) <= tol

    def is_monotone(self) -> bool:
        return all(x <= y for x, y in zip(self.values, self.values[1:]))

    def is_strictly_increasing(self) -> bool:
        return all(x < y for x, y in zip(self.values, self.values[1:]))

    def normalized(self) -> "Realizer":
        return scale(self, 1.0 / self.values[-1])

    def as_list(self) -> list[float]:
        return list(self.values)


def realize(symbol: AngleSymbol, rho: Realizer) -> float:
    """Realized value of ``symbol`` in radians, strictly inside ``(0, pi)``."""
    c, a, b = rho(symbol.vertex), rho(symbol.flank_a), rho(symbol.flank_b)
    ratio = ((c + a) ** 2 + (c + b) ** 2 - (a + b) ** 2) / (2.0 * (c + a) * (c + b))
    return math.acos(min(1.0, max(-1.0, ratio)))


def angle(vertex: int, a: int, b: int, rho: Realizer) -> float:
    """Shorthand for ``realize(AngleSymbol(vertex, a, b), rho)``."""
    return realize(AngleSymbol(vertex, a, b), rho)


def gradient(symbol: AngleSymbol, rho: Realizer) -> dict[int, float]:
    """Partial derivatives of the realized symbol with respect to every label's radius.

    The closed form is chosen by which labels of the symbol coincide (label
    identity, not radius equality).  Labels absent from the symbol map to 0.
    """
    c_lab, a_lab, b_lab = symbol.vertex, symbol.flank_a, symbol.flank_b
    grad = {j: 0.0 for j in range(rho.n)}
    c, a, b = rho(c_lab), rho(a_lab), rho(b_lab)

    if a_lab == b_lab == c_lab:
        return grad

    if a_lab == b_lab:
        # c_a^a
        s = math.sqrt(2.0 * a + c)
        grad[a_lab] = 2.0 * math.sqrt(c) / ((c + a) * s)
        grad[c_lab] = -2.0 * a / ((c + a) * math.sqrt(c) * s)
        return grad

    if c_lab in (a_lab, b_lab):
        # c_c^x with x the flank that differs from the vertex
        x_lab = b_lab if a_lab == c_lab else a_lab
        x = rho(x_lab)
        root = (c + x) * math.sqrt(x * x + 2.0 * x * c)
        grad[x_lab] = c / root
        grad[c_lab] = -x / root
        return grad

    s = math.sqrt(a + b + c)
    grad[a_lab] = math.sqrt(b * c) / ((c + a) * math.sqrt(a) * s)
    grad[b_lab] = math.sqrt(a * c) / ((c + b) * math.sqrt(b) * s)
    grad[c_lab] = -(a + b + 2.0 * c) * math.sqrt(a * b) / (
        (c * c + a * b + a * c + b * c) * math.sqrt(c) * s
    )
    return grad


def scale(rho: Realizer, t: float) -> Realizer:
    if not t > 0:
        raise DomainError(f"scale factor must be positive, got {t!r}")
    return Realizer(tuple(t * v for v in rho.values))


def perturb(rho: Realizer, nu: Mapping[int, float] | Sequence[float], t: float) -> Realizer:
    """Return ``rho + t * nu``; ``nu`` maps labels to non-negative reals."""
    if t < 0:
        raise DomainError(f"perturbation parameter must be non-negative, got {t!r}")
    if isinstance(nu, Mapping):
        items = dict(nu)
    else:
        items = dict(enumerate(nu))
    for label, v in items.items():
        if label not in range(rho.n):
            raise DomainError(f"perturbation direction names unknown label {label!r}")
        if v < 0:
            raise DomainError(f"perturbation direction must be non-negative, got {v!r} at {label}")
    vals = [rho.values[j] + t * items.get(j, 0.0) for j in range(rho.n)]
    if any(not v > 0 for v in vals):
        raise DomainError("perturbed realizer is not strictly positive")
    return Realizer(tuple(vals))
