"""Graded sequence spaces: finite prefixes of C^N and ladders of seminorms.

A vector is stored as a finite prefix ``(x_1, ..., x_L)`` and is read as
its zero extension.  Every seminorm in this module depends on finitely
many coordinates, so evaluating ``p_n`` only needs ``L >= max index``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import HorizonTooShort, LevelExceedsTruncation, OrbitDivergent

STANDARD = "standard"
SUBSET = "subset"
WEIGHTED = "weighted"
RECALIBRATED = "recalibrated"
MAX_KINDS = (STANDARD, WEIGHTED)


@dataclass(frozen=True)
class TruncatedVector:
    """Zero-extended finite prefix of a sequence."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=complex).reshape(-1)
        if arr.size < 1:
            raise ValueError("a truncated vector needs at least one coordinate")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    def __len__(self):
        return self.coords.size

    def head(self, n: int) -> np.ndarray:
        if n > len(self):
            return np.concatenate([self.coords, np.zeros(n - len(self), dtype=complex)])
        return self.coords[:n]

    @classmethod
    def ones(cls, length: int) -> "TruncatedVector":
        return cls(np.ones(length))

    @classmethod
    def zeros(cls, length: int) -> "TruncatedVector":
        return cls(np.zeros(length))


def as_vector(x) -> TruncatedVector:
    if isinstance(x, TruncatedVector):
        return x
    return TruncatedVector(x)


@dataclass(frozen=True)
class SeminormFamily:
    """A fundamental system ``{p_n}`` of coordinate seminorms.

    ``levels`` restricts the index set (``None`` means all of N); the
    split family of the 2x2 Jordan example is ``standard(levels=(1, 2))``
    while ``standard(levels=(2,))`` is the single max-norm on C^2.
    """

    kind: str = STANDARD
    levels: tuple[int, ...] | None = None
    weights: Any = None
    subsets: Mapping[int, tuple[int, ...]] | None = None
    rule: Any = None

    def __post_init__(self):
        if self.kind not in (STANDARD, SUBSET, WEIGHTED, RECALIBRATED):
            raise ValueError(f"unknown seminorm family kind {self.kind!r}")
        if self.levels is not None:
            levels = tuple(sorted({int(n) for n in self.levels}))
            if not levels or levels[0] < 1:
                raise ValueError("levels must be positive integers")
            object.__setattr__(self, "levels", levels)
        if self.kind == SUBSET:
            if not self.subsets:
                raise ValueError("subset family needs declared index sets")
            subsets = {int(n): tuple(sorted(set(int(j) for j in s))) for n, s in self.subsets.items()}
            object.__setattr__(self, "subsets", subsets)
            if self.levels is None:
                object.__setattr__(self, "levels", tuple(sorted(subsets)))
        if self.kind == WEIGHTED and self.weights is None:
            raise ValueError("weighted family needs weights")
        if self.kind == RECALIBRATED and self.rule is None:
            raise ValueError("recalibrated family needs a recalibration rule")

    @classmethod
    def standard(cls, levels: Sequence[int] | None = None) -> "SeminormFamily":
        return cls(STANDARD, levels=None if levels is None else tuple(levels))

    @classmethod
    def weighted(cls, weights, levels: Sequence[int] | None = None) -> "SeminormFamily":
        """``weights`` is a callable ``j -> w_j`` (1-based) or a finite sequence."""
        return cls(WEIGHTED, levels=None if levels is None else tuple(levels), weights=weights)

    @classmethod
    def coordinate_subsets(cls, subsets: Mapping[int, Sequence[int]]) -> "SeminormFamily":
        return cls(SUBSET, subsets=subsets)

    @classmethod
    def recalibrated(cls, rule: "RecalibrationRule") -> "SeminormFamily":
        return cls(RECALIBRATED, levels=rule.base.levels, rule=rule)

    @property
    def max_level(self) -> int | None:
        return None if self.levels is None else self.levels[-1]

    def levels_upto(self, cap: int) -> list[int]:
        if self.levels is None:
            return list(range(1, cap + 1))
        return [n for n in self.levels if n <= cap]

    def index_set(self, n: int) -> tuple[int, ...]:
        """1-based coordinates that ``p_n`` reads."""
        if self.kind == SUBSET:
            try:
                return self.subsets[n]
            except KeyError:
                raise ValueError(f"level {n} is not declared in this family") from None
        if self.kind == RECALIBRATED:
            return self.rule.base.index_set(n)
        return tuple(range(1, n + 1))

    def weight_vector(self, length: int) -> np.ndarray:
        """Weights ``w_1..w_length`` (ones for the standard family)."""
        if self.kind == STANDARD:
            return np.ones(length)
        if self.kind != WEIGHTED:
            raise TypeError(f"family kind {self.kind!r} has no coordinate weights")
        if callable(self.weights):
            w = np.array([float(self.weights(j)) for j in range(1, length + 1)])
        else:
            if len(self.weights) < length:
                raise LevelExceedsTruncation(
                    f"{len(self.weights)} weights declared, {length} needed"
                )
            w = np.asarray(self.weights[:length], dtype=float)
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        return w

    def __call__(self, n: int, x) -> float:
        return seminorm_eval(self, n, x)


def seminorm_eval(family: SeminormFamily, n: int, x) -> float:
    """Exact value of ``p_n(x)``; never reads past the declared index set."""
    x = as_vector(x)
    if family.kind == RECALIBRATED:
        rule = family.rule
        if rule.mode == SEMIGROUP_ORBIT:
            return recalibrate_semigroup(rule, n, x).value
        return recalibrate_orbit(rule, n, x).value
    idx = family.index_set(n)
    top = max(idx)
    if top > len(x):
        raise LevelExceedsTruncation(
            f"level {n} reads coordinate {top} but only {len(x)} are stored"
        )
    vals = np.abs(x.coords[np.asarray(idx) - 1])
    if family.kind == WEIGHTED:
        vals = vals * family.weight_vector(top)[np.asarray(idx) - 1]
    return float(vals.max())


SEMIGROUP_ORBIT = "semigroup-orbit"
POWER_ORBIT = "power-orbit"


@dataclass(frozen=True)
class RecalibrationRule:
    """How to build ``q_n`` from ``p_n`` by an orbit supremum.

    semigroup-orbit: ``q_n(x) = sup_t p_n(exp(-omega t) T(t) x)``
    power-orbit:     ``q_n(x) = sup_k p_n((mu B)^k x)``
    """

    base: SeminormFamily
    mode: str
    generator: Any = None
    omega: float | None = None
    horizon: float | None = None
    grid_points: int = 512
    operator: Any = None
    mu: complex | None = None
    power_cap: int = 64

    @classmethod
    def semigroup_orbit(cls, base, generator, omega, horizon=None, grid_points=512):
        return cls(base, SEMIGROUP_ORBIT, generator=generator, omega=float(omega),
                   horizon=horizon, grid_points=grid_points)

    @classmethod
    def power_orbit(cls, base, operator, mu, power_cap=64):
        return cls(base, POWER_ORBIT, operator=operator, mu=complex(mu), power_cap=power_cap)

    def time_grid(self, n: int) -> np.ndarray:
        horizon = self.horizon
        if horizon is None:
            horizon = 10.0 * max(1.0, n / self.omega) if self.omega > 0 else 10.0 * n
        half = self.grid_points // 2
        grid = np.concatenate([
            np.linspace(0.0, horizon, self.grid_points - half),
            np.geomspace(horizon * 1e-4, horizon, half),
        ])
        return np.unique(grid)


@dataclass(frozen=True)
class OrbitSup:
    """Supremum of an orbit with its certificate."""

    value: float
    certified: bool
    argmax: float
    samples: np.ndarray = field(repr=False, compare=False, default=None)

    def __float__(self):
        return self.value


def _required_length(family: SeminormFamily, n: int, x: TruncatedVector) -> int:
    top = max(family.index_set(n))
    if top > len(x):
        raise LevelExceedsTruncation(
            f"level {n} reads coordinate {top} but only {len(x)} are stored"
        )
    return top


def _tail_decays(values: np.ndarray, sup: float, frac: float = 0.1) -> tuple[bool, bool]:
    """(decaying, growing) verdicts for the final segment of a sampled orbit."""
    seg = values[-max(2, int(len(values) * frac)):]
    if sup == 0.0:
        return True, False
    slack = 1e-12 * sup
    monotone = bool(np.all(np.diff(seg) <= slack))
    below = seg[-1] < sup - slack or seg.max() <= sup * (1 - 1e-12)
    growing = bool(np.all(np.diff(seg) > 0)) and seg[-1] >= sup - slack
    return monotone and below, growing


def recalibrate_semigroup(rule: RecalibrationRule, n: int, x) -> OrbitSup:
    """``q_n(x) = sup_{t>=0} p_n(exp(-omega t) T(t) x)`` on a refined time grid."""
    from .semigroup import as_generator, evaluate

    x = as_vector(x)
    length = _required_length(rule.base, n, x)
    gen = as_generator(rule.generator)
    head = x.coords[:length]
    grid = rule.time_grid(n)
    if not np.any(head):
        return OrbitSup(0.0, True, 0.0, np.zeros_like(grid))

    def value(t: float) -> float:
        y = evaluate(gen, t, length).data @ head
        return math.exp(-rule.omega * t) * seminorm_eval(rule.base, n, y)

    samples = np.array([value(t) for t in grid])
    if not np.all(np.isfinite(samples)):
        raise HorizonTooShort("orbit overflowed before the end of the time grid")
    best = int(np.argmax(samples))
    sup, arg = float(samples[best]), float(grid[best])
    # polish the grid maximum; the true sup may sit between grid points
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -value(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, hi)})
        if -res.fun > sup:
            sup, arg = float(-res.fun), float(res.x)
    decaying, growing = _tail_decays(samples, sup)
    if growing:
        raise HorizonTooShort(
            f"orbit at level {n} still increasing at t={grid[-1]:g}; enlarge the horizon"
        )
    return OrbitSup(sup, decaying, arg, samples)


def recalibrate_orbit(rule: RecalibrationRule, n: int, x) -> OrbitSup:
    """``q_n(x) = sup_{0<=k<=cap} p_n((mu B)^k x)``.

    Certified when no new running maximum appears in the final quarter of
    the power range.
    """
    from .operators import as_matrix

    x = as_vector(x)
    length = _required_length(rule.base, n, x)
    mat = as_matrix(rule.operator, length).data * rule.mu
    y = x.coords[:length].copy()
    samples = np.empty(rule.power_cap + 1)
    for k in range(rule.power_cap + 1):
        samples[k] = seminorm_eval(rule.base, n, y)
        y = mat @ y
    if not np.all(np.isfinite(samples)):
        raise OrbitDivergent(f"orbit at level {n} overflowed before power {rule.power_cap}")
    sup = float(samples.max())
    quarter = max(1, (rule.power_cap + 1) // 4)
    head_sup = samples[:-quarter].max()
    tail = samples[-quarter:]
    settled = bool(tail.max() <= head_sup * (1 + 1e-12) + 1e-300)
    if not settled and np.all(np.diff(tail) > 0):
        raise OrbitDivergent(
            f"orbit at level {n} still growing at power {rule.power_cap} (value {tail[-1]:.3g})"
        )
    return OrbitSup(sup, settled, float(np.argmax(samples)), samples)
