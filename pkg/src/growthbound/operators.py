"""Infinite operators given by entry rules, their truncations and level norms.

Operators act on sequences.  A *causal* (lower-triangular) operator has
``s(i, j) = 0`` for ``j > i``; the first ``n`` coordinates of ``Sx`` then
depend only on ``x_1..x_n``, so ``truncate(S, n)`` computes the infinite
action exactly on leading coordinates.

Operator seminorms use ``math.inf`` as the distinguished value +infinity.
It is only ever produced on purpose (a row reaching past the source
level); products of truncations that overflow set ``overflow`` instead.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .exceptions import LevelExceedsTruncation, UnsupportedFamily
from .graded_space import MAX_KINDS, SeminormFamily

INF = math.inf


def ext_log(x: float) -> float:
    """log on [0, inf] with log 0 = -inf and log inf = inf."""
    if x == 0:
        return -INF
    if math.isinf(x):
        return INF
    return math.log(x)


def ext_mul(a: float, b: float) -> float:
    """Product on [0, inf] with the convention 0 * inf = 0."""
    if a == 0 or b == 0:
        return 0.0
    return a * b


@dataclass(frozen=True, eq=False)
class CausalOperator:
    """An infinite matrix ``(s(i, j))_{i,j>=1}`` given by an entry rule.

    ``row_support(i)`` lists the columns that may be nonzero in row ``i``;
    it must be declared for non-causal operators unless ``size`` makes the
    space finite-dimensional (then every column up to ``size`` is read).
    """

    entry: Callable[[int, int], complex]
    causal: bool = True
    row_support: Callable[[int], Iterable[int]] | None = None
    name: str = "operator"
    size: int | None = None

    def __repr__(self):
        return f"CausalOperator({self.name!r}, causal={self.causal})"

    def support(self, i: int) -> list[int]:
        if self.row_support is not None:
            cols = sorted(int(j) for j in self.row_support(i))
        elif self.causal:
            cols = list(range(1, i + 1))
        elif self.size is not None:
            cols = list(range(1, self.size + 1))
        else:
            raise ValueError(f"{self.name}: non-causal operator needs a declared row support")
        if self.size is not None:
            cols = [j for j in cols if j <= self.size]
        return cols

    def check_causal(self, n: int = 12) -> bool:
        """Spot-check ``s(i, j) = 0`` above the diagonal on an n x n grid."""
        top = n if self.size is None else min(n, self.size)
        return all(self.entry(i, j) == 0 for i in range(1, top + 1) for j in range(i + 1, top + 1))


@dataclass(frozen=True, eq=False)
class TruncatedMatrix:
    """Leading ``n x n`` block of an operator (or a whole operator on C^n)."""

    data: np.ndarray
    causal: bool = True
    overflow: bool = False
    name: str = ""

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("truncated matrices are square")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if not self.overflow and not np.all(np.isfinite(arr)):
            object.__setattr__(self, "overflow", True)

    @property
    def level(self) -> int:
        return self.data.shape[0]

    def block(self, n: int) -> "TruncatedMatrix":
        if n > self.level:
            raise LevelExceedsTruncation(f"block {n} requested from a level-{self.level} truncation")
        return TruncatedMatrix(self.data[:n, :n], self.causal, self.overflow, self.name)

    def __matmul__(self, other):
        if isinstance(other, TruncatedMatrix):
            return compose(self, other, min(self.level, other.level))
        return self.data @ other


def is_lower_triangular(mat: np.ndarray) -> bool:
    return not np.any(np.triu(mat, 1))


@functools.lru_cache(maxsize=512)
def _truncate_cached(op: CausalOperator, n: int) -> TruncatedMatrix:
    mat = np.zeros((n, n), dtype=complex)
    for i in range(1, n + 1):
        for j in op.support(i):
            if j <= n:
                mat[i - 1, j - 1] = op.entry(i, j)
    return TruncatedMatrix(mat, causal=op.causal, name=op.name)


def truncate(op: CausalOperator, n: int) -> TruncatedMatrix:
    """Entries ``s(i, j)`` for ``1 <= i, j <= n``."""
    if n < 1:
        raise ValueError("truncation level must be >= 1")
    if op.size is not None and n > op.size:
        raise LevelExceedsTruncation(f"{op.name} lives on C^{op.size}; level {n} requested")
    return _truncate_cached(op, int(n))


def as_matrix(op, n: int | None = None) -> TruncatedMatrix:
    """Coerce an operator, truncation or array to a level-``n`` truncation."""
    if isinstance(op, CausalOperator):
        if n is None:
            if op.size is None:
                raise ValueError("a level is required to truncate an infinite operator")
            n = op.size
        return truncate(op, n)
    if not isinstance(op, TruncatedMatrix):
        arr = np.asarray(op, dtype=complex)
        op = TruncatedMatrix(arr, causal=is_lower_triangular(arr))
    if n is None or n == op.level:
        return op
    if n < op.level and op.causal:
        return op.block(n)
    raise LevelExceedsTruncation(
        f"cannot take level {n} from a level-{op.level} {'causal' if op.causal else 'non-causal'} matrix"
    )


def _row_block(op, n: int) -> np.ndarray:
    """Rows 1..n with every column that may be nonzero in them."""
    if isinstance(op, CausalOperator):
        if op.causal and op.row_support is None:
            return truncate(op, n).data
        cols = max((max(op.support(i), default=0) for i in range(1, n + 1)), default=0)
        width = max(cols, n)
        if op.size is not None:
            width = min(width, op.size)
        rows = np.zeros((n, width), dtype=complex)
        for i in range(1, n + 1):
            for j in op.support(i):
                rows[i - 1, j - 1] = op.entry(i, j)
        return rows
    mat = as_matrix(op)
    if n > mat.level:
        raise LevelExceedsTruncation(f"level {n} exceeds a level-{mat.level} truncation")
    return mat.data[:n, :]


def _check_family(family: SeminormFamily) -> None:
    if family.kind not in MAX_KINDS:
        raise UnsupportedFamily(
            f"no closed-form operator norm for seminorm family kind {family.kind!r}"
        )


def mixed_level_norm(op, n: int, m: int, family: SeminormFamily | None = None) -> float:
    """``sup{ p_n(Sx) : p_m(x) <= 1 }`` for a max-type seminorm family.

    +inf when some row ``i <= n`` reads a coordinate ``j > m`` (that
    coordinate is unconstrained by ``p_m``); otherwise the weighted
    maximal row sum ``max_i w_i sum_{j<=m} |s_ij| / w_j``.
    """
    family = family or SeminormFamily.standard()
    _check_family(family)
    rows = _row_block(op, n)
    if np.any(rows[:, m:]):
        return INF
    w = family.weight_vector(max(n, m, rows.shape[1]))
    sums = (np.abs(rows[:, :m]) / w[: min(m, rows.shape[1])]).sum(axis=1) * w[:n]
    return float(sums.max())


def level_norm_profile(op, family: SeminormFamily, cap: int) -> tuple[list[int], np.ndarray]:
    """``mixed_level_norm(S, n, n)`` for every family level ``n <= cap``."""
    _check_family(family)
    levels = family.levels_upto(cap)
    if not levels:
        return levels, np.array([])
    causal = op.causal if isinstance(op, (CausalOperator, TruncatedMatrix)) else None
    if causal is None:
        op = as_matrix(op)
        causal = op.causal
    if causal:
        top = levels[-1]
        mat = as_matrix(op, top).data
        w = family.weight_vector(top)
        rowsums = (np.abs(mat) / w).sum(axis=1) * w
        running = np.maximum.accumulate(rowsums)
        return levels, running[np.asarray(levels) - 1]
    return levels, np.array([mixed_level_norm(op, n, n, family) for n in levels])


@dataclass(frozen=True)
class GammaNorm:
    """``sup_{n<=N} p_n-operator-norm`` with its level profile."""

    value: float
    stabilized: bool
    tail_estimate: float
    levels: tuple[int, ...] = field(repr=False)
    profile: np.ndarray = field(repr=False)

    def __float__(self):
        return self.value


def _tail_estimate(running: np.ndarray) -> float:
    """Geometric extrapolation of the remaining growth of a running sup."""
    if running.size < 3:
        return 0.0 if running.size and np.all(np.diff(running) == 0) else INF
    noise = 8 * np.finfo(float).eps * running[-1]
    d_last = running[-1] - running[-2]
    d_prev = running[-2] - running[-3]
    d_last = 0.0 if d_last <= noise else d_last
    d_prev = 0.0 if d_prev <= noise else d_prev
    if d_last == 0.0:
        return 0.0
    if d_prev == 0.0 or d_last >= d_prev:
        return INF
    ratio = d_last / d_prev
    return d_last / (1.0 - ratio)


def gamma_norm(op, family: SeminormFamily | None = None, cap: int = 50, rtol: float = 1e-9) -> GammaNorm:
    """``||S||_Gamma`` restricted to levels ``<= cap``.

    ``stabilized`` is True when the family has no level above ``cap``, the
    value is already +inf, or the extrapolated remaining growth is below
    ``rtol`` relative to the value.
    """
    family = family or SeminormFamily.standard()
    levels, prof = level_norm_profile(op, family, cap)
    if not levels:
        raise ValueError(f"family has no level <= {cap}")
    running = np.maximum.accumulate(prof)
    value = float(running[-1])
    exhausted = family.max_level is not None and family.max_level <= cap
    if math.isinf(value) or exhausted:
        return GammaNorm(value, True, 0.0, tuple(levels), prof)
    tail = _tail_estimate(running)
    return GammaNorm(value, tail <= rtol * max(value, np.finfo(float).tiny), tail, tuple(levels), prof)


@dataclass(frozen=True)
class UniformBound:
    bounded: bool
    constant: float
    gamma: GammaNorm


def universally_bounded_check(op, family: SeminormFamily | None = None, cap: int = 50,
                              growth_tol: float = 1e-9) -> UniformBound:
    """Is there one ``N`` with ``q(Sx) <= N q(x)`` for every ``q`` in the family?"""
    g = gamma_norm(op, family, cap, rtol=growth_tol)
    ok = g.stabilized and math.isfinite(g.value)
    return UniformBound(ok, g.value if ok else INF, g)


def compose(s1, s2, n: int) -> TruncatedMatrix:
    """Product of level-``n`` truncations (exact for causal operators)."""
    a, b = as_matrix(s1, n), as_matrix(s2, n)
    with np.errstate(over="ignore", invalid="ignore"):
        prod = a.data @ b.data
    return TruncatedMatrix(prod, causal=a.causal and b.causal,
                           overflow=a.overflow or b.overflow or not np.all(np.isfinite(prod)))


def power(op, k: int, n: int) -> TruncatedMatrix:
    if k < 0:
        raise ValueError("power must be >= 0")
    a = as_matrix(op, n)
    with np.errstate(over="ignore", invalid="ignore"):
        res = np.linalg.matrix_power(a.data, k)
    return TruncatedMatrix(res, causal=a.causal,
                           overflow=a.overflow or not np.all(np.isfinite(res)))


# -- entry-rule constructors -------------------------------------------------

def right_shift() -> CausalOperator:
    """``(Ax)_1 = 0, (Ax)_i = x_{i-1}``."""
    return CausalOperator(lambda i, j: 1.0 if i == j + 1 else 0.0,
                          row_support=lambda i: [i - 1] if i > 1 else [], name="right_shift")


def weighted_shift(weights) -> CausalOperator:
    """``(Ax)_{i+1} = w_i x_i``; ``weights`` is a callable or a periodic sequence."""
    if callable(weights):
        w = weights
    else:
        seq = tuple(complex(v) for v in weights)
        w = lambda j: seq[(j - 1) % len(seq)]
    return CausalOperator(lambda i, j: w(j) if i == j + 1 else 0.0,
                          row_support=lambda i: [i - 1] if i > 1 else [], name="weighted_shift")


def diagonal(d) -> CausalOperator:
    """``(Ax)_j = d_j x_j``; ``d`` is a callable, a scalar or a periodic sequence."""
    if callable(d):
        f = d
    elif np.isscalar(d):
        f = lambda j, c=complex(d): c
    else:
        seq = tuple(complex(v) for v in d)
        f = lambda j: seq[(j - 1) % len(seq)]
    return CausalOperator(lambda i, j: f(i) if i == j else 0.0,
                          row_support=lambda i: [i], name="diagonal")


def identity() -> CausalOperator:
    return diagonal(1.0)


def zero() -> CausalOperator:
    return CausalOperator(lambda i, j: 0.0, row_support=lambda i: [], name="zero")


def from_matrix(mat, name: str = "matrix") -> CausalOperator:
    """Operator on C^n given by a dense matrix."""
    arr = np.array(mat, dtype=complex)
    arr.setflags(write=False)
    return CausalOperator(lambda i, j: arr[i - 1, j - 1], causal=is_lower_triangular(arr),
                          name=name, size=arr.shape[0])


def jordan2() -> CausalOperator:
    """Generator of ``T(t)(x1, x2) = (x1 + t x2, x2)`` on C^2."""
    return CausalOperator(lambda i, j: 1.0 if (i, j) == (1, 2) else 0.0, causal=False,
                          row_support=lambda i: [2] if i == 1 else [], name="jordan2", size=2)
