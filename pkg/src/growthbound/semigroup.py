"""Semigroups ``T(t) = exp(tA)`` on exact truncations and their growth bounds.

Two growth bounds are estimated:

* ``omega_0,Gamma``: the best exponential order with one constant ``M``
  valid for every seminorm of a *fixed* family, via
  ``inf_t (1/t) log ||T(t)||_Gamma``, the ``t -> inf`` limit and the
  power form ``(1/t0) log lim_k ||T(t0)^k||_Gamma^{1/k}``.
* ``omega_0``: the topological bound, where the source seminorm may be
  chosen per target seminorm.  For causal generators and max-type
  families this is ``sup_n min_m limsup_t (1/t) log ||T(t)||_{n<-m}``.

The level supremum is always stabilised *before* any limit in ``t``;
swapping the order loses the gap between the two bounds.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.optimize import minimize_scalar

from ._asymptotics import fit_rate, settle_rate
from .exceptions import (
    HorizonTooShort,
    LevelCapTooSmall,
    NonCausalGenerator,
    SlopeFitUnstable,
)
from .graded_space import SeminormFamily
from .operators import (
    INF,
    CausalOperator,
    TruncatedMatrix,
    ext_log,
    from_matrix,
    gamma_norm,
    mixed_level_norm,
    truncate,
)

STRICTLY_LOWER = "strictly-lower-triangular"
DIAGONAL = "diagonal"
GENERAL = "lower-triangular-general"

DEFAULT_T_GRID = np.geomspace(0.25, 50.0, 64)


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """A continuous generator ``A`` (defined on the whole space)."""

    operator: CausalOperator
    kind: str | None = None

    def __post_init__(self):
        detected = classify(self.operator)
        if self.kind is None:
            object.__setattr__(self, "kind", detected)
        elif self.kind != detected:
            raise ValueError(f"declared class {self.kind!r} but entries look {detected!r}")

    @property
    def name(self) -> str:
        return self.operator.name

    @property
    def finite(self) -> bool:
        return self.operator.size is not None

    def truncate(self, n: int) -> TruncatedMatrix:
        return truncate(self.operator, n)


def classify(op: CausalOperator, sample: int = 16) -> str:
    n = sample if op.size is None else op.size
    mat = truncate(op, n).data
    off = mat - np.diag(np.diag(mat))
    if not np.any(off):
        return DIAGONAL
    strictly = not np.any(np.triu(mat, 0)) or not np.any(np.tril(mat, 0))
    return STRICTLY_LOWER if strictly else GENERAL


def as_generator(gen: Any) -> GeneratorSpec:
    if isinstance(gen, GeneratorSpec):
        return gen
    if isinstance(gen, CausalOperator):
        return GeneratorSpec(gen)
    return GeneratorSpec(from_matrix(gen, name="generator"))


def _nilpotent_exp(mat: np.ndarray, t: float) -> np.ndarray:
    # Horner form of sum_{k<n} (tA)^k / k!; A^n = 0 for strictly triangular A
    n = mat.shape[0]
    a = scipy.sparse.csr_matrix(mat * t)
    eye = np.eye(n, dtype=complex)
    out = eye.copy()
    for k in range(n - 1, 0, -1):
        out = eye + (a @ out) / k
    return out


@functools.lru_cache(maxsize=4096)
def _evaluate_cached(gen: GeneratorSpec, t: float, n: int) -> TruncatedMatrix:
    mat = gen.truncate(n).data
    if t == 0.0:
        out = np.eye(n, dtype=complex)
    elif gen.kind == DIAGONAL:
        out = np.diag(np.exp(t * np.diag(mat)))
    elif gen.kind == STRICTLY_LOWER:
        out = _nilpotent_exp(mat, t)
    else:
        out = scipy.linalg.expm(t * mat)
        # the diagonal of exp of a triangular matrix is known exactly
        if not np.any(np.triu(mat, 1)) or not np.any(np.tril(mat, -1)):
            out[np.diag_indices(n)] = np.exp(t * np.diag(mat))
    return TruncatedMatrix(out, causal=gen.operator.causal, name=f"T({t:g})")


def evaluate(gen, t: float, n: int) -> TruncatedMatrix:
    """``exp(t * truncate(A, n))``; exact on leading coordinates for causal ``A``."""
    gen = as_generator(gen)
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    if not gen.operator.causal and not (gen.finite and n == gen.operator.size):
        raise NonCausalGenerator(
            f"{gen.name} is not causal; its truncations do not compose exactly"
        )
    return _evaluate_cached(gen, float(t), int(n))


def semigroup_law_defect(gen, t: float, s: float, n: int) -> float:
    """Max entry deviation of ``T(t+s)`` from ``T(t)T(s)``, scaled by the largest entry."""
    lhs = evaluate(gen, t + s, n).data
    rhs = evaluate(gen, t, n).data @ evaluate(gen, s, n).data
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    if scale == 0:
        return 0.0
    return float(np.abs(lhs - rhs).max() / scale)


@dataclass(frozen=True)
class BoundEstimate:
    """A numerical growth/spectral bound with convergence diagnostics."""

    value: float
    method: str
    certified: bool
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __float__(self):
        return self.value

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value) and self.value > 0


def _level_cap(gen: GeneratorSpec, cap: int) -> int:
    return min(cap, gen.operator.size) if gen.finite else cap


def growth_bound_gamma(gen, family: SeminormFamily | None = None, t_grid=None, levels: int = 200,
                       t0: float = 1.0, rtol: float = 1e-9) -> BoundEstimate:
    """Estimate ``omega_0,Gamma`` by all three growth-bound formulas.

    The headline value is the infimum form.  Grid times whose level
    supremum has not stabilised within ``levels`` are dropped (and the
    estimate flagged uncertified); if none stabilise the level cap is too
    small and :class:`LevelCapTooSmall` is raised.
    """
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    grid = np.unique(np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float))
    grid = grid[grid > 0]
    if grid.size == 0:
        raise ValueError("empty time grid")
    cap = _level_cap(gen, levels)

    times, logs, dropped = [], [], []
    for t in grid:
        g = gamma_norm(evaluate(gen, t, cap), family, cap, rtol=rtol)
        if math.isinf(g.value):
            return BoundEstimate(INF, "gamma", True, {
                "infinite": True, "first_infinite_time": float(t), "levels": cap,
                "inf_form": INF, "limit_form": INF, "power_form": INF, "spread": 0.0,
            })
        if g.stabilized:
            times.append(t)
            logs.append(ext_log(g.value))
        else:
            dropped.append(float(t))
    if not times:
        raise LevelCapTooSmall(
            f"Gamma-norm not stabilised at any grid time with {cap} levels "
            f"(t in [{grid[0]:g}, {grid[-1]:g}])"
        )
    times = np.array(times)
    logs = np.array(logs)
    inf_form = float(np.min(logs / times))

    tail = times >= times[-1] / 2
    if tail.sum() >= 4:
        limit_fit = fit_rate(times[tail], logs[tail])
        limit_form, limit_resid = limit_fit.rate, limit_fit.residual
    else:
        limit_form, limit_resid = float(logs[-1] / times[-1]), 0.0

    power_form, power_info = _power_form(gen, family, cap, t0, times[-1], rtol)
    forms = [inf_form, limit_form, power_form]
    spread = float(max(forms) - min(forms))
    certified = not dropped and power_info["certified"]
    return BoundEstimate(inf_form, "gamma", certified, {
        "infinite": False,
        "inf_form": inf_form,
        "limit_form": limit_form,
        "power_form": power_form,
        "spread": spread,
        "limit_residual": limit_resid,
        "levels": cap,
        "horizon": float(times[-1]),
        "dropped_times": dropped,
        "power": power_info,
    })


def _power_form(gen, family, cap, t0, horizon, rtol):
    base = evaluate(gen, t0, cap).data
    kmax = int(min(64, max(8, math.floor(horizon / t0))))
    ks, logs = [], []
    cur = np.eye(cap, dtype=complex)
    unstable = 0
    for k in range(1, kmax + 1):
        cur = cur @ base
        g = gamma_norm(TruncatedMatrix(cur, causal=gen.operator.causal), family, cap, rtol=rtol)
        if g.stabilized and math.isfinite(g.value):
            ks.append(k)
            logs.append(ext_log(g.value))
        else:
            unstable += 1
    if len(ks) < 4:
        raise LevelCapTooSmall(f"too few stabilised powers of T({t0:g}) with {cap} levels")
    ks = np.array(ks, dtype=float)
    logs = np.array(logs)
    tail = ks >= ks[-1] / 2
    fit = fit_rate(ks[tail], logs[tail])
    info = {"t0": t0, "powers": int(ks[-1]), "unstable_powers": unstable,
            "residual": fit.residual, "certified": unstable == 0}
    return fit.rate / t0, info


@dataclass(frozen=True)
class LevelOrder:
    source_level: int
    constant: float


@dataclass(frozen=True)
class EquicontinuityResult:
    omega: float
    orders: dict
    success: bool

    @property
    def failed_levels(self) -> list[int]:
        return [n for n, r in self.orders.items() if r is None]


def _candidate_sources(gen: GeneratorSpec, family: SeminormFamily, n: int, offset: int) -> list[int]:
    top = n + offset
    if gen.finite:
        top = min(top, gen.operator.size)
    return [m for m in family.levels_upto(top) if m >= n]


def _level_rate(gen: GeneratorSpec, n: int) -> float:
    # spectral abscissa of the leading block; for triangular blocks the diagonal
    size = gen.operator.size if gen.finite else n
    mat = gen.truncate(size).data
    if not gen.operator.causal:
        return float(np.max(np.linalg.eigvals(mat).real))
    return float(np.max(np.diag(mat)[:n].real))


def _block(gen: GeneratorSpec, t: float, width: int) -> TruncatedMatrix:
    if gen.finite and not gen.operator.causal:
        return evaluate(gen, t, gen.operator.size)
    return evaluate(gen, t, width)


def _polish_max(gen, family, n, m, omega, t, damped) -> float:
    # the grid max undershoots the true sup; refine between neighbours
    best = int(np.argmax(damped))
    lo, hi = t[max(best - 1, 0)], t[min(best + 1, len(t) - 1)]
    if hi <= lo:
        return float(damped[best])
    width = max(n, m)
    res = minimize_scalar(
        lambda s: -math.exp(-omega * s) * mixed_level_norm(_block(gen, s, width), n, m, family),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * max(1.0, hi)},
    )
    return max(float(damped[best]), float(-res.fun))


def equicontinuity_order_check(gen, family: SeminormFamily | None = None, omega: float = 0.1,
                               levels: int = 20, offset: int = 4, t_grid=None) -> EquicontinuityResult:
    """Find, per target level ``n``, a source level ``m`` and constant ``M`` with
    ``p_n(T(t)x) <= M exp(omega t) p_m(x)`` on the time grid.

    When ``omega`` exceeds the level's spectral abscissa the damped norm
    must eventually decay, so the grid is extended to ``10 n / gap``; an
    orbit still increasing there raises :class:`HorizonTooShort`.
    """
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    grid = np.unique(np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float))
    if grid.size < 8 or grid[-1] <= 0:
        raise HorizonTooShort("time grid needs at least 8 points and a positive horizon")
    grid = np.concatenate([[0.0], grid[grid > 0]])
    orders = {}
    for n in family.levels_upto(_level_cap(gen, levels)):
        gap = omega - _level_rate(gen, n)
        t = grid
        if gap > 0 and 10.0 * n / gap > grid[-1]:
            t = np.concatenate([grid, np.geomspace(grid[-1], 10.0 * n / gap, 65)[1:]])
        found = None
        for m in _candidate_sources(gen, family, n, offset):
            width = max(n, m)
            norms = np.array([mixed_level_norm(_block(gen, s, width), n, m, family) for s in t])
            if not np.all(np.isfinite(norms)):
                continue
            damped = np.exp(-omega * t) * norms
            if not np.all(np.isfinite(damped)):
                continue
            seg = damped[-max(2, len(t) // 10):]
            if np.all(np.diff(seg) <= 1e-12 * seg.max()):
                found = LevelOrder(m, max(1.0, _polish_max(gen, family, n, m, omega, t, damped)))
                break
            if gap > 0:
                raise HorizonTooShort(
                    f"level {n}: damped norm still increasing at t={t[-1]:g} although "
                    f"omega exceeds the level rate by {gap:g}"
                )
        orders[n] = found
    return EquicontinuityResult(float(omega), orders, all(v is not None for v in orders.values()))


def growth_bound_topological(gen, family: SeminormFamily | None = None, levels: int = 12,
                             offset: int = 4, t_grid=None, tol: float = 1e-3,
                             max_horizon: float = 1e5) -> BoundEstimate:
    """Estimate ``omega_0`` as ``sup_n min_m`` of asymptotic log-norm slopes.

    Each slope is fitted on ``[H/2, H]`` with the window doubled until two
    consecutive fits agree to ``tol`` and the per-point residual is below
    ``tol``.
    """
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    grid = np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float)
    horizon = float(grid.max())
    per_level = {}
    certified = True
    worst_resid = 0.0
    for n in family.levels_upto(_level_cap(gen, levels)):
        best = None
        for m in _candidate_sources(gen, family, n, offset):
            width = max(n, m)
            if math.isinf(mixed_level_norm(_block(gen, 1.0, width), n, m, family)):
                continue

            def curve(ts, n=n, m=m, width=width):
                return np.array([ext_log(mixed_level_norm(_block(gen, s, width), n, m, family))
                                 for s in ts])

            settled = settle_rate(curve, horizon, tol=tol, max_horizon=max_horizon)
            if best is None or settled.rate < best[1].rate:
                best = (m, settled)
        if best is None:
            per_level[n] = {"source_level": None, "rate": INF}
            continue
        m, settled = best
        if settled.residual >= tol:
            raise SlopeFitUnstable(
                f"level {n}: curvature residual {settled.residual:.2e} above {tol:g} "
                f"at horizon {settled.horizon:g}"
            )
        certified &= settled.certified
        worst_resid = max(worst_resid, settled.residual)
        per_level[n] = {"source_level": m, "rate": settled.rate, "residual": settled.residual,
                        "change": settled.change, "horizon": settled.horizon}
    rates = [v["rate"] for v in per_level.values()]
    value = max(rates) if rates else -INF
    return BoundEstimate(float(value), "topological", certified and math.isfinite(value), {
        "per_level": per_level,
        "levels": max(per_level) if per_level else 0,
        "residual": worst_resid,
        "exact_truncation": gen.operator.causal or gen.finite,
    })
