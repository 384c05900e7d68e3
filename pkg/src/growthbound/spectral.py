"""Resolvents, Allan-bounded operators, spectrum scans and spectral radii.

A point ``lambda`` is in the resolvent set when ``lambda - A`` is
bijective and ``R(lambda, A)`` is Allan-bounded, i.e. some nonzero
multiple ``mu R`` has an equicontinuous power orbit.  At truncation scale
the scanner can only *certify* resolvent points; spectrum membership is
certified only through exact singularity of a triangular truncation.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from ._asymptotics import fit_rate
from .exceptions import HypothesisViolated, Singular
from .graded_space import SeminormFamily, TruncatedVector
from .operators import (
    INF,
    CausalOperator,
    TruncatedMatrix,
    as_matrix,
    ext_log,
    gamma_norm,
    level_norm_profile,
)
from .semigroup import (
    DEFAULT_T_GRID,
    BoundEstimate,
    GeneratorSpec,
    as_generator,
    evaluate,
    growth_bound_gamma,
    growth_bound_topological,
)

NOT_INVERTIBLE = "NotInvertible"
UNIFORM = "UniformResolvent"
SCALED = "ScaledResolvent"
UNDETERMINED = "Undetermined"

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class AnalysisConfig:
    """Grids and caps shared by the growth and spectral engines."""

    t_grid: tuple[float, ...] = tuple(DEFAULT_T_GRID)
    gamma_levels: int = 200
    topo_levels: int = 12
    offset: int = 4
    t0: float = 1.0
    radii: tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0)
    angles: int = 8
    uniform_levels: int = 60
    allan_levels: int = 20
    k_max: int = 64
    mu_factors: tuple[float, ...] = (0.5, 0.25)
    generator_mus: tuple[float, ...] = (1.0, 0.5, 0.25)
    include_diagonal: bool = True
    rtol: float = 1e-9
    chain_tol: float = 2e-3

    def lambda_grid(self) -> list[complex]:
        return polar_grid(self.radii, self.angles)


def polar_grid(radii: Iterable[float], angles: int) -> list[complex]:
    """Radii x equally spaced angles; radius 0 contributes the single point 0."""
    pts = []
    for r in radii:
        if r == 0:
            pts.append(0j)
            continue
        for a in range(angles):
            z = r * np.exp(2j * np.pi * a / angles)
            # snap roundoff so axis points are exact
            re = 0.0 if abs(z.real) < 1e-14 * r else float(z.real)
            im = 0.0 if abs(z.imag) < 1e-14 * r else float(z.imag)
            pts.append(complex(re, im))
    return pts


# -- resolvents ----------------------------------------------------------------

def _generator_block(gen: GeneratorSpec, n: int) -> np.ndarray:
    if gen.finite and not gen.operator.causal:
        return gen.truncate(gen.operator.size).data
    return gen.truncate(n).data


def _singular_index(mat: np.ndarray, lam: complex) -> int | None:
    """1-based level at which ``lam - mat`` first becomes singular, else None."""
    lower = not np.any(np.triu(mat, 1))
    upper = not np.any(np.tril(mat, -1))
    if lower or upper:
        diag = np.diag(mat)
        hit = np.abs(lam - diag) <= 1e-12 * np.maximum(1.0, np.abs(diag))
        if np.any(hit):
            return int(np.argmax(hit)) + 1
        return None
    shifted = lam * np.eye(mat.shape[0]) - mat
    sv = np.linalg.svd(shifted, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        return mat.shape[0]
    return None


@functools.lru_cache(maxsize=1024)
def _resolvent_cached(gen: GeneratorSpec, lam: complex, n: int) -> TruncatedMatrix:
    mat = _generator_block(gen, n)
    size = mat.shape[0]
    level = _singular_index(mat, lam)
    if level is not None:
        raise Singular(lam, level)
    shifted = lam * np.eye(size) - mat
    eye = np.eye(size, dtype=complex)
    if not np.any(np.triu(mat, 1)):
        res = scipy.linalg.solve_triangular(shifted, eye, lower=True)
    elif not np.any(np.tril(mat, -1)):
        res = scipy.linalg.solve_triangular(shifted, eye, lower=False)
    else:
        res = np.linalg.solve(shifted, eye)
    scale = max(1.0, np.abs(shifted).sum(axis=1).max() * np.abs(res).sum(axis=1).max())
    resid = np.abs(shifted @ res - eye).max() / scale
    if not resid <= RESIDUAL_TOL:
        raise FloatingPointError(f"resolvent residual {resid:.2e} at lambda={lam}, level {n}")
    return TruncatedMatrix(res, causal=gen.operator.causal, name=f"R({lam})")


def resolvent(gen, lam: complex, n: int) -> TruncatedMatrix:
    """``(lam I - A_n)^{-1}`` by triangular substitution; raises :class:`Singular`."""
    return _resolvent_cached(as_generator(gen), complex(lam), int(n))


def resolvent_residual(gen, lam: complex, n: int) -> float:
    gen = as_generator(gen)
    mat = _generator_block(gen, n)
    res = resolvent(gen, lam, n).data
    eye = np.eye(mat.shape[0])
    return float(np.abs((lam * eye - mat) @ res - eye).max())


@dataclass(eq=False)
class ResolventHandle:
    """Per-level resolvent truncations of one generator at one point."""

    generator: GeneratorSpec
    lam: complex
    method: str = "triangular-solve"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.generator = as_generator(self.generator)
        self.lam = complex(self.lam)
        if self.method not in ("triangular-solve", "closed-form-shift"):
            raise ValueError(f"unknown resolvent method {self.method!r}")

    def matrix(self, n: int) -> TruncatedMatrix:
        if n not in self._cache:
            if self.method == "closed-form-shift":
                self._cache[n] = TruncatedMatrix(shift_resolvent_power_matrix(self.lam, 1, n))
            else:
                self._cache[n] = resolvent(self.generator, self.lam, n)
        return self._cache[n]

    def apply(self, x) -> np.ndarray:
        x = x if isinstance(x, TruncatedVector) else TruncatedVector(x)
        return self.matrix(len(x)).data @ x.coords


# -- closed forms for the right shift -----------------------------------------

def _is_exact(v) -> bool:
    return isinstance(v, Rational)


def _promote(c: int) -> float:
    try:
        return float(c)
    except OverflowError:
        raise OverflowError(f"binomial coefficient with {c.bit_length()} bits exceeds float range") from None


def shift_resolvent_power_apply(lam, npow: int, x, k: int):
    """``(R(lam, A)^npow x)_k`` for the right shift via the closed form

    ``sum_{j=1}^{k} lam^{-(npow+j-1)} C(npow-2+j, j-1) x_{k-j+1}``.

    Binomials are exact integers.  With a rational ``lam`` and rational
    coordinates the result is an exact :class:`~fractions.Fraction`;
    otherwise the binomial is promoted to float only at the final product.
    """
    if lam == 0:
        raise ZeroDivisionError("the shift resolvent does not exist at lambda = 0")
    if npow < 1:
        raise ValueError("npow must be a positive integer")
    coords = list(x.coords) if isinstance(x, TruncatedVector) else list(x)
    if not 1 <= k <= len(coords):
        raise IndexError(f"index {k} outside 1..{len(coords)}")
    exact = _is_exact(lam) and all(_is_exact(c) for c in coords[:k])
    total = Fraction(0) if exact else 0j
    for j in range(1, k + 1):
        c = math.comb(npow - 2 + j, j - 1)
        xj = coords[k - j]
        if exact:
            total += Fraction(lam) ** -(npow + j - 1) * c * xj
        elif xj != 0:
            total += complex(lam) ** -(npow + j - 1) * _promote(c) * complex(xj)
    return total


def shift_resolvent_power_matrix(lam: complex, npow: int, n: int) -> np.ndarray:
    """Level-``n`` truncation of ``R(lam, A)^npow`` from the closed form."""
    lam = complex(lam)
    if lam == 0:
        raise ZeroDivisionError("the shift resolvent does not exist at lambda = 0")
    out = np.zeros((n, n), dtype=complex)
    for d in range(n):
        coef = lam ** -(npow + d) * _promote(math.comb(npow - 1 + d, d))
        out[np.arange(d, n), np.arange(0, n - d)] = coef
    return out


def shift_resolvent_recursive(lam, x) -> list:
    """``R(lam, A)x`` for the right shift by ``y_k = (x_k + y_{k-1}) / lam``, ``y_0 = 0``."""
    coords = list(x.coords) if isinstance(x, TruncatedVector) else list(x)
    exact = _is_exact(lam) and all(_is_exact(c) for c in coords)
    inv = Fraction(1) / Fraction(lam) if exact else 1 / complex(lam)
    out, prev = [], 0
    for xk in coords:
        prev = inv * xk + inv * prev
        out.append(prev)
    return out


# -- Allan boundedness -----------------------------------------------------------

@dataclass(frozen=True)
class AllanResult:
    bounded: bool
    mu: complex | None
    K: dict
    diagnostics: dict = field(default_factory=dict, compare=False)


def _orbit_profiles(mat: TruncatedMatrix, family, cap, k_max):
    levels = family.levels_upto(cap)
    prof = np.empty((k_max + 1, len(levels)))
    cur = np.eye(mat.level, dtype=complex)
    for k in range(k_max + 1):
        if not np.all(np.isfinite(cur)):
            prof[k:] = INF
            break
        prof[k] = level_norm_profile(TruncatedMatrix(cur, causal=mat.causal), family, cap)[1]
        with np.errstate(over="ignore", invalid="ignore"):
            cur = mat.data @ cur
    return levels, prof


def _settled(prof: np.ndarray) -> np.ndarray:
    """Per level: no new running maximum over the final quarter of powers."""
    quarter = max(1, prof.shape[0] // 4)
    head = prof[:-quarter].max(axis=0)
    tail = prof[-quarter:].max(axis=0)
    return np.isfinite(prof).all(axis=0) & (tail <= head * (1 + 1e-12) + 1e-300)


def allan_bounded_check(op, family: SeminormFamily | None = None, mu_candidates: Sequence[complex] = (1.0,),
                        levels: int = 20, k_max: int = 64) -> AllanResult:
    """Find ``mu != 0`` with ``{(mu B)^k}`` bounded at every level ``<= levels``.

    ``K[m] = max_{k<=k_max} ||(mu B)^k||_{m<-m}``.  The constants may grow
    with ``m``; a level is accepted when its orbit finishes its growth
    before the final quarter of the power range.
    """
    family = family or SeminormFamily.standard()
    if not mu_candidates:
        raise ValueError("need at least one mu candidate")
    base = as_matrix(op, _cap_for(op, levels))
    cap = min(levels, base.level)
    tried = []
    for mu in mu_candidates:
        mu = complex(mu)
        if mu == 0:
            tried.append({"mu": mu, "accepted": False, "reason": "mu = 0"})
            continue
        scaled = TruncatedMatrix(base.data * mu, causal=base.causal)
        lv, prof = _orbit_profiles(scaled, family, cap, k_max)
        ok = _settled(prof)
        verdict = {"mu": mu, "accepted": bool(ok.all()),
                   "failed_levels": [m for m, good in zip(lv, ok) if not good]}
        tried.append(verdict)
        if ok.all():
            K = {m: float(v) for m, v in zip(lv, prof.max(axis=0))}
            return AllanResult(True, mu, K, {"tried": tried, "k_max": k_max})
    return AllanResult(False, None, {}, {"tried": tried, "k_max": k_max})


def _cap_for(op, levels):
    if isinstance(op, CausalOperator) and op.size is not None:
        return op.size
    if isinstance(op, TruncatedMatrix) and not op.causal:
        return op.level
    if isinstance(op, TruncatedMatrix):
        return min(levels, op.level)
    if isinstance(op, np.ndarray):
        return op.shape[0] if np.any(np.triu(op, 1)) else min(levels, op.shape[0])
    return levels


@dataclass(frozen=True)
class UniformityResult:
    uniform: bool
    M_lambda: float
    stabilized: bool
    levels: int


def resolvent_uniformity_check(gen, lam: complex, family: SeminormFamily | None = None,
                               levels: int = 60, rtol: float = 1e-9) -> UniformityResult:
    """Is ``p(R(lam, A)x) <= M p(x)`` with one ``M`` for every ``p`` of *this* family?"""
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    cap = min(levels, gen.operator.size) if gen.finite else levels
    g = gamma_norm(resolvent(gen, lam, cap), family, cap, rtol=rtol)
    ok = g.stabilized and math.isfinite(g.value)
    return UniformityResult(ok, g.value if ok else INF, g.stabilized, cap)


def generator_bounded_check(gen, family: SeminormFamily | None = None, levels: int = 20,
                            k_max: int = 64, mu_candidates: Sequence[complex] = (1.0, 0.5, 0.25)) -> bool:
    """Is the generator itself Allan-bounded (so infinity lies in the resolvent set)?"""
    gen = as_generator(gen)
    cap = min(levels, gen.operator.size) if gen.finite else levels
    mat = gen.truncate(gen.operator.size if gen.finite else cap)
    return allan_bounded_check(mat, family, mu_candidates, cap, k_max).bounded


# -- spectrum scan -------------------------------------------------------------

@dataclass(frozen=True)
class PointClass:
    lam: complex
    kind: str
    M_lambda: float | None = None
    mu: complex | None = None
    K: dict | None = field(default=None, repr=False)
    singular_level: int | None = None


@dataclass(frozen=True)
class SpectrumClassification:
    points: tuple[PointClass, ...]
    spectral_bound: float
    infinity_in_resolvent: bool

    def of_kind(self, kind: str) -> list[PointClass]:
        return [p for p in self.points if p.kind == kind]

    def at(self, lam: complex) -> PointClass:
        lam = complex(lam)
        return min(self.points, key=lambda p: abs(p.lam - lam))

    @property
    def spectrum_points(self) -> list[complex]:
        return [p.lam for p in self.of_kind(NOT_INVERTIBLE)]


def _diagonal_candidates(gen: GeneratorSpec, n: int) -> list[complex]:
    mat = _generator_block(gen, min(n, gen.operator.size) if gen.finite else n)
    if np.any(np.triu(mat, 1)) and np.any(np.tril(mat, -1)):
        vals = np.linalg.eigvals(mat)
    else:
        vals = np.diag(mat)
    return sorted({complex(v) for v in np.round(vals, 12)}, key=lambda z: (z.real, z.imag))


def classify_point(gen, lam: complex, family: SeminormFamily, config: AnalysisConfig) -> PointClass:
    gen = as_generator(gen)
    lam = complex(lam)
    top = max(config.uniform_levels, config.allan_levels)
    top = min(top, gen.operator.size) if gen.finite else top
    level = _singular_index(_generator_block(gen, top), lam)
    if level is not None:
        return PointClass(lam, NOT_INVERTIBLE, singular_level=level)
    uni = resolvent_uniformity_check(gen, lam, family, config.uniform_levels, config.rtol)
    if uni.uniform:
        return PointClass(lam, UNIFORM, M_lambda=uni.M_lambda)
    mus = [lam * f for f in config.mu_factors] if lam != 0 else list(config.mu_factors)
    cap = min(config.allan_levels, gen.operator.size) if gen.finite else config.allan_levels
    allan = allan_bounded_check(resolvent(gen, lam, cap), family, mus, cap, config.k_max)
    if allan.bounded:
        return PointClass(lam, SCALED, mu=allan.mu, K=allan.K)
    return PointClass(lam, UNDETERMINED)


def spectrum_scan(gen, lam_grid: Iterable[complex] | None = None, family: SeminormFamily | None = None,
                  config: AnalysisConfig | None = None) -> SpectrumClassification:
    """Classify every grid point; ``spectral_bound`` aggregates NotInvertible points only."""
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    config = config or AnalysisConfig()
    grid = list(config.lambda_grid() if lam_grid is None else lam_grid)
    if config.include_diagonal:
        grid += _diagonal_candidates(gen, config.allan_levels)
    seen, pts = set(), []
    for lam in grid:
        key = (round(complex(lam).real, 12), round(complex(lam).imag, 12))
        if key in seen:
            continue
        seen.add(key)
        pts.append(classify_point(gen, lam, family, config))
    hits = [p.lam.real for p in pts if p.kind == NOT_INVERTIBLE]
    bound = max(hits) if hits else -INF
    inf_ok = generator_bounded_check(gen, family, config.allan_levels, config.k_max, config.generator_mus)
    return SpectrumClassification(tuple(pts), float(bound), inf_ok)


# -- spectral radii --------------------------------------------------------------

@dataclass(frozen=True)
class SpectralRadiusProfile:
    """Spectral radius views of one operator.

    ``level_radii`` are exact (max |diagonal| of triangular truncations);
    ``level_hadamard`` and ``gamma_hadamard`` are k-th-root fits of power norms.
    """

    levels: tuple[int, ...]
    level_radii: np.ndarray
    level_hadamard: dict
    gamma_hadamard: float
    allan_radius: float
    fit_unstable: bool
    diagnostics: dict = field(default_factory=dict, compare=False)


def spectral_radius_profile(op, family: SeminormFamily | None = None, levels: int = 200,
                            k_max: int = 64, hadamard_levels: int | None = None,
                            rtol: float = 1e-9) -> SpectralRadiusProfile:
    family = family or SeminormFamily.standard()
    base = as_matrix(op, _cap_for(op, levels))
    cap = min(levels, base.level)
    lv = family.levels_upto(cap)
    mat = base.data
    if base.causal or not np.any(np.tril(mat, -1)):
        radii = np.maximum.accumulate(np.abs(np.diag(mat)))[np.asarray(lv) - 1]
    else:
        radii = np.full(len(lv), np.abs(np.linalg.eigvals(mat)).max())

    # per-level fits only where k_max >> level, otherwise the polynomial factor dominates
    hl = hadamard_levels if hadamard_levels is not None else max(1, k_max // 8)
    ks = np.arange(1, k_max + 1, dtype=float)
    lv_prof, prof = _orbit_profiles(base, family, cap, k_max)
    prof = prof[1:]
    level_had = {}
    for idx, m in enumerate(lv_prof):
        if m > hl:
            break
        col = prof[:, idx]
        if not np.all(np.isfinite(col)):
            level_had[m] = INF
            continue
        tail = ks >= k_max / 2
        logs = np.array([ext_log(v) for v in col[tail]])
        # a level whose powers vanish is nilpotent there
        level_had[m] = 0.0 if np.any(np.isneginf(logs)) else math.exp(fit_rate(ks[tail], logs).rate)

    g_ks, g_logs, unstable = [], [], 0
    cur = np.eye(base.level, dtype=complex)
    for k in range(1, k_max + 1):
        cur = mat @ cur
        g = gamma_norm(TruncatedMatrix(cur, causal=base.causal), family, cap, rtol=rtol)
        if g.stabilized and math.isfinite(g.value) and g.value > 0:
            g_ks.append(k)
            g_logs.append(math.log(g.value))
        else:
            unstable += 1
    if len(g_ks) >= 4:
        g_ks = np.array(g_ks, dtype=float)
        tail = g_ks >= g_ks[-1] / 2
        fit = fit_rate(g_ks[tail], np.array(g_logs)[tail])
        gamma_had, resid = math.exp(fit.rate), fit.residual
    else:
        gamma_had, resid = math.nan, math.inf
    return SpectralRadiusProfile(
        levels=tuple(lv),
        level_radii=radii,
        level_hadamard=level_had,
        gamma_hadamard=gamma_had,
        allan_radius=float(radii.max()),
        fit_unstable=bool(resid > 1e-3 or unstable > k_max // 4),
        diagnostics={"gamma_fit_residual": resid, "unstable_powers": unstable, "levels": cap},
    )


# -- reports -------------------------------------------------------------------

def prop2_check(gen, family: SeminormFamily | None = None, config: AnalysisConfig | None = None) -> dict:
    """Compare ``s(A)`` with ``log r(T(1))`` for an Allan-bounded generator.

    Also reports ``log`` of the Gamma-level Hadamard value of ``T(1)``,
    which need not match on non-normable spaces.
    """
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    config = config or AnalysisConfig()
    cap = min(config.allan_levels, gen.operator.size) if gen.finite else config.allan_levels
    if not generator_bounded_check(gen, family, cap, config.k_max, config.generator_mus):
        raise HypothesisViolated(f"{gen.name}: generator powers are not equicontinuous for any tried mu")
    scan = spectrum_scan(gen, None, family, config)
    big = min(config.gamma_levels, gen.operator.size) if gen.finite else config.gamma_levels
    t1 = evaluate(gen, 1.0, big)
    prof = spectral_radius_profile(t1, family, big, config.k_max, rtol=config.rtol)
    log_r = ext_log(prof.allan_radius)
    log_gh = ext_log(prof.gamma_hadamard) if math.isfinite(prof.gamma_hadamard) else prof.gamma_hadamard
    return {
        "s": scan.spectral_bound,
        "log_radius": log_r,
        "discrepancy": abs(scan.spectral_bound - log_r) if math.isfinite(log_r) else INF,
        "match": math.isclose(scan.spectral_bound, log_r, abs_tol=1e-9),
        "log_gamma_hadamard": log_gh,
        "level_radii": prof.level_radii,
        "scan": scan,
        "profile": prof,
    }


@dataclass(frozen=True)
class ChainReport:
    s: float
    omega0: BoundEstimate
    omega0_gamma: BoundEstimate
    holds: bool
    tol: float

    @property
    def values(self) -> tuple[float, float, float]:
        return self.s, self.omega0.value, self.omega0_gamma.value


def chain_holds(s: float, omega0: float, omega0_gamma: float, tol: float) -> bool:
    # +inf is the top element; -inf (empty spectrum) is the bottom
    return s <= omega0 + tol and omega0 <= omega0_gamma + tol


def spectral_vs_growth_report(gen, family: SeminormFamily | None = None,
                              config: AnalysisConfig | None = None,
                              scan: SpectrumClassification | None = None) -> ChainReport:
    """Assemble ``s(A) <= omega_0 <= omega_0,Gamma`` with certificates."""
    gen = as_generator(gen)
    family = family or SeminormFamily.standard()
    config = config or AnalysisConfig()
    scan = scan or spectrum_scan(gen, None, family, config)
    topo = growth_bound_topological(gen, family, config.topo_levels, config.offset, config.t_grid)
    gam = growth_bound_gamma(gen, family, config.t_grid, config.gamma_levels, config.t0, config.rtol)
    ok = chain_holds(scan.spectral_bound, topo.value, gam.value, config.chain_tol)
    return ChainReport(scan.spectral_bound, topo, gam, ok, config.chain_tol)


# -- combinatorics -------------------------------------------------------------

def _e_lower() -> Fraction:
    # partial sum of sum 1/i!, strictly below e
    total, term = Fraction(0), Fraction(1)
    for i in range(1, 30):
        total += term
        term /= i
    return total


E_LOWER = _e_lower()


@dataclass(frozen=True)
class CombinatorialReport:
    checks: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def combinatorial_bound_check(n_range: Iterable[int], k_range: Iterable[int], m: int) -> CombinatorialReport:
    """Verify the binomial bound chain exactly for every ``n`` and ``k <= m``.

    Links (all in exact rational arithmetic, using a rational lower bound
    for e so every ``<=`` involving e is implied by the checked one)::

        sum_{j=1}^k C(n-2+j, j-1) = C(n+k-1, k-1)          (hockey stick)
        sum_{j=1}^k C(n-2+j, j-1) <= sum_{j=0}^k C(n-1+j, j) = C(n+k, k)
        C(n+k, k) <= ((n+k) e / k)^k = e^k (n/k + 1)^k <= e^m (n+1)^m
    """
    violations, checks = [], 0
    for n in n_range:
        for k in k_range:
            if not 1 <= k <= m:
                raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
            lhs = sum(math.comb(n - 2 + j, j - 1) for j in range(1, k + 1))
            mid = sum(math.comb(n - 1 + j, j) for j in range(0, k + 1))
            binom = math.comb(n + k, k)
            ratio = Fraction(n + k, k)
            links = {
                "hockey_stick": lhs == math.comb(n + k - 1, k - 1),
                "sum_le_sum": lhs <= mid,
                "sum_eq_binom": mid == binom,
                "binom_le_power": binom <= (ratio * E_LOWER) ** k,
                "power_identity": ratio == Fraction(n, k) + 1,
                "power_le_top": ratio**k <= (n + 1) ** m * E_LOWER ** (m - k),
            }
            checks += len(links)
            violations += [(n, k, m, name) for name, good in links.items() if not good]
    return CombinatorialReport(checks, tuple(violations))
