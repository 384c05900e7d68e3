"""Built-in scenarios, run configuration and run reports."""
from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np
import yaml

from .exceptions import ConfigError, GrowthBoundError
from .graded_space import SeminormFamily
from .operators import diagonal, jordan2, right_shift, weighted_shift
from .semigroup import GeneratorSpec, growth_bound_gamma, growth_bound_topological
from .spectral import (
    NOT_INVERTIBLE,
    SCALED,
    UNIFORM,
    AnalysisConfig,
    chain_holds,
    combinatorial_bound_check,
    prop2_check,
    shift_resolvent_power_apply,
    shift_resolvent_power_matrix,
    spectrum_scan,
)


@dataclass(frozen=True)
class Expected:
    value: float
    tol: float
    basis: str  # analytic, oracle or closed-form


@dataclass(frozen=True)
class Scenario:
    name: str
    generator: GeneratorSpec
    family: SeminormFamily
    config: AnalysisConfig = AnalysisConfig()
    expected: Mapping[str, Expected] = field(default_factory=dict)
    families: Mapping[str, SeminormFamily] = field(default_factory=dict, repr=False)


def _right_shift() -> Scenario:
    return Scenario(
        "right_shift",
        GeneratorSpec(right_shift()),
        SeminormFamily.standard(),
        AnalysisConfig(),
        {
            "omega0_gamma": Expected(1.0, 0.05, "analytic"),
            "omega0": Expected(0.0, 1e-3, "analytic"),
            "s": Expected(0.0, 0.0, "analytic"),
            "log_radius": Expected(0.0, 1e-12, "analytic"),
            "log_gamma_hadamard": Expected(1.0, 0.05, "oracle"),
        },
    )


def _jordan2() -> Scenario:
    families = {
        "standard": SeminormFamily.standard(levels=(2,)),
        "split": SeminormFamily.standard(levels=(1, 2)),
    }
    return Scenario(
        "jordan2",
        GeneratorSpec(jordan2()),
        families["standard"],
        AnalysisConfig(),
        {"omega0": Expected(0.0, 1e-3, "analytic"), "s": Expected(0.0, 0.0, "closed-form")},
        families,
    )


def _jordan2_split() -> Scenario:
    sc = _jordan2()
    return dataclasses.replace(
        sc, name="jordan2_split", family=sc.families["split"],
        expected={**sc.expected, "omega0_gamma": Expected(math.inf, 0.0, "analytic")},
    )


def _diagonal(d=-1.0) -> Scenario:
    exp = {}
    if np.isscalar(d):
        exp = {k: Expected(float(d), 1e-6, "closed-form") for k in ("omega0_gamma", "s", "log_radius")}
        exp["omega0"] = Expected(float(d), 1e-3, "closed-form")
    return Scenario("diagonal", GeneratorSpec(diagonal(d)), SeminormFamily.standard(),
                    AnalysisConfig(), exp)


def _weighted_shift(w=(0.5, 1.0)) -> Scenario:
    return Scenario(
        "weighted_shift",
        GeneratorSpec(weighted_shift(w)),
        SeminormFamily.standard(),
        AnalysisConfig(),
        {"omega0": Expected(0.0, 1e-3, "closed-form"), "s": Expected(0.0, 0.0, "closed-form")},
    )


CATALOG: dict[str, Callable[[], Scenario]] = {
    "right_shift": _right_shift,
    "jordan2": _jordan2,
    "jordan2_split": _jordan2_split,
    "diagonal": _diagonal,
    "weighted_shift": _weighted_shift,
}


def get_scenario(name: str) -> Scenario:
    try:
        return CATALOG[name]()
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(CATALOG)}") from None


def random_scenarios(count: int = 20, seed: int = 0) -> list[Scenario]:
    """Randomised diagonal and weighted-shift scenarios (alternating)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        period = int(rng.integers(1, 6))
        if i % 2 == 0:
            d = tuple(np.round(rng.uniform(-2.0, 1.0, period), 6))
            sc = _diagonal(d)
            top = max(d)
            sc = dataclasses.replace(sc, name=f"diagonal_r{i}", expected={
                "s": Expected(top, 1e-9, "closed-form"), "omega0": Expected(top, 1e-3, "closed-form"),
                "omega0_gamma": Expected(top, 1e-6, "closed-form"),
            })
        else:
            w = tuple(np.round(rng.uniform(0.2, 1.2, period), 6))
            # shorter horizon keeps the level sup stable with fewer levels
            cfg = AnalysisConfig(t_grid=tuple(np.geomspace(0.25, 10.0, 32)), gamma_levels=80)
            sc = dataclasses.replace(_weighted_shift(w), name=f"weighted_shift_r{i}", config=cfg)
        out.append(sc)
    return out


# -- configuration ---------------------------------------------------------------

# config-file key -> AnalysisConfig field
CONFIG_KEYS = {
    "growth.levels": "gamma_levels",
    "growth.topo_levels": "topo_levels",
    "growth.offset": "offset",
    "growth.t0": "t0",
    "growth.tmin": None,
    "growth.tmax": None,
    "growth.t_points": None,
    "spectrum.radii": "radii",
    "spectrum.angles": "angles",
    "spectrum.uniform_levels": "uniform_levels",
    "spectrum.levels": "allan_levels",
    "spectrum.powers": "k_max",
    "spectrum.mu_factors": "mu_factors",
    "spectrum.include_diagonal": "include_diagonal",
    "tolerances.chain": "chain_tol",
    "tolerances.rtol": "rtol",
    "scenario.name": None,
    "scenario.family": None,
}


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in CONFIG_KEYS:
        raise ConfigError(f"unknown setting {key!r} in override {text!r}")
    try:
        return key, yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value in override {text!r}: {exc}") from None


def flatten_config(doc: Mapping, where: str = "config") -> dict[str, Any]:
    if not isinstance(doc, Mapping):
        raise ConfigError(f"{where}: top level must be a mapping of sections")
    flat = {}
    for section, body in doc.items():
        if section == "scenario" and isinstance(body, str):
            flat["scenario.name"] = body
            continue
        if not isinstance(body, Mapping):
            raise ConfigError(f"{where}: section {section!r} must be a mapping")
        for key, value in body.items():
            full = f"{section}.{key}"
            if full not in CONFIG_KEYS:
                raise ConfigError(f"{where}: unknown setting {full!r}")
            flat[full] = value
    return flat


def load_config(path) -> dict[str, Any]:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" line {mark.line + 1}" if mark else ""
        raise ConfigError(f"{path}:{line} invalid YAML: {exc}") from None
    return flatten_config(doc, str(path))


def apply_overrides(scenario: Scenario, overrides: Mapping[str, Any] | None) -> Scenario:
    """Return ``scenario`` with ``section.key -> value`` settings applied."""
    if not overrides:
        return scenario
    cfg = dataclasses.asdict(scenario.config)
    grid = dict(tmin=min(cfg["t_grid"]), tmax=max(cfg["t_grid"]), t_points=len(cfg["t_grid"]))
    family = scenario.family
    for key, value in overrides.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown setting {key!r}")
        target = CONFIG_KEYS[key]
        try:
            if key == "scenario.family":
                if value not in scenario.families:
                    raise ConfigError(
                        f"scenario.family={value!r}: {scenario.name} offers {sorted(scenario.families) or ['standard']}"
                    )
                family = scenario.families[value]
            elif key == "scenario.name":
                continue
            elif key.startswith("growth.t"):
                grid[key.split(".")[1]] = float(value) if key != "growth.t_points" else int(value)
            elif isinstance(cfg[target], tuple):
                seq = value if isinstance(value, (list, tuple)) else [value]
                cfg[target] = tuple(float(v) for v in seq)
            elif isinstance(cfg[target], bool):
                cfg[target] = bool(value)
            else:
                cfg[target] = type(cfg[target])(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    if grid["tmin"] <= 0 or grid["tmax"] <= grid["tmin"] or grid["t_points"] < 2:
        raise ConfigError(f"bad time grid {grid}")
    cfg["t_grid"] = tuple(np.geomspace(grid["tmin"], grid["tmax"], grid["t_points"]))
    if family is not scenario.family and "omega0_gamma" not in scenario.expected and \
            family.levels == (1, 2):
        expected = {**scenario.expected, "omega0_gamma": Expected(math.inf, 0.0, "analytic")}
    else:
        expected = scenario.expected
    return dataclasses.replace(scenario, config=AnalysisConfig(**cfg), family=family, expected=expected)


# -- reports ---------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class RunReport:
    scenario: str
    bounds: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    classification: list = field(default_factory=list)
    radius: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    growth_cells: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))


def _within(value: float, exp: Expected) -> bool:
    if math.isinf(exp.value):
        return value == exp.value
    return abs(value - exp.value) <= exp.tol


def _grid_meta(cfg: AnalysisConfig) -> dict:
    return {
        "t_min": min(cfg.t_grid), "t_max": max(cfg.t_grid), "t_points": len(cfg.t_grid),
        "levels": cfg.gamma_levels, "topo_levels": cfg.topo_levels, "offset": cfg.offset,
        "radii": list(cfg.radii), "angles": cfg.angles, "powers": cfg.k_max,
        "allan_levels": cfg.allan_levels, "uniform_levels": cfg.uniform_levels,
    }


def run_growth(scenario: Scenario | str, overrides: Mapping[str, Any] | None = None,
               report: RunReport | None = None) -> RunReport:
    """Populate ``omega0`` and ``omega0_gamma`` (all three forms) with certificates."""
    sc = apply_overrides(get_scenario(scenario) if isinstance(scenario, str) else scenario, overrides)
    cfg = sc.config
    rep = report or RunReport(sc.name, grid=_grid_meta(cfg))
    start = time.perf_counter()
    try:
        gam = growth_bound_gamma(sc.generator, sc.family, cfg.t_grid, cfg.gamma_levels, cfg.t0, cfg.rtol)
    except GrowthBoundError as exc:
        rep.check("omega0_gamma", False, f"{_kind(exc)}: {exc}")
        gam = None
    else:
        rep.bounds["omega0_gamma"] = gam.value
        rep.certificates["omega0_gamma"] = {
            "certified": gam.certified, "infinite": gam.diagnostics["infinite"],
            **{k: gam.diagnostics[k] for k in ("inf_form", "limit_form", "power_form", "spread")},
        }
        exp = sc.expected.get("omega0_gamma")
        if exp is not None:
            forms = [gam.diagnostics[k] for k in ("inf_form", "limit_form", "power_form")]
            ok = all(_within(f, exp) for f in forms) and (gam.infinite or gam.diagnostics["spread"] < 0.05)
            rep.check("omega0_gamma", ok, f"forms={forms} expected {exp.value}±{exp.tol}")
    try:
        topo = growth_bound_topological(sc.generator, sc.family, cfg.topo_levels, cfg.offset, cfg.t_grid)
    except GrowthBoundError as exc:
        rep.check("omega0", False, f"{_kind(exc)}: {exc}")
    else:
        rep.bounds["omega0"] = topo.value
        rep.certificates["omega0"] = {"certified": topo.certified, "residual": topo.diagnostics["residual"]}
        exp = sc.expected.get("omega0")
        if exp is not None:
            rep.check("omega0", _within(topo.value, exp), f"{topo.value:.3e} expected {exp.value}±{exp.tol}")
    if gam is not None and not gam.infinite:
        rep.growth_cells = _growth_cells(sc, gam)
    rep.wall_clock += time.perf_counter() - start
    return rep


def _growth_cells(sc: Scenario, gam) -> list[dict]:
    from .operators import level_norm_profile
    from .semigroup import evaluate

    cfg = sc.config
    cap = gam.diagnostics["levels"]
    rows = []
    for t in cfg.t_grid:
        lv, prof = level_norm_profile(evaluate(sc.generator, t, cap), sc.family, cap)
        rows += [{"t": float(t), "n": n, "norm": float(v)} for n, v in zip(lv, prof)]
    return rows


def _kind(exc: Exception) -> str:
    name = type(exc).__name__
    return "".join("-" + c.lower() if c.isupper() else c for c in name).lstrip("-")


def run_spectrum(scenario: Scenario | str, overrides: Mapping[str, Any] | None = None,
                 report: RunReport | None = None) -> RunReport:
    """Classify the lambda grid, then check s(A), the radius identity and the chain."""
    sc = apply_overrides(get_scenario(scenario) if isinstance(scenario, str) else scenario, overrides)
    cfg = sc.config
    rep = report or RunReport(sc.name, grid=_grid_meta(cfg))
    start = time.perf_counter()
    scan = spectrum_scan(sc.generator, None, sc.family, cfg)
    rep.bounds["s"] = scan.spectral_bound
    rep.certificates["s"] = {"infinity_in_resolvent": scan.infinity_in_resolvent}
    rep.classification = [{
        "lambda.re": p.lam.real, "lambda.im": p.lam.imag, "class": p.kind,
        "M_lambda": p.M_lambda, "mu": p.mu, "K_profile": list(p.K.values()) if p.K else None,
        "certified": p.kind in (NOT_INVERTIBLE, UNIFORM, SCALED),
    } for p in scan.points]
    exp = sc.expected.get("s")
    if exp is not None:
        rep.check("spectral_bound", _within(scan.spectral_bound, exp),
                  f"s={scan.spectral_bound} expected {exp.value}")
    if sc.name == "right_shift":
        rep.check("shift_classes", *_shift_classes_ok(scan))
    try:
        p2 = prop2_check(sc.generator, sc.family, cfg)
    except GrowthBoundError as exc:
        rep.radius = {"hypothesis": False, "reason": str(exc)}
    else:
        rep.radius = {
            "hypothesis": True, "log_radius": p2["log_radius"], "s": p2["s"], "match": p2["match"],
            "log_gamma_hadamard": p2["log_gamma_hadamard"],
        }
        rep.check("prop2_match", p2["match"], f"s={p2['s']} log r={p2['log_radius']}")
        exp = sc.expected.get("log_gamma_hadamard")
        if exp is not None:
            rep.check("gamma_hadamard", _within(p2["log_gamma_hadamard"], exp),
                      f"log gamma-Hadamard={p2['log_gamma_hadamard']:.4f}")
    rep.wall_clock += time.perf_counter() - start
    return rep


def _shift_classes_ok(scan) -> tuple[bool, str]:
    bad = []
    for p in scan.points:
        r = abs(p.lam)
        if r == 0:
            good = p.kind == NOT_INVERTIBLE
        elif r > 1 + 1e-12:
            good = p.kind == UNIFORM and p.M_lambda <= 1 / (r - 1) + 1e-9
        else:
            good = p.kind == SCALED and abs(p.mu) / r <= 0.5 + 1e-12
        if not good:
            bad.append(f"{p.lam:.3g}:{p.kind}")
    return not bad, "all grid points as expected" if not bad else "; ".join(bad)


def run_all(scenario: Scenario | str, overrides=None) -> RunReport:
    sc = apply_overrides(get_scenario(scenario) if isinstance(scenario, str) else scenario, overrides)
    rep = run_growth(sc)
    run_spectrum(sc, report=rep)
    if all(k in rep.bounds for k in ("s", "omega0", "omega0_gamma")):
        ok = chain_holds(rep.bounds["s"], rep.bounds["omega0"], rep.bounds["omega0_gamma"], sc.config.chain_tol)
        rep.check("inequality_chain", ok,
                  f"s={rep.bounds['s']:.4g} <= omega0={rep.bounds['omega0']:.4g} "
                  f"<= omega0_gamma={rep.bounds['omega0_gamma']:.4g}")
    return rep


def run_formula_checks() -> RunReport:
    """Closed-form identities that do not belong to one scenario."""
    from fractions import Fraction

    from .spectral import resolvent

    rep = RunReport("formulas")
    start = time.perf_counter()
    checks, violations = 0, []
    for m in range(1, 13):
        sub = combinatorial_bound_check(range(1, 61), range(1, m + 1), m)
        checks += sub.checks
        violations += sub.violations
    rep.check("combinatorial_chain", not violations, f"{checks} links, {len(violations)} violations")
    exact = all(max(abs(shift_resolvent_power_apply(1, 1, [1] * n, k)) for k in range(1, n + 1)) == n
                for n in range(1, 51))
    rep.check("resolvent_at_one", exact, "p_n(R(1,A) ones) = n for n <= 50")
    worst = 0.0
    A = right_shift()
    for lam in (1, 0.5, 2, 1j):
        R = resolvent(A, lam, 30).data
        x = np.ones(30)
        y = x.astype(complex)
        for npow in range(1, 31):
            y = R @ y
            closed = np.array([shift_resolvent_power_apply(lam, npow, x, k) for k in range(1, 31)])
            # entries that cancel exactly (lambda = i) are measured against their term sizes
            terms = np.abs(shift_resolvent_power_matrix(lam, npow, 30)) @ np.abs(x)
            scale = np.where(y != 0, np.abs(y), terms)
            worst = max(worst, float(np.max(np.abs(closed - y) / scale)))
    rep.check("resolvent_power_formula", worst <= 1e-10, f"max relative deviation {worst:.2e}")
    rep.wall_clock = time.perf_counter() - start
    return rep


def run_verify(target: str = "all", overrides: Mapping[str, Any] | None = None) -> list[RunReport]:
    if target == "all":
        reports = [run_all(name, overrides) for name in CATALOG]
        reports.append(run_formula_checks())
        return reports
    return [run_all(target, overrides)]
