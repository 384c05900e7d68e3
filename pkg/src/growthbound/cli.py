"""Command-line front end: ``growthbound {growth,spectrum,verify,report}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .exceptions import ConfigError
from .scenarios import (
    CATALOG,
    RunReport,
    load_config,
    parse_override,
    run_all,
    run_growth,
    run_spectrum,
    run_verify,
)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2
PRECISION = 10


def fmt(x):
    """Fixed-precision rendering shared by JSON and CSV output."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, complex):
        if x.imag == 0:
            return fmt(x.real)
        return f"{x.real:.{PRECISION}g}{x.imag:+.{PRECISION}g}j"
    if isinstance(x, int):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{PRECISION}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (list, dict)):
        obj = obj.item()
    return fmt(obj)


def payload(rep: RunReport) -> dict:
    """Machine-readable report; wall-clock time is left out so reruns are byte-identical."""
    out = {"scenario": rep.scenario}
    for key in ("s", "omega0", "omega0_gamma"):
        if key in rep.bounds:
            out[f"bound.{key}"] = rep.bounds[key]
    out["certificates"] = rep.certificates
    out["spectrum"] = rep.classification
    out["radius"] = rep.radius
    out["checks"] = [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in rep.checks]
    out["passed"] = rep.passed
    out["grid"] = rep.grid
    return _clean(out)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


SPECTRUM_FIELDS = ["lambda.re", "lambda.im", "class", "M_lambda", "mu", "K_profile", "certified"]


def spectrum_csv(rep: RunReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SPECTRUM_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rep.classification:
        row = _clean(row)
        k = row["K_profile"]
        row["K_profile"] = "" if k is None else ";".join(str(v) for v in k)
        w.writerow({f: "" if row[f] is None else row[f] for f in SPECTRUM_FIELDS})
    return buf.getvalue()


def growth_csv(rep: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "t", "n", "norm"])
    for cell in rep.growth_cells:
        w.writerow([rep.scenario, fmt(cell["t"]), cell["n"], fmt(cell["norm"])])
    return buf.getvalue()


def table(rep: RunReport) -> str:
    lines = [f"scenario: {rep.scenario}"]
    for key in ("s", "omega0", "omega0_gamma"):
        if key not in rep.bounds:
            continue
        cert = rep.certificates.get(key, {})
        flag = ""
        if cert.get("certified") is False:
            flag = "  [uncertified]"
        if cert.get("infinite"):
            flag = "  [+inf: level sup unbounded]"
        lines.append(f"  {key:<14}{fmt(rep.bounds[key])!s:>18}{flag}")
    if rep.classification:
        lines.append(f"  {'lambda':>28}  {'class':<18}{'M_lambda':>14}  mu")
        for row in rep.classification:
            lam = complex(row["lambda.re"], row["lambda.im"])
            mu = "" if row["mu"] is None else str(fmt(row["mu"]))
            m = "" if row["M_lambda"] is None else str(fmt(row["M_lambda"]))
            lines.append(f"  {fmt(lam)!s:>28}  {row['class']:<18}{m:>14}  {mu}")
    if rep.radius:
        lines.append("  radius: " + ", ".join(f"{k}={fmt(v)}" for k, v in rep.radius.items()))
    for c in rep.checks:
        lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    lines.append(f"  wall clock {rep.wall_clock:.2f} s")
    return "\n".join(lines)


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _emit(rep: RunReport, args, grid_csv) -> None:
    if args.format == "json":
        sys.stdout.write(dumps(payload(rep)))
    else:
        print(table(rep))
    if args.out:
        _write(args.out, grid_csv(rep) if args.out.endswith(".csv") else dumps(payload(rep)))


def parse_lambda_grid(text: str) -> dict:
    """``"0,0.5,1x8"`` -> radii (0, 0.5, 1) with 8 angles."""
    try:
        radii, _, angles = text.partition("x")
        out = {"spectrum.radii": [float(r) for r in radii.split(",") if r.strip()]}
        if angles:
            out["spectrum.angles"] = int(angles)
    except ValueError:
        raise ConfigError(f"--lambda-grid {text!r}: expected 'r1,r2,...xANGLES'") from None
    if not out["spectrum.radii"]:
        raise ConfigError(f"--lambda-grid {text!r}: no radii given")
    return out


def collect_overrides(args) -> tuple[str, dict]:
    settings = load_config(args.config) if args.config else {}
    for item in args.set or []:
        key, value = parse_override(item)
        settings[key] = value
    if args.levels is not None:
        settings["growth.levels"] = args.levels
    if args.tmax is not None:
        settings["growth.tmax"] = args.tmax
    if args.powers is not None:
        settings["spectrum.powers"] = args.powers
    if args.lambda_grid:
        settings.update(parse_lambda_grid(args.lambda_grid))
    scenario = args.scenario or settings.get("scenario.name")
    return scenario, settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="growthbound",
        description="Growth and spectral bounds for semigroups on graded sequence spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "growth": "estimate omega0 and omega0_gamma",
        "spectrum": "classify a lambda grid and estimate s(A)",
        "verify": "run every check for a scenario (or all) and exit 1 on failure",
        "report": "growth and spectrum together, with the inequality chain",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--scenario", help=f"one of: {', '.join(CATALOG)}" + (", all" if name == "verify" else ""))
        p.add_argument("--config", help="YAML file with sections growth/spectrum/tolerances/scenario")
        p.add_argument("--levels", type=int, help="level cap N for the gamma norm")
        p.add_argument("--tmax", type=float, help="right end of the time grid")
        p.add_argument("--lambda-grid", help="polar grid 'r1,r2,...xANGLES'")
        p.add_argument("--powers", type=int, help="k_max for power orbits")
        p.add_argument("--out", help="write JSON (or CSV grid if the name ends in .csv)")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a setting")
        p.add_argument("--format", choices=("table", "json"), default="table", help="stdout format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario, settings = collect_overrides(args)
        if args.command == "verify":
            reports = run_verify(scenario or "all", settings)
        else:
            if not scenario:
                raise ConfigError("--scenario is required (or scenario.name in the config file)")
            if scenario not in CATALOG:
                raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(CATALOG)}")
            runner = {"growth": run_growth, "spectrum": run_spectrum, "report": run_all}[args.command]
            rep = runner(scenario, settings)
            _emit(rep, args, spectrum_csv if args.command == "spectrum" else growth_csv)
            return EXIT_OK if rep.passed else EXIT_CHECK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    summary = [payload(r) for r in reports]
    if args.format == "json":
        sys.stdout.write(dumps(summary))
    else:
        for rep in reports:
            print(table(rep))
    if args.out:
        _write(args.out, dumps(summary))
    for rep in reports:
        bad = rep.first_failure
        if bad is not None:
            print(f"FAILED {rep.scenario}: {bad.name} ({bad.detail})", file=sys.stderr)
            return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
