"""Asymptotic exponential-rate fits for log-norm curves.

Norms of exponentials (and powers) of triangular matrices behave like
``poly(t) * exp(rate * t)``.  Fitting ``log f = rate*t + deg*log t + c``
removes the polynomial factor to leading order, so the rate settles at
horizons of a few hundred instead of ~1e3 per polynomial degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class RateFit:
    rate: float
    log_degree: float
    residual: float
    window: tuple[float, float]


def fit_rate(x, logy, *, log_term: bool = True) -> RateFit:
    """Least-squares fit of ``logy ~ rate*x (+ deg*log x) + c``.

    ``logy`` may contain ``-inf`` only if every entry is ``-inf`` (a
    vanishing curve), in which case the rate is ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    logy = np.asarray(logy, dtype=float)
    if np.all(np.isneginf(logy)):
        return RateFit(-math.inf, 0.0, 0.0, (float(x[0]), float(x[-1])))
    if not np.all(np.isfinite(logy)):
        raise ValueError("log-norm curve contains non-finite values")
    cols = [x]
    if log_term:
        cols.append(np.log(x))
    cols.append(np.ones_like(x))
    design = np.column_stack(cols)
    scale = np.abs(design).max(axis=0)
    scale[scale == 0] = 1.0
    coef, *_ = np.linalg.lstsq(design / scale, logy, rcond=None)
    coef = coef / scale
    resid = logy - design @ coef
    return RateFit(
        rate=float(coef[0]),
        log_degree=float(coef[1]) if log_term else 0.0,
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(float(x[0]), float(x[-1])),
    )


@dataclass(frozen=True)
class SettledRate:
    rate: float
    residual: float
    change: float
    horizon: float
    certified: bool
    history: tuple[RateFit, ...]


def settle_rate(
    log_curve: Callable[[np.ndarray], np.ndarray],
    horizon: float,
    *,
    points: int = 32,
    tol: float = 1e-3,
    max_horizon: float = 1e5,
) -> SettledRate:
    """Fit the rate on ``[H/2, H]`` and double ``H`` until it settles.

    Certified when the residual per point and the change between two
    consecutive windows are both below ``tol``.
    """
    history = []
    h = float(horizon)
    prev = None
    while True:
        t = np.geomspace(h / 2, h, points)
        fit = fit_rate(t, log_curve(t))
        history.append(fit)
        if prev is not None:
            if math.isinf(fit.rate) and fit.rate == prev.rate:
                change = 0.0
            else:
                change = abs(fit.rate - prev.rate)
            if (change < tol and fit.residual < tol) or 2 * h > max_horizon:
                return SettledRate(
                    rate=fit.rate,
                    residual=fit.residual,
                    change=change,
                    horizon=h,
                    certified=change < tol and fit.residual < tol,
                    history=tuple(history),
                )
        prev = fit
        h *= 2
