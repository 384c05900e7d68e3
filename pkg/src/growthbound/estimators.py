"""Estimator-style wrappers around the growth and spectral engines.

``fit`` takes a generator (a :class:`CausalOperator`, a square matrix or a
:class:`GeneratorSpec`); fitted results end in an underscore as usual.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .graded_space import SeminormFamily
from .operators import CausalOperator, from_matrix
from .semigroup import DEFAULT_T_GRID, GeneratorSpec, as_generator, growth_bound_gamma, growth_bound_topological
from .spectral import AnalysisConfig, classify_point, spectrum_scan


def check_generator(gen) -> GeneratorSpec:
    """Coerce ``gen`` to a :class:`GeneratorSpec`, rejecting anything else."""
    if isinstance(gen, (GeneratorSpec, CausalOperator)):
        return as_generator(gen)
    arr = np.asarray(gen)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise ValueError(f"expected a square matrix or an operator, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("generator matrix has non-finite entries")
    return as_generator(from_matrix(arr))


def check_family(family) -> SeminormFamily:
    if family is None:
        return SeminormFamily.standard()
    if not isinstance(family, SeminormFamily):
        raise TypeError(f"family must be a SeminormFamily, got {type(family).__name__}")
    return family


def check_t_grid(t_grid) -> tuple[float, ...]:
    grid = np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float).ravel()
    if grid.size < 2 or np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("t_grid needs at least two positive finite times")
    return tuple(np.sort(grid))


class GrowthBoundEstimator(BaseEstimator):
    """Estimate ``omega_0`` and ``omega_{0,Gamma}`` of ``T(t) = exp(tA)``."""

    def __init__(self, family=None, t_grid=None, levels=200, topo_levels=12, offset=4, t0=1.0, rtol=1e-9):
        self.family = family
        self.t_grid = t_grid
        self.levels = levels
        self.topo_levels = topo_levels
        self.offset = offset
        self.t0 = t0
        self.rtol = rtol

    def fit(self, X, y=None):
        gen = check_generator(X)
        family = check_family(self.family)
        grid = check_t_grid(self.t_grid)
        self.gamma_estimate_ = growth_bound_gamma(gen, family, grid, self.levels, self.t0, self.rtol)
        self.topological_estimate_ = growth_bound_topological(gen, family, self.topo_levels, self.offset, grid)
        self.omega0_gamma_ = self.gamma_estimate_.value
        self.omega0_ = self.topological_estimate_.value
        self.generator_ = gen
        return self

    def bounds(self) -> dict:
        check_is_fitted(self, "omega0_")
        return {"omega0": self.omega0_, "omega0_gamma": self.omega0_gamma_}


class SpectrumScanner(BaseEstimator):
    """Classify points of the complex plane for a fixed generator.

    ``fit`` scans the polar grid and sets ``spectral_bound_``;
    ``predict`` classifies arbitrary points afterwards.
    """

    def __init__(self, family=None, radii=(0.0, 0.5, 1.0, 1.5, 2.0), angles=8, uniform_levels=60,
                 allan_levels=20, k_max=64):
        self.family = family
        self.radii = radii
        self.angles = angles
        self.uniform_levels = uniform_levels
        self.allan_levels = allan_levels
        self.k_max = k_max

    def _config(self) -> AnalysisConfig:
        if self.angles < 1:
            raise ValueError("angles must be at least 1")
        return AnalysisConfig(radii=tuple(float(r) for r in self.radii), angles=int(self.angles),
                              uniform_levels=self.uniform_levels, allan_levels=self.allan_levels,
                              k_max=self.k_max)

    def fit(self, X, y=None):
        gen = check_generator(X)
        family = check_family(self.family)
        self.config_ = self._config()
        self.classification_ = spectrum_scan(gen, None, family, self.config_)
        self.spectral_bound_ = self.classification_.spectral_bound
        self.generator_ = gen
        self.family_ = family
        return self

    def predict(self, lambdas) -> np.ndarray:
        """Class label for every point in ``lambdas``."""
        check_is_fitted(self, "classification_")
        pts = np.atleast_1d(np.asarray(lambdas, dtype=complex))
        return np.array([classify_point(self.generator_, z, self.family_, self.config_).kind for z in pts],
                        dtype=object)


__all__ = ["GrowthBoundEstimator", "SpectrumScanner", "check_generator", "check_family", "check_t_grid",
           "NotFittedError"]
