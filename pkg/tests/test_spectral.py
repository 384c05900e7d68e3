import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from growthbound import (
    INF,
    AnalysisConfig,
    HypothesisViolated,
    SeminormFamily,
    Singular,
    allan_bounded_check,
    combinatorial_bound_check,
    evaluate,
    identity,
    jordan2,
    prop2_check,
    resolvent,
    resolvent_uniformity_check,
    right_shift,
    shift_resolvent_power_apply,
    spectral_radius_profile,
    spectral_vs_growth_report,
    spectrum_scan,
)
from growthbound.operators import diagonal, zero
from growthbound.spectral import (
    E_LOWER,
    NOT_INVERTIBLE,
    SCALED,
    UNDETERMINED,
    UNIFORM,
    ResolventHandle,
    classify_point,
    generator_bounded_check,
    polar_grid,
    resolvent_residual,
    shift_resolvent_power_matrix,
    shift_resolvent_recursive,
)

from oracles import orbit_sup_bruteforce, resolvent_dense, shift_matrix
from properties import prop_uniform_implies_scaled, random_causal

SPLIT = SeminormFamily.standard(levels=(1, 2))
A = right_shift()


class TestResolvent:
    def test_shift_closed_form(self):
        r = resolvent(A, 2.0, 3).data
        expected = [[2.0 ** -(i - j + 1) if i >= j else 0 for j in range(3)] for i in range(3)]
        assert np.allclose(r, expected, rtol=1e-15, atol=0)

    def test_singular_at_zero(self):
        with pytest.raises(Singular) as err:
            resolvent(A, 0.0, 4)
        assert err.value.level == 1

    def test_diagonal(self):
        assert np.allclose(resolvent(diagonal(-1.0), 1.0, 2).data, 0.5 * np.eye(2))

    @pytest.mark.parametrize("lam", [1.0, 0.5, 2.0, 1j, -0.3 + 0.8j])
    def test_against_dense_inverse(self, lam):
        gen = random_causal(np.random.default_rng(5), band=2, scale=0.2)
        m = np.array([[gen.entry(i, j) for j in range(1, 13)] for i in range(1, 13)])
        ref = resolvent_dense(m, lam)
        assert np.allclose(resolvent(gen, lam, 12).data, ref, rtol=1e-12, atol=1e-14)
        assert resolvent_residual(gen, lam, 12) <= 1e-10

    def test_handle_methods_agree(self):
        tri = ResolventHandle(A, 0.5).matrix(10).data
        closed = ResolventHandle(A, 0.5, method="closed-form-shift").matrix(10).data
        assert np.allclose(tri, closed, rtol=1e-14)
        assert np.allclose(ResolventHandle(A, 2).apply(np.ones(3)), [0.5, 0.75, 0.875])


class TestShiftResolventPowers:
    @pytest.mark.parametrize("n", [1, 2, 7, 50])
    def test_resolvent_at_one_on_ones(self, n):
        assert shift_resolvent_power_apply(1, 1, [1] * n, n) == n

    @pytest.mark.parametrize("k", range(1, 16))
    def test_second_power_at_one(self, k):
        # oracle: two triangular solves applied to ones
        oracle = resolvent_dense(shift_matrix(k), 1.0) @ (resolvent_dense(shift_matrix(k), 1.0) @ np.ones(k))
        assert oracle[-1] == pytest.approx(k * (k + 1) / 2, rel=1e-14)
        assert shift_resolvent_power_apply(1, 2, [1] * k, k) == k * (k + 1) // 2

    def test_zero_vector(self):
        assert shift_resolvent_power_apply(0.7j, 4, [0] * 6, 6) == 0

    def test_exact_rationals(self):
        out = shift_resolvent_power_apply(Fraction(1, 3), 2, [Fraction(1, 2)] * 3, 3)
        assert isinstance(out, Fraction)
        # (1/2) * sum_j 3^(j+1) C(j, j-1) = (1/2)(9 + 54 + 243)
        assert out == Fraction(153)

    def test_zero_lambda(self):
        with pytest.raises(ZeroDivisionError):
            shift_resolvent_power_apply(0, 1, [1], 1)

    @given(
        st.sampled_from([1, 0.5, 2, 1j, -1.5, 0.3 + 0.9j]),
        st.integers(1, 30),
        st.integers(1, 30),
        st.lists(st.floats(-2, 2, allow_nan=False, width=32), min_size=30, max_size=30),
    )
    def test_closed_form_matches_solves(self, lam, npow, k, x):
        r = resolvent(A, lam, k).data
        y = np.asarray(x[:k], dtype=complex)
        for _ in range(npow):
            y = r @ y
        got = shift_resolvent_power_apply(lam, npow, x, k)
        scale = max(abs(y[-1]), np.sum(np.abs(shift_resolvent_power_matrix(lam, npow, k)[-1]) * np.abs(x[:k])))
        assert abs(got - y[-1]) <= 1e-10 * max(scale, 1e-300)

    @given(st.lists(st.integers(-9, 9), min_size=1, max_size=25), st.integers(1, 5),
           st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(-3, 2), Fraction(2)]))
    def test_recursion_identity(self, x, npow, lam):
        # y = R x solves y_k = (x_k + y_{k-1}) / lam; iterating gives the closed form exactly
        xs = [Fraction(v) for v in x]
        y = xs
        for _ in range(npow):
            y = shift_resolvent_recursive(lam, y)
        assert y == [shift_resolvent_power_apply(lam, npow, xs, k) for k in range(1, len(xs) + 1)]


class TestAllanBounded:
    def test_resolvent_at_one_half_scale(self):
        r3 = resolvent(A, 1.0, 3)
        res = allan_bounded_check(r3, mu_candidates=[0.5], levels=3, k_max=64)
        oracle = orbit_sup_bruteforce(resolvent_dense(shift_matrix(3), 1.0), 0.5, 3, np.ones(3), 64)
        assert res.bounded and res.mu == 0.5
        assert res.K[3] == pytest.approx(oracle) == 1.5
        assert res.K == pytest.approx({1: 1.0, 2: 1.0, 3: 1.5})

    def test_identity(self):
        res = allan_bounded_check(identity(), mu_candidates=[1.0], levels=10)
        assert res.bounded and all(v == 1 for v in res.K.values())

    def test_resolvent_at_one_unscaled_rejected(self):
        res = allan_bounded_check(resolvent(A, 1.0, 20), mu_candidates=[1.0], levels=20)
        assert not res.bounded
        assert res.diagnostics["tried"][0]["failed_levels"]

    def test_first_accepted_candidate_is_reported(self):
        res = allan_bounded_check(resolvent(A, 1.0, 20), mu_candidates=[1.0, 0.5, 0.25], levels=20)
        assert res.mu == 0.5


class TestUniformity:
    def test_outside_disc(self):
        res = resolvent_uniformity_check(A, 2.0)
        assert res.uniform and res.M_lambda <= 1.0 + 1e-12

    def test_at_one(self):
        assert not resolvent_uniformity_check(A, 1.0).uniform

    def test_diagonal_at_zero(self):
        res = resolvent_uniformity_check(diagonal(-1.0), 0.0)
        assert res.uniform and res.M_lambda == pytest.approx(1.0)


@given(st.integers(0, 2**32 - 1))
def test_uniform_resolvent_implies_scaled(seed):
    ok, info = prop_uniform_implies_scaled(np.random.default_rng(seed))
    assert ok, info


class TestSpectrumScan:
    def test_shift_polar_grid(self):
        scan = spectrum_scan(A)
        assert scan.spectral_bound == 0.0
        for p in scan.points:
            r = abs(p.lam)
            if r == 0:
                assert p.kind == NOT_INVERTIBLE
            elif r > 1:
                assert p.kind == UNIFORM and p.M_lambda <= 1 / (r - 1) + 1e-9
            else:
                assert p.kind == SCALED and abs(p.mu) / r <= 0.5
        assert scan.spectrum_points == [0j]
        assert scan.infinity_in_resolvent

    def test_jordan(self):
        scan = spectrum_scan(jordan2())
        assert scan.spectrum_points == [0j] and scan.spectral_bound == 0.0

    def test_diagonal(self):
        scan = spectrum_scan(diagonal(-1.0))
        assert scan.spectrum_points == [-1 + 0j] and scan.spectral_bound == -1.0

    def test_empty_spectrum(self):
        scan = spectrum_scan(zero(), [1.0, 2.0], config=AnalysisConfig(include_diagonal=False))
        assert scan.spectral_bound == -INF

    def test_unbounded_diagonal(self):
        # resolvent entries 1/(lam - j) stay bounded off the integers
        gen = diagonal(lambda j: float(j))
        cfg = AnalysisConfig()
        p = classify_point(gen, 0.5, SeminormFamily.standard(), cfg)
        assert p.kind == UNIFORM and p.M_lambda == pytest.approx(2.0)
        hit = classify_point(gen, 3.0, SeminormFamily.standard(), cfg)
        assert hit.kind == NOT_INVERTIBLE and hit.singular_level == 3

    def test_undetermined_when_no_scale_settles(self):
        # resolvent of the shift at a tiny lambda with only a mild scale on offer
        cfg = AnalysisConfig(mu_factors=(1.0,), k_max=16)
        assert classify_point(A, 0.5, SeminormFamily.standard(), cfg).kind == UNDETERMINED

    def test_polar_grid_axis_points_are_exact(self):
        pts = polar_grid([0, 2], 4)
        assert pts == [0j, 2 + 0j, 2j, -2 + 0j, -2j]


class TestGeneratorBounded:
    def test_shift(self):
        assert generator_bounded_check(A)

    def test_zero(self):
        assert generator_bounded_check(zero())

    def test_unbounded_diagonal(self):
        assert not generator_bounded_check(diagonal(lambda j: float(j)))


class TestSpectralRadius:
    def test_half_identity(self):
        prof = spectral_radius_profile(diagonal(0.5), levels=20, k_max=32)
        assert np.allclose(prof.level_radii, 0.5)
        assert prof.allan_radius == 0.5
        assert prof.gamma_hadamard == pytest.approx(0.5, rel=1e-12)
        assert all(v == pytest.approx(0.5, rel=1e-12) for v in prof.level_hadamard.values())

    def test_resolvent_outside_disc(self):
        prof = spectral_radius_profile(resolvent(A, 2.0, 40), levels=40)
        assert np.allclose(prof.level_radii, 0.5)

    def test_shift_semigroup(self):
        prof = spectral_radius_profile(evaluate(A, 1.0, 200))
        assert np.array_equal(prof.level_radii, np.ones(len(prof.levels)))
        assert prof.gamma_hadamard == pytest.approx(math.e, rel=0.05)

    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 2.0))
    def test_spectral_mapping_on_truncations(self, seed, t):
        # sigma(T(t)) = exp(t sigma(A)) level by level
        gen = random_causal(np.random.default_rng(seed), scale=0.7)
        n = 8
        d = np.array([gen.entry(i, i) for i in range(1, n + 1)])
        tt = evaluate(gen, t, n).data
        assert np.allclose(np.diag(tt), np.exp(t * d), rtol=1e-10)
        prof = spectral_radius_profile(tt, levels=n, k_max=8, hadamard_levels=0)
        assert np.allclose(prof.level_radii, np.maximum.accumulate(np.exp(t * d.real)), rtol=1e-10)


class TestReports:
    def test_prop2_shift(self):
        out = prop2_check(A)
        assert out["s"] == 0 and out["log_radius"] == 0 and out["match"]
        assert out["log_gamma_hadamard"] == pytest.approx(1.0, abs=0.05)

    def test_prop2_diagonal(self):
        out = prop2_check(diagonal(-1.0))
        assert out["s"] == -1 and out["log_radius"] == pytest.approx(-1.0, abs=1e-12) and out["match"]

    def test_prop2_zero(self):
        out = prop2_check(zero())
        assert out["s"] == 0 and out["log_radius"] == 0 and out["match"]

    def test_prop2_hypothesis(self):
        with pytest.raises(HypothesisViolated):
            prop2_check(diagonal(lambda j: float(j)))

    def test_chain_shift(self):
        rep = spectral_vs_growth_report(A)
        s, w0, wg = rep.values
        assert rep.holds and s == 0 and abs(w0) <= 1e-3 and wg == pytest.approx(1.0, abs=0.05)

    def test_chain_diagonal(self):
        rep = spectral_vs_growth_report(diagonal(-1.0), config=AnalysisConfig(gamma_levels=30))
        assert rep.holds
        assert rep.values == pytest.approx((-1.0, -1.0, -1.0), abs=1e-3)

    def test_chain_jordan_split(self):
        rep = spectral_vs_growth_report(jordan2(), SPLIT)
        assert rep.holds and rep.omega0_gamma.infinite
        assert rep.s == 0 and abs(rep.omega0.value) <= 1e-3


class TestCombinatorial:
    def test_rational_e_bound(self):
        assert E_LOWER < Fraction(27183, 10000)
        assert float(E_LOWER) == pytest.approx(math.e, rel=1e-15)
        # float e sits below the true e, so compare against 50 digits
        import mpmath

        with mpmath.workdps(50):
            assert mpmath.mpf(E_LOWER.numerator) / E_LOWER.denominator < mpmath.e

    def test_full_range(self):
        for m in range(1, 13):
            rep = combinatorial_bound_check(range(1, 61), range(1, m + 1), m)
            assert rep.ok, rep.violations[:3]
            assert rep.checks > 0

    def test_k_above_m_rejected(self):
        with pytest.raises(ValueError):
            combinatorial_bound_check([50], [6], 2)
