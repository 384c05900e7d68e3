import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from growthbound import (
    HorizonTooShort,
    LevelExceedsTruncation,
    RecalibrationRule,
    SeminormFamily,
    TruncatedVector,
    seminorm_eval,
)
from growthbound.operators import diagonal, identity, right_shift
from growthbound.spectral import resolvent

from oracles import damped_sup_bruteforce, orbit_sup_bruteforce, resolvent_dense, shift_matrix
from properties import prop_recalibrated_contraction, prop_seminorm_axioms

STD = SeminormFamily.standard()


class TestSeminormEval:
    def test_max_of_moduli(self):
        assert seminorm_eval(STD, 2, (1, -3, 7)) == 3

    def test_zero_vector(self):
        assert seminorm_eval(STD, 3, (0, 0, 0)) == 0

    def test_weighted(self):
        assert seminorm_eval(SeminormFamily.weighted((1, 2, 3)), 3, (1, 1, 1)) == 3

    def test_weighted_callable(self):
        fam = SeminormFamily.weighted(lambda j: 2.0 ** -j)
        assert seminorm_eval(fam, 3, (4, 4, 4)) == 2

    def test_level_beyond_prefix(self):
        with pytest.raises(LevelExceedsTruncation):
            seminorm_eval(STD, 4, (1, 2, 3))

    def test_subset_family_reads_declared_coordinates(self):
        fam = SeminormFamily.coordinate_subsets({1: (2,), 2: (1, 2, 3)})
        assert fam(1, (9, -2, 5)) == 2
        assert fam(2, (9, -2, 5)) == 9
        with pytest.raises(ValueError):
            fam(3, (1, 1, 1))

    def test_restricted_levels(self):
        fam = SeminormFamily.standard(levels=(1, 2))
        assert fam.levels_upto(10) == [1, 2]
        assert fam.max_level == 2

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            SeminormFamily.weighted((1, -1))(2, (1, 1))

    def test_vector_is_read_only(self):
        v = TruncatedVector([1, 2])
        with pytest.raises(ValueError):
            v.coords[0] = 5
        assert np.array_equal(v.head(4), [1, 2, 0, 0])


@given(st.integers(0, 2**32 - 1))
def test_seminorm_axioms(seed):
    ok, info = prop_seminorm_axioms(np.random.default_rng(seed))
    assert ok, info


class TestRecalibrateSemigroup:
    def rule(self, omega=1.0):
        return RecalibrationRule.semigroup_orbit(STD, right_shift(), omega)

    def test_first_coordinate_is_constant(self):
        q = SeminormFamily.recalibrated(self.rule())
        assert q(1, (1, 0, 0)) == pytest.approx(1.0, abs=1e-12)

    def test_ones_level_two(self):
        # sup_t e^{-t} max(1, 1 + t); oracle on a dense grid gives 1
        oracle = damped_sup_bruteforce(lambda t: np.maximum(1, 1 + t), 1.0, 50)
        out = SeminormFamily.recalibrated(self.rule())(2, (1, 1))
        assert out == pytest.approx(oracle, abs=1e-12)

    def test_zero_vector(self):
        assert SeminormFamily.recalibrated(self.rule(0.3))(3, (0, 0, 0)) == 0

    def test_recalibrated_dominates_base(self):
        x = (0.2, -1.0, 3.0)
        q = SeminormFamily.recalibrated(self.rule(0.5))
        assert all(q(n, x) >= STD(n, x) for n in (1, 2, 3))

    def test_interior_maximum(self):
        # e^{-t/2}(1 + t) peaks at t = 1 with value 2 e^{-1/2}
        q = SeminormFamily.recalibrated(self.rule(0.5))
        assert q(2, (1, 1)) == pytest.approx(2 * math.exp(-0.5), rel=1e-10)

    def test_horizon_too_short(self):
        rule = RecalibrationRule.semigroup_orbit(STD, diagonal(1.0), 0.5, horizon=5.0)
        with pytest.raises(HorizonTooShort):
            SeminormFamily.recalibrated(rule)(1, (1,))


@given(st.integers(0, 2**32 - 1))
def test_recalibrated_family_has_unit_constant(seed):
    ok, info = prop_recalibrated_contraction(np.random.default_rng(seed))
    assert ok, info


class TestRecalibrateOrbit:
    def test_resolvent_orbit_matches_bruteforce(self):
        rule = RecalibrationRule.power_orbit(STD, resolvent(right_shift(), 1.0, 3), 0.5)
        oracle = orbit_sup_bruteforce(resolvent_dense(shift_matrix(3), 1.0), 0.5, 3, np.ones(3), 64)
        assert oracle == 1.5
        assert SeminormFamily.recalibrated(rule)(3, (1, 1, 1)) == pytest.approx(oracle, rel=1e-14)

    def test_identity_orbit_is_constant(self):
        rule = RecalibrationRule.power_orbit(STD, identity(), 1.0)
        assert SeminormFamily.recalibrated(rule)(2, (2, -5, 9)) == 5

    def test_zero_vector(self):
        rule = RecalibrationRule.power_orbit(STD, right_shift(), 3.0)
        assert SeminormFamily.recalibrated(rule)(4, np.zeros(4)) == 0

    def test_divergent_orbit(self):
        from growthbound import OrbitDivergent

        rule = RecalibrationRule.power_orbit(STD, identity(), 1.5, power_cap=16)
        with pytest.raises(OrbitDivergent):
            SeminormFamily.recalibrated(rule)(1, (1,))
