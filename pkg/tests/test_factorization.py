"""
Tests for the G+ / G- split and the operators built from it.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import sbt_ilc
from sbt_ilc.factorization import stable_inverse_matrix
from conftest import EXAMPLE_DEN, stable_plants


class TestFactorPlant:
    def test_example_plant(self, example_fp):
        """The zero at 1.1 goes to G-, G+ keeps the poles and the gain."""
        np.testing.assert_allclose(example_fp.gminus, [1.0, -1.1], atol=1e-12)
        np.testing.assert_allclose(example_fp.gplus.num, [1.0])
        np.testing.assert_allclose(example_fp.gplus.den, EXAMPLE_DEN)
        assert example_fp.nu == 1
        assert example_fp.d == 1
        assert example_fp.b == pytest.approx(4.41, abs=1e-9)

    def test_minimum_phase_plant(self):
        """Without zeros outside the circle G- is 1 and nu = 0."""
        fp = sbt_ilc.factor_plant(sbt_ilc.RationalPlant([0.0, 1.0, 0.5], [1.0, -0.3]))
        assert fp.nu == 0
        np.testing.assert_array_equal(fp.gminus, [1.0])
        np.testing.assert_allclose(fp.gplus.num, [1.0, 0.5], atol=1e-12)
        assert fp.b == pytest.approx(1.0)

    def test_zero_on_unit_circle_is_not_inverted(self):
        """A zero on the unit circle counts as not invertible."""
        fp = sbt_ilc.factor_plant(sbt_ilc.RationalPlant([0.0, 1.0, -1.0], [1.0]))
        np.testing.assert_allclose(fp.gminus, [1.0, -1.0], atol=1e-12)

    def test_gain_stays_in_gplus(self):
        """G- is monic; the leading gain is left in G+."""
        fp = sbt_ilc.factor_plant(sbt_ilc.RationalPlant([0.0, 3.0, -6.0], [1.0]))
        np.testing.assert_allclose(fp.gminus, [1.0, -2.0], atol=1e-12)
        np.testing.assert_allclose(fp.gplus.num, [3.0])

    def test_complex_pair(self):
        """Conjugate zeros outside the circle give a real quadratic G-."""
        zeros = 1.5 * np.exp(1j * np.pi / 3 * np.array([1, -1]))
        num = np.concatenate([[0.0], np.real(np.poly(zeros))])
        fp = sbt_ilc.factor_plant(sbt_ilc.RationalPlant(num, [1.0, 0.4]))
        assert fp.nu == 2
        assert fp.gminus.dtype == np.float64
        np.testing.assert_allclose(fp.gminus, [1.0, -1.5, 2.25], atol=1e-12)

    def test_unstable_plant(self):
        """An unstable pole is reported with its modulus."""
        plant = sbt_ilc.RationalPlant([0.0, 1.0], np.poly([0.5, -1.5]))
        with pytest.raises(sbt_ilc.UnstablePlantError) as info:
            sbt_ilc.factor_plant(plant)
        assert info.value.modulus == pytest.approx(1.5)

    def test_zero_numerator(self):
        """An all-zero numerator cannot be factored."""
        with pytest.raises(sbt_ilc.FactorizationError):
            sbt_ilc.factor_plant(sbt_ilc.RationalPlant([0.0, 0.0], [1.0]))

    def test_relative_degree_below_delay(self):
        """A numerator delayed past d makes h_d vanish and is refused."""
        plant = sbt_ilc.RationalPlant([0.0, 0.0, 1.0], [1.0], d=1)
        with pytest.raises(sbt_ilc.FactorizationError):
            sbt_ilc.factor_plant(plant)

    @given(stable_plants())
    @settings(max_examples=100, deadline=None)
    def test_recombination(self, plant):
        """z^-d G+ G- reproduces the plant's impulse response."""
        fp = sbt_ilc.factor_plant(plant)
        assert fp.gminus[0] == 1.0
        original = sbt_ilc.markov_params(plant, 20).h
        recombined = sbt_ilc.markov_params(fp.recombine(), 20).h
        scale = max(1.0, np.max(np.abs(original)))
        np.testing.assert_allclose(recombined, original, atol=1e-8 * scale)


class TestFromGminus:
    def test_unity_gplus(self):
        """from_gminus builds a plant with G+ = 1."""
        fp = sbt_ilc.FactoredPlant.from_gminus([1.0, -1.1])
        np.testing.assert_array_equal(fp.gplus.num, [1.0])
        np.testing.assert_array_equal(fp.gplus.den, [1.0])
        assert fp.b == pytest.approx(4.41)

    def test_rejects_bad_factor(self):
        """G- must start with a nonzero coefficient."""
        with pytest.raises(ValueError):
            sbt_ilc.FactoredPlant.from_gminus([0.0, 1.0])

    def test_gminus_matrix(self):
        """The lifted G- is lower banded with the coefficients down each column."""
        fp = sbt_ilc.FactoredPlant.from_gminus([1.0, -1.1])
        np.testing.assert_allclose(fp.gminus_matrix(4, 3).todense(),
                                   [[1.0, 0, 0], [-1.1, 1.0, 0], [0, -1.1, 1.0], [0, 0, -1.1]])


class TestMirror:
    def test_reverses(self):
        """Coefficients come back in reverse order."""
        np.testing.assert_array_equal(sbt_ilc.mirror([1.0, -1.1]), [-1.1, 1.0])

    @given(st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_involution(self, g):
        """Mirroring twice gives the polynomial back."""
        m = sbt_ilc.mirror(g)
        assert len(m) == len(g)
        np.testing.assert_array_equal(sbt_ilc.mirror(m), g)

    def test_rejects_empty(self):
        """Mirroring an empty polynomial is an error."""
        with pytest.raises(ValueError):
            sbt_ilc.mirror([])

    @pytest.mark.parametrize("seed", range(10))
    def test_anticausal_apply_is_transpose(self, seed):
        """Filtering with the mirror and advancing nu samples is G-^T."""
        rng = np.random.default_rng(seed)
        g = np.concatenate([[1.0], rng.uniform(-2, 2, int(rng.integers(0, 4)))])
        n = int(rng.integers(1, 20))
        x = rng.standard_normal(n)
        dense = sbt_ilc.BandedCausalMatrix(g, n, n).todense()
        np.testing.assert_allclose(sbt_ilc.anticausal_apply(g, x), dense.T @ x, atol=1e-12)

    def test_anticausal_apply_example(self):
        """The example G- applied backwards to a unit impulse."""
        np.testing.assert_allclose(sbt_ilc.anticausal_apply([1.0, -1.1], [0.0, 0.0, 1.0]),
                                   [0.0, -1.1, 1.0])


class TestStableInverse:
    @pytest.fixture
    def gplus(self):
        return sbt_ilc.RationalPlant([1.0, 0.5], EXAMPLE_DEN, d=0)

    def test_round_trip(self, gplus):
        """The stable inverse undoes G+."""
        x = np.random.default_rng(4).standard_normal(40)
        y = sbt_ilc.simulate_response(gplus, x)
        np.testing.assert_allclose(sbt_ilc.stable_inverse_apply(gplus, y), x, atol=1e-10)

    def test_matches_triangular_inverse(self, gplus):
        """The inverse matrix inverts the lifted G+."""
        n = 12
        lifted = sbt_ilc.lift_plant(sbt_ilc.markov_params(gplus, n)).todense()
        np.testing.assert_allclose(stable_inverse_matrix(gplus, n) @ lifted, np.eye(n), atol=1e-10)

    def test_rejects_delayed_gplus(self):
        """G+ with a zero leading coefficient has no causal inverse."""
        with pytest.raises(sbt_ilc.FactorizationError):
            sbt_ilc.stable_inverse_apply(sbt_ilc.RationalPlant([0.0, 1.0], [1.0], d=0), np.ones(3))


class TestNormalizationConstant:
    def test_endpoint_maximum(self):
        """For 1 - 1.1 z^-1 the maximum sits at w = pi."""
        assert sbt_ilc.normalization_constant([1.0, -1.1], 16) == pytest.approx(4.41)

    def test_refine_interior_maximum(self):
        """|1 + 0.6 z^-1 - 0.6 z^-2|^2 peaks at cos(w) = 0.1 with value 2.944."""
        g = [1.0, 0.6, -0.6]
        coarse = sbt_ilc.normalization_constant(g, 8)
        fine = sbt_ilc.normalization_constant(g, 8, refine=True)
        assert coarse <= fine
        assert fine == pytest.approx(2.944, abs=1e-9)

    @given(st.lists(st.floats(-2.0, 2.0), max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_bounded_by_coefficient_sum(self, tail):
        """b never exceeds the squared coefficient 1-norm."""
        g = [1.0] + tail
        b = sbt_ilc.normalization_constant(g, 256)
        assert 0.0 < b <= sum(abs(c) for c in g) ** 2 * (1 + 1e-12)

    def test_grid_too_small(self):
        """A grid of one point is rejected."""
        with pytest.raises(ValueError):
            sbt_ilc.normalization_constant([1.0], 1)
