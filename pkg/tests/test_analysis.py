"""
Tests for the stability certificates and the zero-padding sweep.
"""

import logging

import numpy as np
import pytest
import toml
from hypothesis import given, settings, strategies as st

import sbt_ilc
from sbt_ilc import eigen
from sbt_ilc.analysis import resolve_threads
from conftest import EXAMPLE_ALPHA, EXAMPLE_BAND

DIVERGENT_BAND = [1.0 - 2.2 * 2.21 / 4.41, 2.2 * 1.1 / 4.41]


def random_band(rng, r=None):
    r = int(rng.integers(0, 5)) if r is None else r
    return rng.uniform(-1.0, 1.0, r + 1)


# =============================================================================
# Symbol
# =============================================================================

class TestSymbol:
    def test_example(self):
        """The example symbol at DC and at pi."""
        assert sbt_ilc.symbol_value(EXAMPLE_BAND, 0.0) == pytest.approx(0.9955)
        assert sbt_ilc.symbol_value(EXAMPLE_BAND, np.pi) == pytest.approx(-0.9845)

    def test_vectorized(self):
        """symbol_value evaluates a whole grid at once."""
        theta = np.linspace(0.0, np.pi, 5)
        values = sbt_ilc.symbol_value([0.5, 0.25], theta)
        np.testing.assert_allclose(values, 0.5 + 0.5 * np.cos(theta))


class TestHinfCheck:
    def test_example(self):
        """The example symbol peaks at 0.9955 at DC and is certified."""
        result = sbt_ilc.hinf_check(EXAMPLE_BAND)
        assert result.sup == pytest.approx(0.9955)
        assert result.argmax == 0.0
        assert result.stable and result.certified
        assert result.slack == pytest.approx(np.pi * 0.495 / 2047)

    def test_unpacks(self):
        """The result unpacks as (sup, stable)."""
        sup, stable = sbt_ilc.hinf_check(EXAMPLE_BAND, 64)
        assert stable
        assert sup == pytest.approx(0.9955)

    def test_divergent_band(self):
        """The normalized alpha = 2.2 band peaks at 1.2 at theta = pi."""
        result = sbt_ilc.hinf_check(DIVERGENT_BAND)
        assert result.sup == pytest.approx(1.2, abs=1e-4)
        assert result.argmax == pytest.approx(np.pi)
        assert not result.stable

    def test_not_certified_near_one(self):
        """A grid sup just below 1 is not certified when the slack covers the gap."""
        result = sbt_ilc.hinf_check([0.0, 0.4999], 16)
        assert result.stable
        assert not result.certified

    def test_refine_finds_interior_peak(self):
        """Refinement finds a peak that falls between grid points."""
        band = [0.5, 0.1, -0.35]
        coarse = sbt_ilc.hinf_check(band, 8)
        fine = sbt_ilc.hinf_check(band, 8, refine=True)
        dense = np.max(np.abs(sbt_ilc.symbol_value(band, np.linspace(0, np.pi, 200001))))
        assert coarse.sup <= fine.sup
        assert fine.sup == pytest.approx(dense, abs=1e-9)

    @given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=6), st.integers(2, 200))
    @settings(max_examples=100, deadline=None)
    def test_slack_bounds_continuous_sup(self, band, grid_size):
        """The grid sup plus its slack bounds the continuous sup."""
        result = sbt_ilc.hinf_check(band, grid_size)
        # the fine grid contains every coarse grid point
        fine = np.linspace(0, np.pi, 100 * (grid_size - 1) + 1)
        dense = np.max(np.abs(sbt_ilc.symbol_value(band, fine)))
        assert result.sup <= dense + 1e-12
        assert dense <= result.sup + result.slack + 1e-12

    def test_grid_too_small(self):
        """A one-point grid is rejected."""
        with pytest.raises(ValueError):
            sbt_ilc.hinf_check(EXAMPLE_BAND, 1)


# =============================================================================
# Closed-form eigenvalues
# =============================================================================

class TestCirculantEigenvalues:
    @pytest.mark.parametrize("seed", range(50))
    def test_matches_dense(self, seed):
        """Circulant eigenvalues agree with the dense circulant."""
        rng = np.random.default_rng(seed)
        band = random_band(rng)
        n = 2 * (band.size - 1) + 1 + int(rng.integers(0, 20))
        dense = sbt_ilc.SBTMatrix(band, n).circulant()
        np.testing.assert_allclose(np.sort(sbt_ilc.circulant_eigenvalues(band, n)),
                                   np.linalg.eigvalsh(dense), atol=1e-12)

    def test_symbol_on_dft_grid(self):
        """Circulant eigenvalues are the symbol at the DFT frequencies."""
        band = [0.3, -0.2, 0.1]
        n = 12
        theta = 2 * np.pi * np.arange(n) / n
        np.testing.assert_allclose(sbt_ilc.circulant_eigenvalues(band, n),
                                   sbt_ilc.symbol_value(band, theta), atol=1e-14)

    @pytest.mark.parametrize("seed", range(10))
    def test_radius_approaches_symbol_sup(self, seed):
        """The DFT grid is within pi/n of the peak, so the gap is O(1/n^2)."""
        rng = np.random.default_rng(seed)
        band = random_band(rng, int(rng.integers(1, 5)))
        sup = sbt_ilc.hinf_check(band, 4096, refine=True).sup
        curvature = np.sum(np.arange(band.size) ** 2 * np.abs(band))
        for n in (64, 256, 1024):
            radius = np.max(np.abs(sbt_ilc.circulant_eigenvalues(band, n)))
            assert radius <= sup + curvature * (np.pi / 4095) ** 2 + 1e-12
            assert sup - radius <= curvature * (np.pi / n) ** 2 + 1e-12

    def test_too_small(self):
        """The circulant needs n > 2 r."""
        with pytest.raises(ValueError):
            sbt_ilc.circulant_eigenvalues([1.0, 0.5, 0.25], 4)


class TestTridiagonalEigenvalues:
    @pytest.mark.parametrize("seed", range(50))
    def test_matches_dense(self, seed):
        """The closed-form cosine eigenvalues match eigvalsh up to n = 100."""
        rng = np.random.default_rng(seed)
        a0, a1 = rng.uniform(-1.0, 1.0, 2)
        n = int(rng.integers(1, 101))
        expected = np.linalg.eigvalsh(sbt_ilc.SBTMatrix([a0, a1], n).todense())
        np.testing.assert_allclose(np.sort(sbt_ilc.tridiagonal_eigenvalues(a0, a1, n)), expected,
                                   atol=1e-12)

    def test_example_three(self):
        """The 3 by 3 example peaks at 0.0055 + 0.99 cos(pi / 4)."""
        values = sbt_ilc.tridiagonal_eigenvalues(*EXAMPLE_BAND, 3)
        assert np.max(np.abs(values)) == pytest.approx(0.0055 + 0.99 * np.cos(np.pi / 4))


# =============================================================================
# Spectral radius
# =============================================================================

class TestSpectralRadius:
    @pytest.mark.parametrize("method", ["lapack", "bisection"])
    def test_identity(self, method):
        """The identity has radius 1 by either method."""
        assert sbt_ilc.spectral_radius(sbt_ilc.SBTMatrix([1.0], 7), method) == pytest.approx(1.0)
        assert sbt_ilc.spectral_radius(np.eye(4), method) == pytest.approx(1.0)

    @pytest.mark.parametrize("method", ["lapack", "bisection"])
    def test_example_three(self, method):
        """Both methods give 0.7055 for the 3 by 3 example."""
        rho = sbt_ilc.spectral_radius(sbt_ilc.SBTMatrix(EXAMPLE_BAND, 3), method)
        assert rho == pytest.approx(0.7055, abs=1e-4)

    def test_example_large(self, example_fp, unity):
        """A2 stays below the symbol sup while A1 drifts to 1."""
        a2 = sbt_ilc.build_transition(example_fp, EXAMPLE_ALPHA, unity, unity, 500)
        a1 = sbt_ilc.build_transition(example_fp, EXAMPLE_ALPHA, unity, unity, 500, padded=False)
        rho2 = sbt_ilc.spectral_radius(a2)
        assert rho2 < 0.9955
        assert rho2 == pytest.approx(0.0055 + 0.99 * np.cos(np.pi / 501))
        assert sbt_ilc.spectral_radius(a1) > 0.9999

    @pytest.mark.parametrize("seed", range(30))
    def test_bisection_matches_lapack(self, seed):
        """Sturm bisection agrees with LAPACK on random bands."""
        rng = np.random.default_rng(seed)
        m = sbt_ilc.SBTMatrix(random_band(rng), int(rng.integers(1, 60)))
        scale = max(1.0, np.abs(m.band).sum())
        assert sbt_ilc.spectral_radius(m, "bisection") == pytest.approx(
            sbt_ilc.spectral_radius(m, "lapack"), abs=1e-10 * scale)

    def test_dense_symmetric(self):
        """Dense symmetric matrices are reduced to tridiagonal form first."""
        rng = np.random.default_rng(3)
        x = rng.standard_normal((8, 8))
        s = x + x.T
        expected = np.max(np.abs(np.linalg.eigvalsh(s)))
        assert sbt_ilc.spectral_radius(s) == pytest.approx(expected)
        assert sbt_ilc.spectral_radius(s, "bisection") == pytest.approx(expected, abs=1e-10)

    def test_rejects_asymmetric(self):
        """A nonsymmetric dense matrix raises AsymmetryError."""
        with pytest.raises(sbt_ilc.AsymmetryError):
            sbt_ilc.spectral_radius(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_unknown_method(self):
        """Unknown eigenvalue methods are rejected."""
        with pytest.raises(ValueError):
            sbt_ilc.spectral_radius(np.eye(2), "power")

    def test_bisection_extremes(self):
        """The 3 by 3 tridiagonal (2, -1) has eigenvalues 2 -+ sqrt(2)."""
        lo, hi = eigen.bisection_extremes([2.0, 2.0, 2.0], [-1.0, -1.0])
        assert lo == pytest.approx(2.0 - np.sqrt(2.0), abs=1e-14)
        assert hi == pytest.approx(2.0 + np.sqrt(2.0), abs=1e-14)

    def test_general_radius(self):
        """A triangular matrix has its diagonal as spectrum."""
        assert eigen.general_spectral_radius([[0.5, 3.0], [0.0, -0.25]]) == pytest.approx(0.5)


class TestGrayBound:
    @pytest.mark.parametrize("seed", range(100))
    def test_random_bands(self, seed):
        """The finite-n radius never exceeds the symbol sup."""
        rng = np.random.default_rng(seed)
        band = random_band(rng, int(rng.integers(1, 5)))
        bound = sbt_ilc.gray_bound_check(band, int(rng.integers(2, 30)))
        assert not bound.degenerate
        assert bound.holds and bound
        assert bound.margin > 0

    def test_margin_shrinks_with_n(self):
        """The gap to the symbol sup closes as n grows."""
        margins = [sbt_ilc.gray_bound_check(EXAMPLE_BAND, n).margin for n in (5, 50, 500)]
        assert margins[0] > margins[1] > margins[2] > 0

    def test_degenerate_band(self, caplog):
        """A constant band makes the bound an equality and logs a warning."""
        with caplog.at_level(logging.WARNING, logger="sbt_ilc.analysis"):
            bound = sbt_ilc.gray_bound_check([0.5, 0.0], 10)
        assert bound.degenerate
        assert bound.holds
        assert bound.spectral_radius == pytest.approx(bound.symbol_sup)
        assert "constant band" in caplog.text


class TestMonotonicity:
    def test_example(self):
        """The example band has 1-norm 0.9955 and is monotonic."""
        one_norm, monotonic = sbt_ilc.monotonicity_check(EXAMPLE_BAND)
        assert one_norm == pytest.approx(0.9955)
        assert monotonic

    def test_divergent(self):
        """The divergent band has 1-norm 1.2."""
        result = sbt_ilc.monotonicity_check(DIVERGENT_BAND)
        assert result.one_norm == pytest.approx(1.2, abs=1e-4)
        assert not result.monotonic

    def test_stable_but_not_monotonic(self):
        """Mixed signs: symbol sup below 1 while the 1-norm is not."""
        band = [0.2, 0.3, -0.15]
        assert sbt_ilc.hinf_check(band).sup < 1.0
        assert not sbt_ilc.monotonicity_check(band).monotonic

    @given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_one_norm_dominates(self, band):
        """The band 1-norm is never below the symbol sup."""
        result = sbt_ilc.monotonicity_check(band)
        assert result.one_norm >= sbt_ilc.hinf_check(band).sup - 1e-12


# =============================================================================
# Reports and sweeps
# =============================================================================

class TestAnalyze:
    def test_padded_example(self, example_fp, unity):
        """The padded example passes every check with radius below the sup."""
        t = sbt_ilc.build_transition(example_fp, EXAMPLE_ALPHA, unity, unity, 50)
        report = sbt_ilc.analyze(t)
        assert report.law == "modified" and report.n == 50
        assert report.true_stable and report.approx_stable and report.certified and report.monotonic
        assert report.spectral_radius < report.symbol_sup
        assert report.symbol_sup == pytest.approx(0.9955)
        assert report.circulant_radius == pytest.approx(0.9955)
        assert report.one_norm == pytest.approx(0.9955)

    def test_report_serialization(self, example_fp, unity):
        """Reports serialize to TOML and to one CSV row."""
        t = sbt_ilc.build_transition(example_fp, EXAMPLE_ALPHA, unity, unity, 20)
        report = sbt_ilc.analyze(t, grid_size=256)
        parsed = toml.loads(report.to_toml())
        assert parsed["law"] == "modified"
        assert parsed["grid_size"] == 256
        assert parsed["true_stable"] is True
        row = report.csv_row()
        assert len(row) == len(sbt_ilc.StabilityReport.CSV_FIELDS)
        fields = dict(zip(sbt_ilc.StabilityReport.CSV_FIELDS, row))
        assert fields["true_stable"] == "true"
        assert float(fields["spectral_radius"]) == pytest.approx(report.spectral_radius)

    def test_divergent(self, example_plant, unity):
        """The normalized alpha = 2.2 design is rejected by both checks."""
        law = sbt_ilc.ModifiedRepetitive(2.2, unity, unity, normalize=True)
        report = sbt_ilc.analyze(law.transition(example_plant, 200))
        assert not report.true_stable
        assert not report.approx_stable
        assert report.spectral_radius > 1.19

    def test_nonsymmetric_transition(self, example_plant):
        """Non-SBT transitions get a radius but no symbol fields."""
        report = sbt_ilc.analyze(sbt_ilc.Arimoto(0.5).transition(example_plant, 10))
        assert report.spectral_radius == pytest.approx(0.5)
        assert report.true_stable
        assert report.symbol_sup is None
        assert "symbol_sup" not in report.to_dict()
        fields = dict(zip(sbt_ilc.StabilityReport.CSV_FIELDS, report.csv_row()))
        assert fields["symbol_sup"] == ""

    def test_unpadded_prototype(self, example_plant):
        """Without padding the prototype radius exceeds the symbol sup."""
        report = sbt_ilc.analyze(sbt_ilc.Prototype(EXAMPLE_ALPHA).transition(example_plant, 100))
        assert report.law == "prototype"
        assert report.spectral_radius > 0.9955


class TestZeroPaddingSweep:
    SIZES = [3, 10, 50, 5]

    def test_rows(self, example_fp, unity):
        """Rows keep input order and follow the closed-form radius."""
        rows = sbt_ilc.zero_padding_sweep(example_fp, EXAMPLE_ALPHA, unity, unity, self.SIZES)
        assert [row.n for row in rows] == self.SIZES
        for row in rows:
            assert row.rho_A2 == pytest.approx(0.0055 + 0.99 * np.cos(np.pi / (row.n + 1)))
            assert row.rho_A2 < row.hinf_sup
            assert row.hinf_sup == pytest.approx(0.9955)
            assert row.rho_A1 >= row.rho_A2 - 1e-12

    def test_padding_effect_to_500(self, example_fp, unity):
        """Padded radius stays under the sup; the unpadded one crosses it and approaches 1."""
        sizes = [3, 10, 20, 50, 100, 200, 500]
        rows = sbt_ilc.zero_padding_sweep(example_fp, EXAMPLE_ALPHA, unity, unity, sizes, threads=0)
        assert all(row.rho_A2 < 0.9955 for row in rows)
        assert rows[-1].rho_A2 > 0.99
        assert any(row.rho_A1 > 0.9955 for row in rows)
        assert rows[-1].rho_A1 > 0.999

    @pytest.mark.parametrize("threads", [0, 2, 4])
    def test_threads_preserve_order(self, example_fp, unity, threads):
        """Worker threads do not change the order or the values."""
        serial = sbt_ilc.zero_padding_sweep(example_fp, EXAMPLE_ALPHA, unity, unity, self.SIZES)
        parallel = sbt_ilc.zero_padding_sweep(example_fp, EXAMPLE_ALPHA, unity, unity, self.SIZES,
                                              threads=threads)
        assert [row.n for row in parallel] == self.SIZES
        for p, s in zip(parallel, serial):
            assert p.rho_A1 == pytest.approx(s.rho_A1, rel=1e-12)
            assert p.rho_A2 == pytest.approx(s.rho_A2, rel=1e-12)

    def test_csv_row(self):
        """Sweep rows format as CSV strings."""
        row = sbt_ilc.SweepRow(3, 0.75, 0.5, 0.9955)
        assert row.csv_row() == ["3", "0.75", "0.5", "0.9955"]

    def test_empty(self, example_fp, unity):
        """An empty size list is rejected."""
        with pytest.raises(ValueError):
            sbt_ilc.zero_padding_sweep(example_fp, EXAMPLE_ALPHA, unity, unity, [])

    def test_threads_validation(self):
        """0 means one thread per CPU and negatives are rejected."""
        assert resolve_threads(3) == 3
        assert resolve_threads(0) >= 1
        with pytest.raises(ValueError):
            resolve_threads(-1)
