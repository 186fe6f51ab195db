import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rglab.diagnostics import histogram, normality_summary, qq_normal, sturges_bins
from rglab.exceptions import DegenerateVarianceError, ParameterError

PHI_INV_075 = 0.6744897501960817  # mpmath


class TestHistogram:
    def test_example(self):
        h = histogram([1, 2, 3, 4], 2)
        assert h.edges.tolist() == [1, 2.5, 4]
        assert h.counts.tolist() == [2, 2]

    def test_degenerate(self):
        h = histogram([3.0] * 7, 4)
        assert h.counts[0] == 7 and h.total == 7
        assert h.edges[-1] - h.edges[0] == pytest.approx(3e-9)
        big = histogram([2.0**40] * 3, 18)
        assert big.counts[0] == 3 and big.total == 3

    def test_default_bins(self):
        assert sturges_bins(20000) == 16
        assert len(histogram(np.arange(20000.0)).counts) == 16

    def test_errors(self):
        with pytest.raises(ParameterError):
            histogram([], 3)
        with pytest.raises(ParameterError):
            histogram([1, 2], 0)
        with pytest.raises(ParameterError):
            histogram([1, np.nan], 2)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200), st.integers(1, 40))
    def test_mass_conserved(self, values, bins):
        h = histogram(values, bins)
        assert h.total == len(values)
        assert len(h.edges) == len(h.counts) + 1
        assert np.all(np.diff(h.edges) > 0)


class TestQQ:
    def test_two_points(self):
        qq = qq_normal([1, -1])
        assert qq[:, 0] == pytest.approx([-PHI_INV_075, PHI_INV_075], abs=1e-15)
        assert qq[:, 1].tolist() == [-1, 1]

    def test_normal_is_linear(self):
        qq = qq_normal(np.random.default_rng(0).standard_normal(100_000))
        slope, intercept = np.polyfit(qq[:, 0], qq[:, 1], 1)
        assert abs(slope - 1) < 0.02 and abs(intercept) < 0.01

    def test_cauchy_tails_diverge(self):
        x = np.random.default_rng(1).standard_cauchy(10_000)
        qq = qq_normal(x)
        sd = x.std()
        assert np.max(np.abs(qq[:, 1] - qq[:, 0] * sd)) > 3 * sd

    def test_too_short(self):
        with pytest.raises(ParameterError):
            qq_normal([1.0])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=100))
    def test_monotone(self, values):
        qq = qq_normal(values)
        assert np.all(np.diff(qq[:, 0]) > 0) and np.all(np.diff(qq[:, 1]) >= 0)


class TestNormality:
    def test_normal_sample(self):
        s = normality_summary(np.random.default_rng(2).standard_normal(100_000))
        assert abs(s.skewness) < 0.03
        assert abs(s.excess_kurtosis) < 0.06
        assert s.ks_distance < 0.006

    def test_uniform_kurtosis(self):
        s = normality_summary(np.random.default_rng(3).uniform(size=100_000))
        assert s.excess_kurtosis == pytest.approx(-1.2, abs=0.02)

    def test_ks_matches_definition(self):
        x = np.random.default_rng(4).standard_normal(50)
        s = normality_summary(x)
        from scipy.stats import norm
        z = np.sort((x - x.mean()) / x.std())
        cdf = norm.cdf(z)
        m = z.size
        direct = max(np.max(np.arange(1, m + 1) / m - cdf), np.max(cdf - np.arange(m) / m))
        assert s.ks_distance == pytest.approx(direct, abs=1e-15)

    def test_errors(self):
        with pytest.raises(ParameterError):
            normality_summary(np.arange(7.0))
        with pytest.raises(DegenerateVarianceError):
            normality_summary(np.ones(20))

    @settings(max_examples=50)
    @given(st.floats(-100, 100), st.floats(0.01, 100), st.integers(0, 2**31))
    def test_affine_equivariance(self, shift, scale, seed):
        # a large shift/scale ratio makes shift + scale * x itself lose digits
        # relative to the spread, which no implementation can undo
        assume(abs(shift) <= 100 * scale)
        x = np.random.default_rng(seed).standard_normal(200)
        a, b = normality_summary(x), normality_summary(shift + scale * x)
        assert b.mean == pytest.approx(shift + scale * a.mean, abs=1e-9 * (1 + abs(shift)))
        assert b.sd == pytest.approx(scale * a.sd, rel=1e-12)
        for key in ("skewness", "excess_kurtosis", "ks_distance"):
            assert abs(getattr(a, key) - getattr(b, key)) < 1e-12
