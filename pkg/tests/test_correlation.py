import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rglab.correlation import (
    CLAMP_EPS,
    CorrelationVector,
    Dataset,
    correlate_all,
    fisher,
    fisher_inverse,
    pairwise_moments,
    pearson,
)
from rglab.exceptions import (
    CorrelationClampWarning,
    DegenerateVarianceError,
    DomainError,
    ShapeError,
)
from rglab.asymptotics import isserlis_pair_moments

from conftest import moment_cov_se

# mpmath, 40 digits
FISHER_01 = 0.10033534773107558
FISHER_09 = 1.4722194895832202


class TestFisher:
    def test_zero(self):
        assert fisher(0.0) == 0.0

    @pytest.mark.parametrize("h, expected", [(0.1, FISHER_01), (0.9, FISHER_09)])
    def test_values(self, h, expected):
        assert fisher(h) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("h", [1.0, -1.0, 1.5, np.nan])
    def test_domain(self, h):
        with pytest.raises(DomainError, match="fisher"):
            fisher(h)

    def test_array_domain_names_value(self):
        with pytest.raises(DomainError, match="1.25"):
            fisher(np.array([0.1, 1.25]))

    def test_inverse_values(self):
        assert fisher_inverse(0.0) == 0.0
        assert fisher_inverse(FISHER_01) == pytest.approx(0.1, rel=1e-14)
        assert fisher_inverse(-FISHER_09) == pytest.approx(-0.9, rel=1e-14)

    @pytest.mark.parametrize("z", [np.inf, -np.inf, np.nan])
    def test_inverse_domain(self, z):
        with pytest.raises(DomainError):
            fisher_inverse(z)

    def test_odd(self):
        h = np.linspace(-0.999, 0.999, 2001)
        assert np.array_equal(fisher(-h), -fisher(h))

    def test_roundtrip(self):
        z = np.linspace(-5, 5, 10001)
        back = fisher(fisher_inverse(z))
        nz = z != 0
        assert np.max(np.abs(back[nz] - z[nz]) / np.abs(z[nz])) < 1e-12
        assert back[~nz] == 0

    @given(st.floats(-0.999999, 0.999999))
    def test_strictly_increasing(self, h):
        assert fisher(min(h + 1e-7, 0.9999999)) >= fisher(h)


class TestPearson:
    def test_linear(self):
        assert pearson([1, 2, 3, 4], [2, 4, 6, 8]) == pytest.approx(1.0, abs=1e-15)
        assert pearson([1, 2, 3, 4], [-2, -4, -6, -8]) == pytest.approx(-1.0, abs=1e-15)

    def test_orthogonal(self):
        # means are 0 and the cross moment is 0
        assert pearson([1, 0, -1, 0], [0, 1, 0, -1]) == 0.0

    def test_matches_numpy(self, rng):
        x, y = rng.normal(size=(2, 50))
        assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-14)

    def test_errors(self):
        with pytest.raises(DegenerateVarianceError):
            pearson([1, 1, 1, 1], [1, 2, 3, 4])
        with pytest.raises(DegenerateVarianceError):
            pearson([1, 2, 3, 4], [5, 5, 5, 5])
        with pytest.raises(ShapeError):
            pearson([1, 2, 3, 4], [1, 2, 3])
        with pytest.raises(ShapeError):
            pearson([1, 2, 3], [1, 2, 3])

    @settings(max_examples=200)
    @given(
        arrays(np.float64, 12, elements=st.floats(-100, 100)),
        arrays(np.float64, 12, elements=st.floats(-100, 100)),
        st.floats(0.01, 100) | st.floats(-100, -0.01),
        st.floats(-100, 100),
    )
    def test_affine_invariance(self, x, y, a, b):
        if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
            return
        r = pearson(x, y)
        assert -1.0 <= r <= 1.0
        assert pearson(a * x + b, y) == pytest.approx(np.sign(a) * r, abs=1e-12)


class TestCorrelateAll:
    def test_column_equal_target_is_clamped(self, rng):
        X = rng.normal(size=(20, 3))
        with pytest.warns(CorrelationClampWarning):
            r = correlate_all(Dataset(X, X[:, 0].copy()))
        assert r.values[0] == 1.0 - CLAMP_EPS
        assert np.all(np.abs(r.values) < 1)

    def test_single_column(self, rng):
        X = rng.normal(size=(30, 1))
        y = rng.normal(size=30)
        r = correlate_all(Dataset(X, y))
        assert r.values.shape == (1,)
        assert r.values[0] == pytest.approx(pearson(X[:, 0], y), abs=1e-15)
        assert r.n == 30

    def test_constant_column_reports_index(self, rng):
        X = rng.normal(size=(10, 4))
        X[:, 2] = 3.0
        with pytest.raises(DegenerateVarianceError, match="column 2"):
            correlate_all(Dataset(X, rng.normal(size=10)))

    def test_blocks_cover_wide_data(self, rng):
        X = rng.normal(size=(8, 5000))
        y = rng.normal(size=8)
        r = correlate_all(Dataset(X, y))
        for i in (0, 2047, 2048, 4999):
            assert r.values[i] == pytest.approx(pearson(X[:, i], y), abs=1e-13)

    def test_column_order_independent(self, rng):
        X = rng.normal(size=(15, 30))
        y = rng.normal(size=15)
        perm = rng.permutation(30)
        a = correlate_all(Dataset(X, y)).values
        b = correlate_all(Dataset(X[:, perm], y)).values
        assert np.array_equal(a[perm], b)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(4, 30), st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_entrywise_pearson(self, n, k, seed):
        g = np.random.default_rng(seed)
        X = g.normal(size=(n, k))
        y = g.normal(size=n)
        r = correlate_all(Dataset(X, y))
        expected = [pearson(X[:, i], y) for i in range(k)]
        np.testing.assert_allclose(r.values, expected, atol=1e-13)

    def test_sparse_model_active_entries(self):
        from rglab.models import SparseLinearSpec, sample_sparse_dataset

        g = np.random.default_rng(11)
        data, support = sample_sparse_dataset(SparseLinearSpec(2000, 10), 500, g)
        r = correlate_all(data).values
        assert np.all(np.abs(r[support] - 1 / np.sqrt(10)) < 3 / np.sqrt(500))


class TestDataset:
    def test_rejects_small_n(self):
        with pytest.raises(ShapeError):
            Dataset(np.ones((3, 2)), np.ones(3))

    def test_rejects_nonfinite(self):
        X = np.zeros((5, 2))
        X[1, 1] = np.inf
        with pytest.raises(DomainError):
            Dataset(X, np.arange(5.0))

    def test_rejects_mismatch(self):
        with pytest.raises(ShapeError):
            Dataset(np.zeros((5, 2)), np.zeros(6))

    def test_correlation_vector_bounds(self):
        with pytest.raises(DomainError):
            CorrelationVector(np.array([0.2, 1.0]), 10)


class TestPairwiseMoments:
    @pytest.mark.filterwarnings("ignore::rglab.exceptions.CorrelationClampWarning")
    def test_same_column_standard_normal(self):
        g = np.random.default_rng(5)
        X = g.standard_normal((400_000, 2))
        m = pairwise_moments(Dataset(X, g.standard_normal(400_000)), 0, 0)
        # Var(X^2) = 2 for a standard normal
        assert m.c_xi2_xj2 == pytest.approx(2.0, abs=0.03)

    def test_target_equal_column(self, rng):
        X = rng.normal(size=(50, 2))
        with pytest.warns(CorrelationClampWarning):
            m = pairwise_moments(Dataset(X, X[:, 0].copy()), 0, 1)
        assert m.rho_i == 1.0 - CLAMP_EPS

    def test_uses_one_over_n(self, rng):
        X = rng.normal(size=(10, 2))
        y = rng.normal(size=10)
        m = pairwise_moments(Dataset(X, y), 0, 1)
        assert m.var_xi == pytest.approx(np.var(X[:, 0]), rel=1e-14)
        assert m.var_y == pytest.approx(np.var(y), rel=1e-14)

    def test_centres_internally(self, rng):
        X = rng.normal(size=(200, 2))
        y = rng.normal(size=200)
        a = pairwise_moments(Dataset(X, y), 0, 1)
        b = pairwise_moments(Dataset(X + 7.0, y - 3.0), 0, 1)
        for key, value in a.as_dict().items():
            assert getattr(b, key) == pytest.approx(value, rel=1e-9, abs=1e-12)

    def test_gaussian_triple_matches_isserlis(self):
        sigma = np.array([[1.0, 0.3, 0.5], [0.3, 2.0, 0.6], [0.5, 0.6, 1.5]])
        g = np.random.default_rng(8)
        Z = g.multivariate_normal(np.zeros(3), sigma, size=100_000)
        data = Dataset(Z[:, :2], Z[:, 2])
        emp = pairwise_moments(data, 0, 1)
        exact = isserlis_pair_moments(sigma)
        xi, xj, y = Z[:, 0] - Z[:, 0].mean(), Z[:, 1] - Z[:, 1].mean(), Z[:, 2] - Z[:, 2].mean()
        left = {"xi2": xi * xi, "y2": y * y, "xiy": xi * y}
        right = {"xj2": xj * xj, "y2": y * y, "xjy": xj * y}
        for ln, a in left.items():
            for rn, b in right.items():
                key = f"c_{ln}_{rn}"
                _, se = moment_cov_se(a, b)
                assert abs(getattr(emp, key) - getattr(exact, key)) < 5 * se, key

    def test_bad_index(self, rng):
        with pytest.raises(ShapeError):
            pairwise_moments(Dataset(rng.normal(size=(10, 2)), rng.normal(size=10)), 0, 2)
