import numpy as np
import pytest
from sklearn.base import clone
from sklearn.linear_model import LinearRegression
from sklearn.pipeline import make_pipeline

from rglab.correlation import pearson
from rglab.estimators import CorrelationSelector, EmpiricalBayesOverlap
from rglab.exceptions import ParameterError


@pytest.fixture
def sparse_data():
    g = np.random.default_rng(12)
    X = g.standard_normal((400, 50))
    y = X[:, [3, 17, 40]].sum(axis=1)
    return X, y


class TestCorrelationSelector:
    def test_selects_support(self, sparse_data):
        X, y = sparse_data
        sel = CorrelationSelector(3).fit(X, y)
        assert sel.support_.tolist() == [3, 17, 40]
        assert sel.get_support(indices=True).tolist() == [3, 17, 40]
        assert sel.transform(X).shape == (400, 3)
        assert sel.correlations_[17] == pytest.approx(pearson(X[:, 17], y), abs=1e-14)
        assert np.allclose(np.tanh(sel.fisher_), sel.correlations_)

    def test_sklearn_protocol(self, sparse_data):
        X, y = sparse_data
        sel = CorrelationSelector(5)
        assert sel.get_params() == {"n_features_to_select": 5}
        assert clone(sel).set_params(n_features_to_select=2).n_features_to_select == 2
        pipe = make_pipeline(CorrelationSelector(3), LinearRegression()).fit(X, y)
        assert pipe.score(X, y) == pytest.approx(1.0)

    def test_bad_size(self, sparse_data):
        X, y = sparse_data
        with pytest.raises(ParameterError):
            CorrelationSelector(51).fit(X, y)


class TestEmpiricalBayesOverlap:
    def test_fit_predict(self, sparse_data):
        X, y = sparse_data
        est = EmpiricalBayesOverlap(n_selected=3, mode="synthetic", scale="fisher",
                                    n_replicates=5, random_state=0).fit(X, y)
        assert est.sigma_q_ >= 0 and est.overlaps_.shape == (5,)
        assert 0 <= est.overlap_mean_ <= 1
        pred = est.predict([100, 100_000])
        assert pred.shape == (2,) and np.all((0 <= pred) & (pred <= 1))

    def test_reproducible(self, sparse_data):
        X, y = sparse_data
        a = EmpiricalBayesOverlap(n_selected=3, random_state=4).fit(X, y)
        b = clone(a).fit(X, y)
        assert np.array_equal(a.overlaps_, b.overlaps_)

    def test_validation(self, sparse_data):
        X, y = sparse_data
        with pytest.raises(ParameterError):
            EmpiricalBayesOverlap(mode="other").fit(X, y)
        with pytest.raises(ParameterError):
            EmpiricalBayesOverlap(n_selected=3).fit(X, y).predict([2])
