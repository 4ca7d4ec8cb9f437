import numpy as np
import pytest
from sklearn.svm import SVC

from partmoo.svm import BAD, GOOD, KernelSpec, NotSplittable, SMOClassifier, decision_value, predict, train_svm


def test_separable_clusters_linear(rng):
    X = np.vstack([rng.normal(0, 0.3, (40, 2)), rng.normal(3, 0.3, (40, 2))])
    y = [BAD] * 40 + [GOOD] * 40
    model = train_svm(X, y, KernelSpec("linear"))
    assert [predict(model, x) for x in X] == y


def test_xor_rbf():
    X = [(0, 0), (1, 1), (0, 1), (1, 0)]
    y = [BAD, BAD, GOOD, GOOD]
    model = train_svm(X, y, KernelSpec("rbf", gamma=2.0), c_reg=10.0)
    assert [predict(model, x) for x in X] == y


def test_single_class_not_splittable():
    with pytest.raises(NotSplittable):
        train_svm([(0, 0), (1, 1)], [GOOD, GOOD])
    with pytest.raises(ValueError):
        train_svm([(0, 0)], [GOOD])


def test_hard_margin_1d_oracle():
    # max-margin separator of {0, 1} vs {3, 4} is x = 2 with margin 1: w = 1, b = -2
    model = train_svm([[0], [1], [3], [4]], [BAD, BAD, GOOD, GOOD], KernelSpec("linear"), c_reg=1e6,
                      tol=1e-8)
    assert model.coef_[0] == pytest.approx(1.0, abs=1e-6)
    assert model.intercept_ == pytest.approx(-2.0, abs=1e-6)
    assert decision_value(model, [2.0]) == pytest.approx(0.0, abs=1e-6)


def test_zero_decision_is_bad():
    model = train_svm([[0], [4]], [BAD, GOOD], KernelSpec("linear"), c_reg=1e6, tol=1e-10)
    model.intercept_ = -float(model.coef_[0]) * 2.0
    assert decision_value(model, [2.0]) == 0.0
    assert predict(model, [2.0]) == BAD


def test_dimension_mismatch():
    model = train_svm([(0, 0), (1, 1)], [BAD, GOOD])
    with pytest.raises(ValueError):
        decision_value(model, [0, 0, 0])


def test_rbf_far_away_tends_to_bias(rng):
    X = rng.random((30, 2))
    y = np.where(X[:, 0] > 0.5, GOOD, BAD)
    model = train_svm(X, y, KernelSpec("rbf", gamma=1.0))
    assert decision_value(model, [1e3, 1e3]) == pytest.approx(model.intercept_, abs=1e-12)


def test_deterministic(rng):
    X = rng.random((60, 3))
    y = (X.sum(axis=1) > 1.5).astype(int)
    a = SMOClassifier().fit(X, y)
    b = SMOClassifier().fit(X, y)
    np.testing.assert_array_equal(a.support_, b.support_)
    assert a.intercept_ == b.intercept_


@pytest.mark.parametrize("kernel", ["linear", "rbf", "poly"])
def test_agrees_with_libsvm(kernel):
    rng = np.random.default_rng(7)
    X = rng.random((150, 4))
    y = (np.sin(4 * X[:, 0]) + X[:, 1] - X[:, 2] ** 2 > 0.5).astype(int)
    ours = SMOClassifier(C=1.0, kernel=kernel, gamma=1.5, degree=3, coef0=1.0, tol=1e-6).fit(X, y)
    ref = SVC(C=1.0, kernel=kernel, gamma=1.5, degree=3, coef0=1.0, tol=1e-6).fit(X, y)
    probe = rng.random((500, 4))
    np.testing.assert_allclose(ours.decision_function(probe), ref.decision_function(probe), atol=1e-3)


def test_feature_scaling_to_bounds():
    X = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [4.0, 4.0]])
    y = [0, 1, 0, 1]
    model = SMOClassifier(kernel="linear", C=100.0, feature_lower=[0, 0], feature_upper=[4, 4]).fit(X, y)
    assert model.predict(X).tolist() == y


def test_one_hot_learns_nominal_codes():
    # good iff the code is 0 or 3: no threshold on the raw code separates this
    X = np.array([[c, d] for c in range(5) for d in range(5)], dtype=float)
    y = np.isin(X[:, 0], [0, 3]).astype(int)
    model = SMOClassifier(C=10.0, cardinalities=[5, 5]).fit(X, y)
    assert model.predict(X).tolist() == y.tolist()
    with pytest.raises(ValueError):
        SMOClassifier(cardinalities=[5]).fit(X, y)
