import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emgfusion.classifiers import (
    Hyperparams, Kind, best_split, fit, logistic_loss_grad, predict, predict_proba, softmax,
)
from emgfusion.errors import InsufficientClassData
from emgfusion.labels import GestureLabel

A, B = 0, 1


def blobs(seed, n=60, d=5, k=5, spread=2.0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % k
    centers = rng.normal(scale=spread, size=(k, d))
    x = centers[y] + rng.normal(size=(n, d))
    return x, y


# --- oracles ----------------------------------------------------------------

def nb_oracle_log_scores(x_train, y_train, q, floor=1e-9):
    """Class log-score from plain loops and a direct product of Gaussian pdfs."""
    out = {}
    n, d = len(x_train), len(x_train[0])
    for c in sorted(set(y_train)):
        rows = [x_train[i] for i in range(n) if y_train[i] == c]
        prod = 1.0
        for j in range(d):
            col = [r[j] for r in rows]
            mu = sum(col) / len(col)
            var = sum((v - mu) ** 2 for v in col) / (len(col) - 1) + floor
            prod *= math.exp(-((q[j] - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
        out[c] = math.log(len(rows) / n) + math.log(prod)
    return out


def knn_oracle(x_train, y_train, q, k):
    """All-pairs scan on population-standardised features."""
    n, d = len(x_train), len(x_train[0])
    means = [sum(r[j] for r in x_train) / n for j in range(d)]
    stds = [math.sqrt(sum((r[j] - means[j]) ** 2 for r in x_train) / n) or 1.0 for j in range(d)]

    def z(r):
        return [(r[j] - means[j]) / stds[j] for j in range(d)]

    zq = z(q)
    dists = sorted((math.dist(z(x_train[i]), zq), i) for i in range(n))[:k]
    votes, total = {}, {}
    for dist, i in dists:
        c = y_train[i]
        votes[c] = votes.get(c, 0) + 1
        total[c] = total.get(c, 0.0) + dist
    top = max(votes.values())
    tied = [c for c in votes if votes[c] == top]
    return min(tied, key=lambda c: (total[c] / votes[c], c))


# --- worked examples ----------------------------------------------------------

class TestGaussianNB:
    x = np.array([[0.0], [2.0], [10.0], [12.0]])
    y = np.array([A, A, B, B])

    def test_fit_means_and_variances(self):
        m = fit(Kind.GAUSSIAN_NB, self.x, self.y)
        assert m.model.means[A, 0] == pytest.approx(1.0)
        assert m.model.means[B, 0] == pytest.approx(11.0)
        assert m.model.vars[A, 0] == pytest.approx(2.0 + 1e-9, abs=1e-15)
        assert m.model.vars[B, 0] == pytest.approx(2.0 + 1e-9, abs=1e-15)

    def test_predict_and_proba(self):
        m = fit(Kind.GAUSSIAN_NB, self.x, self.y)
        assert predict(m, [1.0]) == GestureLabel(A)
        p = predict_proba(m, [1.0])
        assert p[A] > 0.99
        assert p.shape == (5,) and p[2:].sum() == 0.0

    def test_missing_class_rejected_when_required(self):
        with pytest.raises(InsufficientClassData):
            fit(Kind.GAUSSIAN_NB, self.x, self.y, classes=range(5))
        with pytest.raises(InsufficientClassData):
            fit(Kind.LDA, self.x, self.y, classes=[0, 1, 2])

    def test_zero_variance_feature_is_floored(self):
        x = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 5.0], [1.0, 6.0]])
        m = fit(Kind.GAUSSIAN_NB, x, [A, A, B, B])
        assert np.all(np.isfinite(predict_proba(m, [1.0, 0.5])))

    def test_matches_density_oracle(self):
        x, y = blobs(3, n=50, d=4)
        m = fit(Kind.GAUSSIAN_NB, x, y)
        xs, ys = x.tolist(), y.tolist()
        for q in xs:
            expected = nb_oracle_log_scores(xs, ys, q)
            got = m.model.log_scores(np.array([q]))[0]
            for c, v in expected.items():
                assert got[c] == pytest.approx(v, abs=1e-9)


class TestKNN:
    def test_memorises_at_k1(self):
        x, y = blobs(1)
        m = fit(Kind.KNN, x, y, Hyperparams(k=1))
        assert m.predict(x).tolist() == y.tolist()

    def test_three_neighbour_vote(self):
        x = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
        m = fit(Kind.KNN, x, [A, A, B], Hyperparams(k=3))
        assert predict(m, [0.5, 0.0]) == GestureLabel(A)
        np.testing.assert_allclose(predict_proba(m, [0.5, 0.0])[:2], [2 / 3, 1 / 3])

    def test_vote_fractions(self):
        x = np.array([[0.0], [0.1], [0.2], [0.3], [0.4], [100.0], [101.0]])
        m = fit(Kind.KNN, x, [0, 0, 0, 0, 1, 2, 2], Hyperparams(k=5))
        np.testing.assert_allclose(predict_proba(m, [0.0]), [0.8, 0.2, 0, 0, 0])

    def test_tie_broken_by_mean_distance(self):
        # two votes each; class 1's neighbours are closer on average
        x = np.array([[-3.0], [3.5], [1.0], [-1.2], [50.0]])
        m = fit(Kind.KNN, x, [0, 0, 1, 1, 2], Hyperparams(k=4))
        assert predict(m, [0.0]) == GestureLabel(1)

    def test_tie_broken_by_class_code(self):
        x = np.array([[-1.0], [1.0]])
        m = fit(Kind.KNN, x, [3, 2], Hyperparams(k=2))
        assert predict(m, [0.0]) == GestureLabel(2)

    def test_matches_brute_force_scan(self):
        x, y = blobs(5, n=80, d=4, spread=1.0)
        rng = np.random.default_rng(6)
        queries = rng.normal(scale=2.0, size=(100, 4))
        m = fit(Kind.KNN, x, y, Hyperparams(k=5))
        got = m.predict(queries).tolist()
        xs, ys = x.tolist(), y.tolist()
        assert got == [knn_oracle(xs, ys, q, 5) for q in queries.tolist()]


class TestLDA:
    def test_midpoint_boundary(self):
        x = np.array([[-1.0], [1.0], [9.0], [11.0]])
        m = fit(Kind.LDA, x, [A, A, B, B])
        assert predict(m, [4.9]) == GestureLabel(A)
        assert predict(m, [5.1]) == GestureLabel(B)


class TestLogisticRegression:
    def test_zero_weights_uniform(self):
        x, y = blobs(0)
        m = fit(Kind.LOGISTIC_REGRESSION, x, y, Hyperparams(epochs=0))
        np.testing.assert_allclose(predict_proba(m, x[0]), [0.2] * 5)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        xb = np.hstack([rng.normal(size=(10, 4)), np.ones((10, 1))])
        yoh = np.eye(5)[rng.integers(0, 5, 10)]
        w = rng.normal(scale=0.5, size=(5, 5))
        _, grad = logistic_loss_grad(w, xb, yoh, 1e-2)
        h = 1e-6
        fd = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            wp, wm = w.copy(), w.copy()
            wp[idx] += h
            wm[idx] -= h
            fd[idx] = (logistic_loss_grad(wp, xb, yoh, 1e-2)[0] - logistic_loss_grad(wm, xb, yoh, 1e-2)[0]) / (2 * h)
        assert np.linalg.norm(fd - grad) / np.linalg.norm(grad) < 1e-4
        np.testing.assert_allclose(grad, fd, rtol=1e-4, atol=1e-8)

    def test_learns_blobs(self):
        x, y = blobs(2, spread=4.0)
        m = fit(Kind.LOGISTIC_REGRESSION, x, y)
        assert (m.predict(x) == y).mean() > 0.9


class TestDecisionTree:
    def test_single_class_is_leaf(self):
        x, _ = blobs(0, n=10)
        m = fit(Kind.DECISION_TREE, x, [GestureLabel.WAVE_OUT] * 10)
        assert m.model.depth == 0
        assert np.all(m.predict(np.random.default_rng(0).normal(size=(20, 5))) == 2)

    def test_zero_training_error_unlimited_depth(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(120, 6))
        y = rng.integers(0, 5, 120)
        m = fit(Kind.DECISION_TREE, x, y, Hyperparams(max_depth=None))
        assert m.predict(x).tolist() == y.tolist()

    def test_xor_needs_zero_gain_split(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([0, 0, 1, 1])
        m = fit(Kind.DECISION_TREE, x, y, Hyperparams(max_depth=None))
        assert m.predict(x).tolist() == y.tolist()

    def test_depth_limit(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(200, 3))
        y = rng.integers(0, 5, 200)
        assert fit(Kind.DECISION_TREE, x, y, Hyperparams(max_depth=3)).model.depth <= 3

    def test_split_midpoint_and_ties(self):
        # features 0 and 1 separate equally well: lower index wins
        x = np.array([[1.0, 1.0], [2.0, 2.0], [5.0, 5.0], [6.0, 6.0]])
        feature, threshold, imp = best_split(x, np.array([0, 0, 1, 1]))
        assert (feature, threshold, imp) == (0, 3.5, 0.0)

    def test_leaf_frequencies(self):
        x = np.array([[0.0], [0.0], [0.0], [1.0]])
        m = fit(Kind.DECISION_TREE, x, [0, 0, 1, 2])
        np.testing.assert_allclose(predict_proba(m, [0.0]), [2 / 3, 1 / 3, 0, 0, 0])


class TestLinearSVM:
    def test_learns_blobs(self):
        x, y = blobs(2, spread=4.0)
        m = fit(Kind.LINEAR_SVM, x, y)
        assert (m.predict(x) == y).mean() > 0.9

    def test_deterministic_per_seed(self):
        x, y = blobs(4)
        w1 = fit(Kind.LINEAR_SVM, x, y, Hyperparams(seed=3)).model.w
        w2 = fit(Kind.LINEAR_SVM, x, y, Hyperparams(seed=3)).model.w
        assert w1.tobytes() == w2.tobytes()


# --- cross-kind properties -----------------------------------------------------

@pytest.mark.parametrize("kind", list(Kind))
def test_proba_is_distribution_and_agrees_with_predict(kind):
    x, y = blobs(9, spread=1.0)
    m = fit(kind, x, y)
    q = np.random.default_rng(10).normal(scale=3.0, size=(50, 5))
    p = m.predict_proba(q)
    assert p.shape == (50, 5)
    assert np.all(p >= 0)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
    pred = m.predict(q)
    for row, label in zip(p, pred):
        assert row[label] == row.max()
        if kind is not Kind.KNN:
            assert label == int(np.argmax(row))


@pytest.mark.parametrize("kind", list(Kind))
def test_fit_is_deterministic(kind):
    x, y = blobs(7)
    q = np.random.default_rng(1).normal(size=(30, 5))
    p1 = fit(kind, x, y).predict_proba(q)
    p2 = fit(kind, x, y).predict_proba(q)
    assert p1.tobytes() == p2.tobytes()


@pytest.mark.parametrize("kind", [Kind.KNN, Kind.LDA, Kind.LOGISTIC_REGRESSION, Kind.LINEAR_SVM])
def test_standardisation_invariance(kind):
    hp = Hyperparams(epochs=100, svm_epochs=20)
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        x, y = blobs(seed, n=50, d=4, spread=1.5)
        q = rng.normal(scale=2.0, size=(25, 4))
        j = int(rng.integers(0, 4))
        a, b = rng.uniform(0.1, 10.0), rng.uniform(-50, 50)
        x2, q2 = x.copy(), q.copy()
        x2[:, j] = a * x2[:, j] + b
        q2[:, j] = a * q2[:, j] + b
        p1 = fit(kind, x, y, hp).predict(q)
        p2 = fit(kind, x2, y, hp).predict(q2)
        assert p1.tolist() == p2.tolist(), f"dataset {seed}"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_every_kind_predicts_valid_labels(seed):
    x, y = blobs(seed, n=30, d=3)
    q = np.random.default_rng(seed).normal(scale=5.0, size=(5, 3))
    for kind in Kind:
        pred = fit(kind, x, y, Hyperparams(epochs=50, svm_epochs=5)).predict(q)
        assert all(0 <= v < 5 for v in pred)


def test_softmax_handles_minus_inf():
    p = softmax(np.array([0.0, -np.inf, 1.0]))
    assert p[0, 1] == 0.0
    assert p.sum() == pytest.approx(1.0)


def test_rejects_non_finite_training():
    with pytest.raises(ValueError):
        fit(Kind.KNN, np.array([[np.nan]]), [0])
