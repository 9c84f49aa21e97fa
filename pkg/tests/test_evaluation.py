import json

import numpy as np
import pytest

from emgfusion import synth
from emgfusion.classifiers import Hyperparams, Kind, fit
from emgfusion.errors import StratificationError
from emgfusion.evaluation import (
    EvalReport, confusion_matrix, cross_validate_10fold, f1_score, precision_recall_f1,
    stratified_folds,
)


@pytest.mark.parametrize("p, r, f1", [
    (0.82, 1.00, 0.9011),
    (0.67, 0.50, 0.5726),
    (1.00, 0.75, 0.8571),
])
def test_f1_examples(p, r, f1):
    assert f1_score(p, r) == pytest.approx(f1, abs=5e-5)


def test_f1_zero_denominator():
    assert f1_score(0.0, 0.0) == 0.0


def test_metrics_by_hand():
    cm = np.zeros((5, 5), dtype=int)
    cm[0, 0], cm[0, 1] = 3, 1  # class 0: 4 true, 3 right
    cm[1, 1], cm[1, 0] = 2, 2  # class 1: 4 true, 2 right
    m = precision_recall_f1(cm)
    assert m[0].precision == pytest.approx(3 / 5)
    assert m[0].recall == pytest.approx(3 / 4)
    assert m[0].f1 == pytest.approx(2 * 0.6 * 0.75 / 1.35)
    assert m[1].precision == pytest.approx(2 / 3)
    assert m[1].recall == pytest.approx(0.5)
    assert [x.support for x in m] == [4, 4, 0, 0, 0]
    assert m[2].precision == m[2].recall == m[2].f1 == 0.0


def test_confusion_rows_are_true_labels():
    cm = confusion_matrix([0, 0, 1], [0, 1, 1])
    assert cm[0].tolist() == [1, 1, 0, 0, 0]
    assert cm[1].tolist() == [0, 1, 0, 0, 0]


class TestFolds:
    def test_stratified_balanced(self):
        y = np.repeat(np.arange(5), 23)
        folds = stratified_folds(y, 1)
        for c in range(5):
            sizes = np.bincount(folds[y == c], minlength=10)
            assert sizes.max() - sizes.min() <= 1

    def test_deterministic_and_seeded(self):
        y = np.repeat(np.arange(5), 20)
        assert stratified_folds(y, 4).tolist() == stratified_folds(y, 4).tolist()
        assert stratified_folds(y, 4).tolist() != stratified_folds(y, 5).tolist()

    def test_too_few_rows(self):
        y = np.concatenate([np.repeat(np.arange(4), 10), [4] * 9])
        with pytest.raises(StratificationError):
            stratified_folds(y, 0)


def test_separable_knn1_is_perfect():
    y = np.repeat(np.arange(5), 12)
    x = (y[:, None] * 100.0 + np.arange(60)[:, None] * 0.01) * np.ones((1, 3))
    rep = cross_validate_10fold(Kind.KNN, synth.LabeledDataset(x, y), 0, Hyperparams(k=1))
    assert rep.accuracy == 1.0


@pytest.fixture(scope="module")
def small_data():
    return synth.generate_dataset(20, 3)


@pytest.mark.parametrize("kind", list(Kind))
def test_report_invariants(kind, small_data):
    rep = cross_validate_10fold(kind, small_data, 2)
    assert rep.confusion.sum() == len(small_data)
    assert sum(m.support for m in rep.per_class) == len(small_data)
    assert rep.confusion.sum(axis=1).tolist() == [m.support for m in rep.per_class]
    for m in rep.per_class:
        assert 0 <= m.precision <= 1 and 0 <= m.recall <= 1 and 0 <= m.f1 <= 1
    assert 0 <= rep.accuracy <= 1


def test_cv_deterministic(small_data):
    a = cross_validate_10fold(Kind.LINEAR_SVM, small_data, 5)
    b = cross_validate_10fold(Kind.LINEAR_SVM, small_data, 5)
    assert a.to_json() == b.to_json()


def test_report_json_shape(small_data):
    d = json.loads(cross_validate_10fold(Kind.GAUSSIAN_NB, small_data, 0).to_json())
    assert list(d) == ["kind", "accuracy", "per_class", "confusion"]
    assert d["kind"] == "GaussianNB"
    assert list(d["per_class"][0]) == ["label", "precision", "recall", "f1", "support"]
    assert d["per_class"][0]["label"] == "Fist"
    assert len(d["confusion"]) == 5 and len(d["confusion"][0]) == 5


def test_default_dataset_knn_against_loo_oracle():
    data = synth.generate_dataset(180, 0)
    rep = cross_validate_10fold(Kind.KNN, data, 0)
    # leave-one-out with the same classifier, computed independently of the folds
    correct = 0
    for i in range(len(data)):
        keep = np.arange(len(data)) != i
        m = fit(Kind.KNN, data.features[keep], data.labels[keep])
        correct += int(m.predict(data.features[i]) == data.labels[i])
    loo = correct / len(data)
    assert rep.accuracy >= 0.90
    assert loo >= 0.90
    assert abs(rep.accuracy - loo) < 0.05
