"""Stratified tenfold cross-validation and per-class precision/recall/F1."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .classifiers import Hyperparams, Kind, fit
from .errors import StratificationError
from .labels import N_CLASSES, GestureLabel
from .rng import SplitMix64, permutation
from .synth import LabeledDataset

N_FOLDS = 10


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    label: GestureLabel
    precision: float
    recall: float
    f1: float
    support: int


def precision_recall_f1(confusion) -> list[ClassMetrics]:
    """Per-class metrics from a confusion matrix (rows true, columns predicted).

    Any ratio with a zero denominator is reported as 0.
    """
    cm = np.asarray(confusion)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError("confusion matrix must be square")
    if np.any(cm < 0):
        raise ValueError("confusion counts must be nonnegative")
    out = []
    for c in range(cm.shape[0]):
        tp = cm[c, c]
        pred, true = cm[:, c].sum(), cm[c, :].sum()
        p = tp / pred if pred else 0.0
        r = tp / true if true else 0.0
        out.append(ClassMetrics(GestureLabel(c), float(p), float(r), f1_score(p, r), int(true)))
    return out


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


@dataclass(frozen=True, eq=False)
class EvalReport:
    kind: Kind
    per_class: list[ClassMetrics]
    accuracy: float
    confusion: np.ndarray

    @classmethod
    def from_confusion(cls, kind: Kind, cm: np.ndarray) -> "EvalReport":
        total = cm.sum()
        acc = float(np.trace(cm) / total) if total else 0.0
        return cls(Kind(kind), precision_recall_f1(cm), acc, cm)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "accuracy": self.accuracy,
            "per_class": [
                {"label": m.label.canonical, "precision": m.precision, "recall": m.recall,
                 "f1": m.f1, "support": m.support}
                for m in self.per_class
            ],
            "confusion": self.confusion.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def macro(self) -> tuple[float, float, float]:
        arr = np.array([(m.precision, m.recall, m.f1) for m in self.per_class])
        return tuple(float(v) for v in arr.mean(axis=0))


def stratified_folds(labels, seed: int, n_folds: int = N_FOLDS) -> np.ndarray:
    """Fold index per row.

    Each class's rows are shuffled (classes in code order, one shared stream)
    and dealt round-robin into the folds.
    """
    y = np.asarray(labels)
    counts = np.bincount(y, minlength=N_CLASSES)
    short = [GestureLabel(c).canonical for c in np.flatnonzero((counts > 0) & (counts < n_folds))]
    if short:
        raise StratificationError(f"fewer than {n_folds} rows for {', '.join(short)}")
    stream = SplitMix64(seed)
    fold = np.empty(y.size, dtype=np.int64)
    for c in np.flatnonzero(counts):
        idx = np.flatnonzero(y == c)
        idx = idx[permutation(idx.size, stream)]
        fold[idx] = np.arange(idx.size) % n_folds
    return fold


def cross_validate_10fold(kind: Kind | str, data: LabeledDataset, seed: int = 0,
                          hyperparams: Hyperparams | None = None) -> EvalReport:
    """Pooled confusion over ten stratified folds.

    Fold ``i`` trains with ``seed`` replaced by the i-th draw of a stream
    derived from the master seed, so folds are independent of run order.
    """
    hp = hyperparams or Hyperparams()
    folds = stratified_folds(data.labels, seed)
    fold_seeds = SplitMix64(seed ^ 0x5EED).u64s(N_FOLDS)
    classes = np.unique(data.labels)
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for i in range(N_FOLDS):
        test = folds == i
        model = fit(kind, data.features[~test], data.labels[~test],
                    replace(hp, seed=int(fold_seeds[i])), classes=classes)
        cm += confusion_matrix(data.labels[test], model.predict(data.features[test]))
    return EvalReport.from_confusion(kind, cm)
