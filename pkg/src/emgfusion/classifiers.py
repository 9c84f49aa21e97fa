"""Six from-scratch gesture classifiers behind one ``fit``/``predict`` surface.

Every model scores all five gesture classes. Classes that never appear in
the training rows get probability zero from the class-conditional models
(GaussianNB, LDA, KNN, DecisionTree) and are simply never favoured by the
discriminative ones.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InsufficientClassData
from .labels import N_CLASSES, GestureLabel
from .rng import SplitMix64, permutation


class Kind(str, enum.Enum):
    KNN = "KNN"
    GAUSSIAN_NB = "GaussianNB"
    DECISION_TREE = "DecisionTree"
    LDA = "LDA"
    LOGISTIC_REGRESSION = "LogisticRegression"
    LINEAR_SVM = "LinearSVM"


@dataclass(frozen=True)
class Hyperparams:
    k: int = 5
    var_floor: float = 1e-9
    lda_ridge: float = 1e-6
    max_depth: int | None = 8
    min_split: int = 2
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4
    svm_lambda: float = 1e-4
    svm_epochs: int = 200
    svm_eta0: float = 0.1
    seed: int = 0


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        std = x.std(axis=0)
        # constant columns pass through unscaled
        std = np.where(std > 0, std, 1.0)
        return cls(x.mean(axis=0), std)

    @classmethod
    def identity(cls, d: int) -> "Standardizer":
        return cls(np.zeros(d), np.ones(d))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax; ``-inf`` entries map to exactly zero."""
    z = np.atleast_2d(z)
    zmax = z.max(axis=1, keepdims=True)
    e = np.exp(z - zmax)
    return e / e.sum(axis=1, keepdims=True)


def _one_hot(y: np.ndarray) -> np.ndarray:
    out = np.zeros((y.size, N_CLASSES))
    out[np.arange(y.size), y] = 1.0
    return out


def _with_bias(x: np.ndarray) -> np.ndarray:
    return np.hstack([x, np.ones((x.shape[0], 1))])


def _require_classes(y: np.ndarray, classes) -> None:
    if classes is None:
        return
    counts = np.bincount(y, minlength=N_CLASSES)
    missing = [GestureLabel(c).canonical for c in classes if counts[c] < 1]
    if missing:
        raise InsufficientClassData(f"no training rows for {', '.join(missing)}")


# --- individual models ------------------------------------------------------
# Each model sees already-standardised arrays and exposes ``proba(x)`` for a
# (n, d) matrix, returning (n, 5) rows that sum to one.


class KNNModel:
    def __init__(self, x: np.ndarray, y: np.ndarray, k: int):
        self.x, self.y = x, y
        self.k = max(1, min(k, y.size))

    def neighbours(self, q: np.ndarray):
        d2 = ((self.x - q) ** 2).sum(axis=1)
        idx = np.argsort(d2, kind="stable")[: self.k]
        return idx, np.sqrt(d2[idx])

    def _votes(self, q: np.ndarray):
        idx, dist = self.neighbours(q)
        votes = np.bincount(self.y[idx], minlength=N_CLASSES).astype(float)
        mean_dist = np.full(N_CLASSES, np.inf)
        for c in np.unique(self.y[idx]):
            mean_dist[c] = dist[self.y[idx] == c].mean()
        return votes, mean_dist

    def proba(self, x: np.ndarray) -> np.ndarray:
        return np.array([self._votes(q)[0] / self.k for q in x])

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = []
        for q in x:
            votes, mean_dist = self._votes(q)
            tied = np.flatnonzero(votes == votes.max())
            # smaller mean distance first, then lower class code
            out.append(min(tied, key=lambda c: (mean_dist[c], c)))
        return np.array(out, dtype=np.int64)


class GaussianNBModel:
    def __init__(self, x: np.ndarray, y: np.ndarray, var_floor: float):
        d = x.shape[1]
        self.means = np.zeros((N_CLASSES, d))
        self.vars = np.ones((N_CLASSES, d))
        self.log_prior = np.full(N_CLASSES, -np.inf)
        for c in range(N_CLASSES):
            xc = x[y == c]
            if len(xc) == 0:
                continue
            self.means[c] = xc.mean(axis=0)
            # a lone sample has no spread; the floor alone keeps it proper
            var = xc.var(axis=0, ddof=1) if len(xc) > 1 else np.zeros(d)
            self.vars[c] = var + var_floor
            self.log_prior[c] = np.log(len(xc) / y.size)

    def log_scores(self, x: np.ndarray) -> np.ndarray:
        diff = x[:, None, :] - self.means[None]
        ll = -0.5 * (np.log(2 * np.pi * self.vars)[None] + diff**2 / self.vars[None]).sum(axis=2)
        return ll + self.log_prior

    def proba(self, x):
        return softmax(self.log_scores(x))


class LDAModel:
    def __init__(self, x: np.ndarray, y: np.ndarray, ridge: float):
        n, d = x.shape
        present = np.unique(y)
        means = np.zeros((N_CLASSES, d))
        scatter = np.zeros((d, d))
        for c in present:
            xc = x[y == c]
            means[c] = xc.mean(axis=0)
            r = xc - means[c]
            scatter += r.T @ r
        cov = scatter / max(n - present.size, 1)
        cov += np.eye(d) * ridge * max(np.trace(cov) / d, 1e-12)
        prec = np.linalg.inv(cov)
        self.coef = means @ prec  # (5, d)
        self.intercept = -0.5 * np.einsum("cd,cd->c", self.coef, means)
        counts = np.bincount(y, minlength=N_CLASSES)
        with np.errstate(divide="ignore"):
            self.intercept = self.intercept + np.log(counts / n)

    def scores(self, x):
        return x @ self.coef.T + self.intercept

    def proba(self, x):
        return softmax(self.scores(x))


def logistic_loss_grad(w: np.ndarray, xb: np.ndarray, yoh: np.ndarray, l2: float):
    """Mean cross-entropy plus ``l2/2 * ||w||^2`` (bias row excluded) and its gradient.

    ``xb`` carries a trailing bias column; ``w`` is (d+1, 5).
    """
    n = xb.shape[0]
    p = softmax(xb @ w)
    loss = -np.sum(yoh * np.log(np.clip(p, 1e-300, None))) / n
    loss += 0.5 * l2 * np.sum(w[:-1] ** 2)
    grad = xb.T @ (p - yoh) / n
    grad[:-1] += l2 * w[:-1]
    return loss, grad


class LogisticModel:
    def __init__(self, x: np.ndarray, y: np.ndarray, hp: Hyperparams):
        xb, yoh = _with_bias(x), _one_hot(y)
        w = np.zeros((xb.shape[1], N_CLASSES))
        for _ in range(hp.epochs):
            _, g = logistic_loss_grad(w, xb, yoh, hp.l2)
            w -= hp.learning_rate * g
        self.w = w

    def proba(self, x):
        return softmax(_with_bias(x) @ self.w)


@numba.njit(cache=True)
def _svm_sgd(xb, targets, order, lam, eta0, epochs):
    n_cls, d = targets.shape[1], xb.shape[1]
    w = np.zeros((n_cls, d))
    t = 0
    for _ in range(epochs):
        for i in order:
            eta = eta0 / (1.0 + lam * eta0 * t)
            margins = w @ xb[i]
            for c in range(n_cls):
                active = targets[i, c] * margins[c] < 1.0
                for j in range(d - 1):
                    w[c, j] *= 1.0 - eta * lam
                if active:
                    for j in range(d):
                        w[c, j] += eta * targets[i, c] * xb[i, j]
            t += 1
    return w


class LinearSVMModel:
    """One-vs-rest hinge loss, per-sample subgradient steps.

    Step size at update t is ``eta0 / (1 + lambda * eta0 * t)``. The visiting
    order is one seeded permutation reused every epoch. Probabilities are a
    softmax over the five margins and are not calibrated.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, hp: Hyperparams):
        xb = _with_bias(x)
        targets = np.where(_one_hot(y) > 0, 1.0, -1.0)
        order = permutation(y.size, SplitMix64(hp.seed))
        self.w = _svm_sgd(xb, targets, order, hp.svm_lambda, hp.svm_eta0, hp.svm_epochs)

    def margins(self, x):
        return _with_bias(x) @ self.w.T

    def proba(self, x):
        return softmax(self.margins(x))


@dataclass
class _Node:
    counts: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self):
        return self.left is None

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.left.depth(), self.right.depth())


def _gini_from_counts(counts: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / n[..., None]
    return np.where(n > 0, 1.0 - np.sum(p * p, axis=-1), 0.0)


def best_split(x: np.ndarray, y: np.ndarray):
    """Lowest weighted-Gini split as ``(feature, threshold, impurity)`` or None.

    Thresholds are midpoints between consecutive distinct values; ties go to
    the lower feature index, then the lower threshold.
    """
    n = y.size
    yoh = _one_hot(y)
    total = yoh.sum(axis=0)
    best = None
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        boundaries = np.flatnonzero(xs[1:] != xs[:-1])  # split after position b
        if boundaries.size == 0:
            continue
        left = np.cumsum(yoh[order], axis=0)[boundaries]
        right = total - left
        nl = boundaries + 1.0
        imp = (nl * _gini_from_counts(left) + (n - nl) * _gini_from_counts(right)) / n
        b = int(np.argmin(imp))
        if best is None or imp[b] < best[2]:
            best = (j, 0.5 * (xs[boundaries[b]] + xs[boundaries[b] + 1]), float(imp[b]))
    return best


class DecisionTreeModel:
    def __init__(self, x: np.ndarray, y: np.ndarray, hp: Hyperparams):
        self.max_depth = hp.max_depth
        self.min_split = hp.min_split
        self.root = self._grow(x, y, 0)

    def _grow(self, x, y, depth) -> _Node:
        node = _Node(np.bincount(y, minlength=N_CLASSES).astype(float))
        pure = np.count_nonzero(node.counts) <= 1
        if pure or y.size < self.min_split or (self.max_depth is not None and depth >= self.max_depth):
            return node
        split = best_split(x, y)
        if split is None:
            return node
        node.feature, node.threshold, _ = split
        go_left = x[:, node.feature] <= node.threshold
        node.left = self._grow(x[go_left], y[go_left], depth + 1)
        node.right = self._grow(x[~go_left], y[~go_left], depth + 1)
        return node

    def _leaf(self, q) -> _Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if q[node.feature] <= node.threshold else node.right
        return node

    def proba(self, x):
        return np.array([(leaf := self._leaf(q)).counts / leaf.counts.sum() for q in x])

    @property
    def depth(self) -> int:
        return self.root.depth()


# --- public surface ---------------------------------------------------------

_STANDARDIZED = {Kind.KNN, Kind.LDA, Kind.LOGISTIC_REGRESSION, Kind.LINEAR_SVM}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: Kind
    model: object
    standardizer: Standardizer
    hyperparams: Hyperparams = field(default_factory=Hyperparams)

    def _prep(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        return self.standardizer.transform(np.atleast_2d(x)), single

    def predict_proba(self, x) -> np.ndarray:
        z, single = self._prep(x)
        p = self.model.proba(z)
        return p[0] if single else p

    def predict(self, x):
        z, single = self._prep(x)
        if isinstance(self.model, KNNModel):
            out = self.model.predict(z)
        else:
            # argmax keeps the first maximum, i.e. the lowest class code
            out = np.argmax(self.model.proba(z), axis=1)
        return GestureLabel(int(out[0])) if single else out


def fit(kind: Kind | str, features, labels, hyperparams: Hyperparams | None = None,
        classes=None) -> TrainedModel:
    """Train one classifier.

    ``classes`` lists codes that must each have at least one training row;
    GaussianNB and LDA raise :class:`InsufficientClassData` otherwise.
    """
    kind = Kind(kind)
    hp = hyperparams or Hyperparams()
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels, dtype=np.int64)
    if y.size == 0 or x.shape[0] != y.size:
        raise ValueError("need a nonempty training set with one label per row")
    if not np.all(np.isfinite(x)):
        raise ValueError("training features must be finite")
    if kind in (Kind.GAUSSIAN_NB, Kind.LDA):
        _require_classes(y, classes)
    std = Standardizer.fit(x) if kind in _STANDARDIZED else Standardizer.identity(x.shape[1])
    z = std.transform(x)
    if kind is Kind.KNN:
        model = KNNModel(z, y, hp.k)
    elif kind is Kind.GAUSSIAN_NB:
        model = GaussianNBModel(z, y, hp.var_floor)
    elif kind is Kind.LDA:
        model = LDAModel(z, y, hp.lda_ridge)
    elif kind is Kind.LOGISTIC_REGRESSION:
        model = LogisticModel(z, y, hp)
    elif kind is Kind.LINEAR_SVM:
        model = LinearSVMModel(z, y, hp)
    else:
        model = DecisionTreeModel(z, y, hp)
    return TrainedModel(kind, model, std, hp)


def predict(m: TrainedModel, x):
    return m.predict(x)


def predict_proba(m: TrainedModel, x):
    return m.predict_proba(x)
