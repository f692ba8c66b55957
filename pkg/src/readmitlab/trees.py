"""Decision trees grown by exhaustive scan, plus boosted and bagged ensembles.

Split search is deterministic: candidate thresholds are midpoints between
consecutive distinct sorted feature values, the best split maximizes impurity
reduction, and ties resolve to the lower feature index, then the lower
threshold. Regression trees take a pluggable leaf-value function so the
boosting stage can install Newton-step leaf values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    value: float | int = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _midpoint(a: float, b: float) -> float:
    """Midpoint of two distinct floats, clamped so `x <= thr` keeps b right."""
    thr = a + 0.5 * (b - a)
    return a if thr >= b else thr


def _route(node: _Node, X: np.ndarray, out: np.ndarray, rows: np.ndarray) -> None:
    if node.is_leaf:
        out[rows] = node.value
        return
    go_left = X[rows, node.feature] <= node.threshold
    _route(node.left, X, out, rows[go_left])
    _route(node.right, X, out, rows[~go_left])


def _best_regression_split(X: np.ndarray, y: np.ndarray, rows: np.ndarray,
                           features: np.ndarray, min_leaf: int):
    """(reduction, feature, threshold, left_rows, right_rows) or None."""
    n = rows.size
    y_node = y[rows]
    sse_node = float(((y_node - y_node.mean()) ** 2).sum())
    best = None
    for f in features:
        order = np.argsort(X[rows, f], kind="stable")
        xs = X[rows[order], f]
        ys = y_node[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys**2)
        k = np.arange(1, n)  # left sizes
        sse_left = csq[:-1] - csum[:-1] ** 2 / k
        sse_right = (csq[-1] - csq[:-1]) - (csum[-1] - csum[:-1]) ** 2 / (n - k)
        reduction = sse_node - (sse_left + sse_right)
        valid = (xs[1:] > xs[:-1]) & (k >= min_leaf) & (n - k >= min_leaf)
        if not valid.any():
            continue
        reduction = np.where(valid, reduction, -np.inf)
        pos = int(np.argmax(reduction))
        if reduction[pos] <= 0.0:
            continue
        if best is None or reduction[pos] > best[0]:
            thr = _midpoint(float(xs[pos]), float(xs[pos + 1]))
            best = (float(reduction[pos]), int(f), thr,
                    rows[order[: pos + 1]], rows[order[pos + 1 :]])
    return best


def _best_gini_split(X: np.ndarray, onehot: np.ndarray, rows: np.ndarray,
                     features: np.ndarray, min_leaf: int):
    n = rows.size
    node_counts = onehot[rows].sum(axis=0)
    gini_node = float(n - (node_counts**2).sum() / n)  # n * gini impurity
    best = None
    for f in features:
        order = np.argsort(X[rows, f], kind="stable")
        xs = X[rows[order], f]
        counts = np.cumsum(onehot[rows[order]], axis=0)
        k = np.arange(1, n)
        left = counts[:-1]
        right = node_counts[None, :] - left
        score_left = k - (left**2).sum(axis=1) / k
        score_right = (n - k) - (right**2).sum(axis=1) / (n - k)
        reduction = gini_node - (score_left + score_right)
        valid = (xs[1:] > xs[:-1]) & (k >= min_leaf) & (n - k >= min_leaf)
        if not valid.any():
            continue
        reduction = np.where(valid, reduction, -np.inf)
        pos = int(np.argmax(reduction))
        if reduction[pos] <= 1e-12:
            continue
        if best is None or reduction[pos] > best[0]:
            thr = _midpoint(float(xs[pos]), float(xs[pos + 1]))
            best = (float(reduction[pos]), int(f), thr,
                    rows[order[: pos + 1]], rows[order[pos + 1 :]])
    return best


class RegressionTree:
    """Squared-error CART. leaf_value_fn maps the targets that reach a leaf to
    the leaf's value (default: their mean)."""

    def __init__(self, max_depth: int = 3, min_samples_leaf: int = 1,
                 leaf_value_fn=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.leaf_value_fn = leaf_value_fn or (lambda t: float(t.mean()))
        self.root: _Node | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RegressionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise DataError("cannot fit a tree on zero rows")
        all_features = np.arange(X.shape[1])

        def grow(rows: np.ndarray, depth: int) -> _Node:
            y_node = y[rows]
            if (depth >= self.max_depth or rows.size < 2 * self.min_samples_leaf
                    or np.all(y_node == y_node[0])):
                return _Node(value=self.leaf_value_fn(y_node))
            split = _best_regression_split(X, y, rows, all_features, self.min_samples_leaf)
            if split is None:
                return _Node(value=self.leaf_value_fn(y_node))
            _, f, thr, left_rows, right_rows = split
            return _Node(feature=f, threshold=thr,
                         left=grow(left_rows, depth + 1),
                         right=grow(right_rows, depth + 1))

        self.root = grow(np.arange(X.shape[0]), 0)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        _route(self.root, X, out, np.arange(X.shape[0]))
        return out


class ClassificationTree:
    """Gini-impurity CART; leaves hold the majority class (ties: lower id).

    features_per_split limits the features scanned at each node: an int, the
    string "sqrt", or "all". Subsets are drawn from the rng in node order
    (left subtree first), so a seeded rng makes the tree reproducible.
    """

    def __init__(self, max_depth: int | None = None, min_samples_leaf: int = 1,
                 features_per_split: int | str = "all",
                 rng: np.random.Generator | None = None):
        self.max_depth = math.inf if max_depth is None else max_depth
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.rng = rng
        self.root: _Node | None = None
        self.classes_: np.ndarray | None = None

    def _n_candidates(self, p: int) -> int:
        if self.features_per_split == "all":
            return p
        if self.features_per_split == "sqrt":
            return max(1, math.isqrt(p))
        m = int(self.features_per_split)
        if not 1 <= m <= p:
            raise ValueError(f"features_per_split {m} outside [1, {p}]")
        return m

    def fit(self, X: np.ndarray, y: np.ndarray) -> "ClassificationTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.shape[0] == 0:
            raise DataError("cannot fit a tree on zero rows")
        self.classes_ = np.unique(y)
        codes = np.searchsorted(self.classes_, y)
        onehot = np.eye(len(self.classes_), dtype=np.float64)[codes]
        p = X.shape[1]
        m = self._n_candidates(p)
        if m < p and self.rng is None:
            raise ValueError("features_per_split < n_features requires an rng")

        def pick_features() -> np.ndarray:
            if m == p:
                return np.arange(p)
            return np.sort(self.rng.choice(p, size=m, replace=False))

        def majority(rows: np.ndarray) -> int:
            counts = onehot[rows].sum(axis=0)
            return int(np.argmax(counts))  # first max = lowest class id

        def grow(rows: np.ndarray, depth: int) -> _Node:
            y_node = codes[rows]
            if (depth >= self.max_depth or rows.size < 2 * self.min_samples_leaf
                    or np.all(y_node == y_node[0])):
                return _Node(value=majority(rows))
            split = _best_gini_split(X, onehot, rows, pick_features(), self.min_samples_leaf)
            if split is None:
                return _Node(value=majority(rows))
            _, f, thr, left_rows, right_rows = split
            return _Node(feature=f, threshold=thr,
                         left=grow(left_rows, depth + 1),
                         right=grow(right_rows, depth + 1))

        self.root = grow(np.arange(X.shape[0]), 0)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0], dtype=np.int64)
        _route(self.root, X, out, np.arange(X.shape[0]))
        return self.classes_[out]


class RandomForest:
    """Bagged Gini trees; the forest votes, ties go to the lower class id.

    bootstrap=False trains every tree on the full sample, so a single tree
    with features_per_split="all" degenerates to one ClassificationTree.
    """

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_leaf: int = 1, features_per_split: int | str = "sqrt",
                 seed: int = 0, bootstrap: bool = True):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.seed = seed
        self.bootstrap = bootstrap
        self.trees_: list[ClassificationTree] = []
        self.classes_: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        rng = np.random.default_rng(self.seed)
        n = X.shape[0]
        self.trees_ = []
        for _ in range(self.n_trees):
            tree = ClassificationTree(
                max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf,
                features_per_split=self.features_per_split, rng=rng,
            )
            if self.bootstrap:
                rows = rng.integers(0, n, size=n)
                tree.fit(X[rows], y[rows])
            else:
                tree.fit(X, y)
            self.trees_.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((np.asarray(X).shape[0], len(self.classes_)))
        lookup = {c: i for i, c in enumerate(self.classes_)}
        for tree in self.trees_:
            pred = tree.predict(X)
            cols = np.array([lookup[c] for c in pred])
            votes[np.arange(len(cols)), cols] += 1.0
        return votes / len(self.trees_)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def _node_to_dict(node: _Node) -> dict:
    if node.is_leaf:
        return {"value": node.value}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(payload: dict) -> _Node:
    if "value" in payload:
        return _Node(value=payload["value"])
    return _Node(feature=int(payload["feature"]), threshold=float(payload["threshold"]),
                 left=_node_from_dict(payload["left"]),
                 right=_node_from_dict(payload["right"]))


def _newton_leaf_factory(n_classes: int):
    """Leaf value for deviance boosting, from the residuals reaching the leaf.

    For residual r = y_onehot - p the Newton step is
    sum(r) / sum(|r| * (1 - |r|)), scaled by (K-1)/K for K > 2 classes.
    """
    scale = 1.0 if n_classes == 2 else (n_classes - 1.0) / n_classes

    def leaf(residuals: np.ndarray) -> float:
        num = residuals.sum()
        den = (np.abs(residuals) * (1.0 - np.abs(residuals))).sum()
        if den <= 0.0:
            return 0.0
        return float(scale * num / den)

    return leaf


class GradientBoostedClassifier:
    """Stagewise additive trees on the multinomial (or binomial) deviance.

    Scores start at the log class priors; each round fits one regression tree
    per class to the softmax residuals and adds learning_rate times its
    Newton-valued predictions. Two-class problems collapse to a single
    logistic score per round. train_deviance_ records the mean training
    deviance after every round.
    """

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1,
                 max_depth: int = 3, min_samples_leaf: int = 1):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.classes_: np.ndarray | None = None
        self.base_scores_: np.ndarray | None = None
        self.trees_: list[list[RegressionTree]] = []
        self.train_deviance_: list[float] = []

    def _softmax(self, scores: np.ndarray) -> np.ndarray:
        shifted = scores - scores.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoostedClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        n_classes = len(self.classes_)
        if n_classes == 0:
            raise DataError("cannot fit boosting on zero rows")
        if n_classes == 1:
            # Degenerate but legal: every prediction is the lone class.
            self.base_scores_ = np.zeros(1)
            self.trees_ = []
            self.train_deviance_ = []
            return self
        codes = np.searchsorted(self.classes_, y)
        n = X.shape[0]

        if n_classes == 2:
            return self._fit_binary(X, codes)

        onehot = np.eye(n_classes)[codes]
        priors = onehot.mean(axis=0)
        self.base_scores_ = np.log(priors)
        scores = np.tile(self.base_scores_, (n, 1))
        leaf_fn = _newton_leaf_factory(n_classes)
        self.trees_ = []
        self.train_deviance_ = []
        for _ in range(self.n_rounds):
            probs = self._softmax(scores)
            round_trees = []
            for k in range(n_classes):
                residual = onehot[:, k] - probs[:, k]
                tree = RegressionTree(self.max_depth, self.min_samples_leaf, leaf_fn)
                tree.fit(X, residual)
                scores[:, k] += self.learning_rate * tree.predict(X)
                round_trees.append(tree)
            self.trees_.append(round_trees)
            probs = self._softmax(scores)
            eps = np.finfo(float).tiny
            self.train_deviance_.append(
                float(-np.log(probs[np.arange(n), codes] + eps).mean())
            )
        return self

    def _fit_binary(self, X: np.ndarray, codes: np.ndarray) -> "GradientBoostedClassifier":
        n = X.shape[0]
        pos_rate = codes.mean()
        self.base_scores_ = np.array([float(np.log(pos_rate / (1.0 - pos_rate)))]) \
            if 0.0 < pos_rate < 1.0 else np.array([0.0])
        score = np.full(n, self.base_scores_[0])
        leaf_fn = _newton_leaf_factory(2)
        self.trees_ = []
        self.train_deviance_ = []
        for _ in range(self.n_rounds):
            p = 1.0 / (1.0 + np.exp(-score))
            residual = codes - p
            tree = RegressionTree(self.max_depth, self.min_samples_leaf, leaf_fn)
            tree.fit(X, residual)
            score += self.learning_rate * tree.predict(X)
            self.trees_.append([tree])
            p = 1.0 / (1.0 + np.exp(-score))
            eps = np.finfo(float).tiny
            like = np.where(codes == 1, p, 1.0 - p)
            self.train_deviance_.append(float(-np.log(like + eps).mean()))
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        if len(self.classes_) == 2:
            score = np.full(n, self.base_scores_[0])
            for (tree,) in self.trees_:
                score += self.learning_rate * tree.predict(X)
            return score[:, None]
        scores = np.tile(self.base_scores_, (n, 1))
        for round_trees in self.trees_:
            for k, tree in enumerate(round_trees):
                scores[:, k] += self.learning_rate * tree.predict(X)
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        scores = self.decision_scores(X)
        if len(self.classes_) == 2:
            p = 1.0 / (1.0 + np.exp(-scores[:, 0]))
            return np.column_stack([1.0 - p, p])
        return self._softmax(scores)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def to_dict(self) -> dict:
        """JSON-serializable snapshot of a fitted model."""
        if self.classes_ is None:
            raise ValueError("fit the model before serializing it")
        return {
            "classes": [int(c) for c in self.classes_],
            "base_scores": [float(s) for s in self.base_scores_],
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "trees": [[_node_to_dict(t.root) for t in round_trees]
                      for round_trees in self.trees_],
            "train_deviance": list(self.train_deviance_),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GradientBoostedClassifier":
        model = cls(n_rounds=len(payload["trees"]),
                    learning_rate=float(payload["learning_rate"]),
                    max_depth=int(payload["max_depth"]),
                    min_samples_leaf=int(payload["min_samples_leaf"]))
        model.classes_ = np.array(payload["classes"])
        model.base_scores_ = np.array(payload["base_scores"], dtype=np.float64)
        model.trees_ = []
        for round_payload in payload["trees"]:
            round_trees = []
            for tree_payload in round_payload:
                tree = RegressionTree(model.max_depth, model.min_samples_leaf)
                tree.root = _node_from_dict(tree_payload)
                round_trees.append(tree)
            model.trees_.append(round_trees)
        model.train_deviance_ = [float(d) for d in payload.get("train_deviance", [])]
        return model
