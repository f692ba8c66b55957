"""Confusion matrices, macro metrics, and stratified cross-validation.

Confusion matrix layout: rows are PREDICTED classes, columns are ACTUAL
classes. Per-class recall therefore divides the diagonal by its column sum
and precision by its row sum. The macro F score is the harmonic mean of the
macro precision and macro recall (not the mean of per-class F scores). Any
0/0 ratio is defined as 0.0.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Protocol

import numpy as np

from .data import Dataset, FoldPlan
from .errors import DataError
from .resample import ResamplePlan, apply_plan


def _ratio(num: float, den: float) -> float:
    return float(num / den) if den else 0.0


def harmonic_mean(a: float, b: float) -> float:
    return _ratio(2.0 * a * b, a + b)


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = instances predicted as class_ids[i] that are actually
    class_ids[j]."""

    counts: np.ndarray
    class_ids: tuple[int, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if counts.shape[0] != len(self.class_ids):
            raise ValueError("class_ids length must match matrix size")
        if (counts < 0).any():
            raise ValueError("confusion matrix counts must be nonnegative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_ids", tuple(int(c) for c in self.class_ids))

    @classmethod
    def from_labels(cls, actual: np.ndarray, predicted: np.ndarray,
                    class_ids: tuple[int, ...] | None = None) -> "ConfusionMatrix":
        actual = np.asarray(actual)
        predicted = np.asarray(predicted)
        if actual.shape != predicted.shape:
            raise ValueError("actual and predicted must have the same length")
        if class_ids is None:
            class_ids = tuple(int(c) for c in np.unique(np.concatenate([actual, predicted])))
        ids = np.asarray(class_ids)
        order = np.argsort(ids)

        def positions(labels: np.ndarray) -> np.ndarray:
            slot = np.searchsorted(ids[order], labels)
            bad = (slot >= len(ids)) | (ids[order][np.minimum(slot, len(ids) - 1)] != labels)
            if bad.any():
                raise DataError(
                    f"label {labels[bad][0]} outside class_ids {class_ids}"
                )
            return order[slot]

        k = len(class_ids)
        counts = np.zeros((k, k), dtype=np.int64)
        np.add.at(counts, (positions(predicted), positions(actual)), 1)
        return cls(counts, class_ids)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return _ratio(self.correct, self.total)

    def recall(self, class_id: int) -> float:
        i = self.class_ids.index(class_id)
        return _ratio(self.counts[i, i], self.counts[:, i].sum())

    def precision(self, class_id: int) -> float:
        i = self.class_ids.index(class_id)
        return _ratio(self.counts[i, i], self.counts[i, :].sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.class_ids != other.class_ids:
            raise ValueError("cannot add confusion matrices over different classes")
        return ConfusionMatrix(self.counts + other.counts, self.class_ids)


@dataclass(frozen=True)
class MetricsReport:
    """All values are fractions in [0, 1]; notes record degenerate ratios."""

    class_ids: tuple[int, ...]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f: float
    per_class_recall: dict[int, float]
    per_class_precision: dict[int, float]
    source: ConfusionMatrix | None = None
    notes: tuple[str, ...] = ()


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total == 0:
        raise DataError("cannot compute metrics of an empty confusion matrix")
    notes = []
    for i, c in enumerate(cm.class_ids):
        if cm.counts[:, i].sum() == 0:
            notes.append(f"class {c}: no actual instances; recall 0 by convention")
        if cm.counts[i, :].sum() == 0:
            notes.append(f"class {c}: never predicted; precision 0 by convention")
    recalls = {c: cm.recall(c) for c in cm.class_ids}
    precisions = {c: cm.precision(c) for c in cm.class_ids}
    macro_r = float(np.mean(list(recalls.values())))
    macro_p = float(np.mean(list(precisions.values())))
    return MetricsReport(
        class_ids=cm.class_ids,
        accuracy=cm.accuracy,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f=harmonic_mean(macro_p, macro_r),
        per_class_recall=recalls,
        per_class_precision=precisions,
        source=cm,
        notes=tuple(notes),
    )


class Model(Protocol):
    def fit(self, X: np.ndarray, y: np.ndarray): ...

    def predict(self, X: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class CvResult:
    fold_matrices: tuple[ConfusionMatrix, ...]
    fold_metrics: tuple[MetricsReport, ...]
    mean_metrics: MetricsReport
    pooled_matrix: ConfusionMatrix


def _mean_metrics(reports: tuple[MetricsReport, ...],
                  pooled: ConfusionMatrix) -> MetricsReport:
    classes = reports[0].class_ids
    notes = tuple(dict.fromkeys(n for r in reports for n in r.notes))
    return MetricsReport(
        class_ids=classes,
        accuracy=float(np.mean([r.accuracy for r in reports])),
        macro_precision=float(np.mean([r.macro_precision for r in reports])),
        macro_recall=float(np.mean([r.macro_recall for r in reports])),
        macro_f=float(np.mean([r.macro_f for r in reports])),
        per_class_recall={c: float(np.mean([r.per_class_recall[c] for r in reports]))
                          for c in classes},
        per_class_precision={c: float(np.mean([r.per_class_precision[c] for r in reports]))
                             for c in classes},
        source=pooled,
        notes=notes,
    )


def cross_validate(data: Dataset, folds: FoldPlan,
                   build_model: Callable[[int], Model],
                   resample_plan: ResamplePlan | None = None,
                   workers: int = 1) -> CvResult:
    """Fit build_model(fold_index) on each training split, score on the held-out
    fold, and average the per-fold metrics.

    Resampling, when requested, touches the training split only; the fold index
    is added to the plan seed so folds stay independent but reproducible.
    Folds run in a thread pool when workers > 1; results are ordered by fold,
    so the worker count never changes the outcome.
    """
    class_ids = tuple(int(c) for c in data.classes())

    def run_fold(i: int) -> ConfusionMatrix:
        train_ds = data.take(folds.train_indices(i))
        if resample_plan is not None:
            fold_plan = replace(resample_plan, seed=resample_plan.seed + i)
            train_ds = apply_plan(train_ds, fold_plan)
        test_ds = data.take(folds.test_indices(i))
        model = build_model(i)
        model.fit(train_ds.features, train_ds.labels)
        predicted = model.predict(test_ds.features)
        return ConfusionMatrix.from_labels(test_ds.labels, predicted, class_ids)

    indices = range(folds.k)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            matrices = tuple(pool.map(run_fold, indices))
    else:
        matrices = tuple(run_fold(i) for i in indices)

    fold_metrics = tuple(metrics(m) for m in matrices)
    pooled = matrices[0]
    for m in matrices[1:]:
        pooled = pooled + m
    return CvResult(matrices, fold_metrics, _mean_metrics(fold_metrics, pooled), pooled)


@dataclass(frozen=True)
class SweepRow:
    """One grid combination with its cross-validated mean metrics."""

    epochs: int
    learning_rate: float
    batch_size: int
    result: CvResult
    note: str = ""

    @property
    def accuracy(self) -> float:
        return self.result.mean_metrics.accuracy

    @property
    def macro_f(self) -> float:
        return self.result.mean_metrics.macro_f


def grid_sweep(data: Dataset, folds: FoldPlan,
               build_model: Callable[[int, int, float, int], Model],
               epochs_grid: tuple[int, ...], lr_grid: tuple[float, ...],
               batch_grid: tuple[int, ...],
               resample_plan: ResamplePlan | None = None,
               workers: int = 1,
               annotate: dict[tuple[int, float, int], str] | None = None) -> list[SweepRow]:
    """Cross-validate every (epochs, lr, batch) combination and rank the rows.

    build_model(fold, epochs, lr, batch) must return a fresh model. The
    returned rows are sorted by mean accuracy descending (stable, so grid
    order breaks ties); the first row is the winner. `annotate` attaches a
    note string to specific combinations.
    """
    if not (epochs_grid and lr_grid and batch_grid):
        raise ValueError("grid axes must be nonempty")
    annotate = annotate or {}
    rows = []
    for epochs in epochs_grid:
        for lr in lr_grid:
            for batch in batch_grid:
                result = cross_validate(
                    data, folds,
                    lambda fold, e=epochs, r=lr, b=batch: build_model(fold, e, r, b),
                    resample_plan=resample_plan, workers=workers,
                )
                rows.append(SweepRow(epochs, lr, batch, result,
                                     annotate.get((epochs, lr, batch), "")))
    rows.sort(key=lambda row: -row.accuracy)
    return rows
