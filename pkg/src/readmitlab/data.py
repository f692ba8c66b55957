"""Dataset ingestion, min-max scaling, and stratified fold planning.

All arrays are numpy float64 / int64. Datasets are immutable once built and
safe to share across parallel fold workers.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

VALID_LABELS = (0, 1, 2)

DEFAULT_CLASS_NAMES = {0: "0 days", 1: "<30 days", 2: ">30 days"}


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix (rows = instances) plus integer class labels.

    Labels must already be encoded as 0/1/2; the readmission-day names are
    carried as metadata only.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_CLASS_NAMES))

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {feats.shape}")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise DataError(
                f"labels length {labels.shape} does not match {feats.shape[0]} feature rows"
            )
        bad = np.flatnonzero(~np.isin(labels, VALID_LABELS))
        if bad.size:
            raise DataError(f"label {labels[bad[0]]} at row {bad[0] + 1} is outside {{0,1,2}}")
        names = tuple(self.feature_names)
        if len(names) != feats.shape[1]:
            raise DataError(
                f"{len(names)} feature names for {feats.shape[1]} feature columns"
            )
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate feature names: {', '.join(dupes)}")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def classes(self) -> list[int]:
        return sorted(self.class_counts())

    def take(self, indices) -> "Dataset":
        """New Dataset restricted to the given row indices (order preserved)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names, dict(self.class_names))

    def select_features(self, columns) -> "Dataset":
        """New Dataset restricted to the given feature columns (order preserved)."""
        cols = list(columns)
        return Dataset(
            self.features[:, cols],
            self.labels,
            tuple(self.feature_names[c] for c in cols),
            dict(self.class_names),
        )


@dataclass(frozen=True)
class ScalingSpec:
    """Per-column min/max observed on a fit set; `degenerate` marks constant columns."""

    feature_names: tuple[str, ...]
    minima: np.ndarray
    maxima: np.ndarray

    def __post_init__(self):
        if np.any(self.maxima < self.minima):
            raise DataError("scaling spec has max < min")

    @property
    def degenerate_columns(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.maxima == self.minima))

    def to_json(self) -> str:
        payload = {
            name: {"min": float(lo), "max": float(hi)}
            for name, lo, hi in zip(self.feature_names, self.minima, self.maxima)
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScalingSpec":
        payload = json.loads(text)
        names = tuple(payload)
        lo = np.array([payload[n]["min"] for n in names], dtype=np.float64)
        hi = np.array([payload[n]["max"] for n in names], dtype=np.float64)
        return cls(names, lo, hi)


@dataclass(frozen=True)
class FoldPlan:
    """k disjoint test-index sets that exactly partition the instances."""

    k: int
    folds: tuple[np.ndarray, ...]
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return self.folds[fold]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.concatenate([self.folds[f] for f in range(self.k) if f != fold])


def load_dataset(path, label_column: str = "readmitted") -> Dataset:
    """Read a numeric CSV (header row, one 0/1/2 label column) into a Dataset.

    Errors name the offending file line so bad cells can be found quickly.
    """
    if not os.path.isfile(path):
        raise DataError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        names = tuple(h for i, h in enumerate(header) if i != label_idx)
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"{path}: duplicate feature names: {', '.join(dupes)}")
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path} line {line_no}: {len(row)} cells, expected {len(header)}"
                )
            try:
                values = [float(c) for i, c in enumerate(row) if i != label_idx]
            except ValueError:
                bad = next(
                    c for i, c in enumerate(row) if i != label_idx and not _is_float(c)
                )
                raise DataError(
                    f"{path} line {line_no}: non-numeric cell {bad!r}"
                ) from None
            raw_label = row[label_idx].strip()
            try:
                label = int(float(raw_label))
            except ValueError:
                raise DataError(
                    f"{path} line {line_no}: non-numeric label {raw_label!r}"
                ) from None
            if label not in VALID_LABELS or float(raw_label) != label:
                raise DataError(
                    f"{path} line {line_no}: label {raw_label} outside {{0,1,2}}"
                )
            rows.append(values)
            labels.append(label)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels), names)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def save_dataset_csv(data: Dataset, path, label_column: str = "readmitted") -> None:
    """Write a Dataset back out in the same CSV dialect load_dataset reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.feature_names) + [label_column])
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def dataset_sha256(path) -> str:
    """Content hash of the input CSV, recorded in every report."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def min_max_normalize(data: Dataset, spec: ScalingSpec | None = None) -> tuple[Dataset, ScalingSpec]:
    """Map each column to (x - min) / (max - min).

    With a supplied spec the same affine map is reused (fold-safe transform of
    test data); otherwise a fresh spec is fit on the input. Constant columns
    map to all zeros and are flagged on the spec.
    """
    if spec is None:
        spec = ScalingSpec(
            data.feature_names,
            data.features.min(axis=0),
            data.features.max(axis=0),
        )
    elif spec.feature_names != data.feature_names:
        raise DataError("scaling spec fitted on different feature names")
    span = spec.maxima - spec.minima
    safe_span = np.where(span == 0.0, 1.0, span)
    scaled = (data.features - spec.minima) / safe_span
    scaled[:, span == 0.0] = 0.0
    return Dataset(scaled, data.labels, data.feature_names, dict(data.class_names)), spec


def stratified_kfold(labels, k: int, seed: int) -> FoldPlan:
    """Shuffle indices within each class by seed, then deal round-robin into k folds.

    Per-fold class counts land within one instance of n_c / k, which keeps the
    fold class proportions within 1/|fold| of the global ones.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise DataError(
                f"class {int(cls)} has {members.size} members, fewer than k={k}"
            )
        shuffled = rng.permutation(members)
        # rotate the dealing start per class so overall fold sizes stay within 1
        for j, idx in enumerate(shuffled):
            buckets[(offset + j) % k].append(int(idx))
        offset = (offset + members.size) % k
    folds = tuple(np.array(sorted(b), dtype=np.int64) for b in buckets)
    for f in folds:
        f.setflags(write=False)
    return FoldPlan(k=k, folds=folds, seed=seed)


def stratified_subsample(data: Dataset, fraction: float, seed: int) -> Dataset:
    """Seeded per-class subsample keeping round(fraction * n_c) of each class."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return data
    rng = np.random.default_rng(seed)
    keep: list[np.ndarray] = []
    for cls in np.unique(data.labels):
        members = np.flatnonzero(data.labels == cls)
        n_keep = max(1, int(round(fraction * members.size)))
        keep.append(rng.permutation(members)[:n_keep])
    idx = np.sort(np.concatenate(keep))
    return data.take(idx)
