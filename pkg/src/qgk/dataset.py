"""Binary-labelled feature data: CSV ingestion, [0, 1] rescaling, a synthetic
overlapping-class generator and stratified k-fold assignment."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import norm

from .errors import DataError


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = np.array(self.features, dtype=float)
        y = np.array(self.labels, dtype=int)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DataError(f"shape mismatch: features {x.shape}, labels {y.shape}")
        if not np.isin(y, (-1, 1)).all():
            raise DataError("labels must be +1/-1")
        if x.shape[0] < 2 or len(np.unique(y)) < 2:
            raise DataError("single-class dataset")
        if not np.isfinite(x).all():
            raise DataError("non-finite feature values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> Dataset:
        return Dataset(self.features[idx], self.labels[idx])


def load_csv(path, label_column: str = "label") -> Dataset:
    """Read a header-first CSV. The lexicographically smaller label maps to -1."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], [r for r in rows[1:] if r]
    if label_column not in header:
        raise DataError(f"{path}: no '{label_column}' column")
    li = header.index(label_column)
    feats, raw_labels = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            feats.append([float(v) for i, v in enumerate(row) if i != li])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric cell") from None
        raw_labels.append(row[li].strip())
    classes = sorted(set(raw_labels))
    if len(classes) < 2:
        raise DataError("single-class dataset")
    if len(classes) > 2:
        raise DataError(f"expected two classes, found {len(classes)}")
    y = np.where(np.array(raw_labels) == classes[0], -1, 1)
    return Dataset(np.array(feats, dtype=float).reshape(len(body), -1), y)


def write_csv(dataset: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(dataset.num_features)] + ["label"])
        for x, y in zip(dataset.features, dataset.labels):
            w.writerow([format(v, ".17g") for v in x] + [int(y)])


def rescale_unit_interval(dataset: Dataset) -> Dataset:
    """Per-column min-max scaling; constant columns become 0.5 with a warning."""
    x = dataset.features
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    const = span == 0
    if const.any():
        warnings.warn(f"constant feature column(s) {np.flatnonzero(const).tolist()} set to 0.5", stacklevel=2)
    out = (x - lo) / np.where(const, 1.0, span)
    out[:, const] = 0.5
    return Dataset(np.clip(out, 0.0, 1.0), dataset.labels)


def bayes_accuracy_from_overlap(overlap: float) -> float:
    """overlap=1 means indistinguishable classes (accuracy 1/2); overlap->0 means separable."""
    if not 0.0 < overlap <= 1.0:
        raise ValueError(f"overlap must lie in (0, 1], got {overlap}")
    return 1.0 - overlap / 2.0


@dataclass(frozen=True)
class GaussianClasses:
    """Two unit-covariance Gaussians at +/- separation/2 along ``direction``."""

    direction: np.ndarray
    separation: float

    @classmethod
    def for_accuracy(cls, num_features: int, bayes_accuracy: float, rng: np.random.Generator):
        if not 0.5 <= bayes_accuracy < 1.0:
            raise ValueError(f"Bayes accuracy must lie in [0.5, 1), got {bayes_accuracy}")
        u = rng.standard_normal(num_features)
        u /= np.linalg.norm(u)
        return cls(u, 2.0 * norm.ppf(bayes_accuracy))

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        y = np.repeat([1, -1], [n // 2, n - n // 2])
        rng.shuffle(y)
        x = rng.standard_normal((n, self.direction.size)) + np.outer(y * self.separation / 2.0, self.direction)
        return x, y

    def bayes_predict(self, x: np.ndarray) -> np.ndarray:
        return np.where(x @ self.direction >= 0.0, 1, -1)


def synth_generate(n: int, num_features: int, overlap: float | None = None, seed: int = 0,
                   *, bayes_accuracy: float | None = None) -> Dataset:
    """Balanced two-class Gaussian data with a prescribed Bayes-optimal accuracy,
    min-max rescaled to [0, 1]. Give either ``overlap`` or ``bayes_accuracy``."""
    if n < 2 or n % 2:
        raise ValueError(f"sample count must be even and >= 2, got {n}")
    if num_features < 1:
        raise ValueError("need at least one feature")
    if (overlap is None) == (bayes_accuracy is None):
        raise ValueError("give exactly one of overlap / bayes_accuracy")
    acc = bayes_accuracy_from_overlap(overlap) if bayes_accuracy is None else float(bayes_accuracy)
    rng = np.random.default_rng(seed)
    model = GaussianClasses.for_accuracy(num_features, acc, rng)
    x, y = model.sample(n, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return rescale_unit_interval(Dataset(x, y))


@dataclass(frozen=True)
class FoldAssignment:
    fold_index: np.ndarray
    k: int

    def splits(self):
        """Yield (train_idx, test_idx) per fold."""
        for f in range(self.k):
            test = self.fold_index == f
            yield np.flatnonzero(~test), np.flatnonzero(test)


def kfold_split(dataset: Dataset, k: int, seed: int = 0) -> FoldAssignment:
    """Stratified assignment: each class is shuffled and dealt round-robin,
    continuing the dealer position across classes so fold sizes differ by <= 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    y = dataset.labels
    rng = np.random.default_rng(seed)
    folds = np.empty(y.size, dtype=int)
    offset = 0
    for cls in (-1, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise DataError(f"class {cls:+d} has {idx.size} samples, fewer than k={k}")
        idx = rng.permutation(idx)
        folds[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return FoldAssignment(folds, k)
